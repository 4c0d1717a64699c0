#include "sepnet/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace sepnet {

namespace {

constexpr char magic[8] = {'S', 'E', 'P', 'N', 'E', 'T', 'C', 'K'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
    return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(n)));
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes, std::size_t limit) : bytes_(bytes), limit_(limit) {}

    void take(void* dst, std::size_t n) {
        if (pos_ + n > limit_) throw CheckpointCorruptError("checkpoint truncated at byte " + std::to_string(pos_));
        std::memcpy(dst, bytes_.data() + pos_, n);
        pos_ += n;
    }
    std::uint32_t u32() {
        std::uint32_t v;
        take(&v, 4);
        return v;
    }
    bool at_end() const { return pos_ == limit_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t limit_;
    std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> encode_checkpoint(const Network& net) {
    std::vector<std::uint8_t> out(std::begin(magic), std::end(magic));
    put_u32(out, checkpoint_version);
    const auto& layers = net.spec().layers;
    put_u32(out, static_cast<std::uint32_t>(layers.size()));
    for (const auto& l : layers) {
        put_u32(out, static_cast<std::uint32_t>(l.in_dim));
        put_u32(out, static_cast<std::uint32_t>(l.out_dim));
        out.push_back(l.activation == Activation::relu ? 0 : 1);
    }
    put_u32(out, static_cast<std::uint32_t>(net.params().size()));
    for (const auto& p : net.params()) {
        put_u32(out, static_cast<std::uint32_t>(p.rows()));
        put_u32(out, static_cast<std::uint32_t>(p.cols()));
        const auto* raw = reinterpret_cast<const std::uint8_t*>(p.data().data());
        out.insert(out.end(), raw, raw + p.size() * sizeof(double));
    }
    put_u32(out, crc_of(out.data(), out.size()));
    return out;
}

Network decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < sizeof magic + 8) throw CheckpointCorruptError("checkpoint too short");
    if (std::memcmp(bytes.data(), magic, sizeof magic) != 0) throw FormatError("not a checkpoint file (bad magic)");

    const std::size_t body = bytes.size() - 4;
    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, bytes.data() + body, 4);

    Reader in(bytes, body);
    char skip[sizeof magic];
    in.take(skip, sizeof skip);
    const std::uint32_t version = in.u32();
    if (version != checkpoint_version)
        throw CheckpointVersionError("checkpoint version " + std::to_string(version) + ", expected " +
                                     std::to_string(checkpoint_version));
    if (crc_of(bytes.data(), body) != stored_crc) throw CheckpointCorruptError("checkpoint checksum mismatch");

    NetworkSpec spec;
    const std::uint32_t n_layers = in.u32();
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        LayerSpec l;
        l.in_dim = in.u32();
        l.out_dim = in.u32();
        std::uint8_t act;
        in.take(&act, 1);
        if (act > 1) throw CheckpointCorruptError("unknown activation code " + std::to_string(act));
        l.activation = act == 0 ? Activation::relu : Activation::identity;
        spec.layers.push_back(l);
    }
    const std::uint32_t n_params = in.u32();
    std::vector<Matrix> params;
    for (std::uint32_t i = 0; i < n_params; ++i) {
        const std::uint32_t rows = in.u32();
        const std::uint32_t cols = in.u32();
        std::vector<double> values(std::size_t{rows} * cols);
        in.take(values.data(), values.size() * sizeof(double));
        try {
            params.emplace_back(rows, cols, std::move(values));
        } catch (const Error& e) {
            throw CheckpointCorruptError(std::string("checkpoint tensor ") + std::to_string(i) + ": " + e.what());
        }
    }
    if (!in.at_end()) throw CheckpointCorruptError("trailing bytes in checkpoint");
    try {
        return Network::from_params(std::move(spec), std::move(params));
    } catch (const Error& e) {
        throw CheckpointCorruptError(std::string("checkpoint describes an invalid network: ") + e.what());
    }
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
    const auto bytes = encode_checkpoint(net);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

Network restore_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_checkpoint(bytes);
}

} // namespace sepnet
