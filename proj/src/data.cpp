#include "sepnet/data.hpp"

#include "sepnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>

namespace sepnet {

namespace {

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08X", v);
    return buf;
}

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset, const char* what) {
    if (bytes.size() < offset + 4)
        throw IdxLengthError(std::string(what) + ": truncated header (" + std::to_string(bytes.size()) + " bytes)");
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace

void Dataset::validate() const {
    if (features.rows() != labels.size())
        throw DataError("dataset has " + std::to_string(features.rows()) + " feature rows but " +
                        std::to_string(labels.size()) + " labels");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
            throw DataError("label " + std::to_string(y) + " outside [0, " + std::to_string(n_classes) + ")");
    if (original_classes.size() != n_classes) throw DataError("class map size differs from class count");
    auto sorted = original_classes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw DataError("class map is not injective");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    if (indices.empty()) throw DataError("empty subset");
    Matrix f(indices.size(), dim());
    std::vector<int> y(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto src = features.row(indices[i]);
        std::copy(src.begin(), src.end(), f.row(i).begin());
        y[i] = labels[indices[i]];
    }
    return {std::move(f), std::move(y), n_classes, original_classes};
}

Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels) {
    const std::uint32_t img_magic = read_be32(images, 0, "image file");
    if (img_magic != idx_images_magic)
        throw IdxMagicError("image file: expected magic " + hex32(idx_images_magic) + ", found " + hex32(img_magic));
    const std::uint32_t lbl_magic = read_be32(labels, 0, "label file");
    if (lbl_magic != idx_labels_magic)
        throw IdxMagicError("label file: expected magic " + hex32(idx_labels_magic) + ", found " + hex32(lbl_magic));

    const std::uint32_t count = read_be32(images, 4, "image file");
    const std::uint32_t rows = read_be32(images, 8, "image file");
    const std::uint32_t cols = read_be32(images, 12, "image file");
    const std::uint32_t label_count = read_be32(labels, 4, "label file");
    if (count != label_count)
        throw IdxCountMismatch("image file holds " + std::to_string(count) + " images but label file holds " +
                               std::to_string(label_count) + " labels");
    if (count == 0 || rows == 0 || cols == 0) throw DataError("IDX files describe an empty dataset");

    const std::size_t d = std::size_t{rows} * cols;
    const std::size_t img_expected = 16 + std::size_t{count} * d;
    const std::size_t lbl_expected = 8 + std::size_t{count};
    if (images.size() != img_expected)
        throw IdxLengthError("image file: expected " + std::to_string(img_expected) + " bytes, found " +
                             std::to_string(images.size()));
    if (labels.size() != lbl_expected)
        throw IdxLengthError("label file: expected " + std::to_string(lbl_expected) + " bytes, found " +
                             std::to_string(labels.size()));

    Matrix f(count, d);
    auto out = f.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = images[16 + i] / 255.0;

    std::vector<int> y(count);
    int max_label = 0;
    for (std::size_t i = 0; i < count; ++i) {
        y[i] = labels[8 + i];
        max_label = std::max(max_label, y[i]);
    }
    const auto n_classes = static_cast<std::size_t>(max_label) + 1;
    std::vector<int> map(n_classes);
    std::iota(map.begin(), map.end(), 0);
    return {std::move(f), std::move(y), n_classes, std::move(map)};
}

Dataset read_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    const auto images = slurp(images_path);
    const auto labels = slurp(labels_path);
    try {
        return parse_idx(images, labels);
    } catch (const IdxMagicError& e) {
        throw IdxMagicError(images_path.string() + " / " + labels_path.string() + ": " + e.what());
    } catch (const IdxLengthError& e) {
        throw IdxLengthError(images_path.string() + " / " + labels_path.string() + ": " + e.what());
    }
}

IdxBytes encode_idx(const Dataset& ds, std::uint32_t rows, std::uint32_t cols) {
    if (std::size_t{rows} * cols != ds.dim())
        throw ShapeError("encode_idx: " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " images do not match feature width " + std::to_string(ds.dim()));
    IdxBytes out;
    put_be32(out.images, idx_images_magic);
    put_be32(out.images, static_cast<std::uint32_t>(ds.size()));
    put_be32(out.images, rows);
    put_be32(out.images, cols);
    out.images.reserve(16 + ds.features.size());
    for (double v : ds.features.data()) {
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("encode_idx: feature outside [0, 1]");
        out.images.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
    }
    put_be32(out.labels, idx_labels_magic);
    put_be32(out.labels, static_cast<std::uint32_t>(ds.size()));
    for (int y : ds.labels) {
        const int original = ds.original_classes.at(static_cast<std::size_t>(y));
        if (original < 0 || original > 255) throw DataError("encode_idx: label does not fit a byte");
        out.labels.push_back(static_cast<std::uint8_t>(original));
    }
    return out;
}

void write_idx(const Dataset& ds, std::uint32_t rows, std::uint32_t cols,
               const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    const IdxBytes bytes = encode_idx(ds, rows, cols);
    spit(images_path, bytes.images);
    spit(labels_path, bytes.labels);
}

std::filesystem::path mnist_dir(const std::filesystem::path& fallback) {
    if (const char* env = std::getenv("SEPNET_DATA_DIR"); env && *env) return env;
    return fallback;
}

MnistSplit load_mnist(const std::filesystem::path& dir) {
    return {read_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte"),
            read_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte")};
}

Dataset filter_classes(const Dataset& ds, std::span<const int> keep) {
    if (keep.empty()) throw DataError("filter_classes: empty class list");
    std::vector<int> remap(ds.n_classes, -1);
    std::vector<std::size_t> present(ds.n_classes, 0);
    for (int y : ds.labels) ++present[static_cast<std::size_t>(y)];
    std::vector<int> original;
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const int c = keep[k];
        if (c < 0 || static_cast<std::size_t>(c) >= ds.n_classes || present[static_cast<std::size_t>(c)] == 0)
            throw DataError("filter_classes: class " + std::to_string(c) + " is not present in the dataset");
        if (remap[static_cast<std::size_t>(c)] != -1)
            throw DataError("filter_classes: class " + std::to_string(c) + " listed twice");
        remap[static_cast<std::size_t>(c)] = static_cast<int>(k);
        original.push_back(ds.original_classes[static_cast<std::size_t>(c)]);
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (remap[static_cast<std::size_t>(ds.labels[i])] != -1) rows.push_back(i);

    Dataset out = ds.subset(rows);
    for (int& y : out.labels) y = remap[static_cast<std::size_t>(y)];
    out.n_classes = keep.size();
    out.original_classes = std::move(original);
    return out;
}

Dataset synth_blobs(std::size_t n_classes, std::size_t per_class, std::size_t dim, double spread,
                    std::uint64_t seed) {
    if (n_classes == 0 || per_class == 0 || dim == 0) throw ConfigError("synth_blobs: counts must be positive");
    if (!(spread >= 0.0)) throw ConfigError("synth_blobs: spread must be non-negative");
    const Rng root(seed);
    Rng center_rng = root.split(0);
    Rng sample_rng = root.split(1);
    Matrix centers(n_classes, dim);
    for (double& v : centers.data()) v = center_rng.uniform01();

    Matrix f(n_classes * per_class, dim);
    std::vector<int> y(n_classes * per_class);
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t s = 0; s < per_class; ++s) {
            const std::size_t i = c * per_class + s;
            y[i] = static_cast<int>(c);
            for (std::size_t j = 0; j < dim; ++j) {
                const double noise = spread > 0.0 ? spread * sample_rng.normal() : 0.0;
                f(i, j) = std::clamp(centers(c, j) + noise, 0.0, 1.0);
            }
        }
    }
    std::vector<int> map(n_classes);
    std::iota(map.begin(), map.end(), 0);
    return {std::move(f), std::move(y), n_classes, std::move(map)};
}

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, int epoch) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = Rng(seed).split(static_cast<std::uint64_t>(epoch));
    rng.shuffle(std::span<std::size_t>(perm));
    return perm;
}

std::vector<Batch> batches(const Dataset& ds, const BatchPlan& plan, int epoch) {
    if (plan.batch_size == 0) throw ConfigError("batch size must be positive");
    if (plan.batch_size > ds.size())
        throw ConfigError("batch size " + std::to_string(plan.batch_size) + " exceeds dataset size " +
                          std::to_string(ds.size()));
    const auto perm = epoch_permutation(ds.size(), plan.seed, epoch);
    std::vector<Batch> out;
    for (std::size_t start = 0; start < perm.size(); start += plan.batch_size) {
        const std::size_t end = std::min(perm.size(), start + plan.batch_size);
        std::vector<std::size_t> idx(perm.begin() + static_cast<long>(start), perm.begin() + static_cast<long>(end));
        Dataset part = ds.subset(idx);
        out.push_back({std::move(part.features), std::move(part.labels), std::move(idx)});
    }
    return out;
}

} // namespace sepnet
