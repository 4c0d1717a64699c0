#pragma once

#include "sepnet/error.hpp"
#include "sepnet/network.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace sepnet {

class CheckpointVersionError : public FormatError {
public:
    using FormatError::FormatError;
};

class CheckpointCorruptError : public FormatError {
public:
    using FormatError::FormatError;
};

inline constexpr std::uint32_t checkpoint_version = 1;

// Layout (little-endian): "SEPNETCK", u32 version, u32 layer count,
// per layer {u32 in, u32 out, u8 activation}, u32 tensor count,
// per tensor {u32 rows, u32 cols, f64 values...}, u32 CRC-32 of everything before it.
std::vector<std::uint8_t> encode_checkpoint(const Network& net);
Network decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network restore_checkpoint(const std::filesystem::path& path);

} // namespace sepnet
