#pragma once

#include "sepnet/error.hpp"
#include "sepnet/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sepnet {

class IdxMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class IdxLengthError : public FormatError {
public:
    using FormatError::FormatError;
};

class IdxCountMismatch : public DataError {
public:
    using DataError::DataError;
};

struct Dataset {
    Matrix features;                   // N x d, values in [0, 1]
    std::vector<int> labels;           // contiguous, < n_classes
    std::size_t n_classes = 0;
    std::vector<int> original_classes; // contiguous label -> label in the source data

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols(); }

    void validate() const;
    Dataset subset(std::span<const std::size_t> indices) const;
};

inline constexpr std::uint32_t idx_images_magic = 0x00000803;
inline constexpr std::uint32_t idx_labels_magic = 0x00000801;

/// Decodes an IDX image/label pair. Pixels are scaled by 1/255 and each image
/// is flattened row-major.
Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);
Dataset read_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

struct IdxBytes {
    std::vector<std::uint8_t> images;
    std::vector<std::uint8_t> labels;
};

/// Inverse of parse_idx for features that are multiples of 1/255 and labels
/// below 256. Labels are written in the original (pre-filter) class space.
IdxBytes encode_idx(const Dataset& ds, std::uint32_t rows, std::uint32_t cols);
void write_idx(const Dataset& ds, std::uint32_t rows, std::uint32_t cols,
               const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

struct MnistSplit {
    Dataset train;
    Dataset test;
};

/// Default data directory: $SEPNET_DATA_DIR if set, else the given fallback.
std::filesystem::path mnist_dir(const std::filesystem::path& fallback);
/// Reads train-*-ubyte and t10k-*-ubyte from dir.
MnistSplit load_mnist(const std::filesystem::path& dir);

/// Keeps the listed classes, relabelled 0..k-1 in the order given.
Dataset filter_classes(const Dataset& ds, std::span<const int> keep);

/// Isotropic Gaussian clusters around seeded uniform centers, clipped to [0, 1].
Dataset synth_blobs(std::size_t n_classes, std::size_t per_class, std::size_t dim, double spread,
                    std::uint64_t seed);

struct BatchPlan {
    std::size_t batch_size = 128;
    std::uint64_t seed = 0;
};

struct Batch {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::size_t> indices;
};

/// Permutation of 0..n-1 for the given epoch; a pure function of (seed, epoch).
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, int epoch);

std::vector<Batch> batches(const Dataset& ds, const BatchPlan& plan, int epoch);

} // namespace sepnet
