#pragma once

#include "sepnet/config.hpp"
#include "sepnet/data.hpp"
#include "sepnet/linalg.hpp"
#include "sepnet/network.hpp"
#include "sepnet/separability.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sepnet {

struct MetricRecord {
    std::size_t step = 0;
    int epoch = 0;
    double loss_cls = 0.0;
    double loss_re = 0.0;
    double loss_total = 0.0;
    double train_acc = 0.0; // accuracy on this batch before the update
    double epsilon = 0.0;   // ε of the decision weight after the update

    friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

struct EpochSummary {
    int epoch = 0;
    double lr = 0.0;
    double mean_loss_total = 0.0;
    double train_acc = 0.0;             // sample-weighted over the epoch's batches
    double epsilon = 0.0;               // at the end of the epoch
    std::optional<double> test_acc;     // when an evaluation set was given

    friend bool operator==(const EpochSummary&, const EpochSummary&) = default;
};

struct RunArtifact {
    TrainConfig config;
    std::string config_snapshot;
    std::vector<MetricRecord> metrics;
    std::vector<EpochSummary> epochs;
    Network network;
    Matrix initial_final_weight;
    SeparabilityReport final_report;
};

/// Runs config.epochs passes of minibatch SGD over `train`, recording every step.
/// Throws NumericError naming the step when the loss stops being finite.
RunArtifact train(const TrainConfig& config, const Dataset& train, const Dataset* eval = nullptr);

/// Resolves the config's dataset: MNIST from disk (train/test split, class
/// filter applied) or a seeded blob set split 80/20.
struct DataSplit {
    Dataset train;
    Dataset test;
};
DataSplit load_data(const TrainConfig& config, const std::filesystem::path& default_mnist_dir);

double accuracy(const Network& net, const Dataset& ds);

/// Penultimate activations for every sample, N x m.
Matrix latents(const Network& net, const Dataset& ds);

struct ClassSimilarity {
    int label = 0;           // contiguous class index
    int original_label = 0;
    double euclidean = 0.0;  // ‖ᾱ_j - w_j‖₂
    double cosine = 0.0;     // 1 - cos(ᾱ_j, w_j)
};

/// Compares each class's mean latent feature with its decision column.
std::vector<ClassSimilarity> similarity_report(const Network& net, const Dataset& ds);
std::vector<ClassSimilarity> similarity_from_latents(const Matrix& latent, std::span<const int> labels,
                                                     const Matrix& w, std::span<const int> original_labels);

/// Writes pc1..pck,label rows (k = min(3, features)) with 9 significant digits.
PcaResult export_pca(const Matrix& latent, std::span<const int> labels, const std::filesystem::path& path);

void write_metric_log(const std::filesystem::path& path, std::span<const MetricRecord> records);
void write_epoch_log(const std::filesystem::path& path, std::span<const EpochSummary> epochs);

// Frozen decision-layer comparison on a class subset.
struct FrozenRun {
    double test_acc = 0.0;
    double epsilon_min = 0.0;
    double epsilon_max = 0.0;
    double epsilon_final = 0.0;
    bool weight_unchanged = false;
    PcaResult pca;
    std::vector<int> pca_labels;
};

struct FrozenLinearityReport {
    FrozenRun semi_orthogonal;
    FrozenRun random_unit;
};

/// Trains the same network twice with the decision layer frozen: once at a
/// semi-orthogonal matrix, once at a raw uniform [-1, 1] draw.
FrozenLinearityReport experiment_frozen_linearity(const Dataset& train, const Dataset& test,
                                                  TrainConfig base, std::uint64_t seed);

struct LossCell {
    LossKind loss = LossKind::softmax_ce;
    bool reconstruction = false;
    std::vector<double> test_acc;      // per seed
    std::vector<double> final_epsilon; // per seed
    double mean_acc = 0.0;
    double mean_epsilon = 0.0;
    std::optional<PcaResult> pca;      // first seed's test latents
};

struct LossComparison {
    std::vector<LossCell> cells;          // {ce, ce+center} x {without, with} reconstruction
    double spearman_acc_vs_neg_eps = 0.0; // over cell means
};

LossComparison experiment_loss_comparison(const Dataset& train, const Dataset& test, TrainConfig base,
                                          std::span<const std::uint64_t> seeds);

} // namespace sepnet
