#pragma once

#include "sepnet/network.hpp"
#include "sepnet/optim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sepnet {

enum class LossKind { softmax_ce, softmax_ce_plus_center };

/// How the decision layer starts out.
enum class FinalInit {
    uniform,         // ±1/sqrt(m), same as the hidden layers
    semi_orthogonal, // Q factor of a uniform [-1, 1] draw
    unit_interval,   // raw uniform [-1, 1]
};

struct TrainConfig {
    NetworkSpec network = NetworkSpec::parse("784-64-10");
    LossKind loss = LossKind::softmax_ce;
    bool use_reconstruction = false;
    double lambda = 0.001;
    std::size_t batch_size = 128;
    int epochs = 30;
    LrSchedule lr{0.1, {15, 25}, 0.1};
    double momentum = 0.9;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    bool freeze_final = false;
    FinalInit final_init = FinalInit::uniform;
    double center_weight = 0.01;
    double center_rate = 0.5;

    std::string dataset = "mnist"; // "mnist" or "blobs"
    std::string data_dir;          // empty: SEPNET_DATA_DIR or the build default
    std::vector<int> classes;      // empty keeps every class
    std::size_t blob_per_class = 200;
    double blob_spread = 0.1;

    void validate() const;

    /// Overrides one field from its textual value. Keys match the config file.
    void set(const std::string& key, const std::string& value);

    /// Flat `key: type = value` text; floats are written round-trip exact.
    std::string to_text() const;
    static TrainConfig from_text(const std::string& text);
    static TrainConfig load(const std::string& path);
};

/// Keys accepted by TrainConfig::set, in file order.
const std::vector<std::string>& config_keys();

std::string to_string(LossKind kind);
std::string to_string(FinalInit init);

} // namespace sepnet
