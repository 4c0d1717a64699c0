#include "sepnet/checkpoint.hpp"
#include "sepnet/config.hpp"
#include "sepnet/harness.hpp"
#include "sepnet/separability.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#ifndef SEPNET_DEFAULT_MNIST_DIR
#define SEPNET_DEFAULT_MNIST_DIR "data/mnist"
#endif

namespace fs = std::filesystem;
using namespace sepnet;

namespace {

// Flags shared by every subcommand that trains: --config FILE plus one flag
// per config key (underscores become dashes).
struct TrainFlags {
    std::string config_path;
    std::map<std::string, std::string> overrides;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "Config file (key: type = value lines)");
        for (const auto& key : config_keys()) {
            std::string flag = "--" + key;
            for (char& ch : flag)
                if (ch == '_') ch = '-';
            app->add_option(flag, overrides[key], "Override config key " + key);
        }
    }

    TrainConfig resolve(const TrainConfig& defaults) const {
        TrainConfig cfg = config_path.empty() ? defaults : TrainConfig::load(config_path);
        for (const auto& [key, value] : overrides)
            if (!value.empty()) cfg.set(key, value);
        cfg.validate();
        return cfg;
    }
};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

void write_pca_csv(const fs::path& path, const PcaResult& pca, std::span<const int> labels) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (std::size_t c = 0; c < pca.projected.cols(); ++c) out << "pc" << c + 1 << ",";
    out << "label\n";
    char buf[40];
    for (std::size_t i = 0; i < pca.projected.rows(); ++i) {
        for (std::size_t c = 0; c < pca.projected.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.9g,", pca.projected(i, c));
            out << buf;
        }
        out << labels[i] << "\n";
    }
}

int run_train(const TrainFlags& flags, const std::string& out_dir) {
    const TrainConfig cfg = flags.resolve(TrainConfig{});
    const DataSplit data = load_data(cfg, SEPNET_DEFAULT_MNIST_DIR);
    const RunArtifact run = train(cfg, data.train, &data.test);
    for (const auto& e : run.epochs)
        std::printf("epoch %3d  lr %.4g  loss %.5f  train_acc %.4f  test_acc %.4f  eps %s\n", e.epoch, e.lr,
                    e.mean_loss_total, e.train_acc, e.test_acc.value_or(0.0), format_epsilon(e.epsilon).c_str());
    std::printf("final epsilon %s (trace form %s), n=%zu m=%zu\n", format_epsilon(run.final_report.epsilon).c_str(),
                format_epsilon(run.final_report.epsilon_trace).c_str(), run.final_report.n_classes,
                run.final_report.m_features);
    if (!out_dir.empty()) {
        const fs::path dir(out_dir);
        ensure_dir(dir);
        write_text(dir / "config.txt", run.config_snapshot);
        write_metric_log(dir / "metrics.csv", run.metrics);
        write_epoch_log(dir / "epochs.csv", run.epochs);
        save_checkpoint(run.network, dir / "checkpoint.bin");
        nlohmann::json report = to_json(separability_report(run.network.final_weight(), true));
        report["test_acc"] = run.epochs.back().test_acc.value_or(0.0);
        report["train_acc"] = run.epochs.back().train_acc;
        write_text(dir / "report.json", report.dump(2) + "\n");
        std::printf("wrote %s\n", dir.string().c_str());
    }
    return 0;
}

int run_frozen(const TrainFlags& flags, const std::string& out_dir) {
    TrainConfig defaults;
    defaults.network = NetworkSpec::parse("784-64-3");
    defaults.classes = {0, 1, 5};
    const TrainConfig cfg = flags.resolve(defaults);
    const DataSplit data = load_data(cfg, SEPNET_DEFAULT_MNIST_DIR);
    const FrozenLinearityReport r = experiment_frozen_linearity(data.train, data.test, cfg, cfg.seed);
    auto show = [](const char* name, const FrozenRun& run) {
        std::printf("%-16s test_acc %.4f  eps min %s max %s  final W unchanged: %s\n", name, run.test_acc,
                    format_epsilon(run.epsilon_min).c_str(), format_epsilon(run.epsilon_max).c_str(),
                    run.weight_unchanged ? "yes" : "no");
    };
    show("semi-orthogonal", r.semi_orthogonal);
    show("random [-1,1]", r.random_unit);
    if (!out_dir.empty()) {
        const fs::path dir(out_dir);
        ensure_dir(dir);
        write_pca_csv(dir / "pca_semi_orthogonal.csv", r.semi_orthogonal.pca, r.semi_orthogonal.pca_labels);
        write_pca_csv(dir / "pca_random.csv", r.random_unit.pca, r.random_unit.pca_labels);
        std::printf("wrote %s\n", dir.string().c_str());
    }
    return 0;
}

int run_loss_compare(const TrainFlags& flags, int seed_count, const std::string& out_dir) {
    const TrainConfig cfg = flags.resolve(TrainConfig{});
    const DataSplit data = load_data(cfg, SEPNET_DEFAULT_MNIST_DIR);
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < seed_count; ++i) seeds.push_back(cfg.seed + static_cast<std::uint64_t>(i));
    const LossComparison table = experiment_loss_comparison(data.train, data.test, cfg, seeds);
    std::printf("%-24s %-6s %-10s %s\n", "loss", "L_re", "mean_acc", "mean_eps");
    for (const auto& c : table.cells)
        std::printf("%-24s %-6s %-10.4f %s\n", to_string(c.loss).c_str(), c.reconstruction ? "yes" : "no", c.mean_acc,
                    format_epsilon(c.mean_epsilon).c_str());
    std::printf("spearman(acc, -eps) over cells: %.3f\n", table.spearman_acc_vs_neg_eps);
    if (!out_dir.empty()) {
        const fs::path dir(out_dir);
        ensure_dir(dir);
        for (const auto& c : table.cells)
            if (c.pca)
                write_pca_csv(dir / ("pca_" + to_string(c.loss) + (c.reconstruction ? "_re" : "") + ".csv"), *c.pca,
                              data.test.labels);
        std::printf("wrote %s\n", dir.string().c_str());
    }
    return 0;
}

void print_similarity(const char* title, const std::vector<ClassSimilarity>& rows) {
    std::printf("%s\n%-6s %-10s %s\n", title, "class", "euclidean", "cosine");
    for (const auto& r : rows) std::printf("%-6d %-10.4f %.4f\n", r.original_label, r.euclidean, r.cosine);
}

int run_similarity(const TrainFlags& flags, const std::string& checkpoint) {
    const TrainConfig cfg = flags.resolve(TrainConfig{});
    const DataSplit data = load_data(cfg, SEPNET_DEFAULT_MNIST_DIR);
    if (!checkpoint.empty()) {
        print_similarity(checkpoint.c_str(), similarity_report(restore_checkpoint(checkpoint), data.test));
        return 0;
    }
    TrainConfig plain = cfg;
    plain.use_reconstruction = false;
    TrainConfig with_re = cfg;
    with_re.use_reconstruction = true;
    print_similarity("without L_re", similarity_report(train(plain, data.train).network, data.test));
    print_similarity("with L_re", similarity_report(train(with_re, data.train).network, data.test));
    return 0;
}

int run_eval_metric(const std::string& checkpoint, bool as_json) {
    const Network net = restore_checkpoint(checkpoint);
    const SeparabilityReport r = separability_report(net.final_weight(), as_json);
    if (as_json) {
        std::printf("%s\n", to_json(r).dump(2).c_str());
        return 0;
    }
    std::printf("frobenius form  %.9e  (%s)\n", r.epsilon, format_epsilon(r.epsilon).c_str());
    std::printf("trace form      %.9e  (%s)\n", r.epsilon_trace, format_epsilon(r.epsilon_trace).c_str());
    std::printf("n=%zu m=%zu\n", r.n_classes, r.m_features);
    return 0;
}

int run_export_pca(const TrainFlags& flags, const std::string& checkpoint, const std::string& split,
                   const std::string& out) {
    const TrainConfig cfg = flags.resolve(TrainConfig{});
    const DataSplit data = load_data(cfg, SEPNET_DEFAULT_MNIST_DIR);
    const Network net = restore_checkpoint(checkpoint);
    const Dataset& ds = split == "train" ? data.train : data.test;
    const PcaResult pca = export_pca(latents(net, ds), ds.labels, out);
    std::printf("wrote %s (%zu samples, variances", out.c_str(), pca.projected.rows());
    for (double v : pca.variances) std::printf(" %.4g", v);
    std::printf(")\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weight-separability metric and feed-backward reconstruction training"};
    app.require_subcommand(1);

    std::string out_dir, checkpoint, split = "test", out_file;
    int seed_count = 5;
    bool as_json = false;

    TrainFlags train_flags, frozen_flags, compare_flags, sim_flags, pca_flags;

    auto* train_cmd = app.add_subcommand("train", "Train one network and log per-step metrics");
    train_flags.attach(train_cmd);
    train_cmd->add_option("--out", out_dir, "Directory for config, logs, checkpoint, report");

    auto* frozen_cmd = app.add_subcommand("frozen-linearity", "Frozen semi-orthogonal vs frozen random decision layer");
    frozen_flags.attach(frozen_cmd);
    frozen_cmd->add_option("--out", out_dir, "Directory for PCA exports");

    auto* compare_cmd = app.add_subcommand("loss-compare", "{CE, CE+center} x {with, without} reconstruction loss");
    compare_flags.attach(compare_cmd);
    compare_cmd->add_option("--seed-count", seed_count, "Number of consecutive seeds")->check(CLI::PositiveNumber);
    compare_cmd->add_option("--out", out_dir, "Directory for PCA exports");

    auto* sim_cmd = app.add_subcommand("similarity", "Mean latent vs decision column distances per class");
    sim_flags.attach(sim_cmd);
    sim_cmd->add_option("--checkpoint", checkpoint, "Report a saved network instead of training a pair");

    auto* eval_cmd = app.add_subcommand("eval-metric", "Print epsilon(W) of a checkpoint's decision layer");
    eval_cmd->add_option("checkpoint", checkpoint, "Checkpoint file")->required();
    eval_cmd->add_flag("--json", as_json, "Emit the report (with error matrix) as JSON");

    auto* pca_cmd = app.add_subcommand("export-pca", "Project latent features onto 3 principal components");
    pca_flags.attach(pca_cmd);
    pca_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    pca_cmd->add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}));
    pca_cmd->add_option("--out", out_file, "CSV path")->required();

    // Experiment subcommands must name their seed.
    for (auto* cmd : {train_cmd, frozen_cmd, compare_cmd, sim_cmd}) cmd->get_option("--seed")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*train_cmd) return run_train(train_flags, out_dir);
        if (*frozen_cmd) return run_frozen(frozen_flags, out_dir);
        if (*compare_cmd) return run_loss_compare(compare_flags, seed_count, out_dir);
        if (*sim_cmd) return run_similarity(sim_flags, checkpoint);
        if (*eval_cmd) return run_eval_metric(checkpoint, as_json);
        if (*pca_cmd) return run_export_pca(pca_flags, checkpoint, split, out_file);
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]: %s\n", category_name(e.category()), e.what());
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
