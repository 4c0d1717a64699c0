#include "sepnet/harness.hpp"

#include "sepnet/error.hpp"
#include "sepnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace sepnet {

std::vector<ClassSimilarity> similarity_from_latents(const Matrix& latent, std::span<const int> labels,
                                                     const Matrix& w, std::span<const int> original_labels) {
    const std::size_t m = w.rows();
    const std::size_t n = w.cols();
    if (latent.cols() != m || labels.size() != latent.rows())
        throw ShapeError("similarity: latent " + latent.shape_string() + " vs weight " + w.shape_string());
    Matrix sums(n, m);
    std::vector<std::size_t> counts(n, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= n) throw DataError("similarity: label out of range");
        const auto row = latent.row(i);
        auto s = sums.row(static_cast<std::size_t>(y));
        for (std::size_t j = 0; j < m; ++j) s[j] += row[j];
        ++counts[static_cast<std::size_t>(y)];
    }

    std::vector<ClassSimilarity> out;
    for (std::size_t c = 0; c < n; ++c) {
        if (counts[c] == 0) throw DataError("similarity: class " + std::to_string(c) + " has no samples");
        double dist_sq = 0.0, dot = 0.0, norm_a = 0.0, norm_w = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double mean = sums(c, j) / static_cast<double>(counts[c]);
            const double wj = w(j, c);
            dist_sq += (mean - wj) * (mean - wj);
            dot += mean * wj;
            norm_a += mean * mean;
            norm_w += wj * wj;
        }
        // A zero vector has no direction; report it as orthogonal.
        const double denom = std::sqrt(norm_a) * std::sqrt(norm_w);
        const double cosine = denom > 0.0 ? 1.0 - dot / denom : 1.0;
        const int original = c < original_labels.size() ? original_labels[c] : static_cast<int>(c);
        out.push_back({static_cast<int>(c), original, std::sqrt(dist_sq), cosine});
    }
    return out;
}

std::vector<ClassSimilarity> similarity_report(const Network& net, const Dataset& ds) {
    return similarity_from_latents(latents(net, ds), ds.labels, net.final_weight(), ds.original_classes);
}

PcaResult export_pca(const Matrix& latent, std::span<const int> labels, const std::filesystem::path& path) {
    if (labels.size() != latent.rows()) throw ShapeError("export_pca: label count differs from sample count");
    const std::size_t k = std::min<std::size_t>(3, latent.cols());
    PcaResult pca = pca_fit(latent, k);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (std::size_t c = 0; c < k; ++c) out << "pc" << c + 1 << ",";
    out << "label\n";
    char buf[40];
    for (std::size_t i = 0; i < pca.projected.rows(); ++i) {
        for (std::size_t c = 0; c < k; ++c) {
            std::snprintf(buf, sizeof buf, "%.9g,", pca.projected(i, c));
            out << buf;
        }
        out << labels[i] << "\n";
    }
    if (!out) throw IoError("write failed for " + path.string());
    return pca;
}

namespace {

FrozenRun run_frozen(const Dataset& train_ds, const Dataset& test, TrainConfig cfg) {
    const RunArtifact run = train(cfg, train_ds);
    double eps_min = run.metrics.front().epsilon;
    double eps_max = eps_min;
    for (const auto& rec : run.metrics) {
        eps_min = std::min(eps_min, rec.epsilon);
        eps_max = std::max(eps_max, rec.epsilon);
    }
    FrozenRun r{accuracy(run.network, test),
                eps_min,
                eps_max,
                run.metrics.back().epsilon,
                run.network.final_weight() == run.initial_final_weight,
                pca_fit(latents(run.network, test), std::min<std::size_t>(3, cfg.network.latent_dim())),
                test.labels};
    return r;
}

} // namespace

FrozenLinearityReport experiment_frozen_linearity(const Dataset& train_ds, const Dataset& test, TrainConfig base,
                                                  std::uint64_t seed) {
    base.seed = seed;
    base.freeze_final = true;
    TrainConfig a = base;
    a.final_init = FinalInit::semi_orthogonal;
    TrainConfig b = base;
    b.final_init = FinalInit::unit_interval;
    return {run_frozen(train_ds, test, a), run_frozen(train_ds, test, b)};
}

LossComparison experiment_loss_comparison(const Dataset& train_ds, const Dataset& test, TrainConfig base,
                                          std::span<const std::uint64_t> seeds) {
    if (seeds.empty()) throw ConfigError("loss comparison needs at least one seed");
    LossComparison out;
    for (LossKind loss : {LossKind::softmax_ce, LossKind::softmax_ce_plus_center}) {
        for (bool re : {false, true}) {
            LossCell cell;
            cell.loss = loss;
            cell.reconstruction = re;
            for (std::size_t s = 0; s < seeds.size(); ++s) {
                TrainConfig cfg = base;
                cfg.loss = loss;
                cfg.use_reconstruction = re;
                cfg.seed = seeds[s];
                const RunArtifact run = train(cfg, train_ds);
                cell.test_acc.push_back(accuracy(run.network, test));
                cell.final_epsilon.push_back(run.final_report.epsilon);
                if (s == 0)
                    cell.pca = pca_fit(latents(run.network, test), std::min<std::size_t>(3, cfg.network.latent_dim()));
            }
            const double k = static_cast<double>(seeds.size());
            for (double v : cell.test_acc) cell.mean_acc += v / k;
            for (double v : cell.final_epsilon) cell.mean_epsilon += v / k;
            out.cells.push_back(std::move(cell));
        }
    }
    std::vector<double> acc, neg_eps;
    for (const auto& c : out.cells) {
        acc.push_back(c.mean_acc);
        neg_eps.push_back(-c.mean_epsilon);
    }
    out.spearman_acc_vs_neg_eps = spearman(acc, neg_eps);
    return out;
}

} // namespace sepnet
