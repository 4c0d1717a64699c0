#include "sepnet/harness.hpp"

#include "sepnet/error.hpp"
#include "sepnet/losses.hpp"
#include "sepnet/optim.hpp"
#include "sepnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace sepnet {

namespace {

struct Seeds {
    std::uint64_t init;
    std::uint64_t batches;
    std::uint64_t final_layer;
};

Seeds derive_seeds(std::uint64_t seed) {
    const Rng root(seed);
    return {root.split(1).next_u64(), root.split(2).next_u64(), root.split(3).next_u64()};
}

double checked_epsilon(const Matrix& w, std::size_t step) {
    const double frob = separability_metric(w);
    const double tr = separability_metric_trace_form(w);
    if (std::abs(frob - tr) > 1e-9 * std::max(1.0, std::abs(frob)))
        throw NumericError("step " + std::to_string(step) + ": epsilon forms disagree (" + std::to_string(frob) +
                           " vs " + std::to_string(tr) + ")");
    return frob;
}

std::string describe(const MetricRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "step %zu epoch %d loss_total %.6g train_acc %.4f epsilon %.3e", r.step, r.epoch,
                  r.loss_total, r.train_acc, r.epsilon);
    return buf;
}

} // namespace

RunArtifact train(const TrainConfig& config, const Dataset& train, const Dataset* eval) {
    config.validate();
    train.validate();
    const auto& spec = config.network;
    if (train.n_classes != spec.class_count())
        throw ConfigError("dataset has " + std::to_string(train.n_classes) + " classes but the decision layer has " +
                          std::to_string(spec.class_count()) + " outputs");
    if (train.dim() != spec.input_dim())
        throw ConfigError("dataset width " + std::to_string(train.dim()) + " does not match network input " +
                          std::to_string(spec.input_dim()));

    const Seeds seeds = derive_seeds(config.seed);
    Network net = Network::initialize(spec, seeds.init);
    const std::size_t m = spec.latent_dim();
    const std::size_t n = spec.class_count();
    switch (config.final_init) {
    case FinalInit::uniform: break;
    case FinalInit::semi_orthogonal: net.final_weight() = semi_orthogonal_init(m, n, seeds.final_layer); break;
    case FinalInit::unit_interval: {
        Rng rng(seeds.final_layer);
        for (double& v : net.final_weight().data()) v = rng.uniform(-1.0, 1.0);
        break;
    }
    }
    const Matrix initial_final = net.final_weight();

    std::optional<CenterState> centers;
    if (config.loss == LossKind::softmax_ce_plus_center) centers = CenterState::zeros(n, m, config.center_rate);

    SgdState sgd = SgdState::for_network(net, config.momentum, config.weight_decay);
    const ParamMask mask = freeze_mask(net, config.freeze_final);
    const BatchPlan plan{config.batch_size, seeds.batches};

    std::vector<MetricRecord> metrics;
    std::vector<EpochSummary> epochs;
    std::size_t step = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_at(config.lr, epoch);
        double loss_sum = 0.0;
        std::size_t correct_sum = 0;
        std::size_t seen = 0;

        for (const Batch& batch : batches(train, plan, epoch)) {
            const std::size_t B = batch.labels.size();
            const ForwardTrace trace = forward(net, batch.features);

            SoftmaxCeResult ce = softmax_cross_entropy(trace.logits(), batch.labels);
            double cls = ce.loss;
            ClsGradients cls_grads{std::move(ce.logit_grad), Matrix(B, m)};
            if (centers) {
                CenterLossResult cl = center_loss(trace.latent(), batch.labels, *centers);
                cls += config.center_weight * cl.loss;
                cls_grads.latent_grad = scale(cl.latent_grad, config.center_weight);
                centers = std::move(cl.updated);
            }

            double re = 0.0;
            ReGradients re_grads{Matrix(B, m), Matrix(m, n)};
            if (config.use_reconstruction) {
                ReconstructionResult r = reconstruction_loss(trace.latent(), one_hot(batch.labels, n), net.final_weight());
                re = r.loss;
                re_grads = {std::move(r.latent_grad), std::move(r.w_grad)};
            }
            TotalLoss total = total_loss(cls, cls_grads, re, re_grads, config.lambda);

            std::size_t correct = 0;
            for (std::size_t b = 0; b < B; ++b) {
                const auto row = trace.logits().row(b);
                const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
                if (best == batch.labels[b]) ++correct;
            }

            if (!std::isfinite(total.value.total)) {
                std::string last = metrics.empty() ? "none" : describe(metrics.back());
                throw NumericError("loss became non-finite at step " + std::to_string(step) + " (epoch " +
                                   std::to_string(epoch) + "); last finite record: " + last);
            }

            GradientSet grads = backward(net, trace, total.seeds.logit_grad, total.seeds.latent_grad);
            Matrix& gw = grads.grads[net.final_weight_index()];
            gw = add(gw, total.seeds.w_grad);
            sgd_step(net.params(), grads.grads, sgd, lr, mask);

            MetricRecord rec;
            rec.step = step;
            rec.epoch = epoch;
            rec.loss_cls = total.value.cls;
            rec.loss_re = total.value.re;
            rec.loss_total = total.value.total;
            rec.train_acc = static_cast<double>(correct) / static_cast<double>(B);
            rec.epsilon = checked_epsilon(net.final_weight(), step);
            metrics.push_back(rec);

            loss_sum += rec.loss_total * static_cast<double>(B);
            correct_sum += correct;
            seen += B;
            ++step;
        }

        EpochSummary summary;
        summary.epoch = epoch;
        summary.lr = lr;
        summary.mean_loss_total = loss_sum / static_cast<double>(seen);
        summary.train_acc = static_cast<double>(correct_sum) / static_cast<double>(seen);
        summary.epsilon = metrics.back().epsilon;
        if (eval) summary.test_acc = accuracy(net, *eval);
        epochs.push_back(summary);
    }

    SeparabilityReport report = separability_report(net.final_weight());
    return RunArtifact{config,        config.to_text(),  std::move(metrics), std::move(epochs),
                       std::move(net), initial_final, report};
}

DataSplit load_data(const TrainConfig& config, const std::filesystem::path& default_mnist_dir) {
    DataSplit split = [&]() -> DataSplit {
        if (config.dataset == "blobs") {
            Dataset all = synth_blobs(config.network.class_count(), config.blob_per_class,
                                      config.network.input_dim(), config.blob_spread, config.seed);
            const auto perm = epoch_permutation(all.size(), config.seed ^ 0x5eed5eedULL, 0);
            const std::size_t n_train = all.size() * 4 / 5;
            std::vector<std::size_t> tr(perm.begin(), perm.begin() + static_cast<long>(n_train));
            std::vector<std::size_t> te(perm.begin() + static_cast<long>(n_train), perm.end());
            return {all.subset(tr), all.subset(te)};
        }
        const auto dir =
            config.data_dir.empty() ? mnist_dir(default_mnist_dir) : std::filesystem::path(config.data_dir);
        MnistSplit mnist = load_mnist(dir);
        return {std::move(mnist.train), std::move(mnist.test)};
    }();
    if (!config.classes.empty()) {
        split.train = filter_classes(split.train, config.classes);
        split.test = filter_classes(split.test, config.classes);
    }
    return split;
}

double accuracy(const Network& net, const Dataset& ds) {
    constexpr std::size_t chunk = 1000;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < ds.size(); start += chunk) {
        const std::size_t end = std::min(ds.size(), start + chunk);
        std::vector<std::size_t> idx(end - start);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = start + i;
        const Dataset part = ds.subset(idx);
        const auto pred = predict(net, part.features);
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (pred[i] == part.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

Matrix latents(const Network& net, const Dataset& ds) {
    constexpr std::size_t chunk = 1000;
    Matrix out(ds.size(), net.spec().latent_dim());
    for (std::size_t start = 0; start < ds.size(); start += chunk) {
        const std::size_t end = std::min(ds.size(), start + chunk);
        std::vector<std::size_t> idx(end - start);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = start + i;
        const ForwardTrace trace = forward(net, ds.subset(idx).features);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto src = trace.latent().row(i);
            std::copy(src.begin(), src.end(), out.row(start + i).begin());
        }
    }
    return out;
}

void write_metric_log(const std::filesystem::path& path, std::span<const MetricRecord> records) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "step,epoch,loss_cls,loss_re,loss_total,train_acc,epsilon\n";
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%zu,%d,%.9g,%.9g,%.9g,%.6f,%.9e\n", r.step, r.epoch, r.loss_cls, r.loss_re,
                      r.loss_total, r.train_acc, r.epsilon);
        out << buf;
    }
    if (!out) throw IoError("write failed for " + path.string());
}

void write_epoch_log(const std::filesystem::path& path, std::span<const EpochSummary> epochs) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "epoch,lr,mean_loss_total,train_acc,test_acc,epsilon\n";
    char buf[256];
    for (const auto& e : epochs) {
        char test[32] = "";
        if (e.test_acc) std::snprintf(test, sizeof test, "%.6f", *e.test_acc);
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.6f,%s,%.9e\n", e.epoch, e.lr, e.mean_loss_total, e.train_acc,
                      test, e.epsilon);
        out << buf;
    }
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace sepnet
