#include "gammasort/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "gammasort/random.hpp"
#include "gammasort/text_format.hpp"
#include "parallel.hpp"

namespace gammasort {
namespace {

constexpr std::uint64_t kShuffleStream = 1;

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::vector<std::vector<double>> prepare_inputs(const LabeledDataset& ds, bool max_normalize) {
    std::vector<std::vector<double>> xs;
    xs.reserve(ds.size());
    for (const auto& s : ds.inputs) xs.push_back(network_input(s, max_normalize));
    return xs;
}

Evaluation evaluate_prepared(const NetworkParams& p, const std::vector<std::vector<double>>& xs,
                             const std::vector<std::size_t>& labels, unsigned jobs) {
    const std::size_t k = p.n_classes();
    std::vector<double> losses(xs.size());
    std::vector<std::size_t> predicted(xs.size());
    detail::parallel_for(xs.size(), jobs, [&](std::size_t i) {
        const auto z = forward(p, xs[i]);
        predicted[i] = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
        const auto probs = softmax(z);
        losses[i] = -std::log(std::max(probs[labels[i]], 1e-12));
    });

    Evaluation e;
    e.confusion.assign(k, std::vector<std::size_t>(k, 0));
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ++e.confusion[labels[i]][predicted[i]];
        loss_sum += losses[i];
    }
    e.loss = xs.empty() ? 0.0 : loss_sum / static_cast<double>(xs.size());
    std::size_t correct = 0;
    e.per_class_accuracy.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        const auto row = std::accumulate(e.confusion[c].begin(), e.confusion[c].end(), std::size_t{0});
        correct += e.confusion[c][c];
        if (row > 0) e.per_class_accuracy[c] = static_cast<double>(e.confusion[c][c]) / static_cast<double>(row);
    }
    e.overall_accuracy = xs.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(xs.size());
    return e;
}

double mean_loss(const NetworkParams& p, const std::vector<std::vector<double>>& xs,
                 const std::vector<std::size_t>& labels, unsigned jobs) {
    std::vector<double> losses(xs.size());
    detail::parallel_for(xs.size(), jobs, [&](std::size_t i) {
        const auto probs = softmax(forward(p, xs[i]));
        losses[i] = -std::log(std::max(probs[labels[i]], 1e-12));
    });
    double sum = 0.0;
    for (double l : losses) sum += l;
    return sum / static_cast<double>(xs.size());
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (arch.kind == ArchKind::HiddenTanh && arch.hidden_width == 0) {
        throw std::invalid_argument("TrainConfig: hidden width must be >= 1");
    }
    if (!(adam.lr > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) ||
        !(adam.epsilon > 0.0)) {
        throw std::invalid_argument("TrainConfig: invalid Adam hyperparameters");
    }
    if (!(dwell_s > 0.0)) throw std::invalid_argument("TrainConfig: dwell must be positive");
}

std::size_t Evaluation::total() const {
    std::size_t n = 0;
    for (const auto& row : confusion) n = std::accumulate(row.begin(), row.end(), n);
    return n;
}

const EpochRecord& MetricsHistory::at_epoch(std::size_t epoch) const {
    for (const auto& r : epochs) {
        if (r.epoch == epoch) return r;
    }
    throw std::out_of_range("no metrics recorded for epoch " + std::to_string(epoch));
}

std::vector<double> network_input(const Spectrum& s, bool max_normalize) {
    std::vector<double> x(s.counts().begin(), s.counts().end());
    if (max_normalize) {
        const double m = x.empty() ? 0.0 : *std::max_element(x.begin(), x.end());
        if (m > 0.0) {
            for (double& v : x) v /= m;
        }
    }
    return x;
}

Evaluation evaluate(const NetworkParams& p, const LabeledDataset& ds, bool max_normalize, unsigned jobs) {
    ds.validate();
    if (!ds.empty() && ds.n_channels() != p.n_inputs()) {
        throw std::invalid_argument("evaluate: dataset has " + std::to_string(ds.n_channels()) +
                                    " channels, model expects " + std::to_string(p.n_inputs()));
    }
    if (ds.n_classes() != p.n_classes()) {
        throw std::invalid_argument("evaluate: dataset task has " + std::to_string(ds.n_classes()) +
                                    " classes, model has " + std::to_string(p.n_classes()));
    }
    return evaluate_prepared(p, prepare_inputs(ds, max_normalize), ds.labels, jobs);
}

TrainResult train(const LabeledDataset& train_ds, const LabeledDataset& test_ds, const TrainConfig& cfg,
                  unsigned jobs) {
    cfg.validate();
    if (train_ds.empty()) throw std::invalid_argument("train: training set is empty");
    if (test_ds.empty()) throw std::invalid_argument("train: test set is empty");
    if (train_ds.task != test_ds.task || train_ds.task != cfg.task) {
        throw std::invalid_argument("train: task mismatch between datasets and config");
    }
    if (train_ds.n_channels() != test_ds.n_channels()) {
        throw std::invalid_argument("train: datasets differ in input length");
    }
    train_ds.validate();
    test_ds.validate();

    const auto train_x = prepare_inputs(train_ds, cfg.max_normalize);
    const auto test_x = prepare_inputs(test_ds, cfg.max_normalize);
    const std::size_t n = train_x.size();
    const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);

    TrainResult result{init_params(cfg.arch, train_ds.n_channels(), train_ds.n_classes(), cfg.seed), {}, {}};
    auto& params = result.params;
    auto state = AdamState::fresh(params, cfg.adam);
    auto grads = Gradients::zeros_like(params);
    std::vector<std::size_t> order(n);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Philox4x32 rng(derive_seed(cfg.seed, {kShuffleStream, epoch}));
        for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            grads = Gradients::zeros_like(params);
            for (std::size_t k = start; k < end; ++k) {
                accumulate_gradients(params, train_x[order[k]], train_ds.labels[order[k]], grads);
            }
            grads.scale(1.0 / static_cast<double>(end - start));
            adam_step_in_place(params, grads, state);
        }

        result.history.epochs.push_back(EpochRecord{epoch, mean_loss(params, train_x, train_ds.labels, jobs),
                                                    evaluate_prepared(params, test_x, test_ds.labels, jobs)});
        if (std::find(cfg.checkpoints.begin(), cfg.checkpoints.end(), epoch) != cfg.checkpoints.end()) {
            result.checkpoints.emplace(epoch, params);
        }
    }
    return result;
}

WeightFeatures export_weight_features(const NetworkParams& p, const std::vector<std::string>& class_labels) {
    WeightFeatures f;
    f.hidden_layer = p.arch.kind == ArchKind::HiddenTanh;
    const auto& w = p.layers.front().weights;
    for (std::size_t r = 0; r < w.rows(); ++r) {
        if (f.hidden_layer) {
            f.names.push_back("hidden_" + std::to_string(r));
        } else {
            f.names.push_back(r < class_labels.size() ? class_labels[r] : "class_" + std::to_string(r));
        }
        const auto row = w.row(r);
        f.series.emplace_back(row.begin(), row.end());
    }
    return f;
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsHistory& history,
                       const std::vector<std::string>& class_labels) {
    auto out = open_out(path);
    out << "epoch,train_loss,test_loss,overall_acc";
    for (const auto& name : class_labels) out << ",acc_" << name;
    out << '\n';
    for (const auto& r : history.epochs) {
        out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.test.loss) << ','
            << format_double(r.test.overall_accuracy);
        for (double a : r.test.per_class_accuracy) out << ',' << format_double(a);
        out << '\n';
    }
}

void write_confusion_csv(const std::filesystem::path& path, const Evaluation& eval,
                         const std::vector<std::string>& class_labels) {
    auto out = open_out(path);
    out << "true\\predicted";
    for (const auto& name : class_labels) out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < eval.confusion.size(); ++r) {
        out << (r < class_labels.size() ? class_labels[r] : std::to_string(r));
        for (auto c : eval.confusion[r]) out << ',' << c;
        out << '\n';
    }
}

void write_weight_features(const std::filesystem::path& dir, const WeightFeatures& features) {
    for (std::size_t k = 0; k < features.series.size(); ++k) {
        const auto file = dir / ((features.hidden_layer ? "weights_hidden_" : "weights_class_") + std::to_string(k) + ".csv");
        auto out = open_out(file);
        out << "# series=" << features.names[k] << " layer=" << (features.hidden_layer ? "hidden" : "output") << '\n';
        out << "channel,weight\n";
        for (std::size_t c = 0; c < features.series[k].size(); ++c) {
            out << c << ',' << format_double(features.series[k][c]) << '\n';
        }
    }
}

}  // namespace gammasort
