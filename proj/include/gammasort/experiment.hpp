#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gammasort/ensemble.hpp"
#include "gammasort/neuralnet.hpp"

namespace gammasort {

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 0;  // 0 = full batch
    std::uint64_t seed = 1;
    TaskKind task = TaskKind::IsotopeID;
    Architecture arch = Architecture::linear();
    double dwell_s = 1.0;
    AdamHyper adam;
    bool max_normalize = false;
    std::vector<std::size_t> checkpoints{10, 100};

    void validate() const;
};

/// Metrics for one pass over a dataset. confusion[true][predicted].
struct Evaluation {
    double loss = 0.0;
    double overall_accuracy = 0.0;
    std::vector<double> per_class_accuracy;
    std::vector<std::vector<std::size_t>> confusion;

    std::size_t total() const;
};

struct EpochRecord {
    std::size_t epoch;
    double train_loss;
    Evaluation test;
};

struct MetricsHistory {
    std::vector<EpochRecord> epochs;

    const EpochRecord& at_epoch(std::size_t epoch) const;
    const Evaluation& final_evaluation() const { return epochs.back().test; }
};

struct TrainResult {
    NetworkParams params;
    MetricsHistory history;
    std::map<std::size_t, NetworkParams> checkpoints;
};

/// Network input for a spectrum: raw counts, or counts / max when normalizing.
std::vector<double> network_input(const Spectrum& s, bool max_normalize);

/// Argmax prediction for every item. Items with no true instances get
/// per-class accuracy 0.
Evaluation evaluate(const NetworkParams& p, const LabeledDataset& ds, bool max_normalize = false, unsigned jobs = 1);

/// Adam training from init_params(cfg.arch, channels, classes, cfg.seed).
/// Epoch e visits items in an order drawn from derive_seed(cfg.seed, {1, e}).
TrainResult train(const LabeledDataset& train_ds, const LabeledDataset& test_ds, const TrainConfig& cfg,
                  unsigned jobs = 1);

/// Rows of W (Linear) or W1 (HiddenTanh) as named per-channel series.
struct WeightFeatures {
    bool hidden_layer = false;
    std::vector<std::string> names;
    std::vector<std::vector<double>> series;
};

WeightFeatures export_weight_features(const NetworkParams& p, const std::vector<std::string>& class_labels = {});

// Artifact writers. All numbers use format_double.
void write_metrics_csv(const std::filesystem::path& path, const MetricsHistory& history,
                       const std::vector<std::string>& class_labels);
void write_confusion_csv(const std::filesystem::path& path, const Evaluation& eval,
                         const std::vector<std::string>& class_labels);
/// weights_class_<k>.csv (or weights_hidden_<k>.csv) per series.
void write_weight_features(const std::filesystem::path& dir, const WeightFeatures& features);

}  // namespace gammasort
