#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "gammasort/experiment.hpp"
#include "gammasort/run_config.hpp"

namespace gammasort {

struct ScenarioData {
    LabeledDataset train;
    LabeledDataset test;
    std::optional<LabeledDataset> pseudo_measured;
};

/// Builds train/test (and pseudo-measured) sets for `cfg`, rebinned, with
/// gauge positives oversampled. Seeds derive from cfg.seed.
ScenarioData prepare_data(const RunConfig& cfg, const NuclearData& data, unsigned jobs = 1);

struct ArchRun {
    Architecture arch;
    std::filesystem::path dir;
    TrainResult result;
    std::optional<Evaluation> pseudo_measured;
};

struct ScenarioResult {
    std::vector<ArchRun> runs;
};

/// Directory holding one architecture's artifacts: `out` itself for a single
/// architecture, otherwise out/<arch name>.
std::filesystem::path arch_dir(const RunConfig& cfg, const std::filesystem::path& out, const Architecture& arch);

/// Trains every configured architecture on prepared data and writes
/// config.json plus, per architecture, model.json, metrics.csv, confusion.csv,
/// checkpoint models and confusions, and weight series. Multiple
/// architectures also get comparison.csv at the top.
ScenarioResult train_and_write(const RunConfig& cfg, const ScenarioData& data, const std::filesystem::path& out,
                               unsigned jobs = 1);

/// prepare_data + train_and_write.
ScenarioResult run_scenario(const RunConfig& cfg, const std::filesystem::path& out, unsigned jobs = 1);

/// Per-class accuracy table: one row per architecture and recorded checkpoint.
void write_comparison_csv(const std::filesystem::path& path, const std::vector<ArchRun>& runs,
                          const std::vector<std::string>& class_labels);

}  // namespace gammasort
