#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gammasort/forward_model.hpp"
#include "gammasort/spectrum.hpp"

namespace gammasort {

enum class TaskKind { IsotopeID, ShieldingID, GaugeBinary };

std::string_view to_string(TaskKind task);
TaskKind parse_task(std::string_view text);
std::size_t class_count(TaskKind task);
std::vector<std::string> class_names(TaskKind task);

/// Class of a configuration under a task. GaugeBinary: 0 = CesiumSteel, 1 = NotCesiumSteel.
std::size_t class_of(TaskKind task, const SourceConfig& config);

inline constexpr std::size_t kCesiumSteelClass = 0;

/// Spectra with task labels. Labels are stored as class indices; one_hot()
/// expands them.
struct LabeledDataset {
    TaskKind task = TaskKind::IsotopeID;
    std::vector<Spectrum> inputs;
    std::vector<std::size_t> labels;
    std::vector<SourceConfig> grid;           // provenance table
    std::vector<std::size_t> config_index;    // per item, into grid

    std::size_t size() const noexcept { return inputs.size(); }
    bool empty() const noexcept { return inputs.empty(); }
    std::size_t n_classes() const { return class_count(task); }
    std::size_t n_channels() const { return inputs.empty() ? 0 : inputs.front().size(); }
    std::vector<double> one_hot(std::size_t item) const;

    /// Throws if labels, lengths, calibrations or dwells are inconsistent.
    void validate() const;
};

/// Cartesian product isotopes x distances x shieldings, in that nesting order.
std::vector<SourceConfig> make_grid(const NuclearData& data, const std::vector<IsotopeName>& isotopes,
                                    const std::vector<double>& distances_m, const std::vector<Material>& shieldings,
                                    double activity_bq = kDefaultActivityBq, bool include_background = false);

/// Five isotopes, 10..20 m, four shieldings: 220 configurations.
std::vector<SourceConfig> table_grid(const NuclearData& data);

/// Per-channel independent Poisson draw with mean counts * target/template dwell.
Spectrum poisson_sample(const Spectrum& tmpl, double target_dwell_s, std::uint64_t seed);

/// 24-hour templates for every configuration. `jobs` bounds worker threads.
std::vector<Spectrum> build_templates(const std::vector<SourceConfig>& grid, const DetectorModel& detector,
                                      unsigned jobs = 1);

/// `samples_per_config` realizations of each configuration at `dwell_s`.
/// Item (c, k) uses seed derive_seed(seed, {c, k}), so the result does not
/// depend on `jobs`.
LabeledDataset build_dataset(const std::vector<SourceConfig>& grid, TaskKind task, const DetectorModel& detector,
                             std::size_t samples_per_config, double dwell_s, std::uint64_t seed, unsigned jobs = 1);

/// Same as build_dataset but from prebuilt templates (one per grid entry).
LabeledDataset sample_dataset(const std::vector<SourceConfig>& grid, const std::vector<Spectrum>& templates,
                              TaskKind task, std::size_t samples_per_config, double dwell_s, std::uint64_t seed,
                              unsigned jobs = 1);

/// One noise-free item per configuration, rescaled to `dwell_s`.
LabeledDataset template_dataset(const std::vector<SourceConfig>& grid, TaskKind task, const DetectorModel& detector,
                                double dwell_s = 1.0, unsigned jobs = 1);
LabeledDataset template_dataset(const std::vector<SourceConfig>& grid, const std::vector<Spectrum>& templates,
                                TaskKind task, double dwell_s = 1.0);

/// Shuffled disjoint partition; the first part has floor(n * train_fraction) items.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, double train_fraction, std::uint64_t seed);

/// Rebins every input to `n_channels`.
LabeledDataset rebin_dataset(const LabeledDataset& ds, std::size_t n_channels);

/// Replicates items of `positive_class` cyclically until positives make up at
/// least `positive_per_negative` times the number of other items.
LabeledDataset oversample(const LabeledDataset& ds, std::size_t positive_class, double positive_per_negative);

// Packed dataset CSV: header "label,config,dwell,c0,...", one row per item.
// The JSON manifest alongside records task, calibration, grid and seeds.
void save_packed_dataset(const std::filesystem::path& csv_path, const LabeledDataset& ds);
LabeledDataset load_packed_dataset(const std::filesystem::path& csv_path, TaskKind task,
                                   const EnergyCalibration& calibration, SpectrumKind kind,
                                   std::vector<SourceConfig> grid);

}  // namespace gammasort
