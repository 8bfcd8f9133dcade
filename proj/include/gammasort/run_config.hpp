#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gammasort/ensemble.hpp"
#include "gammasort/experiment.hpp"
#include "gammasort/forward_model.hpp"

namespace gammasort {

struct GridSpec {
    std::vector<IsotopeName> isotopes;
    std::vector<double> distances_m;
    std::vector<Material> shieldings;
    double activity_bq = kDefaultActivityBq;
    bool include_background = false;

    /// All five isotopes, 10..20 m in 1 m steps, all four shieldings.
    static GridSpec table();
    std::size_t size() const { return isotopes.size() * distances_m.size() * shieldings.size(); }
    std::vector<SourceConfig> build(const NuclearData& data) const;
};

enum class TrainSource { Templates, Ensemble };

std::string_view to_string(TrainSource source);
TrainSource parse_train_source(std::string_view text);

/// Everything needed to reproduce one run. Serialized in full to config.json.
struct RunConfig {
    std::string scenario;  // "isotope", "shielding", "gauge" or empty for custom runs
    std::uint64_t seed = 1;
    DetectorModel detector;
    GridSpec grid = GridSpec::table();
    /// Extra test set with background added, evaluated but never trained on.
    std::optional<GridSpec> pseudo_measured;
    TaskKind task = TaskKind::IsotopeID;
    std::vector<Architecture> architectures{Architecture::linear()};
    std::size_t rebin_channels = 256;
    double dwell_s = 1.0;
    TrainSource train_source = TrainSource::Templates;
    std::size_t train_samples_per_config = 10;  // ensemble training only
    std::size_t test_samples_per_config = 20;
    double gauge_positive_ratio = 0.25;  // positives per negative after oversampling; 0 disables
    std::size_t epochs = 100;
    std::size_t batch_size = 32;  // 0 = full batch
    bool max_normalize = false;
    AdamHyper adam;
    std::vector<std::size_t> checkpoints{10, 100};

    void validate(const NuclearData& data) const;
    TrainConfig train_config(const Architecture& arch) const;
};

/// Defaults for a named scenario. Throws std::invalid_argument for unknown names.
RunConfig scenario_defaults(std::string_view name);

inline constexpr std::string_view kScenarioNames[] = {"isotope", "shielding", "gauge"};

nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const GridSpec& grid);

/// Applies the keys present in `j` on top of `base`. Unknown keys and names
/// are rejected with the dotted path of the offending key.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
GridSpec grid_from_json(const nlohmann::json& j, const std::string& path, GridSpec base = {});

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});
void save_run_config(const std::filesystem::path& path, const RunConfig& cfg);

/// Reads a whole JSON file; errors name the file.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `j` with two-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace gammasort
