#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "gammasort/ensemble.hpp"
#include "gammasort/run_config.hpp"

namespace gammasort {

nlohmann::json to_json(const SourceConfig& config);
SourceConfig source_config_from_json(const nlohmann::json& j, const NuclearData& data);
nlohmann::json to_json(const EnergyCalibration& cal);
EnergyCalibration calibration_from_json(const nlohmann::json& j);

/// Templates for every grid cell, as written by `synth`.
struct TemplateSet {
    RunConfig config;
    std::vector<SourceConfig> grid;
    std::vector<Spectrum> templates;
};

TemplateSet synthesize(const RunConfig& cfg, const NuclearData& data, unsigned jobs = 1);

/// Writes manifest.json plus templates/tNNN_<isotope>_<distance>m_<shielding>.csv.
void save_template_set(const std::filesystem::path& dir, const TemplateSet& set);
TemplateSet load_template_set(const std::filesystem::path& dir, const NuclearData& data);

/// A packed dataset with the settings that produced it.
struct DatasetBundle {
    LabeledDataset dataset;
    std::uint64_t seed = 0;
    std::size_t samples_per_config = 1;
};

/// Writes manifest.json and dataset.csv.
void save_dataset_dir(const std::filesystem::path& dir, const DatasetBundle& bundle);
DatasetBundle load_dataset_dir(const std::filesystem::path& dir, const NuclearData& data);

}  // namespace gammasort
