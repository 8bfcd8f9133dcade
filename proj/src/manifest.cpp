#include "gammasort/manifest.hpp"

#include <cstdio>
#include <stdexcept>

#include "gammasort/text_format.hpp"

namespace gammasort {
namespace {

using nlohmann::json;

constexpr int kManifestVersion = 1;

const json& require(const json& j, const char* key, const std::filesystem::path& where) {
    const auto it = j.find(key);
    if (it == j.end()) throw std::runtime_error(where.string() + ": missing key '" + key + "'");
    return *it;
}

void check_format(const json& j, std::string_view expected, const std::filesystem::path& where) {
    if (!j.is_object() || j.value("format", "") != expected) {
        throw std::runtime_error(where.string() + ": not a " + std::string(expected) + " manifest");
    }
    if (j.value("version", 0) != kManifestVersion) {
        throw std::runtime_error(where.string() + ": unsupported manifest version");
    }
}

std::string template_file_name(std::size_t index, const SourceConfig& c) {
    char idx[16];
    std::snprintf(idx, sizeof idx, "t%03zu", index);
    return std::string(idx) + "_" + std::string(to_string(c.isotope.name)) + "_" + format_double(c.distance_m) + "m_" +
           std::string(to_string(c.shielding.material)) + ".csv";
}

}  // namespace

json to_json(const SourceConfig& c) {
    return {{"isotope", to_string(c.isotope.name)},
            {"distance_m", c.distance_m},
            {"shielding", to_string(c.shielding.material)},
            {"activity_bq", c.activity_bq},
            {"include_background", c.include_background}};
}

SourceConfig source_config_from_json(const json& j, const NuclearData& data) {
    try {
        return SourceConfig{data.isotope(parse_isotope(j.at("isotope").get<std::string>())),
                            j.at("activity_bq").get<double>(), j.at("distance_m").get<double>(),
                            data.shielding(parse_material(j.at("shielding").get<std::string>())),
                            j.at("include_background").get<bool>()};
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("invalid grid entry: ") + e.what());
    }
}

json to_json(const EnergyCalibration& cal) {
    return {{"e_min_kev", cal.e_min()}, {"e_max_kev", cal.e_max()}, {"n_channels", cal.n_channels()}};
}

EnergyCalibration calibration_from_json(const json& j) {
    try {
        return EnergyCalibration(j.at("e_min_kev").get<double>(), j.at("e_max_kev").get<double>(),
                                 j.at("n_channels").get<std::size_t>());
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("invalid calibration: ") + e.what());
    }
}

TemplateSet synthesize(const RunConfig& cfg, const NuclearData& data, unsigned jobs) {
    cfg.validate(data);
    TemplateSet set{cfg, cfg.grid.build(data), {}};
    set.templates = build_templates(set.grid, cfg.detector, jobs);
    return set;
}

void save_template_set(const std::filesystem::path& dir, const TemplateSet& set) {
    if (set.grid.empty()) throw std::invalid_argument("synth: empty grid");
    if (set.grid.size() != set.templates.size()) throw std::invalid_argument("synth: one template per config required");
    std::filesystem::create_directories(dir / "templates");
    json items = json::array();
    for (std::size_t i = 0; i < set.grid.size(); ++i) {
        const auto file = std::filesystem::path("templates") / template_file_name(i, set.grid[i]);
        save_spectrum(dir / file, set.templates[i]);
        auto item = to_json(set.grid[i]);
        item["index"] = i;
        item["file"] = file.generic_string();
        items.push_back(std::move(item));
    }
    write_json_file(dir / "manifest.json", {{"format", "gammasort-templates"},
                                            {"version", kManifestVersion},
                                            {"dwell_s", set.templates.front().dwell()},
                                            {"calibration", to_json(set.templates.front().calibration())},
                                            {"config", to_json(set.config)},
                                            {"items", items}});
}

TemplateSet load_template_set(const std::filesystem::path& dir, const NuclearData& data) {
    const auto path = dir / "manifest.json";
    if (!std::filesystem::is_regular_file(path)) {
        throw std::runtime_error("missing template manifest " + path.string());
    }
    const auto j = read_json_file(path);
    check_format(j, "gammasort-templates", path);
    TemplateSet set;
    set.config = run_config_from_json(require(j, "config", path));
    for (const auto& item : require(j, "items", path)) {
        set.grid.push_back(source_config_from_json(item, data));
        set.templates.push_back(load_spectrum(dir / item.at("file").get<std::string>()));
        if (set.templates.back().kind() != SpectrumKind::ExpectedTemplate) {
            throw std::runtime_error(path.string() + ": " + item.at("file").get<std::string>() + " is not a template");
        }
    }
    if (set.grid.empty()) throw std::runtime_error(path.string() + ": no templates listed");
    return set;
}

void save_dataset_dir(const std::filesystem::path& dir, const DatasetBundle& b) {
    const auto& ds = b.dataset;
    ds.validate();
    if (ds.empty()) throw std::invalid_argument("dataset is empty");
    std::filesystem::create_directories(dir);
    save_packed_dataset(dir / "dataset.csv", ds);
    json grid = json::array();
    for (const auto& c : ds.grid) grid.push_back(to_json(c));
    write_json_file(dir / "manifest.json", {{"format", "gammasort-dataset"},
                                            {"version", kManifestVersion},
                                            {"task", to_string(ds.task)},
                                            {"classes", class_names(ds.task)},
                                            {"kind", to_string(ds.inputs.front().kind())},
                                            {"dwell_s", ds.inputs.front().dwell()},
                                            {"samples_per_config", b.samples_per_config},
                                            {"seed", b.seed},
                                            {"items", ds.size()},
                                            {"calibration", to_json(ds.inputs.front().calibration())},
                                            {"grid", grid},
                                            {"file", "dataset.csv"}});
}

DatasetBundle load_dataset_dir(const std::filesystem::path& dir, const NuclearData& data) {
    const auto path = dir / "manifest.json";
    if (!std::filesystem::is_regular_file(path)) throw std::runtime_error("missing dataset manifest " + path.string());
    const auto j = read_json_file(path);
    check_format(j, "gammasort-dataset", path);
    std::vector<SourceConfig> grid;
    for (const auto& item : require(j, "grid", path)) grid.push_back(source_config_from_json(item, data));
    DatasetBundle b;
    b.seed = require(j, "seed", path).get<std::uint64_t>();
    b.samples_per_config = require(j, "samples_per_config", path).get<std::size_t>();
    b.dataset = load_packed_dataset(dir / require(j, "file", path).get<std::string>(),
                                    parse_task(require(j, "task", path).get<std::string>()),
                                    calibration_from_json(require(j, "calibration", path)),
                                    parse_spectrum_kind(require(j, "kind", path).get<std::string>()), std::move(grid));
    return b;
}

}  // namespace gammasort
