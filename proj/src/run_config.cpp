#include "gammasort/run_config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace gammasort {
namespace {

using nlohmann::json;

std::string join_path(const std::string& parent, std::string_view key) {
    return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

/// Strict view of a JSON object: every key must be consumed by get().
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    const json* find(std::string_view key) {
        seen_.emplace(key);
        const auto it = j_.find(std::string(key));
        return it == j_.end() ? nullptr : &*it;
    }

    template <class T>
    void get(std::string_view key, T& out) {
        if (const json* v = find(key)) out = convert<T>(*v, join_path(path_, key));
    }

    std::string path(std::string_view key) const { return join_path(path_, key); }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.contains(key)) fail(join_path(path_, key), "unknown key");
        }
    }

    template <class T>
    static T convert(const json& v, const std::string& path) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(path, "expected true or false");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
                fail(path, "expected a non-negative integer");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) fail(path, "expected a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(path, "expected a string");
        }
        return v.get<T>();
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

template <class T, class Parse>
std::vector<T> parse_names(const json& v, const std::string& path, Parse parse) {
    if (!v.is_array()) fail(path, "expected an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto item = path + "[" + std::to_string(i) + "]";
        try {
            out.push_back(parse(ObjectReader::convert<std::string>(v[i], item)));
        } catch (const std::invalid_argument& e) {
            if (std::string_view(e.what()).starts_with("config:")) throw;
            fail(item, e.what());
        }
    }
    return out;
}

template <class T>
std::vector<T> parse_numbers(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array");
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(ObjectReader::convert<T>(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

json arch_json(const Architecture& a) {
    json j{{"kind", to_string(a.kind)}};
    if (a.kind == ArchKind::HiddenTanh) j["hidden_width"] = a.hidden_width;
    return j;
}

Architecture arch_from_json(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    std::string kind = "linear";
    r.get("kind", kind);
    Architecture a;
    try {
        a.kind = parse_arch(kind);
    } catch (const std::invalid_argument& e) {
        fail(r.path("kind"), e.what());
    }
    if (a.kind == ArchKind::HiddenTanh) {
        a.hidden_width = 64;
        r.get("hidden_width", a.hidden_width);
    } else if (r.find("hidden_width") != nullptr) {
        fail(r.path("hidden_width"), "only valid for hidden_tanh");
    }
    r.finish();
    return a;
}

}  // namespace

GridSpec GridSpec::table() {
    GridSpec g;
    g.isotopes.assign(std::begin(kAllIsotopes), std::end(kAllIsotopes));
    for (int d = 10; d <= 20; ++d) g.distances_m.push_back(d);
    g.shieldings.assign(std::begin(kAllMaterials), std::end(kAllMaterials));
    return g;
}

std::vector<SourceConfig> GridSpec::build(const NuclearData& data) const {
    return make_grid(data, isotopes, distances_m, shieldings, activity_bq, include_background);
}

std::string_view to_string(TrainSource source) {
    return source == TrainSource::Templates ? "templates" : "ensemble";
}

TrainSource parse_train_source(std::string_view text) {
    if (text == "templates") return TrainSource::Templates;
    if (text == "ensemble") return TrainSource::Ensemble;
    throw std::invalid_argument("unknown train source '" + std::string(text) + "' (expected templates or ensemble)");
}

void RunConfig::validate(const NuclearData& data) const {
    detector.validate();
    if (grid.size() == 0) throw std::invalid_argument("config: grid is empty");
    for (const GridSpec* g : {&grid, pseudo_measured ? &*pseudo_measured : nullptr}) {
        if (g == nullptr) continue;
        for (double d : g->distances_m) {
            if (!(d > 0.0)) throw std::invalid_argument("config: distances must be positive");
        }
        if (!(g->activity_bq > 0.0)) throw std::invalid_argument("config: activity must be positive");
        for (auto iso : g->isotopes) {
            for (const auto& line : data.isotope(iso).lines) {
                if (!(line.energy_kev < detector.calibration.e_max())) {
                    throw std::invalid_argument("config: " + std::string(to_string(iso)) +
                                                " has lines above the calibration range");
                }
            }
        }
    }
    if (pseudo_measured && pseudo_measured->size() == 0) {
        throw std::invalid_argument("config: pseudo_measured grid is empty");
    }
    if (architectures.empty()) throw std::invalid_argument("config: no architectures");
    const auto n = detector.calibration.n_channels();
    if (rebin_channels == 0 || rebin_channels > n || n % rebin_channels != 0) {
        throw std::invalid_argument("config: rebin_channels " + std::to_string(rebin_channels) + " does not divide " +
                                    std::to_string(n));
    }
    if (!(dwell_s > 0.0)) throw std::invalid_argument("config: dwell_s must be positive");
    if (test_samples_per_config == 0) throw std::invalid_argument("config: test_samples_per_config must be >= 1");
    if (train_source == TrainSource::Ensemble && train_samples_per_config == 0) {
        throw std::invalid_argument("config: train_samples_per_config must be >= 1");
    }
    if (!(gauge_positive_ratio >= 0.0)) throw std::invalid_argument("config: gauge_positive_ratio must be >= 0");
    for (const auto& a : architectures) train_config(a).validate();
}

TrainConfig RunConfig::train_config(const Architecture& arch) const {
    TrainConfig t;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.seed = seed;
    t.task = task;
    t.arch = arch;
    t.dwell_s = dwell_s;
    t.adam = adam;
    t.max_normalize = max_normalize;
    t.checkpoints = checkpoints;
    return t;
}

RunConfig scenario_defaults(std::string_view name) {
    RunConfig c;
    c.scenario = std::string(name);
    if (name == "isotope") {
        c.task = TaskKind::IsotopeID;
        c.max_normalize = true;
        GridSpec measured;
        measured.isotopes = {IsotopeName::Cesium, IsotopeName::Cobalt, IsotopeName::Barium};
        measured.distances_m = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        measured.shieldings = {Material::Bare, Material::Steel};
        measured.include_background = true;
        c.pseudo_measured = measured;
    } else if (name == "shielding") {
        c.task = TaskKind::ShieldingID;
    } else if (name == "gauge") {
        c.task = TaskKind::GaugeBinary;
        c.architectures = {Architecture::linear(), Architecture::hidden_tanh(64)};
    } else {
        throw std::invalid_argument("unknown scenario '" + std::string(name) + "' (expected isotope, shielding or gauge)");
    }
    return c;
}

json to_json(const GridSpec& g) {
    json iso = json::array(), mat = json::array();
    for (auto i : g.isotopes) iso.push_back(to_string(i));
    for (auto m : g.shieldings) mat.push_back(to_string(m));
    return {{"isotopes", iso},
            {"distances_m", g.distances_m},
            {"shieldings", mat},
            {"activity_bq", g.activity_bq},
            {"include_background", g.include_background}};
}

json to_json(const RunConfig& c) {
    const auto& d = c.detector;
    json archs = json::array();
    for (const auto& a : c.architectures) archs.push_back(arch_json(a));
    return {
        {"scenario", c.scenario},
        {"seed", c.seed},
        {"detector",
         {{"e_min_kev", d.calibration.e_min()},
          {"e_max_kev", d.calibration.e_max()},
          {"n_channels", d.calibration.n_channels()},
          {"face_area_cm2", d.face_area_cm2},
          {"intrinsic_efficiency", d.intrinsic_efficiency},
          {"resolution_fwhm_frac_at_662", d.resolution_fwhm_frac_at_662},
          {"compton_fraction", d.compton_fraction},
          {"background_rate_cps", d.background_rate_cps}}},
        {"grid", to_json(c.grid)},
        {"pseudo_measured", c.pseudo_measured ? to_json(*c.pseudo_measured) : json(nullptr)},
        {"task", to_string(c.task)},
        {"architectures", archs},
        {"rebin_channels", c.rebin_channels},
        {"dwell_s", c.dwell_s},
        {"train_source", to_string(c.train_source)},
        {"train_samples_per_config", c.train_samples_per_config},
        {"test_samples_per_config", c.test_samples_per_config},
        {"gauge_positive_ratio", c.gauge_positive_ratio},
        {"training",
         {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"max_normalize", c.max_normalize},
          {"checkpoints", c.checkpoints},
          {"adam", {{"lr", c.adam.lr}, {"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}}}},
    };
}

GridSpec grid_from_json(const json& j, const std::string& path, GridSpec g) {
    ObjectReader r(j, path);
    if (const json* v = r.find("isotopes")) {
        g.isotopes = parse_names<IsotopeName>(*v, r.path("isotopes"), parse_isotope);
    }
    if (const json* v = r.find("distances_m")) g.distances_m = parse_numbers<double>(*v, r.path("distances_m"));
    if (const json* v = r.find("shieldings")) {
        g.shieldings = parse_names<Material>(*v, r.path("shieldings"), parse_material);
    }
    r.get("activity_bq", g.activity_bq);
    r.get("include_background", g.include_background);
    r.finish();
    return g;
}

RunConfig run_config_from_json(const json& j, RunConfig c) {
    ObjectReader r(j, "");
    r.get("scenario", c.scenario);
    r.get("seed", c.seed);
    if (const json* v = r.find("detector")) {
        ObjectReader d(*v, "detector");
        double e_min = c.detector.calibration.e_min();
        double e_max = c.detector.calibration.e_max();
        std::size_t n = c.detector.calibration.n_channels();
        d.get("e_min_kev", e_min);
        d.get("e_max_kev", e_max);
        d.get("n_channels", n);
        try {
            c.detector.calibration = EnergyCalibration(e_min, e_max, n);
        } catch (const std::invalid_argument& e) {
            fail("detector", e.what());
        }
        d.get("face_area_cm2", c.detector.face_area_cm2);
        d.get("intrinsic_efficiency", c.detector.intrinsic_efficiency);
        d.get("resolution_fwhm_frac_at_662", c.detector.resolution_fwhm_frac_at_662);
        d.get("compton_fraction", c.detector.compton_fraction);
        d.get("background_rate_cps", c.detector.background_rate_cps);
        d.finish();
    }
    if (const json* v = r.find("grid")) c.grid = grid_from_json(*v, "grid", c.grid);
    if (const json* v = r.find("pseudo_measured")) {
        if (v->is_null()) {
            c.pseudo_measured.reset();
        } else {
            c.pseudo_measured = grid_from_json(*v, "pseudo_measured", c.pseudo_measured.value_or(GridSpec{}));
        }
    }
    if (const json* v = r.find("task")) {
        try {
            c.task = parse_task(ObjectReader::convert<std::string>(*v, "task"));
        } catch (const std::invalid_argument& e) {
            if (std::string_view(e.what()).starts_with("config:")) throw;
            fail("task", e.what());
        }
    }
    if (const json* v = r.find("architectures")) {
        if (!v->is_array()) fail("architectures", "expected an array");
        c.architectures.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            c.architectures.push_back(arch_from_json((*v)[i], "architectures[" + std::to_string(i) + "]"));
        }
    }
    r.get("rebin_channels", c.rebin_channels);
    r.get("dwell_s", c.dwell_s);
    if (const json* v = r.find("train_source")) {
        try {
            c.train_source = parse_train_source(ObjectReader::convert<std::string>(*v, "train_source"));
        } catch (const std::invalid_argument& e) {
            if (std::string_view(e.what()).starts_with("config:")) throw;
            fail("train_source", e.what());
        }
    }
    r.get("train_samples_per_config", c.train_samples_per_config);
    r.get("test_samples_per_config", c.test_samples_per_config);
    r.get("gauge_positive_ratio", c.gauge_positive_ratio);
    if (const json* v = r.find("training")) {
        ObjectReader t(*v, "training");
        t.get("epochs", c.epochs);
        t.get("batch_size", c.batch_size);
        t.get("max_normalize", c.max_normalize);
        if (const json* cp = t.find("checkpoints")) {
            c.checkpoints = parse_numbers<std::size_t>(*cp, t.path("checkpoints"));
        }
        if (const json* a = t.find("adam")) {
            ObjectReader ar(*a, "training.adam");
            ar.get("lr", c.adam.lr);
            ar.get("beta1", c.adam.beta1);
            ar.get("beta2", c.adam.beta2);
            ar.get("epsilon", c.adam.epsilon);
            ar.finish();
        }
        t.finish();
    }
    r.finish();
    return c;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": invalid JSON: " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("error writing " + path.string());
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    return run_config_from_json(read_json_file(path), std::move(base));
}

void save_run_config(const std::filesystem::path& path, const RunConfig& cfg) { write_json_file(path, to_json(cfg)); }

}  // namespace gammasort
