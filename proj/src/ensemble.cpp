#include "gammasort/ensemble.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "gammasort/random.hpp"
#include "gammasort/text_format.hpp"
#include "parallel.hpp"

namespace gammasort {

std::string_view to_string(TaskKind task) {
    switch (task) {
        case TaskKind::IsotopeID: return "isotope";
        case TaskKind::ShieldingID: return "shielding";
        case TaskKind::GaugeBinary: return "gauge";
    }
    return "";
}

TaskKind parse_task(std::string_view text) {
    for (auto t : {TaskKind::IsotopeID, TaskKind::ShieldingID, TaskKind::GaugeBinary}) {
        if (to_string(t) == text) return t;
    }
    throw std::invalid_argument("unknown task '" + std::string(text) + "'");
}

std::size_t class_count(TaskKind task) {
    switch (task) {
        case TaskKind::IsotopeID: return std::size(kAllIsotopes);
        case TaskKind::ShieldingID: return std::size(kAllMaterials);
        case TaskKind::GaugeBinary: return 2;
    }
    return 0;
}

std::vector<std::string> class_names(TaskKind task) {
    std::vector<std::string> names;
    switch (task) {
        case TaskKind::IsotopeID:
            for (auto i : kAllIsotopes) names.emplace_back(to_string(i));
            break;
        case TaskKind::ShieldingID:
            for (auto m : kAllMaterials) names.emplace_back(to_string(m));
            break;
        case TaskKind::GaugeBinary:
            names = {"CesiumSteel", "NotCesiumSteel"};
            break;
    }
    return names;
}

std::size_t class_of(TaskKind task, const SourceConfig& config) {
    switch (task) {
        case TaskKind::IsotopeID: return static_cast<std::size_t>(config.isotope.name);
        case TaskKind::ShieldingID: return static_cast<std::size_t>(config.shielding.material);
        case TaskKind::GaugeBinary:
            return (config.isotope.name == IsotopeName::Cesium && config.shielding.material == Material::Steel)
                       ? kCesiumSteelClass
                       : 1;
    }
    throw std::invalid_argument("class_of: unknown task");
}

std::vector<double> LabeledDataset::one_hot(std::size_t item) const {
    std::vector<double> v(n_classes(), 0.0);
    v.at(labels.at(item)) = 1.0;
    return v;
}

void LabeledDataset::validate() const {
    if (labels.size() != inputs.size() || config_index.size() != inputs.size()) {
        throw std::invalid_argument("LabeledDataset: inputs, labels and provenance differ in length");
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (labels[i] >= n_classes()) throw std::invalid_argument("LabeledDataset: label out of range");
        if (config_index[i] >= grid.size()) throw std::invalid_argument("LabeledDataset: provenance out of range");
        if (!(inputs[i].calibration() == inputs.front().calibration()) || inputs[i].dwell() != inputs.front().dwell()) {
            throw std::invalid_argument("LabeledDataset: spectra must share calibration and dwell");
        }
    }
}

std::vector<SourceConfig> make_grid(const NuclearData& data, const std::vector<IsotopeName>& isotopes,
                                    const std::vector<double>& distances_m, const std::vector<Material>& shieldings,
                                    double activity_bq, bool include_background) {
    std::vector<SourceConfig> grid;
    grid.reserve(isotopes.size() * distances_m.size() * shieldings.size());
    for (auto iso : isotopes) {
        for (double d : distances_m) {
            for (auto m : shieldings) {
                grid.push_back(SourceConfig{data.isotope(iso), activity_bq, d, data.shielding(m), include_background});
            }
        }
    }
    return grid;
}

std::vector<SourceConfig> table_grid(const NuclearData& data) {
    std::vector<double> distances;
    for (int d = 10; d <= 20; ++d) distances.push_back(d);
    return make_grid(data, {std::begin(kAllIsotopes), std::end(kAllIsotopes)}, distances,
                     {std::begin(kAllMaterials), std::end(kAllMaterials)});
}

Spectrum poisson_sample(const Spectrum& tmpl, double target_dwell_s, std::uint64_t seed) {
    if (tmpl.kind() != SpectrumKind::ExpectedTemplate) {
        throw std::invalid_argument("poisson_sample: input must be an expected-count template");
    }
    if (!(target_dwell_s > 0.0)) throw std::invalid_argument("poisson_sample: dwell must be positive");
    const double scale = target_dwell_s / tmpl.dwell();
    Philox4x32 rng(seed);
    std::vector<double> counts(tmpl.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        counts[i] = static_cast<double>(sample_poisson(rng, tmpl[i] * scale));
    }
    return Spectrum(std::move(counts), tmpl.calibration(), target_dwell_s, SpectrumKind::SampledRealization);
}

std::vector<Spectrum> build_templates(const std::vector<SourceConfig>& grid, const DetectorModel& detector,
                                      unsigned jobs) {
    std::vector<std::optional<Spectrum>> slots(grid.size());
    detail::parallel_for(grid.size(), jobs,
                         [&](std::size_t i) { slots[i] = build_template(grid[i], detector, kTemplateDwellS); });
    std::vector<Spectrum> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

LabeledDataset sample_dataset(const std::vector<SourceConfig>& grid, const std::vector<Spectrum>& templates,
                              TaskKind task, std::size_t samples_per_config, double dwell_s, std::uint64_t seed,
                              unsigned jobs) {
    if (grid.empty()) throw std::invalid_argument("build_dataset: empty grid");
    if (samples_per_config == 0) throw std::invalid_argument("build_dataset: samples_per_config must be positive");
    if (templates.size() != grid.size()) throw std::invalid_argument("build_dataset: one template per config required");

    const std::size_t n = grid.size() * samples_per_config;
    std::vector<std::optional<Spectrum>> slots(n);
    detail::parallel_for(n, jobs, [&](std::size_t i) {
        const std::size_t c = i / samples_per_config;
        const std::size_t k = i % samples_per_config;
        slots[i] = poisson_sample(templates[c], dwell_s, derive_seed(seed, {c, k}));
    });

    LabeledDataset ds;
    ds.task = task;
    ds.grid = grid;
    ds.inputs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i / samples_per_config;
        ds.inputs.push_back(std::move(*slots[i]));
        ds.labels.push_back(class_of(task, grid[c]));
        ds.config_index.push_back(c);
    }
    return ds;
}

LabeledDataset build_dataset(const std::vector<SourceConfig>& grid, TaskKind task, const DetectorModel& detector,
                             std::size_t samples_per_config, double dwell_s, std::uint64_t seed, unsigned jobs) {
    if (grid.empty()) throw std::invalid_argument("build_dataset: empty grid");
    if (samples_per_config == 0) throw std::invalid_argument("build_dataset: samples_per_config must be positive");
    return sample_dataset(grid, build_templates(grid, detector, jobs), task, samples_per_config, dwell_s, seed, jobs);
}

LabeledDataset template_dataset(const std::vector<SourceConfig>& grid, const std::vector<Spectrum>& templates,
                                TaskKind task, double dwell_s) {
    if (grid.empty()) throw std::invalid_argument("template_dataset: empty grid");
    if (templates.size() != grid.size()) throw std::invalid_argument("template_dataset: one template per config required");
    LabeledDataset ds;
    ds.task = task;
    ds.grid = grid;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        ds.inputs.push_back(rescale_dwell(templates[c], dwell_s));
        ds.labels.push_back(class_of(task, grid[c]));
        ds.config_index.push_back(c);
    }
    return ds;
}

LabeledDataset template_dataset(const std::vector<SourceConfig>& grid, TaskKind task, const DetectorModel& detector,
                                double dwell_s, unsigned jobs) {
    if (grid.empty()) throw std::invalid_argument("template_dataset: empty grid");
    return template_dataset(grid, build_templates(grid, detector, jobs), task, dwell_s);
}

namespace {

LabeledDataset subset(const LabeledDataset& ds, const std::vector<std::size_t>& idx) {
    LabeledDataset out;
    out.task = ds.task;
    out.grid = ds.grid;
    for (auto i : idx) {
        out.inputs.push_back(ds.inputs[i]);
        out.labels.push_back(ds.labels[i]);
        out.config_index.push_back(ds.config_index[i]);
    }
    return out;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, double train_fraction, std::uint64_t seed) {
    if (ds.empty()) throw std::invalid_argument("split: empty dataset");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("split: fraction must be in (0, 1)");
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(ds.size()) * train_fraction));
    if (n_train == 0 || n_train == ds.size()) throw std::invalid_argument("split: fraction leaves one side empty");

    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Philox4x32 rng(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.below(i + 1)]);
    }
    const std::vector<std::size_t> a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    const std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return {subset(ds, a), subset(ds, b)};
}

LabeledDataset rebin_dataset(const LabeledDataset& ds, std::size_t n_channels) {
    LabeledDataset out = ds;
    for (auto& s : out.inputs) s = rebin_to(s, n_channels);
    return out;
}

LabeledDataset oversample(const LabeledDataset& ds, std::size_t positive_class, double positive_per_negative) {
    if (!(positive_per_negative > 0.0)) throw std::invalid_argument("oversample: ratio must be positive");
    std::vector<std::size_t> positives;
    std::size_t negatives = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] == positive_class) {
            positives.push_back(i);
        } else {
            ++negatives;
        }
    }
    if (positives.empty()) throw std::invalid_argument("oversample: no items of the positive class");
    const auto target = static_cast<std::size_t>(std::ceil(static_cast<double>(negatives) * positive_per_negative));
    std::vector<std::size_t> extra;
    for (std::size_t k = positives.size(); k < target; ++k) {
        extra.push_back(positives[k % positives.size()]);
    }
    LabeledDataset out = ds;
    const auto more = subset(ds, extra);
    out.inputs.insert(out.inputs.end(), more.inputs.begin(), more.inputs.end());
    out.labels.insert(out.labels.end(), more.labels.begin(), more.labels.end());
    out.config_index.insert(out.config_index.end(), more.config_index.begin(), more.config_index.end());
    return out;
}

void save_packed_dataset(const std::filesystem::path& csv_path, const LabeledDataset& ds) {
    ds.validate();
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    out << "label,config,dwell";
    for (std::size_t c = 0; c < ds.n_channels(); ++c) out << ",c" << c;
    out << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << ds.labels[i] << ',' << ds.config_index[i] << ',' << format_double(ds.inputs[i].dwell());
        for (double v : ds.inputs[i].counts()) out << ',' << format_double(v);
        out << '\n';
    }
}

LabeledDataset load_packed_dataset(const std::filesystem::path& csv_path, TaskKind task,
                                   const EnergyCalibration& calibration, SpectrumKind kind,
                                   std::vector<SourceConfig> grid) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + csv_path.string());
    LabeledDataset ds;
    ds.task = task;
    ds.grid = std::move(grid);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        const auto text = trim(line);
        if (text.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto fields = split(text, ',');
        if (fields.size() != 3 + calibration.n_channels()) {
            throw std::runtime_error(csv_path.string() + ": row has wrong number of columns");
        }
        std::vector<double> counts;
        counts.reserve(calibration.n_channels());
        for (std::size_t c = 3; c < fields.size(); ++c) counts.push_back(parse_double(fields[c]));
        ds.labels.push_back(parse_u64(fields[0]));
        ds.config_index.push_back(parse_u64(fields[1]));
        ds.inputs.emplace_back(std::move(counts), calibration, parse_double(fields[2]), kind);
    }
    ds.validate();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] != class_of(task, ds.grid[ds.config_index[i]])) {
            throw std::runtime_error(csv_path.string() + ": label does not match its configuration");
        }
    }
    return ds;
}

}  // namespace gammasort
