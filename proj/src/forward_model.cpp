#include "gammasort/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gammasort/text_format.hpp"

#ifndef GAMMASORT_BUNDLED_DATA_DIR
#define GAMMASORT_BUNDLED_DATA_DIR "data"
#endif

namespace gammasort {
namespace {

constexpr double kElectronMassKev = 511.0;
// Photopeak window half-width in units of FWHM (about 7 sigma).
constexpr double kPeakWindowFwhm = 3.0;
constexpr double kBackgroundSlopeKev = 150.0;
constexpr double kBackgroundPlateauKev = 2614.0;
constexpr double kBackgroundExpShare = 0.7;

std::string_view snake_name(Material m) {
    switch (m) {
        case Material::Bare: return "bare";
        case Material::Concrete: return "concrete";
        case Material::Steel: return "steel";
        case Material::DepletedUranium: return "depleted_uranium";
    }
    return "";
}

/// Rows of a small CSV table, skipping '#' comments and the header row.
std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read data table " + path.string());
    }
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const auto fields = split(text, ',');
        if (fields.size() != columns) {
            throw std::runtime_error(path.string() + ": malformed row '" + std::string(text) + "'");
        }
        std::vector<std::string> row;
        for (auto f : fields) row.emplace_back(trim(f));
        rows.push_back(std::move(row));
    }
    return rows;
}

double overlap(double lo, double hi, double a, double b) { return std::max(0.0, std::min(hi, b) - std::max(lo, a)); }

void add_flat(std::vector<double>& counts, const EnergyCalibration& cal, double from_kev, double to_kev,
              double amount) {
    if (amount == 0.0 || !(to_kev > from_kev)) return;
    const double density = amount / (to_kev - from_kev);
    const double w = cal.channel_width();
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double lo = cal.e_min() + static_cast<double>(i) * w;
        const double hi = lo + w;
        const double ov = overlap(lo, hi, from_kev, to_kev);
        if (ov > 0.0) counts[i] += density * ov;
    }
}

// Scattered-photon energies from E down to the backscatter energy, Klein-Nishina weighted
// per unit energy. Normalized so the shelf sums to `amount`.
void add_klein_nishina(std::vector<double>& counts, const EnergyCalibration& cal, double energy, double amount) {
    if (amount == 0.0) return;
    const double lo_e = backscatter_energy(energy);
    auto density = [&](double e) {
        const double r = e / energy;
        const double cos_t = 1.0 - kElectronMassKev * (1.0 / e - 1.0 / energy);
        return r + 1.0 / r - (1.0 - cos_t * cos_t);
    };
    constexpr int kSub = 8;
    const double w = cal.channel_width();
    std::vector<double> shape(counts.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double lo = std::max(cal.e_min() + static_cast<double>(i) * w, lo_e);
        const double hi = std::min(cal.e_min() + static_cast<double>(i + 1) * w, energy);
        if (!(hi > lo)) continue;
        const double step = (hi - lo) / kSub;
        for (int k = 0; k < kSub; ++k) shape[i] += density(lo + (k + 0.5) * step) * step;
        total += shape[i];
    }
    if (!(total > 0.0)) return;
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += amount * shape[i] / total;
}

void add_line(std::vector<double>& counts, const DetectorModel& det, double energy, double detections) {
    const auto& cal = det.calibration;
    if (!(energy > 0.0) || !(energy < cal.e_max())) {
        throw std::invalid_argument("line_response: line at " + format_double(energy) + " keV outside calibration");
    }
    if (!(detections >= 0.0) || !std::isfinite(detections)) {
        throw std::invalid_argument("line_response: expected detections must be finite and non-negative");
    }
    if (detections == 0.0) return;

    const double peak = detections * (1.0 - det.compton_fraction);
    const double fwhm = det.fwhm(energy);
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    const double window_lo = energy - kPeakWindowFwhm * fwhm;
    const double window_hi = energy + kPeakWindowFwhm * fwhm;
    const double scale = 1.0 / (sigma * std::numbers::sqrt2);
    const double w = cal.channel_width();
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double lo = std::max(cal.e_min() + static_cast<double>(i) * w, window_lo);
        const double hi = std::min(cal.e_min() + static_cast<double>(i + 1) * w, window_hi);
        if (!(hi > lo)) continue;
        counts[i] += peak * 0.5 * (std::erf((hi - energy) * scale) - std::erf((lo - energy) * scale));
    }
    add_flat(counts, cal, 0.0, compton_edge(energy), detections * det.compton_fraction);
}

}  // namespace

std::string_view to_string(IsotopeName name) {
    switch (name) {
        case IsotopeName::Cesium: return "Cesium";
        case IsotopeName::Cobalt: return "Cobalt";
        case IsotopeName::Barium: return "Barium";
        case IsotopeName::Selenium: return "Selenium";
        case IsotopeName::Iridium: return "Iridium";
    }
    return "";
}

std::string_view to_string(Material material) {
    switch (material) {
        case Material::Bare: return "Bare";
        case Material::Concrete: return "Concrete";
        case Material::Steel: return "Steel";
        case Material::DepletedUranium: return "DepletedUranium";
    }
    return "";
}

IsotopeName parse_isotope(std::string_view text) {
    for (auto name : kAllIsotopes) {
        if (to_string(name) == text) return name;
    }
    throw std::invalid_argument("unknown isotope '" + std::string(text) + "'");
}

Material parse_material(std::string_view text) {
    for (auto m : kAllMaterials) {
        if (to_string(m) == text) return m;
    }
    throw std::invalid_argument("unknown shielding material '" + std::string(text) + "'");
}

double Isotope::max_line_energy() const {
    double e = 0.0;
    for (const auto& l : lines) e = std::max(e, l.energy_kev);
    return e;
}

double DetectorModel::fwhm(double energy_kev) const {
    return resolution_fwhm_frac_at_662 * 662.0 * std::sqrt(energy_kev / 662.0);
}

void DetectorModel::validate() const {
    auto fraction = [](double f) { return f > 0.0 && f <= 1.0; };
    if (!(face_area_cm2 > 0.0)) throw std::invalid_argument("DetectorModel: face_area must be positive");
    if (!fraction(intrinsic_efficiency) || !fraction(resolution_fwhm_frac_at_662) || !fraction(compton_fraction)) {
        throw std::invalid_argument("DetectorModel: fractions must lie in (0, 1]");
    }
    if (!(background_rate_cps >= 0.0)) throw std::invalid_argument("DetectorModel: background rate must be >= 0");
}

NuclearData NuclearData::load(const std::filesystem::path& dir) {
    NuclearData data;
    for (auto name : kAllIsotopes) data.isotopes_.push_back(Isotope{name, {}});
    for (const auto& row : read_table(dir / "nuclides.csv", 3)) {
        const auto name = parse_isotope(row[0]);
        const GammaLine line{parse_double(row[1]), parse_double(row[2])};
        if (!(line.energy_kev > 0.0) || !(line.intensity > 0.0 && line.intensity <= 1.0)) {
            throw std::runtime_error("nuclides.csv: invalid line for " + row[0]);
        }
        data.isotopes_[static_cast<std::size_t>(name)].lines.push_back(line);
    }
    for (const auto& iso : data.isotopes_) {
        if (iso.lines.empty()) {
            throw std::runtime_error("nuclides.csv: no lines for " + std::string(to_string(iso.name)));
        }
    }

    for (auto m : kAllMaterials) data.shieldings_.push_back(Shielding{m, 0.0, {}, 0.0, {}});
    for (const auto& row : read_table(dir / "shielding.csv", 3)) {
        auto& s = data.shieldings_[static_cast<std::size_t>(parse_material(row[0]))];
        s.thickness_cm = parse_double(row[1]);
        s.scatter_fraction = parse_double(row[2]);
        if (!(s.thickness_cm >= 0.0) || !(s.scatter_fraction >= 0.0 && s.scatter_fraction <= 1.0)) {
            throw std::runtime_error("shielding.csv: invalid row for " + row[0]);
        }
    }
    for (const auto& row : read_table(dir / "shield_emission.csv", 3)) {
        auto& s = data.shieldings_[static_cast<std::size_t>(parse_material(row[0]))];
        s.emission.push_back(GammaLine{parse_double(row[1]), parse_double(row[2])});
    }
    for (auto& s : data.shieldings_) {
        if (s.material == Material::Bare) {
            if (s.thickness_cm != 0.0) throw std::runtime_error("shielding.csv: Bare must have zero thickness");
            continue;
        }
        const auto file = dir / ("attenuation_" + std::string(snake_name(s.material)) + ".csv");
        for (const auto& row : read_table(file, 2)) {
            const AttenuationPoint p{parse_double(row[0]), parse_double(row[1])};
            if (!(p.energy_kev > 0.0) || !(p.mu_per_cm > 0.0)) {
                throw std::runtime_error(file.string() + ": energies and mu must be positive");
            }
            if (!s.attenuation.empty() && !(p.energy_kev > s.attenuation.back().energy_kev)) {
                throw std::runtime_error(file.string() + ": energies must be strictly increasing");
            }
            s.attenuation.push_back(p);
        }
        if (s.attenuation.size() < 2) throw std::runtime_error(file.string() + ": need at least two rows");
    }
    return data;
}

std::filesystem::path NuclearData::default_dir() {
    if (const char* env = std::getenv("GAMMASORT_DATA_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return GAMMASORT_BUNDLED_DATA_DIR;
}

const NuclearData& NuclearData::bundled() {
    static const NuclearData data = load(default_dir());
    return data;
}

const Isotope& NuclearData::isotope(IsotopeName name) const { return isotopes_.at(static_cast<std::size_t>(name)); }

const Shielding& NuclearData::shielding(Material material) const {
    return shieldings_.at(static_cast<std::size_t>(material));
}

double attenuation_factor(const Shielding& shielding, double energy_kev) {
    if (shielding.thickness_cm == 0.0) {
        return 1.0;
    }
    const auto& table = shielding.attenuation;
    if (table.size() < 2 || energy_kev < table.front().energy_kev || energy_kev > table.back().energy_kev) {
        throw std::invalid_argument("attenuation_factor: " + format_double(energy_kev) + " keV outside table for " +
                                    std::string(to_string(shielding.material)));
    }
    auto hi = std::lower_bound(table.begin(), table.end(), energy_kev,
                               [](const AttenuationPoint& p, double e) { return p.energy_kev < e; });
    double mu = hi->mu_per_cm;
    if (hi->energy_kev != energy_kev) {
        const auto lo = hi - 1;
        const double t = std::log(energy_kev / lo->energy_kev) / std::log(hi->energy_kev / lo->energy_kev);
        mu = std::exp(std::log(lo->mu_per_cm) + t * std::log(hi->mu_per_cm / lo->mu_per_cm));
    }
    return std::exp(-mu * shielding.thickness_cm);
}

double compton_edge(double energy_kev) {
    const double r = 2.0 * energy_kev / kElectronMassKev;
    return energy_kev * r / (1.0 + r);
}

double backscatter_energy(double energy_kev) { return energy_kev / (1.0 + 2.0 * energy_kev / kElectronMassKev); }

Spectrum line_response(const DetectorModel& detector, double line_energy_kev, double expected_detections,
                       double dwell_s) {
    std::vector<double> counts(detector.calibration.n_channels(), 0.0);
    add_line(counts, detector, line_energy_kev, expected_detections);
    return Spectrum(std::move(counts), detector.calibration, dwell_s, SpectrumKind::ExpectedTemplate);
}

double geometric_fraction(double distance_m, double face_area_cm2) {
    if (!(distance_m > 0.0)) throw std::invalid_argument("geometric_fraction: distance must be positive");
    const double r_cm = 100.0 * distance_m;
    return face_area_cm2 / (4.0 * std::numbers::pi * (r_cm * r_cm));
}

Spectrum background_template(const DetectorModel& detector, double dwell_s) {
    if (!(dwell_s > 0.0)) throw std::invalid_argument("background_template: dwell must be positive");
    const auto& cal = detector.calibration;
    std::vector<double> shape(cal.n_channels(), 0.0);
    const double w = cal.channel_width();
    double norm = 0.0;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        const double lo = std::max(0.0, cal.e_min() + static_cast<double>(i) * w);
        const double hi = std::max(0.0, cal.e_min() + static_cast<double>(i + 1) * w);
        const double expo = std::exp(-lo / kBackgroundSlopeKev) - std::exp(-hi / kBackgroundSlopeKev);
        const double flat = overlap(lo, hi, 0.0, kBackgroundPlateauKev) / kBackgroundPlateauKev;
        shape[i] = kBackgroundExpShare * expo + (1.0 - kBackgroundExpShare) * flat;
        norm += shape[i];
    }
    const double total = detector.background_rate_cps * dwell_s;
    for (double& c : shape) c = norm > 0.0 ? c / norm * total : 0.0;
    return Spectrum(std::move(shape), cal, dwell_s, SpectrumKind::ExpectedTemplate);
}

Spectrum build_template(const SourceConfig& config, const DetectorModel& detector, double dwell_s) {
    if (!(dwell_s > 0.0)) throw std::invalid_argument("build_template: dwell must be positive");
    if (!(config.activity_bq > 0.0)) throw std::invalid_argument("build_template: activity must be positive");
    if (!(config.distance_m > 0.0)) throw std::invalid_argument("build_template: distance must be positive");
    detector.validate();

    const auto& cal = detector.calibration;
    const double geom = geometric_fraction(config.distance_m, detector.face_area_cm2);
    std::vector<double> counts(cal.n_channels(), 0.0);

    for (const auto& line : config.isotope.lines) {
        const double att = attenuation_factor(config.shielding, line.energy_kev);
        const double unshielded =
            config.activity_bq * dwell_s * line.intensity * geom * detector.intrinsic_efficiency;
        add_line(counts, detector, line.energy_kev, config.activity_bq * dwell_s * line.intensity * att * geom *
                                                        detector.intrinsic_efficiency);
        const double shelf = unshielded * (1.0 - att) * config.shielding.scatter_fraction;
        add_klein_nishina(counts, cal, line.energy_kev, shelf);
    }
    for (const auto& line : config.shielding.emission) {
        add_line(counts, detector, line.energy_kev,
                 config.activity_bq * dwell_s * line.intensity * geom * detector.intrinsic_efficiency);
    }

    Spectrum out(std::move(counts), cal, dwell_s, SpectrumKind::ExpectedTemplate);
    if (config.include_background) {
        out = out + background_template(detector, dwell_s);
    }
    return out;
}

}  // namespace gammasort
