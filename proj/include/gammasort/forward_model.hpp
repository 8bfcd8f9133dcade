#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gammasort/spectrum.hpp"

namespace gammasort {

enum class IsotopeName { Cesium, Cobalt, Barium, Selenium, Iridium };
enum class Material { Bare, Concrete, Steel, DepletedUranium };

inline constexpr IsotopeName kAllIsotopes[] = {IsotopeName::Cesium, IsotopeName::Cobalt, IsotopeName::Barium,
                                               IsotopeName::Selenium, IsotopeName::Iridium};
inline constexpr Material kAllMaterials[] = {Material::Bare, Material::Concrete, Material::Steel,
                                             Material::DepletedUranium};

std::string_view to_string(IsotopeName name);
std::string_view to_string(Material material);
IsotopeName parse_isotope(std::string_view text);
Material parse_material(std::string_view text);

struct GammaLine {
    double energy_kev;
    double intensity;  // photons per decay
};

struct Isotope {
    IsotopeName name;
    std::vector<GammaLine> lines;

    double max_line_energy() const;
};

struct AttenuationPoint {
    double energy_kev;
    double mu_per_cm;
};

/// A slab between source and detector.
///
/// `scatter_fraction` is the share of photons removed by the slab that still
/// reach the detector as a downscattered shelf. `emission` holds the slab's own
/// lines, expressed per source decay so templates stay linear in activity.
struct Shielding {
    Material material = Material::Bare;
    double thickness_cm = 0.0;
    std::vector<AttenuationPoint> attenuation;
    double scatter_fraction = 0.0;
    std::vector<GammaLine> emission;

    static Shielding bare() { return {}; }
};

struct SourceConfig {
    Isotope isotope;
    double activity_bq;
    double distance_m;
    Shielding shielding;
    bool include_background = false;
};

struct DetectorModel {
    EnergyCalibration calibration = EnergyCalibration::default_nai();
    double face_area_cm2 = 10.16 * 40.64;  // 4" x 16" face of a 2" x 4" x 16" NaI log
    double intrinsic_efficiency = 0.45;
    double resolution_fwhm_frac_at_662 = 0.075;
    double compton_fraction = 0.4;
    double background_rate_cps = 300.0;

    /// Photopeak FWHM in keV at `energy_kev`.
    double fwhm(double energy_kev) const;
    void validate() const;
};

/// Activity that puts ~200 source counts/s on the default detector from a bare
/// Cs-137 source at 10 m.
inline constexpr double kDefaultActivityBq = 1.59e7;

inline constexpr double kTemplateDwellS = 24.0 * 3600.0;

/// Bundled line, attenuation and shield tables.
class NuclearData {
public:
    /// Reads nuclides.csv, shielding.csv, shield_emission.csv and
    /// attenuation_<material>.csv from `dir`.
    static NuclearData load(const std::filesystem::path& dir);

    /// $GAMMASORT_DATA_DIR if set, else the directory shipped with the build.
    static std::filesystem::path default_dir();
    static const NuclearData& bundled();

    const Isotope& isotope(IsotopeName name) const;
    const Shielding& shielding(Material material) const;

private:
    std::vector<Isotope> isotopes_;
    std::vector<Shielding> shieldings_;
};

/// exp(-mu(E) * thickness) with mu log-log interpolated from the table.
double attenuation_factor(const Shielding& shielding, double energy_kev);

/// Maximum energy deposited by a single Compton scatter.
double compton_edge(double energy_kev);

/// Lowest energy of a photon after a single Compton scatter (180 degrees).
double backscatter_energy(double energy_kev);

/// Detector response to `expected_detections` photons at `line_energy_kev`:
/// a truncated Gaussian photopeak plus a flat Compton continuum up to the edge.
Spectrum line_response(const DetectorModel& detector, double line_energy_kev, double expected_detections,
                       double dwell_s);

/// face_area / (4 pi r^2).
double geometric_fraction(double distance_m, double face_area_cm2);

/// Room background: exponential e^(-E/150 keV) plus a flat plateau to 2614 keV,
/// normalized to detector.background_rate_cps.
Spectrum background_template(const DetectorModel& detector, double dwell_s);

/// Expected-count template for one source configuration.
Spectrum build_template(const SourceConfig& config, const DetectorModel& detector, double dwell_s);

}  // namespace gammasort
