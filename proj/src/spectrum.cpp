#include "gammasort/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "gammasort/text_format.hpp"

namespace gammasort {

EnergyCalibration::EnergyCalibration(double e_min_kev, double e_max_kev, std::size_t n_channels)
    : e_min_(e_min_kev), e_max_(e_max_kev), n_channels_(n_channels) {
    if (!std::isfinite(e_min_kev) || !std::isfinite(e_max_kev) || !(e_min_kev < e_max_kev)) {
        throw std::invalid_argument("EnergyCalibration: require finite e_min < e_max");
    }
    if (n_channels == 0) {
        throw std::invalid_argument("EnergyCalibration: n_channels must be positive");
    }
}

EnergyCalibration EnergyCalibration::default_nai() { return EnergyCalibration(0.0, 3000.0, 1024); }

double energy_of_channel(const EnergyCalibration& cal, std::size_t channel) {
    if (channel >= cal.n_channels()) {
        throw std::invalid_argument("energy_of_channel: channel " + std::to_string(channel) + " out of range");
    }
    return cal.e_min() + (static_cast<double>(channel) + 0.5) * cal.channel_width();
}

std::size_t channel_of_energy(const EnergyCalibration& cal, double energy_kev) {
    if (!(energy_kev >= cal.e_min() && energy_kev < cal.e_max())) {
        throw std::invalid_argument("channel_of_energy: energy outside calibration");
    }
    const auto ch = static_cast<std::size_t>(std::floor((energy_kev - cal.e_min()) / cal.channel_width()));
    return std::min(ch, cal.n_channels() - 1);
}

std::string_view to_string(SpectrumKind kind) {
    return kind == SpectrumKind::ExpectedTemplate ? "template" : "sample";
}

SpectrumKind parse_spectrum_kind(std::string_view text) {
    if (text == "template") return SpectrumKind::ExpectedTemplate;
    if (text == "sample") return SpectrumKind::SampledRealization;
    throw std::invalid_argument("unknown spectrum kind '" + std::string(text) + "'");
}

Spectrum::Spectrum(std::vector<double> counts, EnergyCalibration calibration, double dwell_s, SpectrumKind kind)
    : counts_(std::move(counts)), calibration_(calibration), dwell_(dwell_s), kind_(kind) {
    if (counts_.size() != calibration_.n_channels()) {
        throw std::invalid_argument("Spectrum: counts length does not match calibration");
    }
    if (!(dwell_s > 0.0) || !std::isfinite(dwell_s)) {
        throw std::invalid_argument("Spectrum: dwell must be positive");
    }
    for (double c : counts_) {
        if (!(c >= 0.0) || !std::isfinite(c)) {
            throw std::invalid_argument("Spectrum: counts must be finite and non-negative");
        }
        if (kind_ == SpectrumKind::SampledRealization && c != std::floor(c)) {
            throw std::invalid_argument("Spectrum: sampled realization counts must be integers");
        }
    }
}

Spectrum Spectrum::zeros(const EnergyCalibration& calibration, double dwell_s, SpectrumKind kind) {
    return Spectrum(std::vector<double>(calibration.n_channels(), 0.0), calibration, dwell_s, kind);
}

double total_counts(const Spectrum& s) {
    const auto c = s.counts();
    return std::accumulate(c.begin(), c.end(), 0.0);
}

Spectrum rebin(const Spectrum& s, std::size_t factor) {
    if (factor == 0 || s.size() % factor != 0) {
        throw std::invalid_argument("rebin: factor " + std::to_string(factor) + " does not divide " +
                                    std::to_string(s.size()) + " channels");
    }
    if (factor == 1) {
        return s;
    }
    const std::size_t n_out = s.size() / factor;
    std::vector<double> out(n_out, 0.0);
    const auto in = s.counts();
    for (std::size_t i = 0; i < n_out; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < factor; ++k) {
            acc += in[i * factor + k];
        }
        out[i] = acc;
    }
    const auto& cal = s.calibration();
    return Spectrum(std::move(out), EnergyCalibration(cal.e_min(), cal.e_max(), n_out), s.dwell(), s.kind());
}

Spectrum rebin_to(const Spectrum& s, std::size_t n_channels) {
    if (n_channels == 0 || s.size() % n_channels != 0) {
        throw std::invalid_argument("rebin_to: cannot rebin " + std::to_string(s.size()) + " channels to " +
                                    std::to_string(n_channels));
    }
    return rebin(s, s.size() / n_channels);
}

Spectrum rescale_dwell(const Spectrum& tmpl, double target_dwell_s) {
    if (tmpl.kind() != SpectrumKind::ExpectedTemplate) {
        throw std::invalid_argument("rescale_dwell: only expected templates can be rescaled");
    }
    if (!(target_dwell_s > 0.0)) {
        throw std::invalid_argument("rescale_dwell: dwell must be positive");
    }
    const double scale = target_dwell_s / tmpl.dwell();
    std::vector<double> out(tmpl.counts().begin(), tmpl.counts().end());
    for (double& c : out) {
        c *= scale;
    }
    return Spectrum(std::move(out), tmpl.calibration(), target_dwell_s, SpectrumKind::ExpectedTemplate);
}

Spectrum operator+(const Spectrum& a, const Spectrum& b) {
    if (!(a.calibration() == b.calibration()) || a.dwell() != b.dwell() || a.kind() != b.kind()) {
        throw std::invalid_argument("Spectrum sum: operands are incompatible");
    }
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a[i] + b[i];
    }
    return Spectrum(std::move(out), a.calibration(), a.dwell(), a.kind());
}

void write_spectrum_csv(std::ostream& out, const Spectrum& s) {
    const auto& cal = s.calibration();
    out << "# e_min=" << format_double(cal.e_min()) << " e_max=" << format_double(cal.e_max())
        << " dwell=" << format_double(s.dwell()) << " kind=" << to_string(s.kind()) << '\n';
    out << "# channel,counts\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << i << ',' << format_double(s[i]) << '\n';
    }
}

Spectrum read_spectrum_csv(std::istream& in) {
    double e_min = 0.0;
    double e_max = 0.0;
    double dwell = 0.0;
    bool have_emin = false;
    bool have_emax = false;
    bool have_dwell = false;
    bool have_kind = false;
    SpectrumKind kind = SpectrumKind::ExpectedTemplate;
    std::vector<double> counts;

    std::string line;
    while (std::getline(in, line)) {
        const auto text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            for (auto token : split(text.substr(1), ' ')) {
                token = trim(token);
                const auto eq = token.find('=');
                if (eq == std::string_view::npos) continue;
                const auto key = token.substr(0, eq);
                const auto value = token.substr(eq + 1);
                if (key == "e_min") {
                    e_min = parse_double(value);
                    have_emin = true;
                } else if (key == "e_max") {
                    e_max = parse_double(value);
                    have_emax = true;
                } else if (key == "dwell") {
                    dwell = parse_double(value);
                    have_dwell = true;
                } else if (key == "kind") {
                    kind = parse_spectrum_kind(value);
                    have_kind = true;
                }
            }
            continue;
        }
        const auto fields = split(text, ',');
        if (fields.size() != 2) {
            throw std::runtime_error("spectrum csv: expected 'channel,counts' row, got '" + std::string(text) + "'");
        }
        if (parse_u64(fields[0]) != counts.size()) {
            throw std::runtime_error("spectrum csv: channels must be consecutive from 0");
        }
        counts.push_back(parse_double(fields[1]));
    }
    if (!(have_emin && have_emax && have_dwell && have_kind)) {
        throw std::runtime_error("spectrum csv: header must define e_min, e_max, dwell and kind");
    }
    const std::size_t n = counts.size();
    return Spectrum(std::move(counts), EnergyCalibration(e_min, e_max, n), dwell, kind);
}

void save_spectrum(const std::filesystem::path& path, const Spectrum& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    write_spectrum_csv(out, s);
}

Spectrum load_spectrum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    return read_spectrum_csv(in);
}

}  // namespace gammasort
