#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace gammasort {

/// Linear energy calibration: channel i covers [e_min + i*w, e_min + (i+1)*w).
class EnergyCalibration {
public:
    EnergyCalibration(double e_min_kev, double e_max_kev, std::size_t n_channels);

    /// 0-3000 keV over 1024 channels.
    static EnergyCalibration default_nai();

    double e_min() const noexcept { return e_min_; }
    double e_max() const noexcept { return e_max_; }
    std::size_t n_channels() const noexcept { return n_channels_; }
    double channel_width() const noexcept { return (e_max_ - e_min_) / static_cast<double>(n_channels_); }

    bool operator==(const EnergyCalibration&) const = default;

private:
    double e_min_;
    double e_max_;
    std::size_t n_channels_;
};

/// Bin-center energy of a channel.
double energy_of_channel(const EnergyCalibration& cal, std::size_t channel);

/// Channel containing `energy_kev`; throws if the energy is outside the calibrated range.
std::size_t channel_of_energy(const EnergyCalibration& cal, double energy_kev);

enum class SpectrumKind { ExpectedTemplate, SampledRealization };

std::string_view to_string(SpectrumKind kind);
SpectrumKind parse_spectrum_kind(std::string_view text);

/// Channel-count histogram. Immutable after construction.
///
/// Templates hold expected (real-valued) counts; realizations hold integer
/// counts stored as doubles so both share one representation.
class Spectrum {
public:
    Spectrum(std::vector<double> counts, EnergyCalibration calibration, double dwell_s, SpectrumKind kind);

    /// All-zero spectrum.
    static Spectrum zeros(const EnergyCalibration& calibration, double dwell_s, SpectrumKind kind);

    std::span<const double> counts() const noexcept { return counts_; }
    double operator[](std::size_t channel) const { return counts_[channel]; }
    std::size_t size() const noexcept { return counts_.size(); }
    const EnergyCalibration& calibration() const noexcept { return calibration_; }
    double dwell() const noexcept { return dwell_; }
    SpectrumKind kind() const noexcept { return kind_; }

    bool operator==(const Spectrum&) const = default;

private:
    std::vector<double> counts_;
    EnergyCalibration calibration_;
    double dwell_;
    SpectrumKind kind_;
};

double total_counts(const Spectrum& s);

/// Sums groups of `factor` adjacent channels. The energy range is unchanged.
Spectrum rebin(const Spectrum& s, std::size_t factor);

/// Rebins to exactly `n_channels` output channels.
Spectrum rebin_to(const Spectrum& s, std::size_t n_channels);

/// Multiplies an expected-count template by target_dwell / dwell.
Spectrum rescale_dwell(const Spectrum& tmpl, double target_dwell_s);

/// Channelwise sum; calibrations, dwells and kinds must agree.
Spectrum operator+(const Spectrum& a, const Spectrum& b);

// Spectrum CSV:
//   # e_min=<keV> e_max=<keV> dwell=<s> kind=<template|sample>
//   # channel,counts
//   0,<counts>
//   ...
void write_spectrum_csv(std::ostream& out, const Spectrum& s);
Spectrum read_spectrum_csv(std::istream& in);
void save_spectrum(const std::filesystem::path& path, const Spectrum& s);
Spectrum load_spectrum(const std::filesystem::path& path);

}  // namespace gammasort
