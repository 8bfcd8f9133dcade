#include <doctest.h>

#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gammasort/spectrum.hpp"

using namespace gammasort;

namespace {

Spectrum ramp(std::size_t n, SpectrumKind kind = SpectrumKind::ExpectedTemplate) {
    std::vector<double> c(n);
    std::iota(c.begin(), c.end(), 1.0);
    return Spectrum(std::move(c), EnergyCalibration(0.0, 3000.0, n), 1.0, kind);
}

Spectrum random_integer_spectrum(std::mt19937_64& gen, std::size_t n) {
    std::uniform_int_distribution<int> d(0, 5000);
    std::vector<double> c(n);
    for (auto& v : c) v = d(gen);
    return Spectrum(std::move(c), EnergyCalibration::default_nai(), 1.0, SpectrumKind::SampledRealization);
}

}  // namespace

TEST_SUITE("spectra") {
    TEST_CASE("default calibration channel energies") {
        const auto cal = EnergyCalibration::default_nai();
        CHECK(cal.n_channels() == 1024);
        CHECK(energy_of_channel(cal, 0) == 1.46484375);
        CHECK(energy_of_channel(cal, 1023) == 2998.53515625);
        CHECK_THROWS_AS(energy_of_channel(cal, 1024), std::invalid_argument);
        for (std::size_t i = 1; i < cal.n_channels(); ++i) {
            REQUIRE(energy_of_channel(cal, i) > energy_of_channel(cal, i - 1));
        }
        CHECK(channel_of_energy(cal, 661.7) == 225);
        CHECK(channel_of_energy(cal, 0.0) == 0);
        CHECK_THROWS_AS(channel_of_energy(cal, 3000.0), std::invalid_argument);
        CHECK_THROWS_AS(channel_of_energy(cal, -1.0), std::invalid_argument);
    }

    TEST_CASE("calibration rejects degenerate ranges") {
        CHECK_THROWS_AS(EnergyCalibration(10.0, 10.0, 4), std::invalid_argument);
        CHECK_THROWS_AS(EnergyCalibration(0.0, 10.0, 0), std::invalid_argument);
    }

    TEST_CASE("spectrum invariants") {
        const EnergyCalibration cal(0.0, 4.0, 4);
        CHECK_THROWS_AS(Spectrum({1, 2, 3}, cal, 1.0, SpectrumKind::ExpectedTemplate), std::invalid_argument);
        CHECK_THROWS_AS(Spectrum({1, -2, 3, 4}, cal, 1.0, SpectrumKind::ExpectedTemplate), std::invalid_argument);
        CHECK_THROWS_AS(Spectrum({1, 2, 3, 4}, cal, 0.0, SpectrumKind::ExpectedTemplate), std::invalid_argument);
        CHECK_THROWS_AS(Spectrum({1, 2.5, 3, 4}, cal, 1.0, SpectrumKind::SampledRealization), std::invalid_argument);
        CHECK_NOTHROW(Spectrum({1, 2.5, 3, 4}, cal, 1.0, SpectrumKind::ExpectedTemplate));
        CHECK(total_counts(Spectrum({1, 2.5, 3, 4}, cal, 1.0, SpectrumKind::ExpectedTemplate)) == 10.5);
    }

    TEST_CASE("rebin by 2 sums adjacent pairs") {
        const auto s = rebin(ramp(8), 2);
        REQUIRE(s.size() == 4);
        CHECK(std::vector<double>(s.counts().begin(), s.counts().end()) == std::vector<double>{3, 7, 11, 15});
        CHECK(s.calibration().e_min() == 0.0);
        CHECK(s.calibration().e_max() == 3000.0);
        CHECK(rebin(ramp(8), 1) == ramp(8));
    }

    TEST_CASE("rebin rejects non-divisors") {
        CHECK_THROWS_AS(rebin(ramp(8), 3), std::invalid_argument);
        CHECK_THROWS_AS(rebin(ramp(8), 0), std::invalid_argument);
        CHECK_THROWS_AS(rebin_to(ramp(1024), 300), std::invalid_argument);
    }

    TEST_CASE("rebin preserves totals and composes") {
        std::mt19937_64 gen(7);
        for (int i = 0; i < 50; ++i) {
            const auto s = random_integer_spectrum(gen, 1024);
            const auto r4 = rebin_to(s, 256);
            CHECK(total_counts(r4) == total_counts(s));
            CHECK(rebin(rebin(s, 2), 2) == r4);
            CHECK(r4.kind() == SpectrumKind::SampledRealization);
        }
    }

    TEST_CASE("dwell rescaling and sums") {
        const auto t = ramp(4);
        const auto r = rescale_dwell(t, 3.0);
        CHECK(r.dwell() == 3.0);
        CHECK(r[3] == 12.0);
        CHECK_THROWS_AS(rescale_dwell(ramp(4, SpectrumKind::SampledRealization), 2.0), std::invalid_argument);
        const auto sum = t + t;
        CHECK(sum[0] == 2.0);
        CHECK_THROWS_AS(t + r, std::invalid_argument);
    }

    TEST_CASE("csv round trip is value exact") {
        std::mt19937_64 gen(3);
        std::uniform_real_distribution<double> u(0.0, 1e6);
        std::vector<double> c(1024);
        for (auto& v : c) v = u(gen) * u(gen) * 1e-7;
        const Spectrum s(c, EnergyCalibration(0.1, 2999.9, 1024), 86400.0, SpectrumKind::ExpectedTemplate);
        std::stringstream io;
        write_spectrum_csv(io, s);
        CHECK(read_spectrum_csv(io) == s);
    }

    TEST_CASE("csv reader rejects malformed input") {
        std::istringstream missing_header("0,1\n1,2\n");
        CHECK_THROWS_AS(read_spectrum_csv(missing_header), std::runtime_error);
        std::istringstream gap("# e_min=0 e_max=2 dwell=1 kind=template\n0,1\n2,2\n");
        CHECK_THROWS_AS(read_spectrum_csv(gap), std::runtime_error);
        std::istringstream junk("# e_min=0 e_max=2 dwell=1 kind=template\n0,1\n1,x\n");
        CHECK_THROWS_AS(read_spectrum_csv(junk), std::runtime_error);
        CHECK_THROWS_AS(load_spectrum("/nonexistent/spectrum.csv"), std::runtime_error);
    }
}
