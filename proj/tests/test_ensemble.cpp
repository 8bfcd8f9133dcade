#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <stdexcept>

#include "gammasort/ensemble.hpp"

using namespace gammasort;

namespace {

const NuclearData& data() { return NuclearData::bundled(); }

}  // namespace

TEST_SUITE("ensemble") {
    TEST_CASE("table grid enumerates 220 configurations") {
        const auto grid = table_grid(data());
        REQUIRE(grid.size() == 220);
        std::size_t cs_steel = 0;
        std::vector<std::size_t> per_isotope(5, 0);
        std::set<double> distances;
        for (const auto& c : grid) {
            ++per_isotope[class_of(TaskKind::IsotopeID, c)];
            cs_steel += class_of(TaskKind::GaugeBinary, c) == kCesiumSteelClass;
            distances.insert(c.distance_m);
            CHECK_FALSE(c.include_background);
        }
        CHECK(cs_steel == 11);
        CHECK(per_isotope == std::vector<std::size_t>(5, 44));
        CHECK(distances.size() == 11);
        CHECK(*distances.begin() == 10.0);
        CHECK(*distances.rbegin() == 20.0);
    }

    TEST_CASE("task labels") {
        CHECK(class_count(TaskKind::IsotopeID) == 5);
        CHECK(class_count(TaskKind::ShieldingID) == 4);
        CHECK(class_count(TaskKind::GaugeBinary) == 2);
        CHECK(class_names(TaskKind::GaugeBinary) == std::vector<std::string>{"CesiumSteel", "NotCesiumSteel"});
        CHECK(parse_task(to_string(TaskKind::ShieldingID)) == TaskKind::ShieldingID);
        CHECK_THROWS_AS(parse_task("spin"), std::invalid_argument);
        const SourceConfig co{data().isotope(IsotopeName::Cobalt), 1.0, 10.0, data().shielding(Material::Steel)};
        CHECK(class_of(TaskKind::GaugeBinary, co) == 1);
        CHECK(class_of(TaskKind::ShieldingID, co) == 2);
    }

    TEST_CASE("full ensemble: 2200 one-hot items, 80/20 split") {
        const auto grid = table_grid(data());
        const auto ds = build_dataset(grid, TaskKind::GaugeBinary, DetectorModel{}, 10, 1.0, 11, 4);
        REQUIRE(ds.size() == 2200);
        CHECK(std::count(ds.labels.begin(), ds.labels.end(), kCesiumSteelClass) == 110);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const auto oh = ds.one_hot(i);
            REQUIRE(oh.size() == 2);
            REQUIRE(oh[0] + oh[1] == 1.0);
            REQUIRE(oh[ds.labels[i]] == 1.0);
            REQUIRE(ds.inputs[i].kind() == SpectrumKind::SampledRealization);
        }
        const auto [train, test] = split(ds, 0.8, 5);
        CHECK(train.size() == 1760);
        CHECK(test.size() == 440);
        std::multiset<std::size_t> seen(train.config_index.begin(), train.config_index.end());
        seen.insert(test.config_index.begin(), test.config_index.end());
        for (std::size_t c = 0; c < grid.size(); ++c) REQUIRE(seen.count(c) == 10);
    }

    TEST_CASE("poisson sampling") {
        const EnergyCalibration cal(0.0, 10.0, 10);
        const Spectrum tmpl(std::vector<double>(10, 2.0), cal, 1.0, SpectrumKind::ExpectedTemplate);
        CHECK_THROWS_AS(poisson_sample(tmpl, 0.0, 1), std::invalid_argument);
        const auto sample_of_sample = poisson_sample(tmpl, 1.0, 1);
        CHECK_THROWS_AS(poisson_sample(sample_of_sample, 1.0, 2), std::invalid_argument);
        CHECK(poisson_sample(tmpl, 1.0, 1) == sample_of_sample);

        const Spectrum zero = Spectrum::zeros(cal, 1.0, SpectrumKind::ExpectedTemplate);
        CHECK(total_counts(poisson_sample(zero, 5.0, 3)) == 0.0);

        // Per-channel mean and variance track template * dwell ratio.
        const int n = 4000;
        std::vector<double> sum(10, 0.0), sum_sq(10, 0.0);
        for (int k = 0; k < n; ++k) {
            const auto s = poisson_sample(tmpl, 2.5, static_cast<std::uint64_t>(k) + 100);
            CHECK(s.dwell() == 2.5);
            for (std::size_t c = 0; c < 10; ++c) {
                REQUIRE(s[c] == std::floor(s[c]));
                sum[c] += s[c];
                sum_sq[c] += s[c] * s[c];
            }
        }
        for (std::size_t c = 0; c < 10; ++c) {
            const double mean = sum[c] / n;
            const double var = (sum_sq[c] - n * mean * mean) / (n - 1);
            CHECK(std::abs(mean - 5.0) < 5.0 * std::sqrt(5.0 / n));
            CHECK(std::abs(var / 5.0 - 1.0) < 0.1);
        }
    }

    TEST_CASE("datasets do not depend on worker count") {
        const auto grid = make_grid(data(), {IsotopeName::Cesium, IsotopeName::Selenium}, {10.0, 12.0},
                                    {Material::Bare, Material::DepletedUranium});
        const auto a = build_dataset(grid, TaskKind::IsotopeID, DetectorModel{}, 3, 1.0, 9, 1);
        const auto b = build_dataset(grid, TaskKind::IsotopeID, DetectorModel{}, 3, 1.0, 9, 8);
        REQUIRE(a.size() == b.size());
        CHECK(a.inputs == b.inputs);
        CHECK(a.labels == b.labels);
        const auto c = build_dataset(grid, TaskKind::IsotopeID, DetectorModel{}, 3, 1.0, 10, 8);
        CHECK_FALSE(a.inputs == c.inputs);
    }

    TEST_CASE("template datasets, rebin and oversample") {
        const auto grid = make_grid(data(), {IsotopeName::Cesium, IsotopeName::Cobalt}, {10.0},
                                    {Material::Bare, Material::Steel});
        const auto ds = template_dataset(grid, TaskKind::GaugeBinary, DetectorModel{}, 2.0);
        REQUIRE(ds.size() == 4);
        CHECK(ds.inputs[0].kind() == SpectrumKind::ExpectedTemplate);
        CHECK(ds.inputs[0].dwell() == 2.0);
        const auto small = rebin_dataset(ds, 256);
        CHECK(small.n_channels() == 256);
        const auto over = oversample(ds, kCesiumSteelClass, 2.0);
        CHECK(std::count(over.labels.begin(), over.labels.end(), kCesiumSteelClass) == 6);
        CHECK(over.size() == 9);
        CHECK_THROWS_AS(oversample(ds, kCesiumSteelClass, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(split(ds, 1.0, 1), std::invalid_argument);
    }

    TEST_CASE("validate catches inconsistencies") {
        const auto grid = make_grid(data(), {IsotopeName::Cesium}, {10.0}, {Material::Bare});
        auto ds = template_dataset(grid, TaskKind::IsotopeID, DetectorModel{});
        ds.labels[0] = 7;
        CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
        CHECK_THROWS_AS(build_dataset({}, TaskKind::IsotopeID, DetectorModel{}, 1, 1.0, 1), std::invalid_argument);
    }

    TEST_CASE("packed CSV round trip") {
        const auto grid = make_grid(data(), {IsotopeName::Iridium, IsotopeName::Barium}, {11.0}, {Material::Concrete});
        const auto ds = build_dataset(grid, TaskKind::IsotopeID, DetectorModel{}, 2, 1.0, 4);
        const auto path = std::filesystem::temp_directory_path() / "gammasort_packed_test.csv";
        save_packed_dataset(path, ds);
        const auto back = load_packed_dataset(path, TaskKind::IsotopeID, ds.inputs[0].calibration(),
                                              SpectrumKind::SampledRealization, grid);
        CHECK(back.inputs == ds.inputs);
        CHECK(back.labels == ds.labels);
        CHECK(back.config_index == ds.config_index);
        CHECK_THROWS(load_packed_dataset(path, TaskKind::ShieldingID, ds.inputs[0].calibration(),
                                            SpectrumKind::SampledRealization, grid));
        std::filesystem::remove(path);
    }
}
