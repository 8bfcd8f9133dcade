#include <doctest.h>

#include <filesystem>
#include <stdexcept>

#include "gammasort/run_config.hpp"

using namespace gammasort;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
    try {
        run_config_from_json(j);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("run_config") {
    TEST_CASE("defaults match the table grid") {
        const RunConfig c;
        CHECK(c.grid.size() == 220);
        CHECK(c.rebin_channels == 256);
        CHECK(c.epochs == 100);
        CHECK(c.checkpoints == std::vector<std::size_t>{10, 100});
        CHECK_NOTHROW(c.validate(NuclearData::bundled()));
        CHECK(c.grid.build(NuclearData::bundled()).size() == 220);
    }

    TEST_CASE("scenario defaults") {
        const auto iso = scenario_defaults("isotope");
        CHECK(iso.task == TaskKind::IsotopeID);
        REQUIRE(iso.pseudo_measured.has_value());
        CHECK(iso.pseudo_measured->size() == 60);
        CHECK(iso.pseudo_measured->include_background);
        CHECK(scenario_defaults("shielding").task == TaskKind::ShieldingID);
        const auto gauge = scenario_defaults("gauge");
        CHECK(gauge.task == TaskKind::GaugeBinary);
        REQUIRE(gauge.architectures.size() == 2);
        CHECK(gauge.architectures[1] == Architecture::hidden_tanh(64));
        CHECK_THROWS_AS(scenario_defaults("spin"), std::invalid_argument);
        for (auto name : kScenarioNames) CHECK_NOTHROW(scenario_defaults(name).validate(NuclearData::bundled()));
    }

    TEST_CASE("JSON round trip") {
        for (auto name : kScenarioNames) {
            auto c = scenario_defaults(name);
            c.seed = 0xfedcba9876543210ULL;
            c.adam.lr = 0.1 + 0.2;
            const auto j = to_json(c);
            const auto back = run_config_from_json(json::parse(j.dump()));
            CHECK(to_json(back) == j);
            CHECK(back.seed == c.seed);
            CHECK(back.adam.lr == c.adam.lr);
        }
        const auto path = std::filesystem::temp_directory_path() / "gammasort_config_test.json";
        save_run_config(path, scenario_defaults("gauge"));
        CHECK(to_json(load_run_config(path)) == to_json(scenario_defaults("gauge")));
        std::filesystem::remove(path);
    }

    TEST_CASE("partial JSON overrides the base") {
        const auto c = run_config_from_json(json{{"seed", 7}, {"training", {{"epochs", 3}}}}, scenario_defaults("gauge"));
        CHECK(c.seed == 7);
        CHECK(c.epochs == 3);
        CHECK(c.task == TaskKind::GaugeBinary);
        CHECK(c.architectures.size() == 2);
    }

    TEST_CASE("errors name the offending key") {
        CHECK(error_of(json{{"sede", 1}}).find("sede") != std::string::npos);
        CHECK(error_of(json{{"training", {{"adam", {{"lr", "fast"}}}}}}).find("training.adam.lr") != std::string::npos);
        CHECK(error_of(json{{"grid", {{"isotopes", {"Radium"}}}}}).find("grid.isotopes") != std::string::npos);
        CHECK(error_of(json{{"task", "spin"}}).find("task") != std::string::npos);
        CHECK(error_of(json{{"architectures", {{{"kind", "conv"}}}}}).find("architectures") != std::string::npos);
        CHECK_THROWS_AS(run_config_from_json(json::array()), std::invalid_argument);
    }

    TEST_CASE("validation") {
        RunConfig c;
        c.rebin_channels = 300;
        CHECK_THROWS_AS(c.validate(NuclearData::bundled()), std::invalid_argument);
        c = RunConfig{};
        c.grid.isotopes.clear();
        CHECK_THROWS_AS(c.validate(NuclearData::bundled()), std::invalid_argument);
        CHECK_THROWS_AS(read_json_file("/nonexistent/config.json"), std::runtime_error);
    }
}
