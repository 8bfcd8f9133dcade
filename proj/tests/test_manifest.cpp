#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gammasort/manifest.hpp"

using namespace gammasort;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_SUITE("manifest") {
    TEST_CASE("full template set round trip") {
        const auto& data = NuclearData::bundled();
        const RunConfig cfg;
        const auto set = synthesize(cfg, data, 4);
        REQUIRE(set.templates.size() == 220);
        const auto dir = fresh_dir("gammasort_templates_test");
        save_template_set(dir, set);
        std::size_t files = 0;
        for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "templates")) ++files;
        CHECK(files == 220);
        CHECK(fs::exists(dir / "templates" / "t000_Cesium_10m_Bare.csv"));
        for (const auto& t : set.templates) REQUIRE(t.dwell() == kTemplateDwellS);

        const auto back = load_template_set(dir, data);
        CHECK(back.templates == set.templates);
        REQUIRE(back.grid.size() == set.grid.size());
        for (std::size_t i = 0; i < back.grid.size(); ++i) {
            REQUIRE(to_json(back.grid[i]) == to_json(set.grid[i]));
        }
        CHECK(to_json(back.config) == to_json(cfg));
        fs::remove_all(dir);
    }

    TEST_CASE("missing or foreign manifests are rejected") {
        const auto& data = NuclearData::bundled();
        const auto dir = fresh_dir("gammasort_missing_manifest");
        fs::create_directories(dir);
        CHECK_THROWS_AS(load_template_set(dir, data), std::runtime_error);
        CHECK_THROWS_AS(load_dataset_dir(dir, data), std::runtime_error);
        write_json_file(dir / "manifest.json", {{"format", "something-else"}, {"version", 1}});
        CHECK_THROWS_AS(load_template_set(dir, data), std::runtime_error);
        CHECK_THROWS_AS(load_dataset_dir(dir, data), std::runtime_error);
        fs::remove_all(dir);
    }

    TEST_CASE("dataset directories round trip and are seed-deterministic") {
        const auto& data = NuclearData::bundled();
        RunConfig cfg;
        cfg.grid.isotopes = {IsotopeName::Cesium, IsotopeName::Cobalt};
        cfg.grid.distances_m = {10.0, 15.0};
        cfg.grid.shieldings = {Material::Bare, Material::Steel};
        const auto set = synthesize(cfg, data);
        DatasetBundle b;
        b.seed = 17;
        b.samples_per_config = 3;
        b.dataset = sample_dataset(set.grid, set.templates, TaskKind::GaugeBinary, 3, 1.0, b.seed, 2);

        const auto a_dir = fresh_dir("gammasort_dataset_a");
        const auto b_dir = fresh_dir("gammasort_dataset_b");
        save_dataset_dir(a_dir, b);
        DatasetBundle again = b;
        again.dataset = sample_dataset(set.grid, set.templates, TaskKind::GaugeBinary, 3, 1.0, b.seed, 1);
        save_dataset_dir(b_dir, again);
        CHECK(slurp(a_dir / "dataset.csv") == slurp(b_dir / "dataset.csv"));
        CHECK(slurp(a_dir / "manifest.json") == slurp(b_dir / "manifest.json"));

        const auto back = load_dataset_dir(a_dir, data);
        CHECK(back.seed == 17);
        CHECK(back.samples_per_config == 3);
        CHECK(back.dataset.task == TaskKind::GaugeBinary);
        CHECK(back.dataset.inputs == b.dataset.inputs);
        CHECK(back.dataset.labels == b.dataset.labels);
        CHECK(back.dataset.config_index == b.dataset.config_index);
        fs::remove_all(a_dir);
        fs::remove_all(b_dir);

        DatasetBundle empty;
        CHECK_THROWS_AS(save_dataset_dir(fresh_dir("gammasort_dataset_empty"), empty), std::invalid_argument);
    }
}
