#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gammasort/report.hpp"
#include "gammasort/scenario.hpp"

using namespace gammasort;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

RunConfig tiny_config() {
    RunConfig c;
    c.grid.isotopes = {IsotopeName::Cesium, IsotopeName::Barium};
    c.grid.distances_m = {10.0, 12.0};
    c.grid.shieldings = {Material::Bare};
    c.epochs = 4;
    c.checkpoints = {2, 4};
    c.test_samples_per_config = 2;
    return c;
}

}  // namespace

TEST_SUITE("report") {
    TEST_CASE("SVG rendering is deterministic and escapes text") {
        const LinePlot plot{"loss <train> & test", "epoch", "loss",
                            {{"a", {1, 2, 3}, {0.5, 0.25, 0.125}}, {"b", {1, 2, 3}, {1, 2, 3}}}};
        const auto svg = render_svg(plot);
        CHECK(svg == render_svg(plot));
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("&lt;train&gt; &amp; test") != std::string::npos);
        CHECK(svg.find("<polyline") != std::string::npos);
        const LinePlot flat{"flat", "x", "y", {{"c", {0, 1}, {2, 2}}}};
        CHECK(render_svg(flat).find("nan") == std::string::npos);
    }

    TEST_CASE("numeric CSV reader") {
        const auto path = fs::temp_directory_path() / "gammasort_numeric.csv";
        {
            std::ofstream out(path);
            out << "# comment\nx,y\n1,2\n3,4.5\n";
        }
        const auto t = read_numeric_csv(path);
        CHECK(t.header == std::vector<std::string>{"x", "y"});
        CHECK(t.column(1) == std::vector<double>{2, 4.5});
        fs::remove(path);
        CHECK_THROWS_AS(read_numeric_csv(path), std::runtime_error);
    }

    TEST_CASE("report over a run directory") {
        const auto out = fs::temp_directory_path() / "gammasort_report_run";
        fs::remove_all(out);
        run_scenario(tiny_config(), out, 2);
        CHECK(missing_run_artifacts(out).empty());
        const auto files = write_report(out);
        CHECK_FALSE(files.empty());
        for (const char* name : {"loss.csv", "loss.svg", "accuracy.csv", "accuracy.svg", "accuracy_final.csv"}) {
            CHECK(fs::is_regular_file(out / "report" / name));
        }
        const auto first = slurp(out / "report" / "accuracy.svg");
        write_report(out);
        CHECK(slurp(out / "report" / "accuracy.svg") == first);
        fs::remove_all(out);
    }

    TEST_CASE("missing artifacts are listed") {
        const auto dir = fs::temp_directory_path() / "gammasort_report_empty";
        fs::remove_all(dir);
        fs::create_directories(dir);
        const auto missing = missing_run_artifacts(dir);
        CHECK(missing == std::vector<std::string>{"model.json", "metrics.csv", "confusion.csv", "weights_*.csv"});
        try {
            write_report(dir);
            FAIL("expected an error");
        } catch (const std::runtime_error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("model.json") != std::string::npos);
            CHECK(msg.find("weights_*.csv") != std::string::npos);
        }
        fs::remove_all(dir);
    }
}
