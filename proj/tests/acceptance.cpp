// Acceptance suite: one PASS/FAIL line per criterion.
#include <CLI11.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "gammasort/random.hpp"
#include "gammasort/scenario.hpp"
#include "gammasort/text_format.hpp"

using namespace gammasort;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("gammasort_acceptance_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string fmt_vec(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i], 3);
    return s + "]";
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> flatten(const std::vector<DenseLayer>& layers) {
    std::vector<double> out;
    for (const auto& l : layers) {
        out.insert(out.end(), l.weights.data().begin(), l.weights.data().end());
        out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
    return out;
}

// ||analytic - numeric|| / max(||analytic||, ||numeric||) over all parameters.
double gradient_relative_error(const NetworkParams& p, const std::vector<double>& x, const std::vector<double>& y) {
    const double h = 1e-5;
    const auto analytic = flatten(backward(p, x, y).grads.layers);
    NetworkParams q = p;
    std::vector<double> numeric;
    auto loss = [&] { return cross_entropy(softmax(forward(q, x)), y); };
    auto probe = [&](std::vector<double>& theta) {
        for (double& t : theta) {
            const double saved = t;
            t = saved + h;
            const double up = loss();
            t = saved - h;
            const double down = loss();
            t = saved;
            numeric.push_back((up - down) / (2.0 * h));
        }
    };
    for (auto& l : q.layers) {
        probe(l.weights.data());
        probe(l.bias);
    }
    std::vector<double> diff(analytic.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = analytic[i] - numeric[i];
    const double scale = std::max({norm2(analytic), norm2(numeric), 1e-300});
    return norm2(diff) / scale;
}

Outcome gradient_fidelity() {
    const auto start = std::chrono::steady_clock::now();
    constexpr int kInstances = 100;
    std::mt19937_64 gen(20240601);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::string detail;
    bool ok = true;
    for (auto arch : {Architecture::linear(), Architecture::hidden_tanh(4)}) {
        double worst = 0.0;
        for (int i = 0; i < kInstances; ++i) {
            const auto p = init_params(arch, 10, 3, gen());
            std::vector<double> x(10);
            for (auto& v : x) v = u(gen);
            std::vector<double> y(3, 0.0);
            y[gen() % 3] = 1.0;
            worst = std::max(worst, gradient_relative_error(p, x, y));
        }
        ok = ok && worst <= 1e-5;
        detail += std::string(to_string(arch.kind)) + " worst rel err " + format_double(worst) + " over " +
                  std::to_string(kInstances) + "; ";
    }
    const double t = elapsed_s(start);
    return {ok && t < 10.0, detail + "runtime " + fmt(t, 2) + " s (limit 10 s)"};
}

Outcome poisson_statistics() {
    const auto start = std::chrono::steady_clock::now();
    constexpr int kDraws = 10000;
    bool ok = true;
    std::string detail;
    for (double lambda : {1.0, 5.0, 50.0}) {
        Philox4x32 rng(derive_seed(7, {static_cast<std::uint64_t>(lambda)}));
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < kDraws; ++i) {
            const double k = static_cast<double>(sample_poisson(rng, lambda));
            sum += k;
            sum_sq += k * k;
        }
        const double mean = sum / kDraws;
        const double var = (sum_sq - kDraws * mean * mean) / (kDraws - 1);
        const double fano = var / mean;
        const double tol = 3.0 * std::sqrt(lambda / kDraws);
        const bool pass = std::abs(mean - lambda) <= tol && fano >= 0.9 && fano <= 1.1;
        ok = ok && pass;
        detail += "lambda " + fmt(lambda, 0) + ": mean " + fmt(mean) + " (tol " + fmt(tol) + "), Fano " + fmt(fano) +
                  "; ";
    }
    const double t = elapsed_s(start);
    return {ok && t < 10.0, detail + "runtime " + fmt(t, 2) + " s"};
}

Outcome isotope_convergence() {
    const auto start = std::chrono::steady_clock::now();
    const auto cfg = scenario_defaults("isotope");
    const auto result = run_scenario(cfg, scratch("c3"), jobs());
    const auto& h = result.runs.front().result.history;
    const auto& e10 = h.at_epoch(10).test;
    const auto& e100 = h.at_epoch(100).test;
    const double min_class = *std::min_element(e100.per_class_accuracy.begin(), e100.per_class_accuracy.end());
    const double t = elapsed_s(start);
    const bool ok = e100.overall_accuracy > e10.overall_accuracy && min_class > 0.2 && t < 300.0;
    return {ok, "acc@10 " + fmt(e10.overall_accuracy) + ", acc@100 " + fmt(e100.overall_accuracy) + ", per-class@100 " +
                    fmt_vec(e100.per_class_accuracy) + ", runtime " + fmt(t, 1) + " s"};
}

Outcome shielding_above_chance() {
    const auto start = std::chrono::steady_clock::now();
    const auto result = run_scenario(scenario_defaults("shielding"), scratch("c4"), jobs());
    const auto& e = result.runs.front().result.history.at_epoch(100).test;
    const double min_class = *std::min_element(e.per_class_accuracy.begin(), e.per_class_accuracy.end());
    const double t = elapsed_s(start);
    return {min_class > 0.25 && t < 300.0,
            "per-class@100 " + fmt_vec(e.per_class_accuracy) + " (chance 0.25), runtime " + fmt(t, 1) + " s"};
}

Outcome gauge_margin() {
    const auto start = std::chrono::steady_clock::now();
    const auto result = run_scenario(scenario_defaults("gauge"), scratch("c5"), jobs());
    double linear = -1.0, hidden = -1.0;
    for (const auto& run : result.runs) {
        const double acc = run.result.history.final_evaluation().per_class_accuracy[kCesiumSteelClass];
        (run.arch.kind == ArchKind::Linear ? linear : hidden) = acc;
    }
    const double t = elapsed_s(start);
    const double margin = hidden - linear;
    const bool ok = margin >= 0.20 && hidden >= 0.8 && t < 600.0;
    return {ok, "CesiumSteel accuracy linear " + fmt(linear) + ", hidden " + fmt(hidden) + ", margin " + fmt(margin) +
                    " (need >= 0.20 and hidden >= 0.80), runtime " + fmt(t, 1) + " s"};
}

Outcome zero_column_invariance() {
    const auto& data = NuclearData::bundled();
    auto cfg = scenario_defaults("isotope");
    cfg.grid.include_background = false;
    const auto prepared = prepare_data(cfg, data, jobs());
    const auto result = train_and_write(cfg, prepared, scratch("c6"), jobs());
    const auto& trained = result.runs.front().result.params;
    const auto& arch = result.runs.front().arch;
    const auto init = init_params(arch, prepared.train.n_channels(), prepared.train.n_classes(), cfg.seed);

    const std::size_t channels = prepared.train.n_channels();
    std::size_t zero_columns = 0, identical = 0, lowest = channels;
    for (std::size_t c = 0; c < channels; ++c) {
        const bool all_zero = std::all_of(prepared.train.inputs.begin(), prepared.train.inputs.end(),
                                          [c](const Spectrum& s) { return s[c] == 0.0; });
        if (!all_zero) continue;
        ++zero_columns;
        lowest = std::min(lowest, c);
        bool same = true;
        for (std::size_t r = 0; r < trained.layers[0].weights.rows(); ++r) {
            same = same && std::bit_cast<std::uint64_t>(trained.layers[0].weights(r, c)) ==
                               std::bit_cast<std::uint64_t>(init.layers[0].weights(r, c));
        }
        identical += same;
    }
    return {zero_columns > 0 && identical == zero_columns,
            std::to_string(identical) + "/" + std::to_string(zero_columns) +
                " all-zero input columns bit-identical to init (first zero column " + std::to_string(lowest) + " of " +
                std::to_string(channels) + ")"};
}

Outcome weight_alignment() {
    const auto& data = NuclearData::bundled();
    const auto cfg = scenario_defaults("isotope");
    const auto result = run_scenario(cfg, scratch("c7"), jobs());
    const auto& w = result.runs.front().result.params.layers[0].weights;
    const std::size_t cs_row = class_of(TaskKind::IsotopeID, {data.isotope(IsotopeName::Cesium), 1.0, 10.0,
                                                              data.shielding(Material::Bare), false});
    const auto row = w.row(cs_row);
    const auto peak_weight = static_cast<std::size_t>(
        std::max_element(row.begin(), row.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        row.begin());

    const SourceConfig cs{data.isotope(IsotopeName::Cesium), kDefaultActivityBq, 10.0, data.shielding(Material::Bare)};
    const auto tmpl = rebin_to(build_template(cs, cfg.detector, kTemplateDwellS), cfg.rebin_channels);
    const auto centroid = static_cast<std::size_t>(
        std::max_element(tmpl.counts().begin(), tmpl.counts().end()) - tmpl.counts().begin());
    const long offset = static_cast<long>(peak_weight) - static_cast<long>(centroid);
    return {std::abs(offset) <= 5, "Cs weight |max| at channel " + std::to_string(peak_weight) +
                                       ", template argmax " + std::to_string(centroid) + ", offset " +
                                       std::to_string(offset) + " (tolerance 5)"};
}

Outcome reproducibility() {
    bool ok = true;
    std::string detail;
    for (auto name : kScenarioNames) {
        const auto cfg = scenario_defaults(name);
        const auto a = scratch(std::string("c8_") + std::string(name) + "_a");
        const auto b = scratch(std::string("c8_") + std::string(name) + "_b");
        const auto ra = run_scenario(cfg, a, 1);
        run_scenario(cfg, b, jobs() + 2);
        std::size_t compared = 0, same = 0;
        for (const auto& run : ra.runs) {
            const auto rel = fs::relative(run.dir, a);
            for (const char* file : {"metrics.csv", "model.json"}) {
                ++compared;
                same += slurp(a / rel / file) == slurp(b / rel / file);
            }
        }
        ok = ok && same == compared;
        detail += std::string(name) + " " + std::to_string(same) + "/" + std::to_string(compared) + " identical; ";
    }
    return {ok, detail + "reruns used 1 and " + std::to_string(jobs() + 2) + " workers"};
}

Outcome format_round_trips() {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto cal = EnergyCalibration::default_nai();

    std::size_t csv_exact = 0;
    for (int i = 0; i < 50; ++i) {
        std::vector<double> c(cal.n_channels());
        for (auto& v : c) v = std::ldexp(u(gen), static_cast<int>(gen() % 40) - 20);
        const Spectrum s(std::move(c), cal, 0.5 + u(gen), SpectrumKind::ExpectedTemplate);
        std::stringstream io;
        write_spectrum_csv(io, s);
        csv_exact += read_spectrum_csv(io) == s;
    }

    const auto dir = scratch("c9");
    fs::create_directories(dir);
    std::size_t json_exact = 0;
    for (auto arch : {Architecture::linear(), Architecture::hidden_tanh(16)}) {
        auto p = init_params(arch, 256, 5, gen());
        for (auto& l : p.layers) {
            for (auto& v : l.bias) v = u(gen) - 0.5;
        }
        save_model(dir / "model.json", p);
        json_exact += load_model(dir / "model.json") == p;
    }

    std::size_t conserved = 0;
    constexpr int kSpectra = 1000;
    for (int i = 0; i < kSpectra; ++i) {
        std::vector<double> means(cal.n_channels());
        const double scale = std::ldexp(1.0, static_cast<int>(gen() % 16));
        for (auto& m : means) m = u(gen) * scale;
        const Spectrum tmpl(std::move(means), cal, 1.0, SpectrumKind::ExpectedTemplate);
        const auto s = poisson_sample(tmpl, 1.0, gen());
        const double total = total_counts(s);
        bool ok = true;
        for (std::size_t n : {512, 256, 128, 1}) ok = ok && total_counts(rebin_to(s, n)) == total;
        conserved += ok;
    }
    fs::remove_all(dir);
    return {csv_exact == 50 && json_exact == 2 && conserved == kSpectra,
            "spectrum CSV " + std::to_string(csv_exact) + "/50 exact, model JSON " + std::to_string(json_exact) +
                "/2 exact, rebin totals " + std::to_string(conserved) + "/" + std::to_string(kSpectra) + " exact"};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    int only = 0;
    app.add_option("--only", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "gradient fidelity", gradient_fidelity},
        {2, "Poisson sampler statistics", poisson_statistics},
        {3, "isotope scenario convergence", isotope_convergence},
        {4, "shielding scenario above chance", shielding_above_chance},
        {5, "gauge hidden-vs-linear margin", gauge_margin},
        {6, "zero-column invariance", zero_column_invariance},
        {7, "weight-feature alignment", weight_alignment},
        {8, "reproducibility", reproducibility},
        {9, "format round trips", format_round_trips},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        Outcome o{false, ""};
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << ": " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
