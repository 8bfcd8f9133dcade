// gammasort command-line interface.
#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>
#include <thread>

#include "gammasort/manifest.hpp"
#include "gammasort/report.hpp"
#include "gammasort/scenario.hpp"
#include "gammasort/text_format.hpp"

namespace fs = std::filesystem;
using namespace gammasort;

namespace {

struct CommonOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::optional<std::size_t> rebin;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool out_required) {
    cmd->add_option("--config", o.config, "Run configuration JSON")->check(CLI::ExistingFile);
    auto* out = cmd->add_option("--out", o.out, "Output directory");
    if (out_required) out->required();
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--rebin", o.rebin, "Network input channels")->check(CLI::IsMember({1024, 256}));
}

RunConfig resolve_config(const CommonOptions& o, RunConfig base) {
    RunConfig cfg = o.config.empty() ? std::move(base) : load_run_config(o.config, std::move(base));
    if (o.seed) cfg.seed = *o.seed;
    if (o.rebin) cfg.rebin_channels = *o.rebin;
    return cfg;
}

LabeledDataset rebin_if_needed(const LabeledDataset& ds, std::size_t channels) {
    if (ds.n_channels() == channels) return ds;
    if (ds.n_channels() < channels || ds.n_channels() % channels != 0) {
        throw std::invalid_argument("dataset has " + std::to_string(ds.n_channels()) + " channels, cannot rebin to " +
                                    std::to_string(channels));
    }
    return rebin_dataset(ds, channels);
}

nlohmann::json evaluation_json(const Evaluation& e, TaskKind task) {
    return {{"task", to_string(task)},
            {"classes", class_names(task)},
            {"items", e.total()},
            {"loss", e.loss},
            {"overall_accuracy", e.overall_accuracy},
            {"per_class_accuracy", e.per_class_accuracy},
            {"confusion", e.confusion}};
}

void print_written(const fs::path& path) { std::cout << path.generic_string() << '\n'; }

int cmd_scenario(const std::string& name, const CommonOptions& o) {
    const auto cfg = resolve_config(o, scenario_defaults(name));
    const auto result = run_scenario(cfg, o.out, o.jobs);
    for (const auto& run : result.runs) {
        const auto& e = run.result.history.final_evaluation();
        std::cout << to_string(run.arch.kind) << ": overall_acc=" << format_double(e.overall_accuracy) << " per_class=[";
        for (std::size_t i = 0; i < e.per_class_accuracy.size(); ++i) {
            std::cout << (i ? " " : "") << format_double(e.per_class_accuracy[i]);
        }
        std::cout << "] -> " << run.dir.generic_string() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gamma-ray spectrum classifier toolkit: synthesize, sample, train, evaluate, report"};
    app.require_subcommand(1);
    std::string active = "gammasort";

    CommonOptions synth_o;
    auto* synth = app.add_subcommand("synth", "Write one 24 h template per grid cell plus a manifest");
    add_common(synth, synth_o, true);

    CommonOptions sample_o;
    std::string templates_dir;
    std::optional<std::size_t> samples;
    std::optional<double> dwell;
    std::optional<std::string> task_name;
    bool expected = false;
    auto* sample = app.add_subcommand("sample", "Poisson-sample templates into a packed dataset");
    add_common(sample, sample_o, true);
    sample->add_option("--templates", templates_dir, "Directory written by synth")->required();
    sample->add_option("--samples", samples, "Realizations per configuration")->check(CLI::PositiveNumber);
    sample->add_option("--dwell", dwell, "Dwell in seconds")->check(CLI::PositiveNumber);
    sample->add_option("--task", task_name, "isotope, shielding or gauge");
    sample->add_flag("--expected", expected, "Emit noise-free templates rescaled to the dwell instead of samples");

    CommonOptions train_o;
    std::string train_dir, test_dir;
    std::optional<std::string> train_scenario;
    auto* train_cmd = app.add_subcommand("train", "Train on dataset directories, or run a scenario");
    add_common(train_cmd, train_o, true);
    train_cmd->add_option("--train", train_dir, "Training dataset directory");
    train_cmd->add_option("--test", test_dir, "Test dataset directory");
    train_cmd->add_option("--scenario", train_scenario, "isotope, shielding or gauge");

    CommonOptions eval_o;
    std::string model_path, dataset_dir;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a dataset");
    add_common(eval_cmd, eval_o, false);
    eval_cmd->add_option("--model", model_path, "model.json")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--dataset", dataset_dir, "Dataset directory")->required();

    CommonOptions report_o;
    auto* report = app.add_subcommand("report", "Write plot CSVs and SVGs for a run directory");
    add_common(report, report_o, true);

    CommonOptions scenario_o;
    std::string scenario_name;
    auto* scenario = app.add_subcommand("scenario", "Run a canned scenario end to end");
    scenario->add_option("name", scenario_name, "isotope, shielding or gauge")->required();
    add_common(scenario, scenario_o, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << nlohmann::json{{"error", e.what()}, {"kind", "usage"}}.dump() << '\n';
        return 2;
    }

    try {
        const auto& data = NuclearData::bundled();
        if (*synth) {
            active = "synth";
            const auto cfg = resolve_config(synth_o, RunConfig{});
            const auto set = synthesize(cfg, data, synth_o.jobs);
            save_template_set(synth_o.out, set);
            std::cout << set.grid.size() << " templates -> " << synth_o.out << '\n';
        } else if (*sample) {
            active = "sample";
            const auto set = load_template_set(templates_dir, data);
            auto cfg = resolve_config(sample_o, set.config);
            if (task_name) cfg.task = parse_task(*task_name);
            if (dwell) cfg.dwell_s = *dwell;
            DatasetBundle b;
            b.seed = cfg.seed;
            b.samples_per_config = expected ? 1 : samples.value_or(cfg.test_samples_per_config);
            b.dataset = expected ? template_dataset(set.grid, set.templates, cfg.task, cfg.dwell_s)
                                 : sample_dataset(set.grid, set.templates, cfg.task, b.samples_per_config,
                                                  cfg.dwell_s, cfg.seed, sample_o.jobs);
            if (sample_o.rebin) b.dataset = rebin_if_needed(b.dataset, *sample_o.rebin);
            save_dataset_dir(sample_o.out, b);
            std::cout << b.dataset.size() << " items -> " << sample_o.out << '\n';
        } else if (*train_cmd) {
            active = "train";
            if (train_scenario) {
                if (!train_dir.empty() || !test_dir.empty()) {
                    throw std::invalid_argument("--scenario cannot be combined with --train/--test");
                }
                return cmd_scenario(*train_scenario, train_o);
            }
            if (train_dir.empty() || test_dir.empty()) {
                throw std::invalid_argument("train needs --train and --test dataset directories, or --scenario");
            }
            auto tr = load_dataset_dir(train_dir, data).dataset;
            auto te = load_dataset_dir(test_dir, data).dataset;
            if (tr.task != te.task) {
                throw std::invalid_argument(std::string("task mismatch: train is ") + std::string(to_string(tr.task)) +
                                            ", test is " + std::string(to_string(te.task)));
            }
            RunConfig base;
            base.task = tr.task;
            base.rebin_channels = tr.n_channels();
            auto cfg = resolve_config(train_o, base);
            if (cfg.task != tr.task) {
                throw std::invalid_argument(std::string("task mismatch: config is ") + std::string(to_string(cfg.task)) +
                                            ", datasets are " + std::string(to_string(tr.task)));
            }
            for (const auto& a : cfg.architectures) cfg.train_config(a).validate();
            ScenarioData sd;
            sd.train = rebin_if_needed(tr, cfg.rebin_channels);
            sd.test = rebin_if_needed(te, cfg.rebin_channels);
            if (cfg.task == TaskKind::GaugeBinary && cfg.gauge_positive_ratio > 0.0) {
                sd.train = oversample(sd.train, kCesiumSteelClass, cfg.gauge_positive_ratio);
            }
            const auto result = train_and_write(cfg, sd, train_o.out, train_o.jobs);
            for (const auto& run : result.runs) print_written(run.dir / "model.json");
        } else if (*eval_cmd) {
            active = "eval";
            const auto model_json = read_json_file(model_path);
            const auto params = model_from_json(model_json);
            auto ds = load_dataset_dir(dataset_dir, data).dataset;
            if (ds.n_classes() != params.n_classes()) {
                throw std::invalid_argument("model has " + std::to_string(params.n_classes()) + " classes, dataset task " +
                                            std::string(to_string(ds.task)) + " has " + std::to_string(ds.n_classes()));
            }
            ds = rebin_if_needed(ds, eval_o.rebin.value_or(params.n_inputs()));
            bool max_normalize = false;
            if (const auto t = model_json.find("training"); t != model_json.end() && t->is_object()) {
                max_normalize = t->value("max_normalize", false);
            }
            const auto e = evaluate(params, ds, max_normalize, eval_o.jobs);
            const auto j = evaluation_json(e, ds.task);
            if (!eval_o.out.empty()) {
                fs::create_directories(eval_o.out);
                write_json_file(fs::path(eval_o.out) / "eval.json", j);
                write_confusion_csv(fs::path(eval_o.out) / "eval_confusion.csv", e, class_names(ds.task));
            }
            std::cout << j.dump(2) << '\n';
        } else if (*report) {
            active = "report";
            for (const auto& f : write_report(report_o.out)) print_written(f);
        } else if (*scenario) {
            active = "scenario";
            return cmd_scenario(scenario_name, scenario_o);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << nlohmann::json{{"error", e.what()}, {"kind", "invalid_input"}, {"command", active}}.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", e.what()}, {"kind", "failure"}, {"command", active}}.dump() << '\n';
        return 1;
    }
    return 0;
}
