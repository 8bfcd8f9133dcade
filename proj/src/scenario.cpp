#include "gammasort/scenario.hpp"

#include <fstream>
#include <stdexcept>

#include "gammasort/random.hpp"
#include "gammasort/text_format.hpp"

namespace gammasort {
namespace {

constexpr std::uint64_t kTrainDataStream = 101;
constexpr std::uint64_t kTestDataStream = 102;
constexpr std::uint64_t kMeasuredDataStream = 103;

LabeledDataset rebinned(LabeledDataset ds, std::size_t n_channels) {
    if (ds.n_channels() == n_channels) return ds;
    return rebin_dataset(ds, n_channels);
}

nlohmann::json training_json(const RunConfig& cfg, std::size_t epoch) {
    return {{"task", to_string(cfg.task)},
            {"classes", class_names(cfg.task)},
            {"epoch", epoch},
            {"seed", cfg.seed},
            {"batch_size", cfg.batch_size},
            {"max_normalize", cfg.max_normalize},
            {"rebin_channels", cfg.rebin_channels},
            {"dwell_s", cfg.dwell_s},
            {"train_source", to_string(cfg.train_source)},
            {"adam", {{"lr", cfg.adam.lr}, {"beta1", cfg.adam.beta1}, {"beta2", cfg.adam.beta2}, {"epsilon", cfg.adam.epsilon}}}};
}

void write_evaluation_row_csv(const std::filesystem::path& path, const Evaluation& e,
                              const std::vector<std::string>& names) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "loss,overall_acc";
    for (const auto& n : names) out << ",acc_" << n;
    out << '\n' << format_double(e.loss) << ',' << format_double(e.overall_accuracy);
    for (double a : e.per_class_accuracy) out << ',' << format_double(a);
    out << '\n';
}

}  // namespace

ScenarioData prepare_data(const RunConfig& cfg, const NuclearData& data, unsigned jobs) {
    cfg.validate(data);
    const auto grid = cfg.grid.build(data);
    const auto templates = build_templates(grid, cfg.detector, jobs);

    ScenarioData out;
    out.train = cfg.train_source == TrainSource::Templates
                    ? template_dataset(grid, templates, cfg.task, cfg.dwell_s)
                    : sample_dataset(grid, templates, cfg.task, cfg.train_samples_per_config, cfg.dwell_s,
                                     derive_seed(cfg.seed, {kTrainDataStream}), jobs);
    out.train = rebinned(std::move(out.train), cfg.rebin_channels);
    if (cfg.task == TaskKind::GaugeBinary && cfg.gauge_positive_ratio > 0.0) {
        out.train = oversample(out.train, kCesiumSteelClass, cfg.gauge_positive_ratio);
    }
    out.test = rebinned(sample_dataset(grid, templates, cfg.task, cfg.test_samples_per_config, cfg.dwell_s,
                                       derive_seed(cfg.seed, {kTestDataStream}), jobs),
                        cfg.rebin_channels);

    if (cfg.pseudo_measured) {
        const auto measured_grid = cfg.pseudo_measured->build(data);
        out.pseudo_measured =
            rebinned(build_dataset(measured_grid, cfg.task, cfg.detector, cfg.test_samples_per_config, cfg.dwell_s,
                                   derive_seed(cfg.seed, {kMeasuredDataStream}), jobs),
                     cfg.rebin_channels);
    }
    return out;
}

std::filesystem::path arch_dir(const RunConfig& cfg, const std::filesystem::path& out, const Architecture& arch) {
    return cfg.architectures.size() == 1 ? out : out / std::string(to_string(arch.kind));
}

ScenarioResult train_and_write(const RunConfig& cfg, const ScenarioData& data, const std::filesystem::path& out,
                               unsigned jobs) {
    for (std::size_t i = 0; i < cfg.architectures.size(); ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            if (cfg.architectures[k].kind == cfg.architectures[i].kind) {
                throw std::invalid_argument("config: architectures must differ in kind");
            }
        }
    }
    std::filesystem::create_directories(out);
    save_run_config(out / "config.json", cfg);
    const auto names = class_names(cfg.task);

    ScenarioResult result;
    for (const auto& arch : cfg.architectures) {
        ArchRun run{arch, arch_dir(cfg, out, arch), train(data.train, data.test, cfg.train_config(arch), jobs), {}};
        std::filesystem::create_directories(run.dir);
        const auto& r = run.result;

        save_model(run.dir / "model.json", r.params, training_json(cfg, cfg.epochs));
        write_metrics_csv(run.dir / "metrics.csv", r.history, names);
        write_confusion_csv(run.dir / "confusion.csv", r.history.final_evaluation(), names);
        for (const auto& [epoch, params] : r.checkpoints) {
            const auto tag = std::to_string(epoch);
            save_model(run.dir / ("model_epoch" + tag + ".json"), params, training_json(cfg, epoch));
            write_confusion_csv(run.dir / ("confusion_epoch" + tag + ".csv"), r.history.at_epoch(epoch).test, names);
        }
        write_weight_features(run.dir, export_weight_features(r.params, names));

        if (data.pseudo_measured) {
            run.pseudo_measured = evaluate(r.params, *data.pseudo_measured, cfg.max_normalize, jobs);
            write_confusion_csv(run.dir / "pseudo_measured_confusion.csv", *run.pseudo_measured, names);
            write_evaluation_row_csv(run.dir / "pseudo_measured_metrics.csv", *run.pseudo_measured, names);
        }
        result.runs.push_back(std::move(run));
    }
    if (result.runs.size() > 1) write_comparison_csv(out / "comparison.csv", result.runs, names);
    return result;
}

ScenarioResult run_scenario(const RunConfig& cfg, const std::filesystem::path& out, unsigned jobs) {
    return train_and_write(cfg, prepare_data(cfg, NuclearData::bundled(), jobs), out, jobs);
}

void write_comparison_csv(const std::filesystem::path& path, const std::vector<ArchRun>& runs,
                          const std::vector<std::string>& class_labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "arch,epoch,overall_acc";
    for (const auto& n : class_labels) out << ",acc_" << n;
    out << '\n';
    for (const auto& run : runs) {
        std::vector<std::size_t> epochs;
        for (const auto& [epoch, params] : run.result.checkpoints) epochs.push_back(epoch);
        const auto last = run.result.history.epochs.back().epoch;
        if (epochs.empty() || epochs.back() != last) epochs.push_back(last);
        for (auto epoch : epochs) {
            const auto& e = run.result.history.at_epoch(epoch).test;
            out << to_string(run.arch.kind) << ',' << epoch << ',' << format_double(e.overall_accuracy);
            for (double a : e.per_class_accuracy) out << ',' << format_double(a);
            out << '\n';
        }
    }
}

}  // namespace gammasort
