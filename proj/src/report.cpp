#include "gammasort/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gammasort/text_format.hpp"

namespace gammasort {
namespace {

namespace fs = std::filesystem;

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fixed(double v, int digits = 2) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
    return {buf, r.ptr};
}

std::string tick_label(double v) {
    if (std::fabs(v) < 1e-12) v = 0.0;
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    return {buf, r.ptr};
}

std::string escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

double nice_step(double range) {
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    return (f <= 1.0 ? 1.0 : f <= 2.0 ? 2.0 : f <= 5.0 ? 5.0 : 10.0) * mag;
}

struct Axis {
    double lo, hi, step;
};

Axis make_axis(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = lo == 0.0 ? 1.0 : std::fabs(lo) * 0.1;
        lo -= pad;
        hi += pad;
    }
    const double step = nice_step(hi - lo);
    return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_text(const fs::path& path, const std::string& text) { open_out(path) << text; }

struct WeightSeries {
    std::string name;
    std::vector<double> channel;
    std::vector<double> weight;
};

WeightSeries read_weight_series(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string first;
    std::getline(in, first);
    WeightSeries s;
    s.name = path.stem().string();
    if (const auto pos = first.find("series="); first.starts_with("#") && pos != std::string::npos) {
        const auto end = first.find(' ', pos);
        s.name = first.substr(pos + 7, end == std::string::npos ? std::string::npos : end - pos - 7);
    }
    const auto table = read_numeric_csv(path);
    s.channel = table.column(0);
    s.weight = table.column(1);
    return s;
}

std::vector<fs::path> weight_files(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) return files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && name.starts_with("weights_") && name.ends_with(".csv")) files.push_back(e.path());
    }
    // weights_class_10 sorts after weights_class_9.
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
        const auto sa = a.stem().string(), sb = b.stem().string();
        return sa.size() != sb.size() ? sa.size() < sb.size() : sa < sb;
    });
    return files;
}

std::vector<fs::path> report_one(const fs::path& run_dir, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::vector<fs::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        write_text(out_dir / name, text);
        written.push_back(out_dir / name);
    };

    const auto metrics = read_numeric_csv(run_dir / "metrics.csv");
    if (metrics.header.size() < 4) throw std::runtime_error("metrics.csv: expected at least 4 columns");
    const auto epochs = metrics.column(0);

    std::ostringstream loss_csv;
    loss_csv << "epoch,train_loss,test_loss\n";
    for (const auto& r : metrics.rows) loss_csv << format_double(r[0]) << ',' << format_double(r[1]) << ',' << format_double(r[2]) << '\n';
    emit("loss.csv", loss_csv.str());
    emit("loss.svg", render_svg({"Cross-entropy loss", "epoch", "loss",
                                 {{"train", epochs, metrics.column(1)}, {"test", epochs, metrics.column(2)}}}));

    std::ostringstream acc_csv;
    acc_csv << "epoch";
    for (std::size_t c = 3; c < metrics.header.size(); ++c) acc_csv << ',' << metrics.header[c];
    acc_csv << '\n';
    LinePlot acc_plot{"Test accuracy", "epoch", "accuracy", {}};
    for (std::size_t c = 3; c < metrics.header.size(); ++c) {
        acc_plot.series.push_back({metrics.header[c], epochs, metrics.column(c)});
    }
    for (const auto& r : metrics.rows) {
        acc_csv << format_double(r[0]);
        for (std::size_t c = 3; c < r.size(); ++c) acc_csv << ',' << format_double(r[c]);
        acc_csv << '\n';
    }
    emit("accuracy.csv", acc_csv.str());
    emit("accuracy.svg", render_svg(acc_plot));

    std::ostringstream final_csv;
    final_csv << "class,accuracy\n";
    if (!metrics.rows.empty()) {
        for (std::size_t c = 4; c < metrics.header.size(); ++c) {
            auto name = metrics.header[c];
            if (name.starts_with("acc_")) name = name.substr(4);
            final_csv << name << ',' << format_double(metrics.rows.back()[c]) << '\n';
        }
    }
    emit("accuracy_final.csv", final_csv.str());

    std::vector<WeightSeries> weights;
    for (const auto& f : weight_files(run_dir)) weights.push_back(read_weight_series(f));
    if (!weights.empty()) {
        std::ostringstream w_csv;
        w_csv << "channel";
        for (const auto& w : weights) w_csv << ',' << w.name;
        w_csv << '\n';
        for (std::size_t i = 0; i < weights.front().channel.size(); ++i) {
            w_csv << format_double(weights.front().channel[i]);
            for (const auto& w : weights) w_csv << ',' << (i < w.weight.size() ? format_double(w.weight[i]) : "");
            w_csv << '\n';
        }
        emit("weights.csv", w_csv.str());
        for (std::size_t k = 0; k < weights.size(); ++k) {
            const auto& w = weights[k];
            emit("weights_" + std::to_string(k) + ".svg",
                 render_svg({"Weights: " + w.name, "channel", "weight", {{w.name, w.channel, w.weight}}}));
        }
    }
    return written;
}

}  // namespace

std::string render_svg(const LinePlot& plot) {
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& s : plot.series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("render_svg: series '" + s.name + "' has mismatched x/y");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    }
    if (!std::isfinite(x_lo)) x_lo = x_hi = y_lo = y_hi = 0.0;
    const Axis xa = make_axis(x_lo, x_hi);
    const Axis ya = make_axis(y_lo, y_hi);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xa.lo) / (xa.hi - xa.lo) * pw; };
    auto py = [&](double y) { return kTop + ph - (y - ya.lo) / (ya.hi - ya.lo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(kWidth, 0) << "\" height=\"" << fixed(kHeight, 0)
      << "\" viewBox=\"0 0 " << fixed(kWidth, 0) << ' ' << fixed(kHeight, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
      << "</text>\n";

    for (double t = xa.lo; t <= xa.hi + xa.step * 1e-9; t += xa.step) {
        o << "<line x1=\"" << fixed(px(t)) << "\" y1=\"" << fixed(kTop) << "\" x2=\"" << fixed(px(t)) << "\" y2=\""
          << fixed(kTop + ph) << "\" stroke=\"#e0e0e0\"/>\n";
        o << "<text x=\"" << fixed(px(t)) << "\" y=\"" << fixed(kTop + ph + 16) << "\" text-anchor=\"middle\">"
          << tick_label(t) << "</text>\n";
    }
    for (double t = ya.lo; t <= ya.hi + ya.step * 1e-9; t += ya.step) {
        o << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(py(t)) << "\" x2=\"" << fixed(kLeft + pw) << "\" y2=\""
          << fixed(py(t)) << "\" stroke=\"#e0e0e0\"/>\n";
        o << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(py(t) + 4) << "\" text-anchor=\"end\">"
          << tick_label(t) << "</text>\n";
    }
    o << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop) << "\" width=\"" << fixed(pw) << "\" height=\""
      << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"" << fixed(kHeight - 12) << "\" text-anchor=\"middle\">"
      << escape(plot.x_label) << "</text>\n";
    o << "<text x=\"16\" y=\"" << fixed(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fixed(kTop + ph / 2) << ")\">" << escape(plot.y_label) << "</text>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            o << (first ? "" : " ") << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i]));
            first = false;
        }
        o << "\"/>\n";
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
        o << "<line x1=\"" << fixed(kLeft + pw + 12) << "\" y1=\"" << fixed(ly - 4) << "\" x2=\"" << fixed(kLeft + pw + 32)
          << "\" y2=\"" << fixed(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << fixed(kLeft + pw + 38) << "\" y=\"" << fixed(ly) << "\">" << escape(s.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::vector<double> CsvTable::column(std::size_t index) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (index >= r.size()) throw std::out_of_range("CsvTable: column " + std::to_string(index) + " out of range");
        out.push_back(r[index]);
    }
    return out;
}

CsvTable read_numeric_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto fields = split(text, ',');
        if (t.header.empty()) {
            for (auto f : fields) t.header.emplace_back(trim(f));
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(t.header.size()) + " fields");
        }
        std::vector<double> row;
        for (auto f : fields) row.push_back(parse_double(trim(f)));
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw std::runtime_error(path.string() + ": no header");
    return t;
}

std::vector<std::string> missing_run_artifacts(const fs::path& run_dir) {
    std::vector<std::string> missing;
    for (const char* name : {"model.json", "metrics.csv", "confusion.csv"}) {
        if (!fs::is_regular_file(run_dir / name)) missing.emplace_back(name);
    }
    if (weight_files(run_dir).empty()) missing.emplace_back("weights_*.csv");
    return missing;
}

std::vector<fs::path> write_report(const fs::path& run_dir) {
    if (!fs::is_directory(run_dir)) throw std::runtime_error("report: " + run_dir.string() + " is not a directory");
    const auto missing = missing_run_artifacts(run_dir);
    if (missing.empty()) return report_one(run_dir, run_dir / "report");

    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(run_dir)) {
        if (e.is_directory() && e.path().filename() != "report" && missing_run_artifacts(e.path()).empty()) {
            subdirs.push_back(e.path());
        }
    }
    if (subdirs.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw std::runtime_error("report: " + run_dir.string() + " is missing run artifacts: " + list);
    }
    std::sort(subdirs.begin(), subdirs.end());
    std::vector<fs::path> written;
    for (const auto& d : subdirs) {
        auto files = report_one(d, run_dir / "report" / d.filename());
        written.insert(written.end(), files.begin(), files.end());
    }
    return written;
}

}  // namespace gammasort
