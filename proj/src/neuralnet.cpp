#include "gammasort/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "gammasort/random.hpp"

namespace gammasort {
namespace {

constexpr double kProbFloor = 1e-12;

void check_input(const NetworkParams& p, std::span<const double> x) {
    if (p.layers.empty() || x.size() != p.n_inputs()) {
        throw std::invalid_argument("network input has " + std::to_string(x.size()) + " channels, expected " +
                                    std::to_string(p.layers.empty() ? 0 : p.n_inputs()));
    }
}

std::vector<double> affine(const DenseLayer& layer, std::span<const double> x) {
    const auto& w = layer.weights;
    std::vector<double> out(layer.bias);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        const auto row = w.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
        out[r] += acc;
    }
    return out;
}

void add_outer(DenseLayer& acc, std::span<const double> delta, std::span<const double> x) {
    for (std::size_t r = 0; r < delta.size(); ++r) {
        const double d = delta[r];
        auto row = acc.weights.row(r);
        for (std::size_t c = 0; c < x.size(); ++c) {
            if (x[c] != 0.0) row[c] += d * x[c];
        }
        acc.bias[r] += d;
    }
}

void require_arch(const NetworkParams& p, ArchKind kind) {
    const std::size_t expected = kind == ArchKind::Linear ? 1 : 2;
    if (p.arch.kind != kind || p.layers.size() != expected) {
        throw std::invalid_argument(std::string("network is not a ") + std::string(to_string(kind)) + " model");
    }
}

DenseLayer zeros_like(const DenseLayer& l) {
    return DenseLayer{Matrix(l.weights.rows(), l.weights.cols()), std::vector<double>(l.bias.size(), 0.0)};
}

bool same_shape(const DenseLayer& a, const DenseLayer& b) {
    return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() && a.bias.size() == b.bias.size();
}

nlohmann::json doubles(const std::vector<double>& v) { return nlohmann::json(v); }

std::vector<double> read_doubles(const nlohmann::json& j, std::size_t n, const char* what) {
    if (!j.is_array() || j.size() != n) {
        throw std::runtime_error(std::string("model json: ") + what + " must be an array of " + std::to_string(n));
    }
    std::vector<double> v;
    v.reserve(n);
    for (const auto& e : j) {
        if (!e.is_number()) throw std::runtime_error(std::string("model json: non-numeric entry in ") + what);
        v.push_back(e.get<double>());
    }
    return v;
}

}  // namespace

std::string_view to_string(ArchKind kind) { return kind == ArchKind::Linear ? "linear" : "hidden_tanh"; }

ArchKind parse_arch(std::string_view text) {
    if (text == "linear") return ArchKind::Linear;
    if (text == "hidden_tanh" || text == "hidden") return ArchKind::HiddenTanh;
    throw std::invalid_argument("unknown architecture '" + std::string(text) + "'");
}

void NetworkParams::validate() const {
    const std::size_t expected = arch.kind == ArchKind::Linear ? 1 : 2;
    if (layers.size() != expected) throw std::invalid_argument("NetworkParams: wrong number of layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.weights.rows() == 0 || l.weights.cols() == 0 || l.bias.size() != l.weights.rows()) {
            throw std::invalid_argument("NetworkParams: inconsistent layer shape");
        }
        if (i > 0 && l.weights.cols() != layers[i - 1].weights.rows()) {
            throw std::invalid_argument("NetworkParams: layers do not chain");
        }
        const auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(l.weights.data().begin(), l.weights.data().end(), finite) ||
            !std::all_of(l.bias.begin(), l.bias.end(), finite)) {
            throw std::invalid_argument("NetworkParams: non-finite entry");
        }
    }
    if (arch.kind == ArchKind::HiddenTanh && layers[0].weights.rows() != arch.hidden_width) {
        throw std::invalid_argument("NetworkParams: hidden width mismatch");
    }
}

Gradients Gradients::zeros_like(const NetworkParams& p) {
    Gradients g;
    for (const auto& l : p.layers) g.layers.push_back(gammasort::zeros_like(l));
    return g;
}

bool Gradients::matches(const NetworkParams& p) const {
    if (layers.size() != p.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (!same_shape(layers[i], p.layers[i])) return false;
    }
    return true;
}

void Gradients::scale(double factor) {
    for (auto& l : layers) {
        for (double& w : l.weights.data()) w *= factor;
        for (double& b : l.bias) b *= factor;
    }
}

AdamState AdamState::fresh(const NetworkParams& p, AdamHyper hyper) {
    return AdamState{Gradients::zeros_like(p), Gradients::zeros_like(p), 0, hyper};
}

NetworkParams init_params(Architecture arch, std::size_t n_channels, std::size_t n_classes, std::uint64_t seed) {
    if (n_channels == 0 || n_classes == 0) throw std::invalid_argument("init_params: dimensions must be positive");
    if (arch.kind == ArchKind::HiddenTanh && arch.hidden_width == 0) {
        throw std::invalid_argument("init_params: hidden width must be positive");
    }
    if (arch.kind == ArchKind::Linear) arch.hidden_width = 0;

    std::vector<std::pair<std::size_t, std::size_t>> shapes;  // (out, in)
    if (arch.kind == ArchKind::Linear) {
        shapes = {{n_classes, n_channels}};
    } else {
        shapes = {{arch.hidden_width, n_channels}, {n_classes, arch.hidden_width}};
    }
    NetworkParams p{arch, {}};
    const Philox4x32 root(seed);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const auto [out, in] = shapes[i];
        const double r = std::sqrt(6.0 / static_cast<double>(in + out));
        auto rng = root.split(i);
        DenseLayer layer{Matrix(out, in), std::vector<double>(out, 0.0)};
        for (double& w : layer.weights.data()) w = r * (2.0 * rng.uniform() - 1.0);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

std::vector<double> forward_linear(const NetworkParams& p, std::span<const double> x) {
    require_arch(p, ArchKind::Linear);
    check_input(p, x);
    return affine(p.layers[0], x);
}

std::vector<double> hidden_activations(const NetworkParams& p, std::span<const double> x) {
    require_arch(p, ArchKind::HiddenTanh);
    check_input(p, x);
    auto h = affine(p.layers[0], x);
    for (double& v : h) v = std::tanh(v);
    return h;
}

std::vector<double> forward_hidden(const NetworkParams& p, std::span<const double> x) {
    const auto y1 = hidden_activations(p, x);
    return affine(p.layers[1], y1);
}

std::vector<double> forward(const NetworkParams& p, std::span<const double> x) {
    return p.arch.kind == ArchKind::Linear ? forward_linear(p, x) : forward_hidden(p, x);
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    for (double z : logits) {
        if (!std::isfinite(z)) throw std::invalid_argument("softmax: non-finite logit");
    }
    const double zmax = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::exp(logits[i] - zmax);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

double cross_entropy(std::span<const double> probs, std::span<const double> one_hot) {
    if (probs.size() != one_hot.size()) throw std::invalid_argument("cross_entropy: length mismatch");
    std::size_t hot = probs.size();
    for (std::size_t i = 0; i < one_hot.size(); ++i) {
        if (one_hot[i] == 1.0) {
            if (hot != probs.size()) throw std::invalid_argument("cross_entropy: label has several hot entries");
            hot = i;
        } else if (one_hot[i] != 0.0) {
            throw std::invalid_argument("cross_entropy: label is not one-hot");
        }
    }
    if (hot == probs.size()) throw std::invalid_argument("cross_entropy: label has no hot entry");
    return -std::log(std::max(probs[hot], kProbFloor));
}

std::size_t predict(const NetworkParams& p, std::span<const double> x) {
    const auto z = forward(p, x);
    return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

double accumulate_gradients(const NetworkParams& p, std::span<const double> x, std::size_t label, Gradients& acc) {
    check_input(p, x);
    if (label >= p.n_classes()) throw std::invalid_argument("backward: label out of range");
    if (!acc.matches(p)) throw std::invalid_argument("backward: gradient shape mismatch");

    if (p.arch.kind == ArchKind::Linear) {
        require_arch(p, ArchKind::Linear);
        auto delta = softmax(affine(p.layers[0], x));
        const double loss = -std::log(std::max(delta[label], kProbFloor));
        delta[label] -= 1.0;
        add_outer(acc.layers[0], delta, x);
        return loss;
    }

    require_arch(p, ArchKind::HiddenTanh);
    auto y1 = affine(p.layers[0], x);
    for (double& v : y1) v = std::tanh(v);
    auto delta = softmax(affine(p.layers[1], y1));
    const double loss = -std::log(std::max(delta[label], kProbFloor));
    delta[label] -= 1.0;
    add_outer(acc.layers[1], delta, y1);

    const auto& w2 = p.layers[1].weights;
    std::vector<double> dh(y1.size(), 0.0);
    for (std::size_t r = 0; r < w2.rows(); ++r) {
        const auto row = w2.row(r);
        for (std::size_t j = 0; j < row.size(); ++j) dh[j] += row[j] * delta[r];
    }
    for (std::size_t j = 0; j < dh.size(); ++j) dh[j] *= 1.0 - y1[j] * y1[j];
    add_outer(acc.layers[0], dh, x);
    return loss;
}

LossAndGradients backward(const NetworkParams& p, std::span<const double> x, std::span<const double> one_hot) {
    if (one_hot.size() != p.n_classes()) throw std::invalid_argument("backward: label length mismatch");
    std::size_t label = one_hot.size();
    for (std::size_t i = 0; i < one_hot.size(); ++i) {
        if (one_hot[i] == 1.0 && label == one_hot.size()) {
            label = i;
        } else if (one_hot[i] != 0.0) {
            throw std::invalid_argument("backward: label is not one-hot");
        }
    }
    if (label == one_hot.size()) throw std::invalid_argument("backward: label is not one-hot");
    auto grads = Gradients::zeros_like(p);
    const double loss = accumulate_gradients(p, x, label, grads);
    return {loss, std::move(grads)};
}

void adam_step_in_place(NetworkParams& p, const Gradients& g, AdamState& s) {
    if (!g.matches(p) || !s.m.matches(p) || !s.v.matches(p)) {
        throw std::invalid_argument("adam_step: shape mismatch");
    }
    const auto& h = s.hyper;
    const double t = static_cast<double>(s.t + 1);
    const double c1 = 1.0 - std::pow(h.beta1, t);
    const double c2 = 1.0 - std::pow(h.beta2, t);
    auto update = [&](std::vector<double>& theta, const std::vector<double>& grad, std::vector<double>& m,
                      std::vector<double>& v) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * grad[i];
            v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * grad[i] * grad[i];
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            theta[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.epsilon);
        }
    };
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        update(p.layers[l].weights.data(), g.layers[l].weights.data(), s.m.layers[l].weights.data(),
               s.v.layers[l].weights.data());
        update(p.layers[l].bias, g.layers[l].bias, s.m.layers[l].bias, s.v.layers[l].bias);
    }
    ++s.t;
}

std::pair<NetworkParams, AdamState> adam_step(const NetworkParams& p, const Gradients& g, const AdamState& s) {
    NetworkParams next = p;
    AdamState state = s;
    adam_step_in_place(next, g, state);
    return {std::move(next), std::move(state)};
}

nlohmann::json model_to_json(const NetworkParams& p, const nlohmann::json& training) {
    p.validate();
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : p.layers) {
        layers.push_back({{"rows", l.weights.rows()},
                          {"cols", l.weights.cols()},
                          {"weights", doubles(l.weights.data())},
                          {"bias", doubles(l.bias)}});
    }
    return {{"format", "gammasort-model"},
            {"version", 1},
            {"arch", to_string(p.arch.kind)},
            {"hidden_width", p.arch.hidden_width},
            {"n_inputs", p.n_inputs()},
            {"n_classes", p.n_classes()},
            {"layers", std::move(layers)},
            {"training", training}};
}

NetworkParams model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format") != "gammasort-model") throw std::runtime_error("model json: unexpected format tag");
        NetworkParams p;
        p.arch.kind = parse_arch(j.at("arch").get<std::string>());
        p.arch.hidden_width = j.at("hidden_width").get<std::size_t>();
        for (const auto& jl : j.at("layers")) {
            const auto rows = jl.at("rows").get<std::size_t>();
            const auto cols = jl.at("cols").get<std::size_t>();
            DenseLayer layer{Matrix(rows, cols), read_doubles(jl.at("bias"), rows, "bias")};
            layer.weights.data() = read_doubles(jl.at("weights"), rows * cols, "weights");
            p.layers.push_back(std::move(layer));
        }
        p.validate();
        if (p.n_inputs() != j.at("n_inputs").get<std::size_t>() || p.n_classes() != j.at("n_classes").get<std::size_t>()) {
            throw std::runtime_error("model json: declared dimensions disagree with layers");
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("model json: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const NetworkParams& p, const nlohmann::json& training) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << model_to_json(p, training).dump(1) << '\n';
}

NetworkParams load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

}  // namespace gammasort
