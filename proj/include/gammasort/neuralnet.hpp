#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace gammasort {

enum class ArchKind { Linear, HiddenTanh };

/// Linear: logits = W x + b.
/// HiddenTanh: logits = W2 tanh(W1 x + b1) + b2.
struct Architecture {
    ArchKind kind = ArchKind::Linear;
    std::size_t hidden_width = 0;

    static Architecture linear() { return {ArchKind::Linear, 0}; }
    static Architecture hidden_tanh(std::size_t width) { return {ArchKind::HiddenTanh, width}; }

    bool operator==(const Architecture&) const = default;
};

std::string_view to_string(ArchKind kind);
ArchKind parse_arch(std::string_view text);

/// Row-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct DenseLayer {
    Matrix weights;  // outputs x inputs
    std::vector<double> bias;

    bool operator==(const DenseLayer&) const = default;
};

/// Weights and biases for either architecture. Linear holds one layer (W, b);
/// HiddenTanh holds two (W1, b1) and (W2, b2).
struct NetworkParams {
    Architecture arch;
    std::vector<DenseLayer> layers;

    std::size_t n_inputs() const { return layers.front().weights.cols(); }
    std::size_t n_classes() const { return layers.back().weights.rows(); }

    /// Throws unless layer shapes chain and every entry is finite.
    void validate() const;

    bool operator==(const NetworkParams&) const = default;
};

/// Same shapes as a NetworkParams.
struct Gradients {
    std::vector<DenseLayer> layers;

    static Gradients zeros_like(const NetworkParams& p);
    bool matches(const NetworkParams& p) const;
    void scale(double factor);
};

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    Gradients m;
    Gradients v;
    std::uint64_t t = 0;
    AdamHyper hyper;

    static AdamState fresh(const NetworkParams& p, AdamHyper hyper = {});
};

/// Weights ~ U(-r, r), r = sqrt(6 / (fan_in + fan_out)); biases 0.
NetworkParams init_params(Architecture arch, std::size_t n_channels, std::size_t n_classes, std::uint64_t seed);

std::vector<double> forward_linear(const NetworkParams& p, std::span<const double> x);
std::vector<double> forward_hidden(const NetworkParams& p, std::span<const double> x);
/// tanh(W1 x + b1) for a HiddenTanh network.
std::vector<double> hidden_activations(const NetworkParams& p, std::span<const double> x);
/// Logits for either architecture.
std::vector<double> forward(const NetworkParams& p, std::span<const double> x);

std::vector<double> softmax(std::span<const double> logits);

/// -log(max(probs[true], 1e-12)).
double cross_entropy(std::span<const double> probs, std::span<const double> one_hot);

/// Index of the largest logit (first on ties).
std::size_t predict(const NetworkParams& p, std::span<const double> x);

struct LossAndGradients {
    double loss;
    Gradients grads;
};

/// Softmax cross-entropy loss and its exact gradient for one item.
LossAndGradients backward(const NetworkParams& p, std::span<const double> x, std::span<const double> one_hot);

/// Adds the gradient for one item (true class `label`) into `acc` and
/// returns the item loss.
double accumulate_gradients(const NetworkParams& p, std::span<const double> x, std::size_t label, Gradients& acc);

std::pair<NetworkParams, AdamState> adam_step(const NetworkParams& p, const Gradients& g, const AdamState& s);
void adam_step_in_place(NetworkParams& p, const Gradients& g, AdamState& s);

// Model JSON: arch tag, dimensions, row-major weights and biases, plus an
// opaque "training" object describing how the model was produced.
nlohmann::json model_to_json(const NetworkParams& p, const nlohmann::json& training = nlohmann::json::object());
NetworkParams model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const NetworkParams& p,
                const nlohmann::json& training = nlohmann::json::object());
NetworkParams load_model(const std::filesystem::path& path);

}  // namespace gammasort
