#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace orgnet {

enum class Activation : std::uint8_t { Linear = 0, Gelu = 1 };

const char* to_string(Activation a);
Activation activation_from_string(std::string_view name);

/// Location of one edge weight: the layer it belongs to, the cell it leads
/// into and its index among that cell's incoming edges. All 0-based.
struct Position {
    std::size_t layer = 0;
    std::size_t cell = 0;
    std::size_t edge = 0;

    friend bool operator==(const Position&, const Position&) = default;
};

/// Layer sizes of a bias-free dense feed-forward net. The activation is
/// applied after every hidden layer, never after the output layer.
///
/// Flat weight order is ascending (layer, cell, edge), i.e. each layer is a
/// row-major [out x in] matrix and layers follow each other.
class NetworkArchitecture {
public:
    NetworkArchitecture() = default;
    explicit NetworkArchitecture(std::vector<std::size_t> layer_sizes,
                                 Activation activation = Activation::Linear);

    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
    Activation activation() const { return activation_; }

    /// Number of weight layers (one less than the number of cell layers).
    std::size_t layer_count() const { return sizes_.empty() ? 0 : sizes_.size() - 1; }
    std::size_t input_size() const { return sizes_.front(); }
    std::size_t output_size() const { return sizes_.back(); }
    std::size_t weight_count() const { return offsets_.back(); }
    std::size_t layer_offset(std::size_t layer) const { return offsets_[layer]; }
    std::size_t fan_in(std::size_t layer) const { return sizes_[layer]; }
    std::size_t fan_out(std::size_t layer) const { return sizes_[layer + 1]; }

    Position position_of(std::size_t index) const;
    std::size_t flat_index(const Position& p) const;

    friend bool operator==(const NetworkArchitecture& a, const NetworkArchitecture& b) {
        return a.sizes_ == b.sizes_ && a.activation_ == b.activation_;
    }

private:
    std::vector<std::size_t> sizes_;
    Activation activation_ = Activation::Linear;
    std::vector<std::size_t> offsets_{0};
};

struct Network {
    NetworkArchitecture arch;
    std::vector<double> weights;
    bool diverged = false;

    Network() = default;
    /// All-zero weights.
    explicit Network(NetworkArchitecture a);
    Network(NetworkArchitecture a, std::vector<double> w);

    bool all_finite() const;
};

/// Uniform in +-sqrt(1/fan_in), drawn layer by layer in flat order.
Network init_uniform(const NetworkArchitecture& arch, std::mt19937_64& rng);

/// One input/target pair viewed from a dataset.
struct Example {
    std::span<const double> input;
    std::span<const double> target;
};

/// Reusable buffers for forward/backward passes. Holds pre- and post-activation values of the last forward call.
class Workspace {
public:
    Workspace() = default;
    explicit Workspace(const NetworkArchitecture& arch) { reset(arch); }
    void reset(const NetworkArchitecture& arch);

    std::span<const double> output() const { return post_.back(); }

private:
    friend void forward_into(const Network&, std::span<const double>, Workspace&);
    friend void backprop_into(const Network&, Workspace&, std::span<const double>,
                              std::span<double>);
    std::vector<std::size_t> sizes_;
    std::vector<std::vector<double>> pre_;
    std::vector<std::vector<double>> post_;
    std::vector<double> delta_;
    std::vector<double> delta_prev_;
};

void forward_into(const Network& net, std::span<const double> x, Workspace& ws);

/// Accumulates (+=) the vector-Jacobian product out_grad^T * d output / d weights
/// into grad. Must follow forward_into on the same workspace.
void backprop_into(const Network& net, Workspace& ws, std::span<const double> out_grad,
                   std::span<double> grad);

std::vector<double> forward(const Network& net, std::span<const double> x);

/// Training objective over a batch.
///   MeanSquared:  mean over batch and output components of (y - t)^2.
///   CrossEntropy: mean over batch of -sum_k t_k log softmax(y)_k.
enum class Loss : std::uint8_t { MeanSquared = 0, CrossEntropy = 1 };

const char* to_string(Loss l);
Loss loss_from_string(std::string_view name);

/// Loss value of one output vector and its gradient d loss / d output, for a
/// batch of `batch_size` items (the 1/batch factor is included).
double output_loss(Loss loss, std::span<const double> output, std::span<const double> target,
                   std::size_t batch_size, std::span<double> out_grad);

/// Mean over batch and output components of the squared error.
double mse(const Network& net, std::span<const Example> batch);

/// d loss / d weights. Throws std::invalid_argument on an empty batch.
std::vector<double> gradient(const Network& net, std::span<const Example> batch,
                             Loss loss = Loss::MeanSquared);

/// Same as gradient() but also returns the loss of the forward pass it used.
double loss_and_gradient(const Network& net, std::span<const Example> batch,
                         std::span<double> grad, Loss loss = Loss::MeanSquared);

struct OptimizerState {
    double learning_rate = 0.004;
    double momentum = 0.9;
    std::vector<double> velocity;

    OptimizerState() = default;
    OptimizerState(std::size_t size, double lr, double mom);
};

/// Classical momentum: v <- m*v + g ; w <- w - lr*v.
/// Throws DivergenceError on a non-finite gradient.
void sgd_step(std::span<double> weights, std::span<const double> grad, OptimizerState& state);
inline void sgd_step(Network& net, std::span<const double> grad, OptimizerState& state) {
    sgd_step(std::span<double>(net.weights), grad, state);
}

/// x * Phi(x), exact erf form.
double gelu(double x);
double gelu_derivative(double x);

}  // namespace orgnet
