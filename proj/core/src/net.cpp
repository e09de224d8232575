#include "orgnet/net.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "orgnet/errors.hpp"

namespace orgnet {

const char* to_string(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Gelu: return "gelu";
    }
    return "unknown";
}

Activation activation_from_string(std::string_view name) {
    if (name == "linear") return Activation::Linear;
    if (name == "gelu") return Activation::Gelu;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

NetworkArchitecture::NetworkArchitecture(std::vector<std::size_t> layer_sizes,
                                         Activation activation)
    : sizes_(std::move(layer_sizes)), activation_(activation) {
    if (sizes_.size() < 2) {
        throw std::invalid_argument("architecture needs at least an input and an output layer");
    }
    if (std::any_of(sizes_.begin(), sizes_.end(), [](std::size_t s) { return s == 0; })) {
        throw std::invalid_argument("layer sizes must be positive");
    }
    offsets_.assign(1, 0);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        offsets_.push_back(offsets_.back() + sizes_[l] * sizes_[l + 1]);
    }
}

Position NetworkArchitecture::position_of(std::size_t index) const {
    if (index >= weight_count()) {
        throw IndexError("weight index " + std::to_string(index) + " out of range (" +
                         std::to_string(weight_count()) + " weights)");
    }
    // offsets_ is sorted; find the layer whose block contains index.
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
    const auto layer = static_cast<std::size_t>(it - offsets_.begin()) - 1;
    const std::size_t local = index - offsets_[layer];
    return {layer, local / sizes_[layer], local % sizes_[layer]};
}

std::size_t NetworkArchitecture::flat_index(const Position& p) const {
    if (p.layer >= layer_count() || p.cell >= sizes_[p.layer + 1] || p.edge >= sizes_[p.layer]) {
        throw IndexError("position outside architecture");
    }
    return offsets_[p.layer] + p.cell * sizes_[p.layer] + p.edge;
}

Network::Network(NetworkArchitecture a) : arch(std::move(a)), weights(arch.weight_count(), 0.0) {}

Network::Network(NetworkArchitecture a, std::vector<double> w)
    : arch(std::move(a)), weights(std::move(w)) {
    if (weights.size() != arch.weight_count()) {
        throw ShapeError("weight vector has " + std::to_string(weights.size()) +
                         " entries, architecture needs " + std::to_string(arch.weight_count()));
    }
}

bool Network::all_finite() const {
    return std::all_of(weights.begin(), weights.end(), [](double w) { return std::isfinite(w); });
}

Network init_uniform(const NetworkArchitecture& arch, std::mt19937_64& rng) {
    Network net(arch);
    for (std::size_t l = 0; l < arch.layer_count(); ++l) {
        const double bound = std::sqrt(1.0 / static_cast<double>(arch.fan_in(l)));
        std::uniform_real_distribution<double> dist(-bound, bound);
        const std::size_t begin = arch.layer_offset(l);
        const std::size_t end = arch.layer_offset(l + 1);
        for (std::size_t i = begin; i < end; ++i) net.weights[i] = dist(rng);
    }
    return net;
}

void Workspace::reset(const NetworkArchitecture& arch) {
    const auto& sizes = arch.layer_sizes();
    sizes_ = sizes;
    pre_.resize(sizes.size());
    post_.resize(sizes.size());
    std::size_t widest = 0;
    for (std::size_t l = 0; l < sizes.size(); ++l) {
        pre_[l].assign(sizes[l], 0.0);
        post_[l].assign(sizes[l], 0.0);
        widest = std::max(widest, sizes[l]);
    }
    delta_.assign(widest, 0.0);
    delta_prev_.assign(widest, 0.0);
}

void forward_into(const Network& net, std::span<const double> x, Workspace& ws) {
    const auto& arch = net.arch;
    if (x.size() != arch.input_size()) {
        throw ShapeError("input has " + std::to_string(x.size()) + " values, network expects " +
                         std::to_string(arch.input_size()));
    }
    if (ws.sizes_ != arch.layer_sizes()) {
        ws.reset(arch);
    }
    std::copy(x.begin(), x.end(), ws.post_[0].begin());
    const std::size_t r = arch.layer_count();
    const bool gelu_hidden = arch.activation() == Activation::Gelu;
    const double* w = net.weights.data();
    for (std::size_t l = 0; l < r; ++l) {
        const std::size_t n_in = arch.fan_in(l);
        const std::size_t n_out = arch.fan_out(l);
        const double* in = ws.post_[l].data();
        double* pre = ws.pre_[l + 1].data();
        double* post = ws.post_[l + 1].data();
        const double* wl = w + arch.layer_offset(l);
        const bool hidden = l + 1 < r;
        for (std::size_t c = 0; c < n_out; ++c) {
            const double* row = wl + c * n_in;
            double s = 0.0;
            for (std::size_t e = 0; e < n_in; ++e) s += row[e] * in[e];
            pre[c] = s;
            post[c] = (hidden && gelu_hidden) ? gelu(s) : s;
        }
    }
}

void backprop_into(const Network& net, Workspace& ws, std::span<const double> out_grad,
                   std::span<double> grad) {
    const auto& arch = net.arch;
    const std::size_t r = arch.layer_count();
    const bool gelu_hidden = arch.activation() == Activation::Gelu;
    const double* w = net.weights.data();
    double* delta = ws.delta_.data();
    double* delta_prev = ws.delta_prev_.data();
    std::copy(out_grad.begin(), out_grad.end(), delta);
    for (std::size_t l = r; l-- > 0;) {
        const std::size_t n_in = arch.fan_in(l);
        const std::size_t n_out = arch.fan_out(l);
        const bool hidden = l + 1 < r;
        if (hidden && gelu_hidden) {
            const double* pre = ws.pre_[l + 1].data();
            for (std::size_t c = 0; c < n_out; ++c) delta[c] *= gelu_derivative(pre[c]);
        }
        const double* in = ws.post_[l].data();
        const double* wl = w + arch.layer_offset(l);
        double* gl = grad.data() + arch.layer_offset(l);
        if (l > 0) std::fill(delta_prev, delta_prev + n_in, 0.0);
        for (std::size_t c = 0; c < n_out; ++c) {
            const double d = delta[c];
            const double* row = wl + c * n_in;
            double* grow = gl + c * n_in;
            for (std::size_t e = 0; e < n_in; ++e) grow[e] += d * in[e];
            if (l > 0) {
                for (std::size_t e = 0; e < n_in; ++e) delta_prev[e] += d * row[e];
            }
        }
        std::swap(delta, delta_prev);
    }
}

std::vector<double> forward(const Network& net, std::span<const double> x) {
    Workspace ws(net.arch);
    forward_into(net, x, ws);
    const auto out = ws.output();
    return {out.begin(), out.end()};
}

double mse(const Network& net, std::span<const Example> batch) {
    if (batch.empty()) throw std::invalid_argument("mse of an empty batch");
    Workspace ws(net.arch);
    double total = 0.0;
    for (const auto& ex : batch) {
        forward_into(net, ex.input, ws);
        const auto out = ws.output();
        if (ex.target.size() != out.size()) throw ShapeError("target size mismatch");
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double d = out[k] - ex.target[k];
            total += d * d;
        }
    }
    return total / static_cast<double>(batch.size() * net.arch.output_size());
}

const char* to_string(Loss l) {
    switch (l) {
        case Loss::MeanSquared: return "mse";
        case Loss::CrossEntropy: return "cross_entropy";
    }
    return "unknown";
}

Loss loss_from_string(std::string_view name) {
    if (name == "mse") return Loss::MeanSquared;
    if (name == "cross_entropy") return Loss::CrossEntropy;
    throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

double output_loss(Loss loss, std::span<const double> output, std::span<const double> target,
                   std::size_t batch_size, std::span<double> out_grad) {
    const std::size_t q = output.size();
    if (target.size() != q) throw ShapeError("target size mismatch");
    const double inv_batch = 1.0 / static_cast<double>(batch_size);
    if (loss == Loss::MeanSquared) {
        const double scale = inv_batch / static_cast<double>(q);
        double total = 0.0;
        for (std::size_t k = 0; k < q; ++k) {
            const double d = output[k] - target[k];
            total += d * d;
            out_grad[k] = 2.0 * d * scale;
        }
        return total * scale;
    }
    // log-sum-exp with the max subtracted
    const double top = *std::max_element(output.begin(), output.end());
    double z = 0.0;
    for (std::size_t k = 0; k < q; ++k) z += std::exp(output[k] - top);
    const double log_z = top + std::log(z);
    double total = 0.0;
    double target_mass = 0.0;
    for (std::size_t k = 0; k < q; ++k) {
        total -= target[k] * (output[k] - log_z);
        target_mass += target[k];
    }
    for (std::size_t k = 0; k < q; ++k) {
        out_grad[k] = (std::exp(output[k] - log_z) * target_mass - target[k]) * inv_batch;
    }
    return total * inv_batch;
}

double loss_and_gradient(const Network& net, std::span<const Example> batch,
                         std::span<double> grad, Loss loss) {
    if (batch.empty()) throw std::invalid_argument("gradient of an empty batch");
    if (grad.size() != net.weights.size()) throw ShapeError("gradient buffer size mismatch");
    std::fill(grad.begin(), grad.end(), 0.0);
    Workspace ws(net.arch);
    std::vector<double> out_grad(net.arch.output_size());
    double total = 0.0;
    for (const auto& ex : batch) {
        forward_into(net, ex.input, ws);
        total += output_loss(loss, ws.output(), ex.target, batch.size(), out_grad);
        backprop_into(net, ws, out_grad, grad);
    }
    return total;
}

std::vector<double> gradient(const Network& net, std::span<const Example> batch, Loss loss) {
    std::vector<double> grad(net.weights.size());
    loss_and_gradient(net, batch, grad, loss);
    return grad;
}

OptimizerState::OptimizerState(std::size_t size, double lr, double mom)
    : learning_rate(lr), momentum(mom), velocity(size, 0.0) {
    if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(mom >= 0.0 && mom < 1.0)) throw std::invalid_argument("momentum must be in [0,1)");
}

void sgd_step(std::span<double> weights, std::span<const double> grad, OptimizerState& state) {
    if (weights.size() != grad.size() || state.velocity.size() != weights.size()) {
        throw ShapeError("sgd_step: weights, gradient and velocity lengths differ");
    }
    for (double g : grad) {
        if (!std::isfinite(g)) throw DivergenceError("non-finite gradient");
    }
    const double lr = state.learning_rate;
    const double m = state.momentum;
    double* v = state.velocity.data();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        v[i] = m * v[i] + grad[i];
        weights[i] -= lr * v[i];
    }
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_derivative(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
    const double pdf = std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
    return cdf + x * pdf;
}

}  // namespace orgnet
