#include "orgnet/particle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "orgnet/errors.hpp"

namespace orgnet {

namespace {

// Per-thread scratch buffers for self-training.
thread_local Workspace tl_workspace;
thread_local std::vector<double> tl_grad;

}  // namespace

ParticleNetwork::ParticleNetwork(Network net) : net_(std::move(net)) {
    const auto& a = net_.arch;
    if (a.input_size() != kInputs || a.output_size() != 1) {
        throw ShapeError("particle networks map R^5 -> R");
    }
    if (a.activation() != Activation::Linear) {
        throw ShapeError("particle networks are linear");
    }
}

ParticleNetwork ParticleNetwork::zeros(const NetworkArchitecture& arch) {
    return ParticleNetwork(Network(arch));
}

ParticleNetwork ParticleNetwork::random(const NetworkArchitecture& arch, Rng& rng) {
    return ParticleNetwork(init_uniform(arch, rng));
}

NetworkArchitecture default_particle_arch() {
    return NetworkArchitecture({5, 3, 3, 1}, Activation::Linear);
}

const char* to_string(ParticleType t) {
    switch (t) {
        case ParticleType::SR: return "SR";
        case ParticleType::F: return "F";
        case ParticleType::Zero: return "Zero";
        case ParticleType::Diverged: return "Diverged";
    }
    return "unknown";
}

Network apply_replicative(const ParticleNetwork& n, const Network& m) {
    Network out(m.arch);
    auto& ws = tl_workspace;
    std::array<double, 5> x{};
    const auto& a = m.arch;
    std::size_t i = 0;
    bool finite = true;
    for (std::size_t l = 0; l < a.layer_count(); ++l) {
        for (std::size_t c = 0; c < a.fan_out(l); ++c) {
            for (std::size_t e = 0; e < a.fan_in(l); ++e, ++i) {
                x = {m.weights[i], static_cast<double>(l), static_cast<double>(c),
                     static_cast<double>(e), 0.0};
                forward_into(n.net(), x, ws);
                const double y = ws.output()[0];
                finite = finite && std::isfinite(y);
                out.weights[i] = y;
            }
        }
    }
    out.diverged = !finite;
    return out;
}

double apply_auxiliary(const ParticleNetwork& n, double x) {
    const std::array<double, 5> in{0.0, 0.0, 0.0, 0.0, x};
    auto& ws = tl_workspace;
    forward_into(n.net(), in, ws);
    return ws.output()[0];
}

double extract_weight(const ParticleNetwork& n) { return apply_auxiliary(n, 1.0); }

void accumulate_extract_gradient(const ParticleNetwork& n, double scale, std::span<double> grad) {
    const std::array<double, 5> in{0.0, 0.0, 0.0, 0.0, 1.0};
    const std::array<double, 1> out_grad{scale};
    auto& ws = tl_workspace;
    forward_into(n.net(), in, ws);
    backprop_into(n.net(), ws, out_grad, grad);
}

double self_train_step(ParticleNetwork& n, OptimizerState& opt) {
    Network& net = n.net();
    const std::size_t count = net.weights.size();
    if (opt.velocity.size() != count) throw ShapeError("optimizer state does not match particle");
    if (net.diverged) return std::numeric_limits<double>::infinity();

    thread_local std::vector<double> targets;
    targets.assign(net.weights.begin(), net.weights.end());
    auto& ws = tl_workspace;
    auto& grad = tl_grad;
    grad.resize(count);

    const auto& a = net.arch;
    const double lr = opt.learning_rate;
    const double mom = opt.momentum;
    double* w = net.weights.data();
    double* v = opt.velocity.data();
    std::array<double, 5> x{};
    std::array<double, 1> out_grad{};
    double total = 0.0;
    std::size_t i = 0;
    for (std::size_t l = 0; l < a.layer_count(); ++l) {
        for (std::size_t c = 0; c < a.fan_out(l); ++c) {
            for (std::size_t e = 0; e < a.fan_in(l); ++e, ++i) {
                x = {targets[i], static_cast<double>(l), static_cast<double>(c),
                     static_cast<double>(e), 0.0};
                forward_into(net, x, ws);
                const double err = ws.output()[0] - targets[i];
                total += err * err;
                out_grad[0] = 2.0 * err;
                std::fill(grad.begin(), grad.end(), 0.0);
                backprop_into(net, ws, out_grad, grad);
                for (std::size_t k = 0; k < count; ++k) {
                    v[k] = mom * v[k] + grad[k];
                    w[k] -= lr * v[k];
                }
            }
        }
    }
    if (!net.all_finite() || !std::isfinite(total)) {
        net.diverged = true;
        return std::numeric_limits<double>::infinity();
    }
    return total / static_cast<double>(count);
}

ReplicationError replication_error(const ParticleNetwork& n) {
    const Network self = apply_replicative(n, n.net());
    if (self.diverged || !n.net().all_finite()) {
        const double inf = std::numeric_limits<double>::infinity();
        return {inf, inf};
    }
    ReplicationError r;
    for (std::size_t i = 0; i < self.weights.size(); ++i) {
        const double d = self.weights[i] - n.net().weights[i];
        r.mse += d * d;
        r.max_abs = std::max(r.max_abs, std::abs(d));
    }
    r.mse /= static_cast<double>(self.weights.size());
    return r;
}

bool is_eps_fixpoint(const ParticleNetwork& n, FixpointMargin margin) {
    return replication_error(n).max_abs < margin.epsilon;
}

ParticleType classify(const ParticleNetwork& n, FixpointMargin margin, TypeThresholds thresholds) {
    double max_abs = 0.0;
    for (double w : n.weights()) {
        if (!std::isfinite(w)) return ParticleType::Diverged;
        max_abs = std::max(max_abs, std::abs(w));
    }
    if (n.diverged() || max_abs > thresholds.diverge) return ParticleType::Diverged;
    if (max_abs < thresholds.zero) return ParticleType::Zero;
    return is_eps_fixpoint(n, margin) ? ParticleType::SR : ParticleType::F;
}

ParticleNetwork perturb(const ParticleNetwork& n, double sigma, Rng& rng) {
    if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
    ParticleNetwork out = n;
    if (sigma == 0.0) return out;
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& w : out.weights()) w += noise(rng);
    return out;
}

ChainResult self_application_chain(ParticleNetwork n, FixpointMargin margin, int max_steps,
                                   double diverge_threshold) {
    if (max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
    const TypeThresholds thresholds{0.0, diverge_threshold};
    ChainResult result{0, max_steps};
    bool holding = true;
    for (int step = 1; step <= max_steps; ++step) {
        Network next = apply_replicative(n, n.net());
        if (holding) {
            double change = next.diverged ? std::numeric_limits<double>::infinity() : 0.0;
            for (std::size_t i = 0; i < next.weights.size() && std::isfinite(change); ++i) {
                change = std::max(change, std::abs(next.weights[i] - n.net().weights[i]));
            }
            if (change < margin.epsilon) {
                result.steps_sr = step;
            } else {
                holding = false;
            }
        }
        n = ParticleNetwork(std::move(next));
        const auto w = n.weights();
        const bool diverged = n.diverged() || std::any_of(w.begin(), w.end(), [&](double x) {
                                  return !std::isfinite(x) || std::abs(x) > thresholds.diverge;
                              });
        if (diverged) {
            result.steps_to_divergence = step;
            break;
        }
    }
    return result;
}

}  // namespace orgnet
