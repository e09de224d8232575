#pragma once

#include <cstdint>
#include <span>

#include "orgnet/net.hpp"
#include "orgnet/rng.hpp"

namespace orgnet {

/// A bias-free linear net R^5 -> R. Inputs are (weight, layer, cell, edge, aux):
/// the first four carry a weight with its position for replication, the fifth
/// carries the scalar the particle multiplies when it acts as an edge weight.
class ParticleNetwork {
public:
    static constexpr std::size_t kInputs = 5;

    ParticleNetwork() = default;
    /// Throws ShapeError unless the net is 5 -> 1 with Linear activation.
    explicit ParticleNetwork(Network net);

    static ParticleNetwork zeros(const NetworkArchitecture& arch);
    static ParticleNetwork random(const NetworkArchitecture& arch, Rng& rng);

    const Network& net() const { return net_; }
    Network& net() { return net_; }
    std::span<const double> weights() const { return net_.weights; }
    std::span<double> weights() { return net_.weights; }
    const NetworkArchitecture& arch() const { return net_.arch; }
    bool diverged() const { return net_.diverged; }

private:
    Network net_;
};

/// [5, 3, 3, 1], Linear.
NetworkArchitecture default_particle_arch();

enum class ParticleType : std::uint8_t { SR = 0, F = 1, Zero = 2, Diverged = 3 };
inline constexpr std::size_t kParticleTypeCount = 4;
const char* to_string(ParticleType t);

struct FixpointMargin {
    double epsilon = 1e-5;
};

struct TypeThresholds {
    double zero = 1e-6;
    double diverge = 1e3;
};

/// Weights of the result: n(v_i, L(i), C(i), E(i), 0) for every weight v_i of m,
/// positions taken from m's architecture. Result carries m's architecture and
/// is flagged diverged if any output is non-finite.
Network apply_replicative(const ParticleNetwork& n, const Network& m);

/// n(0, 0, 0, 0, x).
double apply_auxiliary(const ParticleNetwork& n, double x);

/// The scalar the particle represents as an edge weight: apply_auxiliary(n, 1).
double extract_weight(const ParticleNetwork& n);

/// d extract_weight / d weights, accumulated as scale * gradient into grad.
void accumulate_extract_gradient(const ParticleNetwork& n, double scale, std::span<double> grad);

/// One pass of per-sample SGD over {((v_i, L(i), C(i), E(i), 0), v_i)} in
/// canonical weight order. The v_i are a snapshot taken before the pass.
/// Returns the mean squared replication error seen during the pass. On a
/// non-finite weight the particle is flagged diverged and left as is.
double self_train_step(ParticleNetwork& n, OptimizerState& opt);

struct ReplicationError {
    double mse = 0.0;
    double max_abs = 0.0;
};

/// Compares n with n applied to itself. Non-finite results give infinite errors.
ReplicationError replication_error(const ParticleNetwork& n);

/// max_i |w_i - v_i| < epsilon for the self-application w of n.
bool is_eps_fixpoint(const ParticleNetwork& n, FixpointMargin margin);

/// Precedence Diverged > Zero > SR > F.
ParticleType classify(const ParticleNetwork& n, FixpointMargin margin, TypeThresholds thresholds);

/// Adds independent N(0, sigma^2) noise to every weight.
ParticleNetwork perturb(const ParticleNetwork& n, double sigma, Rng& rng);

struct ChainResult {
    int steps_sr = 0;
    int steps_to_divergence = 0;
};

/// Repeated self-application n <- n applied to n. steps_sr counts the leading
/// steps whose change stays below epsilon; steps_to_divergence is the first
/// step classified Diverged, or max_steps if none.
ChainResult self_application_chain(ParticleNetwork n, FixpointMargin margin, int max_steps,
                                   double diverge_threshold);

}  // namespace orgnet
