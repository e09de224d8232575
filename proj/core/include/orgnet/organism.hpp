#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "orgnet/data.hpp"
#include "orgnet/metrics.hpp"
#include "orgnet/net.hpp"
#include "orgnet/parallel.hpp"
#include "orgnet/particle.hpp"
#include "orgnet/rng.hpp"
#include "orgnet/trajectory.hpp"

namespace orgnet {

struct OrganismArchitecture {
    std::vector<std::size_t> layer_sizes;
    Activation activation = Activation::Linear;
    NetworkArchitecture particle_arch = default_particle_arch();

    /// The conventional net of the same shape; edge (l, c, e) of the organism
    /// is weight (l, c, e) of this net.
    NetworkArchitecture as_network() const { return NetworkArchitecture(layer_sizes, activation); }
    std::size_t particle_count() const { return as_network().weight_count(); }
};

/// A dense net whose every edge weight is a particle network. Particles are
/// stored in the canonical (layer, cell, edge) order of as_network().
class OrganismNetwork {
public:
    OrganismNetwork() = default;

    /// Seeded random particles with fresh (zero-velocity) optimizers.
    static OrganismNetwork random(const OrganismArchitecture& arch, Rng& rng, double learning_rate,
                                  double momentum);
    static OrganismNetwork zeros(const OrganismArchitecture& arch, double learning_rate,
                                 double momentum);
    /// Takes ownership of the given particles; optimizers start at zero velocity.
    static OrganismNetwork from_particles(const OrganismArchitecture& arch,
                                          std::vector<ParticleNetwork> particles,
                                          double learning_rate, double momentum);

    const OrganismArchitecture& arch() const { return arch_; }
    const NetworkArchitecture& network_arch() const { return net_arch_; }
    std::size_t size() const { return particles_.size(); }

    ParticleNetwork& particle(std::size_t index) { return particles_[index]; }
    const ParticleNetwork& particle(std::size_t index) const { return particles_[index]; }
    ParticleNetwork& particle(const Position& p) { return particles_[net_arch_.flat_index(p)]; }
    const ParticleNetwork& particle(const Position& p) const {
        return particles_[net_arch_.flat_index(p)];
    }
    std::span<ParticleNetwork> particles() { return particles_; }
    std::span<const ParticleNetwork> particles() const { return particles_; }

    OptimizerState& self_optimizer(std::size_t index) { return self_opt_[index]; }
    const OptimizerState& self_optimizer(std::size_t index) const { return self_opt_[index]; }
    OptimizerState& task_optimizer() { return task_opt_; }
    const OptimizerState& task_optimizer() const { return task_opt_; }

    /// Concatenation of all particle weights in particle order.
    std::vector<double> flat_weights() const;
    void set_flat_weights(std::span<const double> w);

    bool diverged() const { return diverged_; }
    void mark_diverged() { diverged_ = true; }

private:
    OrganismArchitecture arch_;
    NetworkArchitecture net_arch_;
    std::vector<ParticleNetwork> particles_;
    std::vector<OptimizerState> self_opt_;
    OptimizerState task_opt_;
    bool diverged_ = false;
};

/// Cell value = sum over incoming edges of apply_auxiliary(particle, previous
/// value); the organism activation follows hidden layers only.
std::vector<double> on_forward(const OrganismNetwork& on, std::span<const double> x);

/// Conventional net whose weight (l, c, e) is extract_weight of particle (l, c, e).
Network resubstitute(const OrganismNetwork& on);

/// Task loss over the batch and its gradient with respect to all particle
/// weights (flat_weights order).
double on_loss_and_gradient(const OrganismNetwork& on, std::span<const Example> batch,
                            std::span<double> grad, Loss loss = Loss::MeanSquared,
                            const ExecPolicy& exec = {});

/// One global SGD step on the batch loss over all particle weights jointly.
/// Returns the batch loss before the step. On divergence the organism is
/// marked diverged and DivergenceError is thrown.
double on_task_step(OrganismNetwork& on, std::span<const Example> batch,
                    Loss loss = Loss::MeanSquared, const ExecPolicy& exec = {});

/// `steps` self-training steps on every particle. Returns the mean over
/// non-diverged particles of each particle's last-step replication loss.
double self_train_round(OrganismNetwork& on, int steps, const ExecPolicy& exec = {});

using TypeCounts = std::array<std::size_t, kParticleTypeCount>;

struct Census {
    std::vector<TypeCounts> per_layer;

    TypeCounts totals() const;
    std::size_t count(ParticleType t) const { return totals()[static_cast<std::size_t>(t)]; }
    std::size_t total() const;
};

std::vector<ParticleType> classify_all(const OrganismNetwork& on, FixpointMargin margin,
                                       TypeThresholds thresholds, const ExecPolicy& exec = {});
Census census(const OrganismNetwork& on, FixpointMargin margin, TypeThresholds thresholds,
              const ExecPolicy& exec = {});

/// Copy where every particle classified as `type` is the all-zero particle.
OrganismNetwork dropout(const OrganismNetwork& on, ParticleType type, FixpointMargin margin,
                        TypeThresholds thresholds);

/// Every particle is an epsilon-fixpoint and |y - y'| <= zeta on every test
/// pair, evaluated with on_forward.
bool goal_fulfilled(const OrganismNetwork& on, FixpointMargin margin, double zeta,
                    std::span<const Example> test);

/// Metrics of a conventional net over a dataset.
Metrics evaluate(const Network& net, const LabeledDataset& ds, TaskKind task,
                 const ExecPolicy& exec = {});

/// Outputs and metrics of the organism over a dataset (via resubstitute).
Metrics evaluate(const OrganismNetwork& on, const LabeledDataset& ds, TaskKind task,
                 const ExecPolicy& exec = {});

enum class ScheduleMode : std::uint8_t { PerBatchSelfTrain, RatioTaskToSelf };

struct TrainingSchedule {
    ScheduleMode mode = ScheduleMode::PerBatchSelfTrain;
    int self_steps_per_particle = 25;
    /// RatioTaskToSelf only: task steps between self-training rounds.
    int task_batches_per_self_round = 5;
    int epochs = 60;
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;  // mean task loss over the epoch's steps
    Metrics train;
    Metrics test;
    double self_loss = 0.0;  // mean of the epoch's self-training rounds
    Census census;
};

struct ExperimentRecord {
    std::vector<EpochRecord> epochs;
    TrajectoryLog trajectories;
    bool diverged = false;
};

struct TrainOptions {
    TaskKind task = TaskKind::Regression;
    Loss loss = Loss::MeanSquared;
    std::size_t batch_size = 50;
    FixpointMargin margin;
    TypeThresholds thresholds;
    ExecPolicy exec;
    /// Organism layers whose particles get a weight snapshot after each epoch.
    std::vector<std::size_t> trajectory_layers;
    std::function<void(const EpochRecord&)> on_epoch;
};

/// Alternates global task steps and per-particle self-training according to
/// the schedule. A divergence stops training and returns the partial record.
ExperimentRecord alternating_train(OrganismNetwork& on, const TrainingSchedule& schedule,
                                   const LabeledDataset& train, const LabeledDataset& test,
                                   Rng& batch_rng, const TrainOptions& options);

}  // namespace orgnet
