#include "orgnet/organism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "orgnet/errors.hpp"

namespace orgnet {

namespace {

void check_arch(const OrganismArchitecture& arch) {
    if (arch.layer_sizes.size() < 2) throw std::invalid_argument("organism needs at least two layers");
    const auto& p = arch.particle_arch;
    if (p.input_size() != ParticleNetwork::kInputs || p.output_size() != 1 ||
        p.activation() != Activation::Linear) {
        throw ShapeError("organism particles must be linear 5 -> 1 nets");
    }
}

}  // namespace

OrganismNetwork OrganismNetwork::from_particles(const OrganismArchitecture& arch,
                                                std::vector<ParticleNetwork> particles,
                                                double learning_rate, double momentum) {
    check_arch(arch);
    OrganismNetwork on;
    on.arch_ = arch;
    on.net_arch_ = arch.as_network();
    if (particles.size() != on.net_arch_.weight_count()) {
        throw ShapeError("organism needs " + std::to_string(on.net_arch_.weight_count()) +
                         " particles, got " + std::to_string(particles.size()));
    }
    const std::size_t pw = arch.particle_arch.weight_count();
    for (const auto& p : particles) {
        if (!(p.arch() == arch.particle_arch)) throw ShapeError("particle architecture mismatch");
    }
    on.particles_ = std::move(particles);
    on.self_opt_.assign(on.particles_.size(), OptimizerState(pw, learning_rate, momentum));
    on.task_opt_ = OptimizerState(pw * on.particles_.size(), learning_rate, momentum);
    return on;
}

OrganismNetwork OrganismNetwork::random(const OrganismArchitecture& arch, Rng& rng,
                                        double learning_rate, double momentum) {
    check_arch(arch);
    std::vector<ParticleNetwork> particles;
    const std::size_t n = arch.particle_count();
    particles.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        particles.push_back(ParticleNetwork::random(arch.particle_arch, rng));
    }
    return from_particles(arch, std::move(particles), learning_rate, momentum);
}

OrganismNetwork OrganismNetwork::zeros(const OrganismArchitecture& arch, double learning_rate,
                                       double momentum) {
    check_arch(arch);
    std::vector<ParticleNetwork> particles(arch.particle_count(),
                                           ParticleNetwork::zeros(arch.particle_arch));
    return from_particles(arch, std::move(particles), learning_rate, momentum);
}

std::vector<double> OrganismNetwork::flat_weights() const {
    const std::size_t pw = arch_.particle_arch.weight_count();
    std::vector<double> out(pw * particles_.size());
    for (std::size_t k = 0; k < particles_.size(); ++k) {
        const auto w = particles_[k].weights();
        std::copy(w.begin(), w.end(), out.begin() + static_cast<std::ptrdiff_t>(k * pw));
    }
    return out;
}

void OrganismNetwork::set_flat_weights(std::span<const double> w) {
    const std::size_t pw = arch_.particle_arch.weight_count();
    if (w.size() != pw * particles_.size()) throw ShapeError("flat weight vector size mismatch");
    for (std::size_t k = 0; k < particles_.size(); ++k) {
        const auto src = w.subspan(k * pw, pw);
        auto dst = particles_[k].weights();
        std::copy(src.begin(), src.end(), dst.begin());
    }
}

std::vector<double> on_forward(const OrganismNetwork& on, std::span<const double> x) {
    const auto& na = on.network_arch();
    if (x.size() != na.input_size()) {
        throw ShapeError("organism input has " + std::to_string(x.size()) + " values, expected " +
                         std::to_string(na.input_size()));
    }
    std::vector<double> prev(x.begin(), x.end());
    std::vector<double> next;
    const std::size_t r = na.layer_count();
    const bool gelu_hidden = na.activation() == Activation::Gelu;
    std::size_t k = 0;
    for (std::size_t l = 0; l < r; ++l) {
        next.assign(na.fan_out(l), 0.0);
        for (std::size_t c = 0; c < na.fan_out(l); ++c) {
            double sum = 0.0;
            for (std::size_t e = 0; e < na.fan_in(l); ++e, ++k) {
                sum += apply_auxiliary(on.particle(k), prev[e]);
            }
            next[c] = (l + 1 < r && gelu_hidden) ? gelu(sum) : sum;
        }
        prev.swap(next);
    }
    return prev;
}

Network resubstitute(const OrganismNetwork& on) {
    Network net(on.network_arch());
    for (std::size_t k = 0; k < on.size(); ++k) net.weights[k] = extract_weight(on.particle(k));
    return net;
}

double on_loss_and_gradient(const OrganismNetwork& on, std::span<const Example> batch,
                            std::span<double> grad, Loss loss, const ExecPolicy& exec) {
    if (batch.empty()) throw std::invalid_argument("organism gradient of an empty batch");
    const std::size_t pw = on.arch().particle_arch.weight_count();
    if (grad.size() != pw * on.size()) throw ShapeError("organism gradient buffer size mismatch");

    // Loss gradient over the resubstituted net, then through each extract_weight.
    const Network eff = resubstitute(on);
    const std::size_t chunks = exec.deterministic ? 1 : std::max<std::size_t>(1, exec.threads);
    const std::size_t used = std::min(chunks, batch.size());
    std::vector<std::vector<double>> partial(used, std::vector<double>(eff.weights.size(), 0.0));
    std::vector<double> partial_loss(used, 0.0);
    parallel_chunks(batch.size(), used, [&](std::size_t k, std::size_t begin, std::size_t end) {
        const auto slice = batch.subspan(begin, end - begin);
        const double share = static_cast<double>(slice.size()) / static_cast<double>(batch.size());
        partial_loss[k] = loss_and_gradient(eff, slice, partial[k], loss) * share;
        for (double& g : partial[k]) g *= share;
    });
    std::vector<double> eff_grad(eff.weights.size(), 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < used; ++k) {
        total += partial_loss[k];
        for (std::size_t i = 0; i < eff_grad.size(); ++i) eff_grad[i] += partial[k][i];
    }

    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t k = 0; k < on.size(); ++k) {
        accumulate_extract_gradient(on.particle(k), eff_grad[k], grad.subspan(k * pw, pw));
    }
    return total;
}

double on_task_step(OrganismNetwork& on, std::span<const Example> batch, Loss loss_kind,
                    const ExecPolicy& exec) {
    const std::size_t pw = on.arch().particle_arch.weight_count();
    std::vector<double> grad(pw * on.size());
    const double loss = on_loss_and_gradient(on, batch, grad, loss_kind, exec);
    if (!std::isfinite(loss)) {
        on.mark_diverged();
        throw DivergenceError("organism task loss is not finite");
    }
    std::vector<double> w = on.flat_weights();
    try {
        sgd_step(w, grad, on.task_optimizer());
    } catch (const DivergenceError&) {
        on.mark_diverged();
        throw;
    }
    if (!std::all_of(w.begin(), w.end(), [](double v) { return std::isfinite(v); })) {
        on.mark_diverged();
        throw DivergenceError("organism weights became non-finite");
    }
    on.set_flat_weights(w);
    return loss;
}

double self_train_round(OrganismNetwork& on, int steps, const ExecPolicy& exec) {
    if (steps < 1) throw std::invalid_argument("self-training needs at least one step");
    std::vector<double> last(on.size(), 0.0);
    parallel_for(on.size(), exec.threads, [&](std::size_t k) {
        auto& p = on.particle(k);
        auto& opt = on.self_optimizer(k);
        for (int s = 0; s < steps; ++s) last[k] = self_train_step(p, opt);
    });
    double sum = 0.0;
    std::size_t alive = 0;
    for (std::size_t k = 0; k < on.size(); ++k) {
        if (on.particle(k).diverged()) continue;
        sum += last[k];
        ++alive;
    }
    return alive == 0 ? std::numeric_limits<double>::infinity() : sum / static_cast<double>(alive);
}

TypeCounts Census::totals() const {
    TypeCounts t{};
    for (const auto& layer : per_layer) {
        for (std::size_t i = 0; i < t.size(); ++i) t[i] += layer[i];
    }
    return t;
}

std::size_t Census::total() const {
    const auto t = totals();
    return std::accumulate(t.begin(), t.end(), std::size_t{0});
}

std::vector<ParticleType> classify_all(const OrganismNetwork& on, FixpointMargin margin,
                                       TypeThresholds thresholds, const ExecPolicy& exec) {
    std::vector<ParticleType> types(on.size());
    parallel_for(on.size(), exec.threads,
                 [&](std::size_t k) { types[k] = classify(on.particle(k), margin, thresholds); });
    return types;
}

Census census(const OrganismNetwork& on, FixpointMargin margin, TypeThresholds thresholds,
              const ExecPolicy& exec) {
    const auto types = classify_all(on, margin, thresholds, exec);
    const auto& na = on.network_arch();
    Census c;
    c.per_layer.assign(na.layer_count(), TypeCounts{});
    for (std::size_t l = 0; l < na.layer_count(); ++l) {
        for (std::size_t k = na.layer_offset(l); k < na.layer_offset(l + 1); ++k) {
            ++c.per_layer[l][static_cast<std::size_t>(types[k])];
        }
    }
    return c;
}

OrganismNetwork dropout(const OrganismNetwork& on, ParticleType type, FixpointMargin margin,
                        TypeThresholds thresholds) {
    if (type != ParticleType::SR && type != ParticleType::F) {
        throw std::invalid_argument("dropout is defined for SR and F particles");
    }
    const auto types = classify_all(on, margin, thresholds);
    OrganismNetwork out = on;
    const auto zero = ParticleNetwork::zeros(on.arch().particle_arch);
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (types[k] == type) out.particle(k) = zero;
    }
    return out;
}

bool goal_fulfilled(const OrganismNetwork& on, FixpointMargin margin, double zeta,
                    std::span<const Example> test) {
    if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
    for (const auto& p : on.particles()) {
        if (!is_eps_fixpoint(p, margin)) return false;
    }
    for (const auto& ex : test) {
        const auto y = on_forward(on, ex.input);
        if (y.size() != ex.target.size()) throw ShapeError("target size mismatch");
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!(std::abs(y[i] - ex.target[i]) <= zeta)) return false;
        }
    }
    return true;
}

Metrics evaluate(const OrganismNetwork& on, const LabeledDataset& ds, TaskKind task,
                 const ExecPolicy& exec) {
    return evaluate(resubstitute(on), ds, task, exec);
}

Metrics evaluate(const Network& eff, const LabeledDataset& ds, TaskKind task, const ExecPolicy& exec) {
    const std::size_t q = eff.arch.output_size();
    if (ds.target_size() != q) throw ShapeError("dataset targets do not match organism outputs");
    std::vector<double> outputs(ds.size() * q);
    parallel_chunks(ds.size(), exec.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        Workspace ws(eff.arch);
        for (std::size_t i = begin; i < end; ++i) {
            forward_into(eff, ds.input(i), ws);
            const auto out = ws.output();
            std::copy(out.begin(), out.end(), outputs.begin() + static_cast<std::ptrdiff_t>(i * q));
        }
    });
    return metrics(outputs, ds.raw_targets(), q, task);
}

namespace {

void snapshot(const OrganismNetwork& on, int epoch, const std::vector<std::size_t>& layers,
              TrajectoryLog& log) {
    if (layers.empty()) return;
    const auto& na = on.network_arch();
    if (log.particles.empty()) {
        for (std::size_t l : layers) {
            if (l >= na.layer_count()) throw std::invalid_argument("trajectory layer out of range");
            for (std::size_t k = na.layer_offset(l); k < na.layer_offset(l + 1); ++k) {
                log.particles.push_back({na.position_of(k), ParticleType::F, {}});
            }
        }
    }
    log.epochs.push_back(epoch);
    for (auto& t : log.particles) {
        const auto w = on.particle(t.position).weights();
        t.snapshots.emplace_back(w.begin(), w.end());
    }
}

}  // namespace

ExperimentRecord alternating_train(OrganismNetwork& on, const TrainingSchedule& schedule,
                                   const LabeledDataset& train, const LabeledDataset& test,
                                   Rng& batch_rng, const TrainOptions& options) {
    ExperimentRecord record;
    if (schedule.epochs < 0 || schedule.self_steps_per_particle < 1 ||
        schedule.task_batches_per_self_round < 1) {
        throw std::invalid_argument("invalid training schedule");
    }
    if (schedule.epochs == 0) return record;

    snapshot(on, 0, options.trajectory_layers, record.trajectories);
    long task_steps = 0;
    for (int epoch = 1; epoch <= schedule.epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        double loss_sum = 0.0;
        double self_sum = 0.0;
        int self_rounds = 0;
        const auto epoch_batches = batches(train, options.batch_size, batch_rng);
        try {
            for (const auto& batch : epoch_batches) {
                loss_sum += on_task_step(on, batch, options.loss, options.exec);
                ++task_steps;
                const bool self_now = schedule.mode == ScheduleMode::PerBatchSelfTrain ||
                                      task_steps % schedule.task_batches_per_self_round == 0;
                if (self_now) {
                    self_sum += self_train_round(on, schedule.self_steps_per_particle, options.exec);
                    ++self_rounds;
                }
            }
        } catch (const DivergenceError&) {
            record.diverged = true;
        }
        rec.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(1, epoch_batches.size()));
        rec.self_loss = self_rounds > 0 ? self_sum / self_rounds
                                        : std::numeric_limits<double>::quiet_NaN();
        rec.train = evaluate(on, train, options.task, options.exec);
        rec.test = evaluate(on, test, options.task, options.exec);
        rec.census = census(on, options.margin, options.thresholds, options.exec);
        snapshot(on, epoch, options.trajectory_layers, record.trajectories);
        record.epochs.push_back(rec);
        if (options.on_epoch) options.on_epoch(rec);
        if (record.diverged) break;
    }

    if (!record.trajectories.particles.empty()) {
        for (auto& t : record.trajectories.particles) {
            t.group = classify(on.particle(t.position), options.margin, options.thresholds);
        }
    }
    return record;
}

}  // namespace orgnet
