#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "orgnet/organism.hpp"

namespace orgnet {

/// Every knob of a run. Stored as a flat JSON object; see README for the
/// key list. Unknown keys are rejected.
struct RunConfig {
    std::string experiment = "exp-add";
    std::uint64_t seed = 0;
    int n_seeds = 5;

    std::vector<std::size_t> on_layers{2, 3, 3, 1};
    Activation on_activation = Activation::Linear;
    std::vector<std::size_t> particle_layers{5, 3, 3, 1};

    double learning_rate = 0.004;
    double momentum = 0.9;
    double epsilon = 1e-5;
    double zero_threshold = 1e-6;
    double diverge_threshold = 1e3;

    ScheduleMode schedule = ScheduleMode::PerBatchSelfTrain;
    int epochs = 60;
    int self_steps = 25;
    int task_batches_per_self_round = 5;
    Loss loss = Loss::MeanSquared;
    std::size_t batch_size = 50;

    std::size_t n_train = 1000;
    std::size_t n_test = 200;
    double zeta = 1e-2;

    std::string data_dir;
    std::size_t train_limit = 0;  // 0 keeps the full split
    std::size_t test_limit = 0;
    double input_noise = 1e-4;
    std::vector<std::size_t> trajectory_layers;

    std::vector<double> sigmas;
    int max_steps = 100;

    std::string checkpoint;
    std::string mnist_url = "https://storage.googleapis.com/cvdf-datasets/mnist/";

    std::string out_dir = "runs/exp-add";
    std::size_t threads = 1;
    bool deterministic = false;
};

/// Defaults for one subcommand (exp-add, exp-mnist, robustness,
/// dropout-compare, resub-check, fetch-mnist).
RunConfig default_config(std::string_view experiment);

/// Applies the keys of a flat JSON object. Throws ConfigError on unknown
/// keys, wrong value types or malformed JSON.
void apply_json(RunConfig& cfg, std::string_view json_text);

/// `key=value` with the value parsed as JSON, or taken as a string if it is
/// not valid JSON.
void apply_assignment(RunConfig& cfg, std::string_view assignment);

/// Throws ConfigError if any value is out of range.
void validate(const RunConfig& cfg);

/// Canonical JSON text of the whole config (sorted keys, trailing newline).
std::string to_json(const RunConfig& cfg);

std::vector<std::string> config_keys();

OrganismArchitecture organism_arch(const RunConfig& cfg);
TrainingSchedule training_schedule(const RunConfig& cfg);
FixpointMargin fixpoint_margin(const RunConfig& cfg);
TypeThresholds type_thresholds(const RunConfig& cfg);
ExecPolicy exec_policy(const RunConfig& cfg);

/// Ten log-spaced values from 1e-9 to 1e0.
std::vector<double> default_sigmas();

}  // namespace orgnet
