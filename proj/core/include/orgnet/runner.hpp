#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "orgnet/config.hpp"
#include "orgnet/data.hpp"
#include "orgnet/metrics.hpp"
#include "orgnet/organism.hpp"

namespace orgnet {

struct Datasets {
    LabeledDataset train;
    LabeledDataset test;
    TaskKind task = TaskKind::Regression;
};

/// Training and test data of an experiment for one root seed. exp-add draws
/// the addition task from the "data" stream; exp-mnist reads the 15x15 MNIST
/// variant from cfg.data_dir and adds input noise.
Datasets make_datasets(const RunConfig& cfg, std::uint64_t seed);

/// `name` or `name.gz` inside `dir`; throws IoError naming both if neither exists.
std::filesystem::path find_data_file(const std::filesystem::path& dir, const std::string& name);

struct SeedSummary {
    std::uint64_t seed = 0;
    std::filesystem::path dir;
    int epochs_completed = 0;
    bool diverged = false;
    Metrics train;
    Metrics test;
    Census census;
    double sr_fraction = 0.0;
    std::optional<bool> goal_fulfilled;  // exp-add only
};

struct ExperimentRun {
    std::filesystem::path dir;
    std::vector<SeedSummary> seeds;

    bool diverged() const;
};

/// Trains one organism per seed (cfg.seed, cfg.seed + 1, ...) and writes, per
/// seed, metrics.csv, census.csv, a checkpoint and summary.json under
/// cfg.out_dir/seed-<n>. The MNIST experiment also writes trajectories, PCA
/// projections, SR heatmap grids and per-layer connectivity.
ExperimentRun run_exp_addition(const RunConfig& cfg, std::ostream* log = nullptr);
ExperimentRun run_exp_mnist(const RunConfig& cfg, std::ostream* log = nullptr);

struct RobustnessRow {
    std::size_t particle = 0;
    double sigma = 0.0;
    int steps_sr = 0;
    int steps_to_divergence = 0;
};

struct RobustnessRun {
    std::filesystem::path dir;
    std::vector<double> sigmas;
    std::size_t sr_particles = 0;
    std::vector<RobustnessRow> rows;
    std::vector<double> median_steps_sr;  // one per sigma
    std::vector<double> median_steps_to_divergence;
};

/// Perturbs every SR particle of the checkpoint at each sigma and follows its
/// self-application chain.
RobustnessRun run_robustness(const RunConfig& cfg, std::ostream* log = nullptr);

struct DropoutRow {
    std::string variant;  // full, dropout_sr, dropout_f, l1_matched
    std::size_t zeroed = 0;
    double sparsity = 0.0;
    Metrics test;
};

struct DropoutRun {
    std::filesystem::path dir;
    std::vector<DropoutRow> rows;
};

/// Test metrics of the full organism, both dropout organisms and the
/// resubstituted net pruned by magnitude to the SR fraction.
DropoutRun run_dropout_compare(const RunConfig& cfg, std::ostream* log = nullptr);

struct ResubReport {
    std::filesystem::path dir;
    std::size_t samples = 0;
    double max_margin = 0.0;
    double mean_margin = 0.0;
    bool linear = true;
    bool within_bound = true;  // max_margin <= 1e-8, meaningful for linear organisms
};

/// Largest and mean |on_forward - forward(resubstitute)| over the test set.
ResubReport run_resub_check(const RunConfig& cfg, std::ostream* log = nullptr);

struct CheckpointInfo {
    OrganismNetwork on;
    RunConfig config;  // config the checkpoint was trained with, seed included
    int epoch = 0;
};

/// Loads `path` and its companion `<path minus extension>.json`.
CheckpointInfo load_checkpoint_with_config(const std::filesystem::path& path);

/// Lists every file under `dir` except manifest.json with its size and
/// FNV-1a hash, then writes dir/manifest.json.
void write_manifest(const std::filesystem::path& dir, const std::string& subcommand);

}  // namespace orgnet
