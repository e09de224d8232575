#include "orgnet/runner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "orgnet/analysis.hpp"
#include "orgnet/checkpoint.hpp"
#include "orgnet/errors.hpp"
#include "orgnet/io.hpp"

namespace orgnet {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metrics_json(const Metrics& m) {
    json j = {{"mse", finite_or_null(m.mse)}, {"mae", finite_or_null(m.mae)}};
    if (m.accuracy) j["accuracy"] = *m.accuracy;
    return j;
}

json counts_json(const TypeCounts& c) {
    json j = json::object();
    for (std::size_t t = 0; t < kParticleTypeCount; ++t) {
        j[to_string(static_cast<ParticleType>(t))] = c[t];
    }
    return j;
}

json census_json(const Census& c) {
    json layers = json::array();
    for (const auto& l : c.per_layer) layers.push_back(counts_json(l));
    return {{"total", counts_json(c.totals())}, {"per_layer", layers}};
}

std::vector<std::string> type_header(std::vector<std::string> prefix) {
    for (std::size_t t = 0; t < kParticleTypeCount; ++t) {
        prefix.push_back(to_string(static_cast<ParticleType>(t)));
    }
    return prefix;
}

void append_counts(std::vector<std::string>& row, const TypeCounts& c) {
    for (auto v : c) row.push_back(fmt(v));
}

void log_line(std::ostream* log, const std::string& s) {
    if (log != nullptr) *log << s << '\n' << std::flush;
}

LabeledDataset load_mnist_split(const RunConfig& cfg, Split split) {
    const bool train = split == Split::Train;
    const fs::path dir = cfg.data_dir;
    const auto images = find_data_file(dir, train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte");
    const auto labels = find_data_file(dir, train ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte");
    LabeledDataset ds = load_mnist_15(images, labels, split);
    const std::size_t limit = train ? cfg.train_limit : cfg.test_limit;
    if (limit > 0 && limit < ds.size()) ds.truncate(limit);
    return ds;
}

Datasets add_noise(const Datasets& base, const RunConfig& cfg, std::uint64_t seed) {
    Rng train_noise = substream(seed, "noise/train");
    Rng test_noise = substream(seed, "noise/test");
    return {add_input_noise(base.train, cfg.input_noise, train_noise),
            add_input_noise(base.test, cfg.input_noise, test_noise), base.task};
}

RunConfig seed_config(const RunConfig& cfg, std::uint64_t seed) {
    RunConfig c = cfg;
    c.seed = seed;
    c.n_seeds = 1;
    return c;
}

void write_checkpoint_files(const OrganismNetwork& on, const RunConfig& seed_cfg, int epoch,
                            const fs::path& dir) {
    save_checkpoint(on, dir / "checkpoint.bin");
    const json meta = {{"format", "orgnet-checkpoint"},
                       {"format_version", kCheckpointVersion},
                       {"epoch", epoch},
                       {"seed", seed_cfg.seed},
                       {"config", json::parse(to_json(seed_cfg))}};
    write_file(dir / "checkpoint.json", meta.dump(2) + "\n");
}

void write_epoch_tables(const ExperimentRecord& rec, const fs::path& dir) {
    CsvTable m({"epoch", "train_loss", "train_mse", "train_mae", "train_accuracy", "test_mse", "test_mae",
                "test_accuracy", "self_loss", "sr", "f", "zero", "diverged"});
    CsvTable c(type_header({"epoch", "layer"}));
    for (const auto& e : rec.epochs) {
        std::vector<std::string> row{fmt(e.epoch),        fmt(e.train_loss), fmt(e.train.mse),
                                     fmt(e.train.mae),    fmt_opt(e.train.accuracy),
                                     fmt(e.test.mse),     fmt(e.test.mae),   fmt_opt(e.test.accuracy),
                                     fmt(e.self_loss)};
        append_counts(row, e.census.totals());
        m.add_row(std::move(row));
        for (std::size_t l = 0; l < e.census.per_layer.size(); ++l) {
            std::vector<std::string> crow{fmt(e.epoch), fmt(l)};
            append_counts(crow, e.census.per_layer[l]);
            c.add_row(std::move(crow));
        }
    }
    write_file(dir / "metrics.csv", m.str());
    write_file(dir / "census.csv", c.str());
}

void write_trajectory_tables(const TrajectoryLog& log, std::size_t weights, const fs::path& dir) {
    std::vector<std::string> header{"layer", "cell", "edge", "group", "epoch"};
    for (std::size_t i = 0; i < weights; ++i) header.push_back("w" + std::to_string(i));
    CsvTable t(header);
    for (const auto& p : log.particles) {
        for (std::size_t s = 0; s < p.snapshots.size(); ++s) {
            std::vector<std::string> row{fmt(p.position.layer), fmt(p.position.cell), fmt(p.position.edge),
                                         to_string(p.group), fmt(log.epochs[s])};
            for (double w : p.snapshots[s]) row.push_back(fmt(w));
            t.add_row(std::move(row));
        }
    }
    write_file(dir / "trajectories.csv", t.str());

    CsvTable proj({"layer", "group", "cell", "edge", "epoch", "pc1", "pc2"});
    CsvTable var({"layer", "group", "component", "explained_variance_ratio"});
    std::vector<std::size_t> layers;
    for (const auto& p : log.particles) {
        if (std::find(layers.begin(), layers.end(), p.position.layer) == layers.end()) {
            layers.push_back(p.position.layer);
        }
    }
    for (std::size_t layer : layers) {
        for (std::size_t g = 0; g < kParticleTypeCount; ++g) {
            const auto group = static_cast<ParticleType>(g);
            const Matrix rows = stack_trajectories(log, layer, group);
            if (rows.rows < 2 || rows.cols == 0) continue;
            const std::size_t k = std::min<std::size_t>({2, rows.rows, rows.cols});
            const PcaResult pca = pca_project(rows, k);
            for (std::size_t j = 0; j < k; ++j) {
                var.add_row({fmt(layer), to_string(group), fmt(j + 1), fmt(pca.explained[j])});
            }
            std::size_t r = 0;
            for (const auto& p : log.particles) {
                if (p.position.layer != layer || p.group != group) continue;
                for (std::size_t s = 0; s < p.snapshots.size(); ++s, ++r) {
                    proj.add_row({fmt(layer), to_string(group), fmt(p.position.cell), fmt(p.position.edge),
                                  fmt(log.epochs[s]), fmt(pca.projected(r, 0)),
                                  k > 1 ? fmt(pca.projected(r, 1)) : std::string("0")});
                }
            }
        }
    }
    write_file(dir / "pca.csv", proj.str());
    write_file(dir / "pca_variance.csv", var.str());
}

std::string grid_csv(const std::vector<double>& grid, std::size_t side) {
    std::vector<std::string> header;
    for (std::size_t c = 0; c < side; ++c) header.push_back("c" + std::to_string(c));
    CsvTable t(header);
    for (std::size_t r = 0; r < side; ++r) {
        std::vector<std::string> row;
        for (std::size_t c = 0; c < side; ++c) row.push_back(fmt(grid[r * side + c]));
        t.add_row(std::move(row));
    }
    return t.str();
}

json seed_summary_json(const SeedSummary& s) {
    json j = {{"seed", s.seed},
              {"epochs_completed", s.epochs_completed},
              {"diverged", s.diverged},
              {"train", metrics_json(s.train)},
              {"test", metrics_json(s.test)},
              {"census", census_json(s.census)},
              {"sr_fraction", s.sr_fraction}};
    if (s.goal_fulfilled) j["goal_fulfilled"] = *s.goal_fulfilled;
    return j;
}

void write_run_header(const RunConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    write_file(dir / "config.json", to_json(cfg));
    std::string seeds;
    for (int i = 0; i < cfg.n_seeds; ++i) seeds += std::to_string(cfg.seed + static_cast<std::uint64_t>(i)) + "\n";
    write_file(dir / "seed.txt", seeds);
}

template <typename T>
double median(std::vector<T> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? static_cast<double>(v[n / 2])
                      : 0.5 * (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2]));
}

SeedSummary train_seed(const RunConfig& cfg, std::uint64_t seed, const Datasets& data, bool mnist,
                       std::ostream* log) {
    const RunConfig scfg = seed_config(cfg, seed);
    SeedSummary s;
    s.seed = seed;
    s.dir = fs::path(cfg.out_dir) / ("seed-" + std::to_string(seed));
    fs::create_directories(s.dir);

    Rng init = substream(seed, "init");
    Rng batching = substream(seed, "batching");
    OrganismNetwork on = OrganismNetwork::random(organism_arch(cfg), init, cfg.learning_rate, cfg.momentum);

    TrainOptions opt;
    opt.task = data.task;
    opt.loss = cfg.loss;
    opt.batch_size = cfg.batch_size;
    opt.margin = fixpoint_margin(cfg);
    opt.thresholds = type_thresholds(cfg);
    opt.exec = exec_policy(cfg);
    if (mnist) opt.trajectory_layers = cfg.trajectory_layers;
    const std::size_t total = on.size();
    opt.on_epoch = [&](const EpochRecord& r) {
        if (log == nullptr) return;
        std::string line = "seed " + std::to_string(seed) + " epoch " + std::to_string(r.epoch) + "/" +
                           std::to_string(cfg.epochs) + " loss " + fmt(r.train_loss);
        line += r.test.accuracy ? " test_acc " + fmt(*r.test.accuracy) : " test_mae " + fmt(r.test.mae);
        line += " SR " + std::to_string(r.census.count(ParticleType::SR)) + "/" + std::to_string(total);
        log_line(log, line);
    };

    const ExperimentRecord rec = alternating_train(on, training_schedule(cfg), data.train, data.test, batching, opt);
    s.epochs_completed = rec.epochs.empty() ? 0 : rec.epochs.back().epoch;
    s.diverged = rec.diverged;
    s.train = evaluate(on, data.train, data.task, opt.exec);
    s.test = evaluate(on, data.test, data.task, opt.exec);
    s.census = census(on, opt.margin, opt.thresholds, opt.exec);
    s.sr_fraction = static_cast<double>(s.census.count(ParticleType::SR)) / static_cast<double>(total);

    write_epoch_tables(rec, s.dir);
    write_checkpoint_files(on, scfg, s.epochs_completed, s.dir);

    CsvTable conn(type_header({"layer", "particles"}));
    for (std::size_t l = 0; l < s.census.per_layer.size(); ++l) {
        const auto& c = s.census.per_layer[l];
        std::vector<std::string> row{fmt(l), fmt(std::accumulate(c.begin(), c.end(), std::size_t{0}))};
        append_counts(row, c);
        conn.add_row(std::move(row));
    }
    write_file(s.dir / "connectivity.csv", conn.str());

    json extra = json::object();
    if (!mnist) {
        const auto examples = data.test.examples();
        s.goal_fulfilled = goal_fulfilled(on, opt.margin, cfg.zeta, examples);
        extra["zeta"] = cfg.zeta;
    } else {
        if (!rec.trajectories.particles.empty()) {
            write_trajectory_tables(rec.trajectories, on.arch().particle_arch.weight_count(), s.dir);
        }
        if (on.network_arch().input_size() == 225) {
            const PositionStats ps = sr_position_stats(on, opt.margin, opt.thresholds);
            write_file(s.dir / "sr_count_grid.csv", grid_csv(ps.counts, ps.side));
            write_file(s.dir / "sr_weight_grid.csv", grid_csv(ps.weight_sums, ps.side));
            const BorderCenter bc = border_center_means(ps.counts, ps.side, 2, 7);
            extra["sr_count_border_mean"] = bc.border_mean;
            extra["sr_count_center_mean"] = bc.center_mean;
        }
    }
    json summary = seed_summary_json(s);
    summary.update(extra);
    write_file(s.dir / "summary.json", summary.dump(2) + "\n");
    if (s.diverged) log_line(log, "seed " + std::to_string(seed) + " diverged at epoch " + std::to_string(s.epochs_completed));
    return s;
}

ExperimentRun run_experiment(const RunConfig& cfg_in, bool mnist, std::ostream* log) {
    RunConfig cfg = cfg_in;
    cfg.experiment = mnist ? "exp-mnist" : "exp-add";
    validate(cfg);
    ExperimentRun run;
    run.dir = cfg.out_dir;
    write_run_header(cfg, run.dir);

    Datasets base;
    if (mnist) {
        base.task = TaskKind::Classification;
        base.train = load_mnist_split(cfg, Split::Train);
        base.test = load_mnist_split(cfg, Split::Test);
        log_line(log, "loaded MNIST 15x15: " + std::to_string(base.train.size()) + " train, " +
                          std::to_string(base.test.size()) + " test");
    }
    for (int i = 0; i < cfg.n_seeds; ++i) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
        const Datasets data = mnist ? add_noise(base, cfg, seed) : make_datasets(cfg, seed);
        run.seeds.push_back(train_seed(cfg, seed, data, mnist, log));
    }

    json seeds = json::array();
    for (const auto& s : run.seeds) seeds.push_back(seed_summary_json(s));
    const json summary = {{"subcommand", cfg.experiment}, {"version", kVersion}, {"diverged", run.diverged()},
                          {"seeds", seeds}};
    write_file(run.dir / "summary.json", summary.dump(2) + "\n");
    write_manifest(run.dir, cfg.experiment);
    return run;
}

RunConfig analysis_config(const RunConfig& cfg, const char* name) {
    RunConfig c = cfg;
    c.experiment = name;
    validate(c);
    if (c.checkpoint.empty()) throw ConfigError(std::string(name) + " needs a checkpoint (--checkpoint PATH)");
    return c;
}

Datasets checkpoint_datasets(const CheckpointInfo& info, const RunConfig& cfg) {
    RunConfig data_cfg = info.config;
    std::error_code ec;
    if (data_cfg.experiment == "exp-mnist" && !fs::is_directory(data_cfg.data_dir, ec)) {
        data_cfg.data_dir = cfg.data_dir;
    }
    return make_datasets(data_cfg, info.config.seed);
}

}  // namespace

bool ExperimentRun::diverged() const {
    return std::any_of(seeds.begin(), seeds.end(), [](const SeedSummary& s) { return s.diverged; });
}

fs::path find_data_file(const fs::path& dir, const std::string& name) {
    std::error_code ec;
    const fs::path plain = dir / name;
    if (fs::is_regular_file(plain, ec)) return plain;
    const fs::path gz = dir / (name + ".gz");
    if (fs::is_regular_file(gz, ec)) return gz;
    throw IoError("missing data file: " + plain.string() + " (or " + gz.string() + ")");
}

Datasets make_datasets(const RunConfig& cfg, std::uint64_t seed) {
    Datasets d;
    if (cfg.experiment == "exp-mnist") {
        Datasets base;
        base.task = TaskKind::Classification;
        base.train = load_mnist_split(cfg, Split::Train);
        base.test = load_mnist_split(cfg, Split::Test);
        return add_noise(base, cfg, seed);
    }
    Rng rng = substream(seed, "data");
    d.task = TaskKind::Regression;
    d.train = make_addition_dataset(cfg.n_train, rng, Split::Train);
    d.test = make_addition_dataset(cfg.n_test, rng, Split::Test);
    return d;
}

ExperimentRun run_exp_addition(const RunConfig& cfg, std::ostream* log) { return run_experiment(cfg, false, log); }

ExperimentRun run_exp_mnist(const RunConfig& cfg, std::ostream* log) { return run_experiment(cfg, true, log); }

CheckpointInfo load_checkpoint_with_config(const fs::path& path) {
    CheckpointInfo info;
    info.on = load_checkpoint(path);
    fs::path meta_path = path;
    meta_path.replace_extension(".json");
    json meta;
    try {
        meta = json::parse(read_file(meta_path));
    } catch (const json::parse_error& e) {
        throw FormatError("checkpoint metadata " + meta_path.string() + " is not valid JSON: " + e.what());
    }
    if (!meta.is_object() || !meta.contains("config") || !meta["config"].is_object()) {
        throw FormatError("checkpoint metadata " + meta_path.string() + " has no config object");
    }
    const json& c = meta["config"];
    const std::string experiment = c.value("experiment", std::string("exp-add"));
    info.config = default_config(experiment);
    apply_json(info.config, c.dump());
    info.epoch = meta.value("epoch", 0);
    if (!(organism_arch(info.config).as_network() == info.on.network_arch())) {
        throw FormatError("checkpoint metadata does not match the checkpoint architecture");
    }
    return info;
}

RobustnessRun run_robustness(const RunConfig& cfg_in, std::ostream* log) {
    const RunConfig cfg = analysis_config(cfg_in, "robustness");
    const CheckpointInfo info = load_checkpoint_with_config(cfg.checkpoint);
    RobustnessRun run;
    run.dir = cfg.out_dir;
    run.sigmas = cfg.sigmas;
    write_run_header(cfg, run.dir);

    const FixpointMargin margin = fixpoint_margin(cfg);
    const TypeThresholds thresholds = type_thresholds(cfg);
    const auto types = classify_all(info.on, margin, thresholds, exec_policy(cfg));
    std::vector<std::size_t> sr;
    for (std::size_t k = 0; k < types.size(); ++k) {
        if (types[k] == ParticleType::SR) sr.push_back(k);
    }
    run.sr_particles = sr.size();
    log_line(log, "robustness: " + std::to_string(sr.size()) + " SR particles, " +
                      std::to_string(cfg.sigmas.size()) + " sigmas");

    const std::size_t ns = cfg.sigmas.size();
    run.rows.resize(sr.size() * ns);
    parallel_for(sr.size(), cfg.threads, [&](std::size_t i) {
        const std::size_t k = sr[i];
        for (std::size_t j = 0; j < ns; ++j) {
            Rng rng = substream(cfg.seed, "perturbation/" + std::to_string(k) + "/" + std::to_string(j));
            const ParticleNetwork noisy = perturb(info.on.particle(k), cfg.sigmas[j], rng);
            const ChainResult r = self_application_chain(noisy, margin, cfg.max_steps, thresholds.diverge);
            run.rows[i * ns + j] = {k, cfg.sigmas[j], r.steps_sr, r.steps_to_divergence};
        }
    });

    CsvTable rows({"particle", "layer", "cell", "edge", "sigma", "steps_sr", "steps_to_divergence"});
    for (const auto& r : run.rows) {
        const Position p = info.on.network_arch().position_of(r.particle);
        rows.add_row({fmt(r.particle), fmt(p.layer), fmt(p.cell), fmt(p.edge), fmt(r.sigma), fmt(r.steps_sr),
                      fmt(r.steps_to_divergence)});
    }
    CsvTable summary({"sigma", "particles", "median_steps_sr", "median_steps_to_divergence"});
    for (std::size_t j = 0; j < ns; ++j) {
        std::vector<int> a;
        std::vector<int> b;
        for (std::size_t i = 0; i < sr.size(); ++i) {
            a.push_back(run.rows[i * ns + j].steps_sr);
            b.push_back(run.rows[i * ns + j].steps_to_divergence);
        }
        run.median_steps_sr.push_back(median(a));
        run.median_steps_to_divergence.push_back(median(b));
        summary.add_row({fmt(cfg.sigmas[j]), fmt(sr.size()), fmt(run.median_steps_sr.back()),
                         fmt(run.median_steps_to_divergence.back())});
    }
    write_file(run.dir / "robustness.csv", rows.str());
    write_file(run.dir / "robustness_summary.csv", summary.str());

    json js = {{"subcommand", "robustness"}, {"version", kVersion},          {"checkpoint", cfg.checkpoint},
               {"sr_particles", sr.size()},  {"max_steps", cfg.max_steps}};
    if (sr.empty()) {
        js["warning"] = "checkpoint has no SR particles";
        log_line(log, "warning: checkpoint has no SR particles");
    }
    write_file(run.dir / "summary.json", js.dump(2) + "\n");
    write_manifest(run.dir, "robustness");
    return run;
}

DropoutRun run_dropout_compare(const RunConfig& cfg_in, std::ostream* log) {
    const RunConfig cfg = analysis_config(cfg_in, "dropout-compare");
    const CheckpointInfo info = load_checkpoint_with_config(cfg.checkpoint);
    const Datasets data = checkpoint_datasets(info, cfg);
    const ExecPolicy exec = exec_policy(cfg);
    const FixpointMargin margin = fixpoint_margin(cfg);
    const TypeThresholds thresholds = type_thresholds(cfg);
    DropoutRun run;
    run.dir = cfg.out_dir;
    write_run_header(cfg, run.dir);

    const auto types = classify_all(info.on, margin, thresholds, exec);
    const std::size_t total = types.size();
    const auto count_of = [&](ParticleType t) {
        return static_cast<std::size_t>(std::count(types.begin(), types.end(), t));
    };
    const std::size_t n_sr = count_of(ParticleType::SR);
    const std::size_t n_f = count_of(ParticleType::F);
    const auto frac = [&](std::size_t n) { return static_cast<double>(n) / static_cast<double>(total); };

    run.rows.push_back({"full", 0, 0.0, evaluate(info.on, data.test, data.task, exec)});
    run.rows.push_back({"dropout_sr", n_sr, frac(n_sr),
                        evaluate(dropout(info.on, ParticleType::SR, margin, thresholds), data.test, data.task, exec)});
    run.rows.push_back({"dropout_f", n_f, frac(n_f),
                        evaluate(dropout(info.on, ParticleType::F, margin, thresholds), data.test, data.task, exec)});
    run.rows.push_back({"l1_matched", n_sr, frac(n_sr),
                        evaluate(l1_prune_count(resubstitute(info.on), n_sr), data.test, data.task, exec)});

    CsvTable t({"variant", "zeroed", "sparsity", "test_mse", "test_mae", "test_accuracy"});
    json rows = json::array();
    for (const auto& r : run.rows) {
        t.add_row({r.variant, fmt(r.zeroed), fmt(r.sparsity), fmt(r.test.mse), fmt(r.test.mae), fmt_opt(r.test.accuracy)});
        json j = metrics_json(r.test);
        j["variant"] = r.variant;
        j["zeroed"] = r.zeroed;
        j["sparsity"] = r.sparsity;
        rows.push_back(j);
        log_line(log, r.variant + ": " +
                          (r.test.accuracy ? "accuracy " + fmt(*r.test.accuracy) : "mae " + fmt(r.test.mae)));
    }
    write_file(run.dir / "dropout.csv", t.str());
    const json js = {{"subcommand", "dropout-compare"}, {"version", kVersion}, {"checkpoint", cfg.checkpoint},
                     {"rows", rows}};
    write_file(run.dir / "summary.json", js.dump(2) + "\n");
    write_manifest(run.dir, "dropout-compare");
    return run;
}

ResubReport run_resub_check(const RunConfig& cfg_in, std::ostream* log) {
    const RunConfig cfg = analysis_config(cfg_in, "resub-check");
    const CheckpointInfo info = load_checkpoint_with_config(cfg.checkpoint);
    const Datasets data = checkpoint_datasets(info, cfg);
    ResubReport rep;
    rep.dir = cfg.out_dir;
    write_run_header(cfg, rep.dir);

    const Network net = resubstitute(info.on);
    const std::size_t n = data.test.size();
    std::vector<double> sample_max(n, 0.0);
    std::vector<double> sample_sum(n, 0.0);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        const auto a = on_forward(info.on, data.test.input(i));
        const auto b = forward(net, data.test.input(i));
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double d = std::abs(a[j] - b[j]);
            sample_max[i] = std::max(sample_max[i], d);
            sample_sum[i] += d;
        }
    });
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        rep.max_margin = std::max(rep.max_margin, sample_max[i]);
        sum += sample_sum[i];
    }
    const std::size_t outputs = net.arch.output_size();
    rep.samples = n;
    rep.mean_margin = n == 0 ? 0.0 : sum / static_cast<double>(n * outputs);
    rep.linear = info.on.network_arch().activation() == Activation::Linear;
    rep.within_bound = rep.max_margin <= 1e-8;

    CsvTable t({"samples", "max_margin", "mean_margin", "linear", "within_1e-8"});
    t.add_row({fmt(rep.samples), fmt(rep.max_margin), fmt(rep.mean_margin), rep.linear ? "true" : "false",
               rep.within_bound ? "true" : "false"});
    write_file(rep.dir / "resub.csv", t.str());
    json js = {{"subcommand", "resub-check"}, {"version", kVersion},  {"checkpoint", cfg.checkpoint},
               {"samples", rep.samples},      {"max_margin", rep.max_margin}, {"mean_margin", rep.mean_margin},
               {"linear", rep.linear},        {"within_bound", rep.within_bound}};
    if (!rep.linear) js["note"] = "the 1e-8 bound is stated for linear organisms only";
    write_file(rep.dir / "summary.json", js.dump(2) + "\n");
    write_manifest(rep.dir, "resub-check");
    log_line(log, "resub-check: max margin " + fmt(rep.max_margin) + ", mean margin " + fmt(rep.mean_margin));
    return rep;
}

void write_manifest(const fs::path& dir, const std::string& subcommand) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), dir);
        if (rel == "manifest.json") continue;
        files.push_back(rel);
    }
    std::sort(files.begin(), files.end());
    json list = json::array();
    for (const auto& rel : files) {
        const std::string content = read_file(dir / rel);
        list.push_back({{"path", rel.generic_string()}, {"bytes", content.size()}, {"fnv1a64", hex64(fnv1a64(content))}});
    }
    const json manifest = {{"tool", "orgnet"}, {"version", kVersion}, {"subcommand", subcommand}, {"files", list}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace orgnet
