// orgnet: command line runner for organism network experiments.
//
//   orgnet exp-add         [common flags]
//   orgnet exp-mnist       [common flags] [--data-dir DIR]
//   orgnet robustness      [common flags] --checkpoint PATH
//   orgnet dropout-compare [common flags] --checkpoint PATH [--data-dir DIR]
//   orgnet resub-check     [common flags] --checkpoint PATH
//   orgnet fetch-mnist     [--data-dir DIR] [--url URL] [--force]
//
// Common flags: --config PATH, --seed N, --out DIR, --threads N,
// --deterministic, --set key=value (repeatable), --quiet.
//
// Exit codes: 0 success, 1 divergence, 2 bad usage or config, 3 I/O or
// data format failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fetch.hpp"
#include "orgnet/config.hpp"
#include "orgnet/errors.hpp"
#include "orgnet/io.hpp"
#include "orgnet/runner.hpp"

namespace {

enum Exit : int { kOk = 0, kDiverged = 1, kUsage = 2, kIo = 3 };

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> threads;
    bool deterministic = false;
    std::vector<std::string> sets;
    std::optional<std::string> checkpoint;
    std::optional<std::string> data_dir;
    std::optional<std::string> url;
    bool force = false;
    bool quiet = false;
};

void add_common(CLI::App* sub, CommonArgs& a) {
    sub->add_option("--config", a.config_path, "Flat JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", a.seed, "Root seed (further seeds count up from it)");
    sub->add_option("--out", a.out, "Run directory");
    sub->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--deterministic", a.deterministic, "Sequential reductions; byte-identical reruns");
    sub->add_option("--set", a.sets, "Override a config key: key=value (value is JSON or a bare string)");
    sub->add_flag("--quiet", a.quiet, "No progress output");
}

orgnet::RunConfig resolve(const std::string& name, const CommonArgs& a) {
    orgnet::RunConfig cfg = orgnet::default_config(name);
    if (!a.config_path.empty()) orgnet::apply_json(cfg, orgnet::read_file(a.config_path));
    for (const auto& s : a.sets) orgnet::apply_assignment(cfg, s);
    cfg.experiment = name;
    if (a.seed) cfg.seed = *a.seed;
    if (a.out) cfg.out_dir = *a.out;
    if (a.threads) cfg.threads = *a.threads;
    if (a.deterministic) cfg.deterministic = true;
    if (a.checkpoint) cfg.checkpoint = *a.checkpoint;
    if (a.data_dir) cfg.data_dir = *a.data_dir;
    if (a.url) cfg.mnist_url = *a.url;
    orgnet::validate(cfg);
    return cfg;
}

int run(const std::string& name, const CommonArgs& a) {
    const orgnet::RunConfig cfg = resolve(name, a);
    std::ostream* log = a.quiet ? nullptr : &std::cerr;
    if (name == "exp-add" || name == "exp-mnist") {
        const auto r = name == "exp-add" ? orgnet::run_exp_addition(cfg, log) : orgnet::run_exp_mnist(cfg, log);
        for (const auto& s : r.seeds) {
            std::cout << "seed " << s.seed << ": epochs " << s.epochs_completed << ", test mse "
                      << orgnet::format_double(s.test.mse) << ", test mae " << orgnet::format_double(s.test.mae);
            if (s.test.accuracy) std::cout << ", test accuracy " << orgnet::format_double(*s.test.accuracy);
            std::cout << ", SR fraction " << orgnet::format_double(s.sr_fraction);
            if (s.goal_fulfilled) std::cout << ", goal " << (*s.goal_fulfilled ? "fulfilled" : "not fulfilled");
            if (s.diverged) std::cout << ", DIVERGED";
            std::cout << '\n';
        }
        std::cout << "results in " << r.dir.string() << '\n';
        return r.diverged() ? kDiverged : kOk;
    }
    if (name == "robustness") {
        const auto r = orgnet::run_robustness(cfg, log);
        for (std::size_t j = 0; j < r.sigmas.size(); ++j) {
            std::cout << "sigma " << orgnet::format_double(r.sigmas[j]) << ": median steps_sr "
                      << orgnet::format_double(r.median_steps_sr[j]) << ", median steps_to_divergence "
                      << orgnet::format_double(r.median_steps_to_divergence[j]) << '\n';
        }
        std::cout << "results in " << r.dir.string() << '\n';
        return kOk;
    }
    if (name == "dropout-compare") {
        const auto r = orgnet::run_dropout_compare(cfg, log);
        for (const auto& row : r.rows) {
            std::cout << row.variant << ": zeroed " << row.zeroed << ", test mae "
                      << orgnet::format_double(row.test.mae);
            if (row.test.accuracy) std::cout << ", test accuracy " << orgnet::format_double(*row.test.accuracy);
            std::cout << '\n';
        }
        std::cout << "results in " << r.dir.string() << '\n';
        return kOk;
    }
    if (name == "resub-check") {
        const auto r = orgnet::run_resub_check(cfg, log);
        std::cout << "samples " << r.samples << ", max margin " << orgnet::format_double(r.max_margin)
                  << ", mean margin " << orgnet::format_double(r.mean_margin)
                  << (r.linear ? "" : " (gelu organism: the 1e-8 bound covers linear organisms only)") << '\n';
        std::cout << "results in " << r.dir.string() << '\n';
        return kOk;
    }
    const int n = orgnet::tools::fetch_mnist(cfg.mnist_url, cfg.data_dir, a.force, std::cerr);
    std::cout << "fetched " << n << " files into " << cfg.data_dir << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Organism network experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "orgnet 0.1.0");

    CommonArgs args;
    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {
        {"exp-add", "Float addition experiment with per-batch self-training"},
        {"exp-mnist", "15x15 MNIST experiment with the task:self ratio schedule"},
        {"robustness", "Self-application chains of perturbed SR particles from a checkpoint"},
        {"dropout-compare", "Full organism vs. SR/F dropout vs. matched l1 pruning"},
        {"resub-check", "Organism vs. resubstituted conventional net output margin"},
        {"fetch-mnist", "Download the MNIST IDX files into the data directory"},
    };
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        const std::string n = s.name;
        if (n == "fetch-mnist") {
            sub->add_option("--config", args.config_path, "Flat JSON config file")->check(CLI::ExistingFile);
            sub->add_option("--url", args.url, "Base URL of the gzip IDX files");
            sub->add_flag("--force", args.force, "Download even if valid files are present");
            sub->add_option("--set", args.sets, "Override a config key: key=value");
        } else {
            add_common(sub, args);
        }
        if (n == "robustness" || n == "dropout-compare" || n == "resub-check") {
            sub->add_option("--checkpoint", args.checkpoint, "checkpoint.bin written by exp-add or exp-mnist");
        }
        if (n == "exp-mnist" || n == "dropout-compare" || n == "fetch-mnist") {
            sub->add_option("--data-dir", args.data_dir, "MNIST directory (default: $ORGNET_DATA_DIR)");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        return run(name, args);
    } catch (const orgnet::ConfigError& e) {
        std::cerr << "orgnet: " << e.what() << '\n';
        return kUsage;
    } catch (const orgnet::DivergenceError& e) {
        std::cerr << "orgnet: diverged: " << e.what() << '\n';
        return kDiverged;
    } catch (const std::exception& e) {
        std::cerr << "orgnet: " << e.what() << '\n';
        return kIo;
    }
}
