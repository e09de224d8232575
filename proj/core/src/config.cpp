#include "orgnet/config.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>

#include "json.hpp"
#include "orgnet/errors.hpp"

namespace orgnet {

namespace {

using json = nlohmann::json;

struct Field {
    std::function<json(const RunConfig&)> get;
    std::function<void(RunConfig&, const json&)> set;
};

template <typename T>
T as(const json& v, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError("");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError("");
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!v.is_number_unsigned()) throw ConfigError("");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError("");
        }
        return v.get<T>();
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type: " + v.dump());
    }
}

template <typename T>
std::vector<T> as_list(const json& v, const std::string& key) {
    if (!v.is_array()) throw ConfigError("config key '" + key + "' must be a list");
    std::vector<T> out;
    for (const auto& item : v) out.push_back(as<T>(item, key));
    return out;
}

ScheduleMode schedule_from_string(const std::string& s) {
    if (s == "per_batch") return ScheduleMode::PerBatchSelfTrain;
    if (s == "ratio") return ScheduleMode::RatioTaskToSelf;
    throw ConfigError("unknown schedule '" + s + "' (expected per_batch or ratio)");
}

const char* schedule_name(ScheduleMode m) {
    return m == ScheduleMode::PerBatchSelfTrain ? "per_batch" : "ratio";
}

#define ORGNET_FIELD(name, type)                                                   \
    {                                                                              \
        #name, Field {                                                             \
            [](const RunConfig& c) { return json(c.name); },                       \
                [](RunConfig& c, const json& v) { c.name = as<type>(v, #name); }   \
        }                                                                          \
    }
#define ORGNET_LIST(name, type)                                                      \
    {                                                                                \
        #name, Field {                                                               \
            [](const RunConfig& c) { return json(c.name); },                         \
                [](RunConfig& c, const json& v) { c.name = as_list<type>(v, #name); } \
        }                                                                            \
    }

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = {
        ORGNET_FIELD(experiment, std::string),
        ORGNET_FIELD(seed, std::uint64_t),
        ORGNET_FIELD(n_seeds, int),
        ORGNET_LIST(on_layers, std::size_t),
        {"on_activation",
         Field{[](const RunConfig& c) { return json(to_string(c.on_activation)); },
               [](RunConfig& c, const json& v) {
                   try {
                       c.on_activation = activation_from_string(as<std::string>(v, "on_activation"));
                   } catch (const std::invalid_argument& e) {
                       throw ConfigError(e.what());
                   }
               }}},
        ORGNET_LIST(particle_layers, std::size_t),
        ORGNET_FIELD(learning_rate, double),
        ORGNET_FIELD(momentum, double),
        ORGNET_FIELD(epsilon, double),
        ORGNET_FIELD(zero_threshold, double),
        ORGNET_FIELD(diverge_threshold, double),
        {"schedule",
         Field{[](const RunConfig& c) { return json(schedule_name(c.schedule)); },
               [](RunConfig& c, const json& v) {
                   c.schedule = schedule_from_string(as<std::string>(v, "schedule"));
               }}},
        ORGNET_FIELD(epochs, int),
        ORGNET_FIELD(self_steps, int),
        ORGNET_FIELD(task_batches_per_self_round, int),
        {"loss", Field{[](const RunConfig& c) { return json(to_string(c.loss)); },
                       [](RunConfig& c, const json& v) {
                           try {
                               c.loss = loss_from_string(as<std::string>(v, "loss"));
                           } catch (const std::invalid_argument& e) {
                               throw ConfigError(e.what());
                           }
                       }}},
        ORGNET_FIELD(batch_size, std::size_t),
        ORGNET_FIELD(n_train, std::size_t),
        ORGNET_FIELD(n_test, std::size_t),
        ORGNET_FIELD(zeta, double),
        ORGNET_FIELD(data_dir, std::string),
        ORGNET_FIELD(train_limit, std::size_t),
        ORGNET_FIELD(test_limit, std::size_t),
        ORGNET_FIELD(input_noise, double),
        ORGNET_LIST(trajectory_layers, std::size_t),
        ORGNET_LIST(sigmas, double),
        ORGNET_FIELD(max_steps, int),
        ORGNET_FIELD(checkpoint, std::string),
        ORGNET_FIELD(mnist_url, std::string),
        ORGNET_FIELD(out_dir, std::string),
        ORGNET_FIELD(threads, std::size_t),
        ORGNET_FIELD(deterministic, bool),
    };
    return table;
}

#undef ORGNET_FIELD
#undef ORGNET_LIST

void set_key(RunConfig& cfg, const std::string& key, const json& value) {
    const auto& table = fields();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(cfg, value);
}

}  // namespace

std::vector<double> default_sigmas() {
    std::vector<double> s;
    for (int e = -9; e <= 0; ++e) s.push_back(std::pow(10.0, e));
    return s;
}

RunConfig default_config(std::string_view experiment) {
    RunConfig c;
    c.experiment = std::string(experiment);
    c.out_dir = "runs/" + c.experiment;
    const char* env = std::getenv("ORGNET_DATA_DIR");
    c.data_dir = (env != nullptr && *env != '\0') ? env : "data/mnist";
    c.sigmas = default_sigmas();
    if (experiment == "exp-add" || experiment == "robustness" || experiment == "resub-check") {
        if (experiment != "exp-add") c.n_seeds = 1;
        return c;
    }
    if (experiment == "exp-mnist" || experiment == "dropout-compare") {
        c.n_seeds = experiment == "exp-mnist" ? 3 : 1;
        c.on_layers = {225, 5, 5, 5, 10};
        c.on_activation = Activation::Gelu;
        c.schedule = ScheduleMode::RatioTaskToSelf;
        c.epochs = 200;
        c.self_steps = 1;
        c.task_batches_per_self_round = 5;
        c.loss = Loss::CrossEntropy;
        c.batch_size = 64;
        c.trajectory_layers = {1, 2, 3};
        return c;
    }
    if (experiment == "fetch-mnist") {
        c.n_seeds = 1;
        return c;
    }
    throw ConfigError("unknown experiment '" + std::string(experiment) + "'");
}

void apply_json(RunConfig& cfg, std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : doc.items()) set_key(cfg, key, value);
}

void apply_assignment(RunConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    set_key(cfg, key, value);
}

void validate(const RunConfig& cfg) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("invalid config: ") + what);
    };
    require(cfg.n_seeds >= 1, "n_seeds must be >= 1");
    require(cfg.on_layers.size() >= 2, "on_layers needs at least two entries");
    for (auto s : cfg.on_layers) require(s > 0, "on_layers entries must be positive");
    require(cfg.particle_layers.size() >= 2 && cfg.particle_layers.front() == 5 &&
                cfg.particle_layers.back() == 1,
            "particle_layers must start with 5 and end with 1");
    for (auto s : cfg.particle_layers) require(s > 0, "particle_layers entries must be positive");
    require(cfg.learning_rate > 0 && std::isfinite(cfg.learning_rate), "learning_rate must be > 0");
    require(cfg.momentum >= 0 && cfg.momentum < 1, "momentum must be in [0, 1)");
    require(cfg.epsilon > 0, "epsilon must be > 0");
    require(cfg.zero_threshold > 0 && cfg.diverge_threshold > 0, "thresholds must be > 0");
    require(cfg.epochs >= 0, "epochs must be >= 0");
    require(cfg.self_steps >= 1, "self_steps must be >= 1");
    require(cfg.task_batches_per_self_round >= 1, "task_batches_per_self_round must be >= 1");
    require(cfg.batch_size >= 1, "batch_size must be >= 1");
    require(cfg.n_train >= 1 && cfg.n_test >= 1, "n_train and n_test must be >= 1");
    require(cfg.zeta > 0, "zeta must be > 0");
    require(cfg.input_noise >= 0, "input_noise must be >= 0");
    for (auto l : cfg.trajectory_layers) {
        require(l + 1 < cfg.on_layers.size(), "trajectory_layers entry beyond the organism depth");
    }
    for (double s : cfg.sigmas) require(s >= 0 && std::isfinite(s), "sigmas must be finite and >= 0");
    require(cfg.max_steps >= 1, "max_steps must be >= 1");
    require(cfg.threads >= 1, "threads must be >= 1");
}

std::string to_json(const RunConfig& cfg) {
    json doc = json::object();
    for (const auto& [key, field] : fields()) doc[key] = field.get(cfg);
    return doc.dump(2) + "\n";
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [key, field] : fields()) keys.push_back(key);
    return keys;
}

OrganismArchitecture organism_arch(const RunConfig& cfg) {
    return {cfg.on_layers, cfg.on_activation, NetworkArchitecture(cfg.particle_layers, Activation::Linear)};
}

TrainingSchedule training_schedule(const RunConfig& cfg) {
    return {cfg.schedule, cfg.self_steps, cfg.task_batches_per_self_round, cfg.epochs};
}

FixpointMargin fixpoint_margin(const RunConfig& cfg) { return {cfg.epsilon}; }

TypeThresholds type_thresholds(const RunConfig& cfg) { return {cfg.zero_threshold, cfg.diverge_threshold}; }

ExecPolicy exec_policy(const RunConfig& cfg) { return {cfg.threads, cfg.deterministic}; }

}  // namespace orgnet
