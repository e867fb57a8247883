#include "lirf/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

namespace lirf {

using nlohmann::json;

namespace {

// Desk-scale phase budgets per task (env steps). These exist purely to keep
// the benchmark campaign inside its runtime budget.
struct TaskBudgets {
    int p1, p3, p4, positives;
};

TaskBudgets task_budgets(const std::string& task) {
    if (task == "door_lock") return {30000, 12000, 40000, 64};
    if (task == "door_close") return {12000, 6000, 15000, 32};
    if (task == "screw") return {12000, 8000, 16000, 1};
    if (task == "block_stack") return {30000, 14000, 30000, 128};
    throw ConfigError("unknown task kind: " + task);
}

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown config key: " + where + it.key());
}

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(std::string("config key must be numeric: ") + key);
    return j.at(key).get<double>();
}

int integer(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer())
        throw ConfigError(std::string("config key must be an integer: ") + key);
    return j.at(key).get<int>();
}

std::vector<std::size_t> sizes(const json& j, const char* key,
                               std::vector<std::size_t> fallback) {
    if (!j.contains(key)) return fallback;
    std::vector<std::size_t> v;
    for (const auto& e : j.at(key)) {
        if (!e.is_number_integer() || e.get<long long>() <= 0)
            throw ConfigError(std::string("layer widths must be positive integers: ") + key);
        v.push_back(e.get<std::size_t>());
    }
    return v;
}

}  // namespace

bool deterministic_mode() {
    const char* v = std::getenv("LIRF_DETERMINISTIC");
    return v && std::string(v) == "1";
}

std::uint64_t hash_json_canonical(const json& j) {
    // nlohmann objects iterate in sorted key order, so dump() is canonical.
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RunConfig RunConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config root must be an object");
    reject_unknown(j, {"schema_version", "task", "seeds", "out_dir", "phases", "sac",
                       "irf_history", "reward", "net", "bank", "eval", "env", "jobs"},
                   "");
    RunConfig c;
    c.schema_version = integer(j, "schema_version", 1);
    if (c.schema_version != 1) throw ConfigError("unsupported schema_version");
    if (j.contains("task")) {
        if (!j.at("task").is_string()) throw ConfigError("task must be a string");
        c.task = j.at("task").get<std::string>();
    }
    if (!is_known_env_kind(c.task)) throw ConfigError("unknown task kind: " + c.task);
    if (j.contains("seeds")) {
        c.seeds.clear();
        for (const auto& s : j.at("seeds")) {
            if (!s.is_number_integer() || s.get<long long>() < 0)
                throw ConfigError("seeds must be nonnegative integers");
            c.seeds.push_back(s.get<std::uint64_t>());
        }
        if (c.seeds.empty()) throw ConfigError("seeds must be nonempty");
    }
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();

    if (j.contains("phases")) {
        const json& p = j.at("phases");
        reject_unknown(p,
                       {"phase1_steps", "phase2_rollouts", "phase3_steps", "phase4_steps",
                        "classifier_refresh", "classifier_updates", "eval_every"},
                       "phases.");
        c.phases.phase1_steps = integer(p, "phase1_steps", 0);
        c.phases.phase2_rollouts = integer(p, "phase2_rollouts", 500);
        c.phases.phase3_steps = integer(p, "phase3_steps", 0);
        c.phases.phase4_steps = integer(p, "phase4_steps", 0);
        c.phases.classifier_refresh = integer(p, "classifier_refresh", 1000);
        c.phases.classifier_updates = integer(p, "classifier_updates", 50);
        c.phases.eval_every = integer(p, "eval_every", 0);
        if (c.phases.phase2_rollouts < 1) throw ConfigError("phase2_rollouts must be >= 1");
    }
    if (j.contains("sac")) {
        const json& s = j.at("sac");
        reject_unknown(s,
                       {"gamma", "lr_actor", "lr_critic", "lr_alpha", "tau", "batch_size",
                        "entropy_target", "history", "grad_steps_per_env_step",
                        "replay_capacity", "warmup_steps", "log_std_min", "log_std_max"},
                       "sac.");
        c.sac.gamma = num(s, "gamma", c.sac.gamma);
        if (!(c.sac.gamma > 0.0 && c.sac.gamma < 1.0))
            throw ConfigError("sac.gamma must be in (0,1)");
        c.sac.lr_actor = num(s, "lr_actor", c.sac.lr_actor);
        c.sac.lr_critic = num(s, "lr_critic", c.sac.lr_critic);
        c.sac.lr_alpha = num(s, "lr_alpha", c.sac.lr_alpha);
        if (c.sac.lr_actor < 0 || c.sac.lr_critic < 0 || c.sac.lr_alpha < 0)
            throw ConfigError("sac learning rates must be nonnegative");
        c.sac.tau = num(s, "tau", c.sac.tau);
        c.sac.batch_size = std::size_t(integer(s, "batch_size", int(c.sac.batch_size)));
        c.sac.entropy_target = num(s, "entropy_target", 0.0);
        c.sac.history = integer(s, "history", 0);
        c.sac.grad_steps_per_env_step = integer(s, "grad_steps_per_env_step", 1);
        c.sac.replay_capacity =
            std::size_t(integer(s, "replay_capacity", int(c.sac.replay_capacity)));
        c.sac.warmup_steps = std::size_t(integer(s, "warmup_steps", int(c.sac.warmup_steps)));
        c.sac.log_std_min = num(s, "log_std_min", c.sac.log_std_min);
        c.sac.log_std_max = num(s, "log_std_max", c.sac.log_std_max);
    }
    c.irf_history = integer(j, "irf_history", 0);
    if (j.contains("reward")) {
        const json& r = j.at("reward");
        reject_unknown(r,
                       {"lambda", "classifier_lr", "classifier_batch", "label_smoothing",
                        "log_floor"},
                       "reward.");
        c.reward.lambda = num(r, "lambda", c.reward.lambda);
        if (c.reward.lambda < 0) throw ConfigError("reward.lambda must be >= 0");
        c.reward.classifier_lr = num(r, "classifier_lr", c.reward.classifier_lr);
        c.reward.classifier_batch =
            std::size_t(integer(r, "classifier_batch", int(c.reward.classifier_batch)));
        c.reward.label_smoothing = num(r, "label_smoothing", c.reward.label_smoothing);
        c.reward.log_floor = num(r, "log_floor", c.reward.log_floor);
    }
    if (j.contains("net")) {
        const json& n = j.at("net");
        reject_unknown(n, {"hidden", "set_enc", "set_head"}, "net.");
        c.net.hidden = sizes(n, "hidden", c.net.hidden);
        c.net.set_enc = sizes(n, "set_enc", c.net.set_enc);
        c.net.set_head = sizes(n, "set_head", c.net.set_head);
    }
    if (j.contains("bank")) {
        const json& b = j.at("bank");
        reject_unknown(b, {"positive_budget", "classifier_positive_obs"}, "bank.");
        c.bank.positive_budget = integer(b, "positive_budget", 0);
        c.bank.classifier_positive_obs =
            integer(b, "classifier_positive_obs", c.bank.classifier_positive_obs);
    }
    if (j.contains("eval")) {
        const json& e = j.at("eval");
        reject_unknown(e, {"episodes"}, "eval.");
        c.eval.episodes = integer(e, "episodes", c.eval.episodes);
        if (c.eval.episodes < 1) throw ConfigError("eval.episodes must be >= 1");
    }
    if (j.contains("env")) {
        if (!j.at("env").is_object()) throw ConfigError("env must be an object");
        for (auto it = j.at("env").begin(); it != j.at("env").end(); ++it) {
            if (!it.value().is_number()) throw ConfigError("env overrides must be numeric");
            c.env_overrides[it.key()] = it.value().get<double>();
        }
    }
    c.jobs = integer(j, "jobs", 0);
    c.finalize();
    return c;
}

void RunConfig::finalize() {
    const TaskBudgets tb = task_budgets(task);
    const TaskDefaults td = task_defaults(task);
    if (phases.phase1_steps == 0) phases.phase1_steps = tb.p1;
    if (phases.phase3_steps == 0) phases.phase3_steps = tb.p3;
    if (phases.phase4_steps == 0) phases.phase4_steps = tb.p4;
    if (bank.positive_budget == 0) bank.positive_budget = tb.positives;
    if (sac.history == 0) sac.history = td.task_history;
    if (irf_history == 0) irf_history = td.irf_history;
    // Validate env overrides eagerly so bad keys fail before any work.
    make_env(task, env_overrides);
}

json RunConfig::to_json() const {
    json j;
    j["schema_version"] = schema_version;
    j["task"] = task;
    j["seeds"] = seeds;
    j["out_dir"] = out_dir;
    j["phases"] = {{"phase1_steps", phases.phase1_steps},
                   {"phase2_rollouts", phases.phase2_rollouts},
                   {"phase3_steps", phases.phase3_steps},
                   {"phase4_steps", phases.phase4_steps},
                   {"classifier_refresh", phases.classifier_refresh},
                   {"classifier_updates", phases.classifier_updates},
                   {"eval_every", phases.eval_every}};
    j["sac"] = {{"gamma", sac.gamma},
                {"lr_actor", sac.lr_actor},
                {"lr_critic", sac.lr_critic},
                {"lr_alpha", sac.lr_alpha},
                {"tau", sac.tau},
                {"batch_size", sac.batch_size},
                {"entropy_target", sac.entropy_target},
                {"history", sac.history},
                {"grad_steps_per_env_step", sac.grad_steps_per_env_step},
                {"replay_capacity", sac.replay_capacity},
                {"warmup_steps", sac.warmup_steps},
                {"log_std_min", sac.log_std_min},
                {"log_std_max", sac.log_std_max}};
    j["irf_history"] = irf_history;
    j["reward"] = {{"lambda", reward.lambda},
                   {"classifier_lr", reward.classifier_lr},
                   {"classifier_batch", reward.classifier_batch},
                   {"label_smoothing", reward.label_smoothing},
                   {"log_floor", reward.log_floor}};
    j["net"] = {{"hidden", net.hidden}, {"set_enc", net.set_enc}, {"set_head", net.set_head}};
    j["bank"] = {{"positive_budget", bank.positive_budget},
                 {"classifier_positive_obs", bank.classifier_positive_obs}};
    j["eval"] = {{"episodes", eval.episodes}};
    json env = json::object();
    for (const auto& [k, v] : env_overrides) env[k] = v;
    j["env"] = env;
    j["jobs"] = jobs;
    return j;
}

std::uint64_t RunConfig::config_hash() const {
    // The hash covers the semantic configuration, not execution details.
    json j = to_json();
    j.erase("out_dir");
    j.erase("jobs");
    return hash_json_canonical(j);
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return from_json(j);
}

}  // namespace lirf
