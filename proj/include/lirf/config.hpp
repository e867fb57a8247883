#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lirf/envs/registry.hpp"
#include "lirf/rewards.hpp"
#include "lirf/sac.hpp"

namespace lirf {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PhaseBudgets {
    int phase1_steps = 0;      // filled from task defaults when 0
    int phase2_rollouts = 500;
    int phase3_steps = 0;
    int phase4_steps = 0;
    int classifier_refresh = 1000;  // env steps between classifier refreshes
    int classifier_updates = 50;    // gradient steps per refresh
    int eval_every = 0;             // env steps between training-time evals (0: off)
};

struct NetConfig {
    std::vector<std::size_t> hidden = {128, 128, 128};
    std::vector<std::size_t> set_enc = {128, 128};
    std::vector<std::size_t> set_head = {128, 128};
};

struct BankConfig {
    int positive_budget = 0;          // actionable positives; task default when 0
    int classifier_positive_obs = 64; // companion observation set for D
};

struct EvalConfig {
    int episodes = 100;
};

struct RunConfig {
    int schema_version = 1;
    std::string task = "door_lock";
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    std::string out_dir = "runs";
    PhaseBudgets phases;
    SacConfig sac;            // history filled from task defaults when 0
    int irf_history = 0;      // task default when 0
    RewardConfig reward;
    NetConfig net;
    BankConfig bank;
    EvalConfig eval;
    EnvOverrides env_overrides;
    int jobs = 0;  // 0: number of hardware threads; LIRF_DETERMINISTIC=1 forces 1

    std::uint64_t config_hash() const;  // canonical: key order never matters
    nlohmann::json to_json() const;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::string& path);
    // Fills zero-valued task-dependent fields with the task defaults.
    void finalize();
};

// FNV-1a over a canonically serialized JSON document.
std::uint64_t hash_json_canonical(const nlohmann::json& j);

bool deterministic_mode();

}  // namespace lirf
