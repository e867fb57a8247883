#pragma once

#include <map>
#include <memory>
#include <string>

#include "lirf/env.hpp"

namespace lirf {

using EnvOverrides = std::map<std::string, double>;

// Stable environment kind identifiers, used in configs and snapshot headers:
// door_lock, block_stack, screw, door_close.
bool is_known_env_kind(const std::string& kind);
std::unique_ptr<Env> make_env(const std::string& kind, const EnvOverrides& overrides = {});

// Task-level defaults that are not paper constants: horizons per phase and
// policy history lengths, chosen for desk-scale training.
struct TaskDefaults {
    int task_horizon;
    int irf_horizon;
    int task_history;
    int irf_history;
};
TaskDefaults task_defaults(const std::string& kind);

}  // namespace lirf
