#include "lirf/envs/registry.hpp"

#include <stdexcept>

#include "lirf/envs/blocks.hpp"
#include "lirf/envs/door.hpp"
#include "lirf/envs/screw.hpp"

namespace lirf {

namespace {

double take(EnvOverrides& o, const std::string& key, double fallback) {
    auto it = o.find(key);
    if (it == o.end()) return fallback;
    const double v = it->second;
    o.erase(it);
    return v;
}

DoorParams door_params(EnvOverrides& o) {
    DoorParams p;
    p.door_step = take(o, "door_step", p.door_step);
    p.latch_step = take(o, "latch_step", p.latch_step);
    p.closed_threshold = take(o, "closed_threshold", p.closed_threshold);
    p.grab_threshold = take(o, "grab_threshold", p.grab_threshold);
    p.lock_half_width = take(o, "lock_half_width", p.lock_half_width);
    p.pull_threshold = take(o, "pull_threshold", p.pull_threshold);
    p.pull_gain = take(o, "pull_gain", p.pull_gain);
    p.frame_range = take(o, "frame_range", p.frame_range);
    return p;
}

ScrewParams screw_params(EnvOverrides& o) {
    ScrewParams p;
    p.torque_limit = take(o, "torque_limit", p.torque_limit);
    p.engage_angle = take(o, "engage_angle", p.engage_angle);
    p.tolerance = take(o, "tolerance", p.tolerance);
    p.breakaway = take(o, "breakaway", p.breakaway);
    p.init_lo = take(o, "init_lo", p.init_lo);
    p.init_hi = take(o, "init_hi", p.init_hi);
    return p;
}

BlockParams block_params(EnvOverrides& o) {
    BlockParams p;
    p.capture_radius = take(o, "capture_radius", p.capture_radius);
    p.stack_snap = take(o, "stack_snap", p.stack_snap);
    p.threshold_high = take(o, "threshold_high", p.threshold_high);
    p.threshold_low = take(o, "threshold_low", p.threshold_low);
    p.align_scale = take(o, "align_scale", p.align_scale);
    p.align_floor = take(o, "align_floor", p.align_floor);
    p.poke_max = take(o, "poke_max", p.poke_max);
    return p;
}

}  // namespace

bool is_known_env_kind(const std::string& kind) {
    return kind == "door_lock" || kind == "door_close" || kind == "screw" ||
           kind == "block_stack";
}

std::unique_ptr<Env> make_env(const std::string& kind, const EnvOverrides& overrides) {
    EnvOverrides o = overrides;
    std::unique_ptr<Env> env;
    if (kind == "door_lock")
        env = std::make_unique<DoorLockEnv>(door_params(o));
    else if (kind == "door_close")
        env = std::make_unique<DoorCloseEnv>(door_params(o));
    else if (kind == "screw")
        env = std::make_unique<ScrewEnv>(screw_params(o));
    else if (kind == "block_stack")
        env = std::make_unique<BlockStackEnv>(block_params(o));
    else
        throw EnvError("unknown environment kind: " + kind);
    if (!o.empty()) throw EnvError("unknown env override: " + o.begin()->first);
    return env;
}

TaskDefaults task_defaults(const std::string& kind) {
    if (kind == "door_lock") return {16, 5, 16, 5};
    if (kind == "door_close") return {16, 5, 4, 5};
    if (kind == "screw") return {8, 3, 8, 3};
    if (kind == "block_stack") return {6, 3, 6, 3};
    throw EnvError("unknown environment kind: " + kind);
}

}  // namespace lirf
