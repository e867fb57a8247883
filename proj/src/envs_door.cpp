#include "lirf/envs/door.hpp"

#include <algorithm>
#include <cmath>

namespace lirf {

DoorEnvBase::DoorEnvBase(DoorParams params) : params_(params) {
    task_spec_.lo = {-params_.door_step, -params_.latch_step};
    task_spec_.hi = {params_.door_step, params_.latch_step};
    irf_spec_.lo = {0.0};
    irf_spec_.hi = {1.0};
}

const ActionSpec& DoorEnvBase::action_spec(Phase phase) const {
    return phase == Phase::task ? task_spec_ : irf_spec_;
}

void DoorEnvBase::sample_initial(Rng& rng) {
    theta_ = rng.uniform(params_.init_latch_lo, params_.init_latch_hi);
    door_ = rng.uniform(params_.init_door_lo, params_.init_door_hi);
    frame_ = rng.uniform(-params_.frame_range, params_.frame_range);
    engaged_ = false;
}

void DoorEnvBase::apply_task_action(const std::vector<double>& a) {
    const double d_door = a[0];
    const double d_latch = a[1];
    // Rotation uses the pre-step grip: grasp on one step, rotate from the next.
    if (engaged_ && closed()) theta_ += d_latch;
    double delta = d_door;
    if (closed() && locked()) delta = std::min(delta, 0.0);  // locked doors stay shut
    door_ = std::clamp(door_ + delta, 0.0, 1.0);
    engaged_ = closed() && (engaged_ || std::fabs(d_latch) >= params_.grab_threshold);
}

void DoorEnvBase::apply_irf_action(const std::vector<double>& a) {
    const double pull = a[0];
    if (pull > params_.pull_threshold && !(closed() && locked())) {
        door_ = std::clamp(
            door_ + params_.pull_gain * (pull - params_.pull_threshold) /
                        (1.0 - params_.pull_threshold),
            0.0, 1.0);
    }
    // The pull handle is fixed: the latch never moves in this phase.
}

Obs DoorEnvBase::observe() const {
    return {door_, frame_, alias90(theta_), engaged_ ? 1.0 : 0.0};
}

std::vector<double> DoorEnvBase::encode_fields() const {
    return {theta_, door_, frame_, engaged_ ? 1.0 : 0.0};
}

void DoorEnvBase::decode_fields(const std::vector<double>& fields) {
    if (fields.size() != 4) throw EnvError("door snapshot needs 4 fields");
    theta_ = fields[0];
    door_ = fields[1];
    frame_ = fields[2];
    engaged_ = fields[3] != 0.0;
}

Snapshot DoorEnvBase::make_state(const std::string& kind, double theta, double door,
                                 double frame, bool engaged) {
    Snapshot s;
    s.kind = kind;
    s.version = 1;
    s.fields = {theta, door, frame, engaged ? 1.0 : 0.0};
    return s;
}

const std::string& DoorLockEnv::kind() const {
    static const std::string k = "door_lock";
    return k;
}

const std::string& DoorCloseEnv::kind() const {
    static const std::string k = "door_close";
    return k;
}

}  // namespace lirf
