#pragma once

#include "lirf/angles.hpp"
#include "lirf/env.hpp"

namespace lirf {

// Shared door simulator. Task view: 2-D action (door delta, latch delta);
// the latch rotates only while the door is closed and the gripper is engaged,
// and engaging takes one step (grasp, then rotate). A locked door cannot be
// pulled open. IRF view: 1-D pull force on a separate fixed handle; pulling
// never moves the latch, but an unlocked door visibly swings open.
//
// The latch angle is unbounded (over-rotation is possible); observation
// reports the 90-degree symmetry representative.
struct DoorParams {
    double door_step = 0.2;        // max |door delta| per step
    double latch_step = 20.0;      // max |latch delta| per step, degrees
    double closed_threshold = 0.05;
    double grab_threshold = 5.0;   // |latch delta| that engages the gripper
    double lock_half_width = 40.0; // locked iff wrap180(theta) in (-40, 40)
    double pull_threshold = 0.5;
    double pull_gain = 0.6;        // door opening per unit pull above threshold
    double frame_range = 0.2;      // frame offset ~ U(-range, range)
    double init_door_lo = 0.8, init_door_hi = 1.0;
    double init_latch_lo = 90.0, init_latch_hi = 180.0;
};

class DoorEnvBase : public Env {
public:
    explicit DoorEnvBase(DoorParams params = {});

    std::size_t obs_dim() const override { return 4; }
    const ActionSpec& action_spec(Phase phase) const override;
    std::vector<double> obs_scale() const override { return {1.0, params_.frame_range, 90.0, 1.0}; }
    std::vector<std::string> field_names() const override {
        return {"theta", "door", "frame", "engaged"};
    }

    bool locked() const {
        const double w = wrap180(theta_);
        return w > -params_.lock_half_width && w < params_.lock_half_width;
    }
    bool closed() const { return door_ <= params_.closed_threshold; }

    double latch_angle() const { return theta_; }
    double door_pos() const { return door_; }
    bool engaged() const { return engaged_; }
    const DoorParams& params() const { return params_; }

    // Direct latent construction for tests, example generators and oracles.
    static Snapshot make_state(const std::string& kind, double theta, double door,
                               double frame, bool engaged);

protected:
    void sample_initial(Rng& rng) override;
    void apply_task_action(const std::vector<double>& a) override;
    void apply_irf_action(const std::vector<double>& a) override;
    Obs observe() const override;
    std::vector<double> encode_fields() const override;
    void decode_fields(const std::vector<double>& fields) override;
    void scrub_epistemic() override { engaged_ = false; }

    DoorParams params_;
    ActionSpec task_spec_, irf_spec_;
    double theta_ = 0.0;   // latch angle, degrees, unbounded
    double door_ = 1.0;    // 0 closed .. 1 fully open
    double frame_ = 0.0;   // episode-static nuisance offset
    bool engaged_ = false;
};

// Success: door closed and latch firmly locked.
class DoorLockEnv final : public DoorEnvBase {
public:
    using DoorEnvBase::DoorEnvBase;
    const std::string& kind() const override;

protected:
    bool oracle() const override { return closed() && locked(); }
};

// Fully observed control task: success is just a closed door; the latch is
// irrelevant, so single-observation rewards suffice.
class DoorCloseEnv final : public DoorEnvBase {
public:
    using DoorEnvBase::DoorEnvBase;
    const std::string& kind() const override;

protected:
    bool oracle() const override { return closed(); }
};

}  // namespace lirf
