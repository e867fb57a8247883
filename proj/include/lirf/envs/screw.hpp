#pragma once

#include "lirf/angles.hpp"
#include "lirf/env.hpp"

namespace lirf {

// Valve with a locking motor. Torque turns the valve freely until the
// cumulative clockwise rotation reaches the engagement band, at which point
// the motor locks it in place for good: after that no torque moves it. The
// observation is the 90-degree symmetry representative of the valve angle, so
// a tight valve and one short by 90 degrees look identical.
struct ScrewParams {
    double torque_limit = 30.0;  // per-step torque bound, degrees
    double engage_angle = 180.0; // nominal tightened rotation
    double tolerance = 10.0;     // engagement band: [engage - tol, engage + tol]
    double breakaway = 15.0;     // holding torque margin of the engaged motor
    double init_lo = 25.0, init_hi = 35.0;
};

class ScrewEnv final : public Env {
public:
    explicit ScrewEnv(ScrewParams params = {});

    const std::string& kind() const override;
    std::size_t obs_dim() const override { return 1; }
    const ActionSpec& action_spec(Phase) const override { return spec_; }
    std::vector<double> obs_scale() const override { return {90.0}; }
    std::vector<std::string> field_names() const override {
        return {"phi", "tight", "motor_engaged"};
    }

    double valve_angle() const { return phi_; }
    bool tight() const { return tight_; }
    const ScrewParams& params() const { return params_; }

    static Snapshot make_state(double phi, bool tight);

protected:
    void sample_initial(Rng& rng) override;
    void apply_task_action(const std::vector<double>& a) override { turn(a[0]); }
    void apply_irf_action(const std::vector<double>& a) override { turn(a[0]); }
    bool absorbing() const override { return phase() == Phase::task && tight_; }
    bool oracle() const override { return tight_; }
    Obs observe() const override { return {alias90(phi_)}; }
    std::vector<double> encode_fields() const override;
    void decode_fields(const std::vector<double>& fields) override;

private:
    void turn(double torque);

    ScrewParams params_;
    ActionSpec spec_;
    double phi_ = 0.0;
    bool tight_ = false;
};

}  // namespace lirf
