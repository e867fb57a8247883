#include "lirf/envs/screw.hpp"

#include <algorithm>

namespace lirf {

ScrewEnv::ScrewEnv(ScrewParams params) : params_(params) {
    spec_.lo = {-params_.torque_limit};
    spec_.hi = {params_.torque_limit};
}

const std::string& ScrewEnv::kind() const {
    static const std::string k = "screw";
    return k;
}

void ScrewEnv::sample_initial(Rng& rng) {
    phi_ = rng.uniform(params_.init_lo, params_.init_hi);
    tight_ = false;
}

void ScrewEnv::turn(double torque) {
    if (tight_) return;  // motor holds: the tight state cannot be undone
    phi_ += torque;
    const double lo = params_.engage_angle - params_.tolerance;
    const double hi = params_.engage_angle + params_.tolerance;
    if (phi_ >= lo) {
        phi_ = std::min(phi_, hi);  // the motor catches inside the band
        tight_ = true;
    }
}

std::vector<double> ScrewEnv::encode_fields() const {
    // motor_engaged mirrors the tight flag: engagement is what makes it tight.
    return {phi_, tight_ ? 1.0 : 0.0, tight_ ? 1.0 : 0.0};
}

void ScrewEnv::decode_fields(const std::vector<double>& fields) {
    if (fields.size() != 3) throw EnvError("screw snapshot needs 3 fields");
    phi_ = fields[0];
    tight_ = fields[1] != 0.0;
}

Snapshot ScrewEnv::make_state(double phi, bool tight) {
    Snapshot s;
    s.kind = "screw";
    s.version = 1;
    s.fields = {phi, tight ? 1.0 : 0.0, tight ? 1.0 : 0.0};
    return s;
}

}  // namespace lirf
