#include "lirf/rewards.hpp"

#include <algorithm>
#include <cmath>

namespace lirf {

std::vector<double> irf_reward(const SuccessClassifier& d, const Trajectory& traj,
                               ExampleLabel label, double log_floor) {
    if (traj.steps.empty()) throw RewardError("classification reward needs a nonempty trajectory");
    std::vector<double> r(traj.steps.size());
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        const Obs& o =
            t + 1 < traj.steps.size() ? traj.steps[t + 1].obs : traj.terminal_obs;
        const double p = d.score(o);
        const double v = label == ExampleLabel::positive ? p : 1.0 - p;
        r[t] = std::log(std::max(v, log_floor));
    }
    return r;
}

double lirf_reward(const SuccessClassifier& d, const Obs& o_t, int t, int horizon,
                   const Obs* o_star, double lambda) {
    if (t < horizon) {
        if (o_star) throw RewardError("post-verifier observation supplied before the final step");
        return d.score(o_t);
    }
    if (t != horizon) throw RewardError("step index past the horizon");
    if (!o_star) throw RewardError("final step needs the post-verifier observation");
    return d.score(o_t) + lambda * d.score(*o_star);
}

bool classify_outcome(const SuccessClassifier& d, const Obs& o_star) {
    return d.score(o_star) > 0.5;
}

}  // namespace lirf
