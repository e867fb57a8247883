#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "lirf/bank.hpp"
#include "lirf/classifier.hpp"
#include "lirf/env.hpp"

namespace lirf {

struct RewardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RewardConfig {
    double lambda = 1000.0;  // terminal verifier reward weight
    double classifier_lr = 3e-4;
    std::size_t classifier_batch = 64;
    double label_smoothing = 0.05;
    double log_floor = 1e-6;  // classification-reward logs are floored here
};

// Classification reward for verification episodes: per step,
// log D(o) when the episode started from a positive example and
// log(1 - D(o)) when it started from a negative one, scored on each
// post-action observation and floored for numerical safety.
std::vector<double> irf_reward(const SuccessClassifier& d, const Trajectory& traj,
                               ExampleLabel label, double log_floor = 1e-6);

// Task reward with the terminal verifier term: D(o_t) for intermediate
// steps; D(o_T) + lambda * D(o_star) at the final step. o_star must be
// present exactly when t == T.
double lirf_reward(const SuccessClassifier& d, const Obs& o_t, int t, int horizon,
                   const Obs* o_star, double lambda);

// Post-verification decision: strictly greater than one half; ties fail.
bool classify_outcome(const SuccessClassifier& d, const Obs& o_star);

}  // namespace lirf
