#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lirf/rng.hpp"

namespace lirf {

using Obs = std::vector<double>;

struct EnvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two views of the same simulator: the task decision process and the
// verification (IRF) decision process. They share state, transition kinematics
// and the observation function; only the action channel differs.
enum class Phase { task, irf };

struct ActionSpec {
    std::vector<double> lo;  // physical units, finite
    std::vector<double> hi;
    bool continuous = true;
    std::size_t dim() const { return lo.size(); }
};

// Full latent state, serialized as a versioned field vector. Booleans are
// stored as 0.0/1.0. Round-trips bit-exactly.
struct Snapshot {
    std::string kind;
    std::uint32_t version = 1;
    std::vector<double> fields;

    std::vector<std::uint8_t> serialize() const;
    static Snapshot deserialize(const std::vector<std::uint8_t>& bytes);
    std::string debug_text(const std::vector<std::string>& field_names = {}) const;

    bool operator==(const Snapshot&) const = default;
};

struct EpisodeConfig {
    int horizon = 1;  // >= 1
    Phase phase = Phase::task;
    std::uint64_t seed = 0;
    std::optional<Snapshot> restore_from;  // nullopt: sample initial state from mu
};

class Env {
public:
    virtual ~Env() = default;

    virtual const std::string& kind() const = 0;
    virtual std::size_t obs_dim() const = 0;
    virtual const ActionSpec& action_spec(Phase phase) const = 0;
    // Per-component divisors that bring observations to O(1) for the nets.
    virtual std::vector<double> obs_scale() const = 0;
    virtual std::vector<std::string> field_names() const { return {}; }

    Obs reset(const EpisodeConfig& cfg);
    // Physical-unit action; out-of-range components are clamped to the spec.
    std::pair<Obs, bool> step(const std::vector<double>& action);

    Snapshot snapshot_state() const;
    // Latent state := snapshot; resets the step counter, keeps phase/horizon.
    Obs restore_state(const Snapshot& snap);

    // Evaluation-only oracle over latent state. Audited: every call counts.
    // Nothing in the learner or reward path may call this; the GT-reward
    // baseline and the evaluation harness are the only sanctioned callers.
    bool ground_truth_success() const;
    std::uint64_t gt_query_count() const { return gt_queries_; }
    void reset_gt_query_count() { gt_queries_ = 0; }

    // Switch the live world between views without touching physical state.
    // Entering the IRF view re-zeroes agent-epistemic latents (the verifier
    // is a different effector that has not interacted yet) and resets the
    // step counter.
    void begin_irf_phase(int horizon);
    void begin_task_phase(int horizon);

    Phase phase() const { return phase_; }
    int steps_taken() const { return steps_; }
    int horizon() const { return horizon_; }
    bool done() const { return done_; }
    Obs observe_now() const { return observe(); }

protected:
    virtual void sample_initial(Rng& rng) = 0;
    virtual void apply_task_action(const std::vector<double>& a) = 0;
    virtual void apply_irf_action(const std::vector<double>& a) = 0;
    virtual bool absorbing() const { return false; }
    virtual bool oracle() const = 0;
    virtual Obs observe() const = 0;
    virtual std::vector<double> encode_fields() const = 0;
    virtual void decode_fields(const std::vector<double>& fields) = 0;
    virtual std::uint32_t schema_version() const { return 1; }
    // Clear knowledge-state latents on phase hand-off (default: nothing).
    virtual void scrub_epistemic() {}

private:
    Phase phase_ = Phase::task;
    int horizon_ = 1;
    int steps_ = 0;
    bool done_ = false;
    bool episode_active_ = false;
    mutable std::uint64_t gt_queries_ = 0;
};

// One environment step of a trajectory: the observation the agent acted
// from, the physical action, the external reward slot (scored on the
// resulting observation when a scorer is supplied) and the done flag.
struct TrajStep {
    Obs obs;
    std::vector<double> action;
    double reward = 0.0;
    bool done = false;
};

struct Trajectory {
    std::vector<TrajStep> steps;
    Obs terminal_obs;          // o_T
    std::optional<Obs> o_star; // post-IRF observation, when a verifier ran
    double reward_sum() const {
        double s = 0.0;
        for (const auto& t : steps) s += t.reward;
        return s;
    }
};

// Anything that maps a feature window to a canonical action in [-1,1]^dim.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::size_t action_dim() const = 0;
    virtual int history_len() const = 0;
    virtual std::vector<double> act(const std::vector<double>& window,
                                    bool stochastic, Rng& rng) = 0;
    virtual void begin_episode() {}
};

// Feature window over the last H (observation, previous-action) pairs.
// Observations are divided by the env scale; missing leading slots are
// filled with the pad value, chosen far outside every feature range.
class HistoryWindow {
public:
    static constexpr double kPad = -10.0;

    HistoryWindow(std::size_t obs_dim, std::size_t act_dim, int len,
                  std::vector<double> obs_scale);
    void reset();
    void push_obs(const Obs& o);
    void push_action(const std::vector<double>& a_canonical);
    std::vector<double> features() const;
    std::size_t feature_dim() const { return std::size_t(len_) * slot_dim(); }
    int len() const { return len_; }

private:
    std::size_t slot_dim() const { return obs_dim_ + act_dim_; }
    std::size_t obs_dim_, act_dim_;
    int len_;
    std::vector<double> scale_;
    std::vector<std::vector<double>> obs_hist_;
    std::vector<std::vector<double>> act_hist_;  // action preceding obs_hist_[i]
};

// Map canonical [-1,1] actions to the physical action box and back.
std::vector<double> to_physical(const ActionSpec& spec, const std::vector<double>& canonical);

using RewardFn = std::function<double(const Obs&)>;

// Rollout driver for training and evaluation. The policy acts on feature
// windows; `reward_fn`, when supplied, scores each post-action observation
// into the trajectory's reward slots.
Trajectory rollout(Policy& policy, Env& env, const EpisodeConfig& cfg,
                   const RewardFn& reward_fn, bool stochastic, Rng& rng);

}  // namespace lirf
