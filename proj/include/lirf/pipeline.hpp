#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lirf/bank.hpp"
#include "lirf/classifier.hpp"
#include "lirf/config.hpp"
#include "lirf/envs/registry.hpp"
#include "lirf/metrics.hpp"
#include "lirf/rewards.hpp"
#include "lirf/sac.hpp"

namespace lirf {

// ---------------------------------------------------------------------------
// Scripted policies and verifiers
// ---------------------------------------------------------------------------

class UniformRandomPolicy final : public Policy {
public:
    UniformRandomPolicy(std::size_t dim, int history) : dim_(dim), history_(history) {}
    std::size_t action_dim() const override { return dim_; }
    int history_len() const override { return history_; }
    std::vector<double> act(const std::vector<double>&, bool, Rng& rng) override {
        std::vector<double> a(dim_);
        for (auto& x : a) x = rng.uniform(-1.0, 1.0);
        return a;
    }

private:
    std::size_t dim_;
    int history_;
};

// Hand-coded unscrewing probe: a constant gentle counterclockwise torque.
class ManualScrewIrf final : public Policy {
public:
    explicit ManualScrewIrf(double torque_physical = -10.0, double torque_limit = 30.0)
        : canonical_(torque_physical / torque_limit) {}
    std::size_t action_dim() const override { return 1; }
    int history_len() const override { return 1; }
    std::vector<double> act(const std::vector<double>&, bool, Rng&) override {
        return {canonical_};
    }

private:
    double canonical_;
};

// Hand-coded block probe: one poke of fixed magnitude at a random height and
// direction, then idle.
class ManualBlockIrf final : public Policy {
public:
    explicit ManualBlockIrf(double magnitude_cm, double poke_max = 5.0)
        : magnitude_(magnitude_cm), poke_max_(poke_max) {}
    std::size_t action_dim() const override { return 3; }
    int history_len() const override { return 1; }
    void begin_episode() override { poked_ = false; }
    std::vector<double> act(const std::vector<double>&, bool, Rng& rng) override {
        if (poked_) return {0.0, 0.0, -1.0};  // magnitude 0
        poked_ = true;
        return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                2.0 * magnitude_ / poke_max_ - 1.0};
    }
    double magnitude() const { return magnitude_; }

private:
    double magnitude_;
    double poke_max_;
    bool poked_ = false;
};

// Door-lock task script with a fixed per-attempt success probability: closes
// the door, grabs, then rotates the latch to the lock zone (coin = heads) or
// to its 90-degree alias (tails). Failures leave the world reusable, so
// attempts are independent Bernoulli trials. Test construct for the
// geometric-retry oracle.
class ScriptedCoinLockPolicy final : public Policy {
public:
    explicit ScriptedCoinLockPolicy(double p_success) : p_(p_success) {}
    std::size_t action_dim() const override { return 2; }
    int history_len() const override { return 1; }
    void begin_episode() override { coin_drawn_ = false; }
    void reset_world_model() { have_theta_ = false; }
    std::vector<double> act(const std::vector<double>& window, bool, Rng& rng) override;

private:
    double p_;
    bool coin_drawn_ = false;
    bool target_lock_ = false;
    bool have_theta_ = false;
    double theta_est_ = 0.0;
};

struct VerifyDecision {
    double score = 0.0;  // D(o*) for learned verifiers, 0/1 for oracle ones
    bool accept = false;
    Obs o_star;
    Trajectory irf_traj;
};

// Runs from the current world state and judges it; the world is left in its
// post-verification state ("keep the world state").
class Verifier {
public:
    virtual ~Verifier() = default;
    virtual VerifyDecision verify(Env& env, Rng& rng) = 0;
};

class LearnedVerifier final : public Verifier {
public:
    LearnedVerifier(Policy& pi_r, const SuccessClassifier& d, int irf_horizon)
        : pi_r_(pi_r), d_(d), irf_horizon_(irf_horizon) {}
    VerifyDecision verify(Env& env, Rng& rng) override;

private:
    Policy& pi_r_;
    const SuccessClassifier& d_;
    int irf_horizon_;
};

// Ground-truth verifier (evaluation-only construct; used by the retry study
// and the geometric-retry oracle).
class OracleVerifier final : public Verifier {
public:
    VerifyDecision verify(Env& env, Rng&) override;
};

// Never accepts: models blind retries without any success checking.
class BlindVerifier final : public Verifier {
public:
    VerifyDecision verify(Env& env, Rng&) override;
};

// ---------------------------------------------------------------------------
// Rollout helpers and evaluation
// ---------------------------------------------------------------------------

// Rolls the policy from the env's current state until done, using the env's
// current phase and horizon (set via begin_*_phase). No reset.
Trajectory run_policy_inplace(Policy& policy, Env& env, bool stochastic, Rng& rng,
                              const RewardFn& reward_fn = nullptr);

double evaluate_success_rate(Policy& policy, Env& env, int task_horizon, int episodes,
                             std::uint64_t eval_seed);

struct IrfAccuracy {
    double accuracy = 0.0;
    double positive_correct = 0.0;
    double negative_correct = 0.0;
    std::size_t n = 0, n_pos = 0, n_neg = 0;
};

// Restores each held-out example, runs the verifier policy, classifies the
// final observation with D and compares against the oracle label of the
// restored state.
IrfAccuracy evaluate_irf_accuracy(Policy& pi_r, const SuccessClassifier& d,
                                  const std::vector<Snapshot>& test_set, Env& env,
                                  int irf_horizon, std::uint64_t seed);

struct VerifyAttempt {
    int index = 0;
    Trajectory task_traj;
    Trajectory irf_traj;
    double d_star = 0.0;
    bool accepted = false;
    bool gt_after = false;  // evaluation bookkeeping for the iteration curve
};

struct VerifyTrace {
    std::vector<VerifyAttempt> attempts;
    int iterations = 0;
    bool final_gt = false;
    bool accepted = false;
};

// Perform-verify execution: run the task policy for one horizon, verify, and
// either stop (accept or iteration cap) or continue from the kept world
// state. The policy window restarts each attempt.
VerifyTrace verify_execute(Policy& pi_t, Verifier& verifier, Env& env, int task_horizon,
                           const EpisodeConfig& initial, int max_iter = 10);

// Spec-shaped convenience overload with the learned verifier.
VerifyTrace verify_execute(Policy& pi_t, Policy& pi_r, const SuccessClassifier& d,
                           Env& env, int task_horizon, int irf_horizon,
                           const EpisodeConfig& initial, int max_iter = 10);

// ---------------------------------------------------------------------------
// Example generation
// ---------------------------------------------------------------------------

// Human-provided actionable successes plus the companion observation set for
// classifier training. Positives are validated by the curator oracle.
void populate_positive_bank(ExampleBank& bank, const std::string& task, Env& curator,
                            int actionable_budget, int classifier_obs, std::uint64_t seed);

std::vector<Snapshot> generate_positive_states(const std::string& task, Env& curator,
                                               int n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// One (task, seed) pipeline run
// ---------------------------------------------------------------------------

class PipelineRun {
public:
    PipelineRun(RunConfig cfg, std::uint64_t seed, bool write_artifacts = true);
    ~PipelineRun();

    void run_all();  // phases 1..4 in order

    void build_bank();
    void phase1_bootstrap();
    void phase2_collect_negatives();
    void phase3_train_irf();
    void phase4_train_lirf();

    // Extra phase-4 trainings against the same phase-1..3 artifacts: the
    // lambda ablation and the manual-IRF baseline reuse these.
    std::unique_ptr<SacAgent> train_phase4_variant(double lambda, Policy* irf_policy,
                                                   const std::string& tag);

    // Extra verification-policy trainings against the same phase-1..2
    // artifacts (the positive-budget efficiency study reuses these).
    std::unique_ptr<SacAgent> train_irf_variant(ExampleBank& bank, const std::string& tag);

    // Sparse ground-truth reward baseline over the same observation space.
    // The oracle is sanctioned here; its query count is reported.
    std::unique_ptr<SacAgent> train_gt_baseline(int steps);

    // Evaluation sweeps on held-out seeds.
    double eval_success(Policy& policy, const std::string& metric, int phase);
    IrfAccuracy eval_irf(Policy& pi_r, const std::string& metric, int phase);
    VerifyTrace run_verify(std::uint64_t episode_seed, int max_iter = 10);

    SuccessClassifier& classifier() { return *classifier_; }
    SacAgent& pi0() { return *pi0_; }
    SacAgent& pi_r() { return *pi_r_; }
    SacAgent& pi_t() { return *pi_t_; }
    ExampleBank& bank() { return bank_; }
    const std::vector<Snapshot>& heldout_test_set() const { return test_set_; }
    Env& eval_env() { return *eval_env_; }
    const RunConfig& config() const { return cfg_; }
    std::uint64_t seed() const { return seed_; }
    const std::string& run_dir() const { return run_dir_; }
    MetricsWriter& metrics() { return metrics_; }
    int task_horizon() const { return task_horizon_; }
    int irf_horizon() const { return irf_horizon_; }

    // Oracle audit: queries charged to the training env during phases 1/3/4.
    std::uint64_t training_gt_queries() const { return training_gt_queries_; }
    // Curation-channel queries (bank validation + destruction checks).
    std::uint64_t curation_gt_queries() const { return curator_env_->gt_query_count(); }

    // Phase artifacts on disk, with provenance hashes chained phase to phase.
    std::string phase_dir(int phase) const;

    std::unique_ptr<SacAgent> make_task_agent(std::uint64_t init_seed) const;
    std::unique_ptr<SacAgent> make_irf_agent(std::uint64_t init_seed) const;
    std::unique_ptr<SuccessClassifier> make_classifier(std::uint64_t init_seed) const;

private:
    friend struct PipelineProbe;
    struct TaskTrainSpec {
        SacAgent* agent;
        int steps;
        int phase;
        RewardProvider provider;                       // null: stored rewards
        std::function<double(bool done)> stored_reward;  // used when provider null
        Policy* embedded_irf = nullptr;
        bool refresh_classifier = false;
        std::string success_metric;
    };
    void train_task_policy(const TaskTrainSpec& spec);
    void train_irf_on_bank(ExampleBank& bank, SacAgent& agent, const std::string& tag,
                           bool record_metrics);
    void refresh_classifier_now(int64_t step, int phase);
    void write_phase_manifest(int phase, const nlohmann::json& extra);
    void require_phase(int phase) const;
    Obs run_embedded_irf(Policy& irf);

    RunConfig cfg_;
    std::uint64_t seed_;
    bool write_artifacts_;
    std::string run_dir_;
    MetricsWriter metrics_;
    std::unique_ptr<Env> train_env_, eval_env_, curator_env_;
    int task_horizon_, irf_horizon_;
    ExampleBank bank_;
    std::vector<Snapshot> test_set_;  // held-out examples for IRF accuracy
    std::unique_ptr<SuccessClassifier> classifier_;
    std::unique_ptr<SacAgent> pi0_, pi_r_, pi_t_;
    std::vector<Obs> negative_obs_pool_;
    std::size_t negative_obs_next_ = 0;
    int phase_done_ = 0;
    std::uint64_t training_gt_queries_ = 0;
    std::int64_t global_step_ = 0;
};

// Manual verification policies (no manual IRF exists for door locking: the
// action space is too rich to hand-code). The block magnitude comes from a
// grid search over poke magnitudes with random heights and directions.
std::unique_ptr<Policy> manual_irf(const std::string& task);

struct GridSearchResult {
    double best_magnitude = 0.0;
    std::vector<std::pair<double, double>> accuracy_by_magnitude;
};

GridSearchResult manual_block_grid_search(const SuccessClassifier& d, Env& env,
                                          const std::vector<Snapshot>& calibration,
                                          int irf_horizon, std::uint64_t seed);

// GT-reward retry evaluation: k attempts with a verifier deciding when to
// stop (BlindVerifier reproduces retries without success checking).
double evaluate_with_retries(Policy& policy, Verifier& verifier, Env& env,
                             int task_horizon, int attempts, int episodes,
                             std::uint64_t eval_seed);

// Checkpointed artifacts of a finished run. Missing files raise an error
// naming the expected path.
struct LoadedArtifacts {
    std::unique_ptr<SuccessClassifier> classifier;
    std::unique_ptr<SacAgent> pi0, pi_r, pi_t;
    std::vector<Snapshot> test_set;
};

LoadedArtifacts load_run_artifacts(const RunConfig& cfg, const std::string& run_dir);

}  // namespace lirf
