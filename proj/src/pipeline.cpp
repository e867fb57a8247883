#include "lirf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "lirf/envs/blocks.hpp"
#include "lirf/envs/door.hpp"
#include "lirf/envs/screw.hpp"

namespace lirf {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Scripted policies
// ---------------------------------------------------------------------------

std::vector<double> ScriptedCoinLockPolicy::act(const std::vector<double>& window,
                                                bool, Rng& rng) {
    // Window layout (H=1): [door, frame, alias/90, engaged, prev_a0, prev_a1].
    const double door = window[0];
    const double alias = window[2] * 90.0;
    const bool engaged = window[3] > 0.5;
    if (!coin_drawn_) {
        coin_drawn_ = true;
        target_lock_ = rng.bernoulli(p_);
        if (door > 0.5) have_theta_ = false;  // fresh episode: door starts open
    }
    if (!have_theta_) {
        // Initial latch angles sit in (90, 180), so the first sighting pins
        // the absolute angle: theta = alias + 90.
        theta_est_ = alias + 90.0;
        have_theta_ = true;
    }
    if (door > 0.05) return {-1.0, 0.0};  // shut the door first
    if (!engaged) return {0.0, 0.3};      // grasp: 6 degrees, below nothing rotates
    const double target = target_lock_ ? 20.0 : 110.0;
    const double delta = std::clamp(target - theta_est_, -20.0, 20.0);
    theta_est_ += delta;
    return {0.0, delta / 20.0};
}

VerifyDecision LearnedVerifier::verify(Env& env, Rng& rng) {
    VerifyDecision v;
    env.begin_irf_phase(irf_horizon_);
    v.irf_traj = run_policy_inplace(pi_r_, env, /*stochastic=*/false, rng);
    v.o_star = v.irf_traj.terminal_obs;
    v.score = d_.score(v.o_star);
    v.accept = classify_outcome(d_, v.o_star);
    return v;
}

VerifyDecision OracleVerifier::verify(Env& env, Rng&) {
    VerifyDecision v;
    v.o_star = env.observe_now();
    v.score = env.ground_truth_success() ? 1.0 : 0.0;
    v.accept = v.score > 0.5;
    return v;
}

VerifyDecision BlindVerifier::verify(Env& env, Rng&) {
    VerifyDecision v;
    v.o_star = env.observe_now();
    v.score = 0.0;
    v.accept = false;
    return v;
}

// ---------------------------------------------------------------------------
// Rollout helpers and evaluation
// ---------------------------------------------------------------------------

Trajectory run_policy_inplace(Policy& policy, Env& env, bool stochastic, Rng& rng,
                              const RewardFn& reward_fn) {
    const ActionSpec& spec = env.action_spec(env.phase());
    if (policy.action_dim() != spec.dim())
        throw EnvError("policy action dimension does not match env action spec");
    HistoryWindow window(env.obs_dim(), spec.dim(), policy.history_len(), env.obs_scale());
    Trajectory traj;
    Obs o = env.observe_now();
    window.push_obs(o);
    policy.begin_episode();
    bool done = false;
    while (!done) {
        const auto canonical = policy.act(window.features(), stochastic, rng);
        const auto physical = to_physical(spec, canonical);
        auto [next, d] = env.step(physical);
        TrajStep st;
        st.obs = o;
        st.action = physical;
        st.reward = reward_fn ? reward_fn(next) : 0.0;
        st.done = d;
        traj.steps.push_back(std::move(st));
        window.push_action(canonical);
        window.push_obs(next);
        o = std::move(next);
        done = d;
    }
    traj.terminal_obs = o;
    return traj;
}

double evaluate_success_rate(Policy& policy, Env& env, int task_horizon, int episodes,
                             std::uint64_t eval_seed) {
    if (episodes < 1) throw EnvError("evaluation needs at least one episode");
    Rng rng(derive_seed(eval_seed, "eval.rng"));
    int wins = 0;
    for (int i = 0; i < episodes; ++i) {
        EpisodeConfig ec;
        ec.horizon = task_horizon;
        ec.phase = Phase::task;
        ec.seed = derive_seed(eval_seed, "eval.episode", std::uint64_t(i));
        rollout(policy, env, ec, nullptr, /*stochastic=*/false, rng);
        wins += env.ground_truth_success() ? 1 : 0;
    }
    return double(wins) / double(episodes);
}

IrfAccuracy evaluate_irf_accuracy(Policy& pi_r, const SuccessClassifier& d,
                                  const std::vector<Snapshot>& test_set, Env& env,
                                  int irf_horizon, std::uint64_t seed) {
    IrfAccuracy acc;
    Rng rng(derive_seed(seed, "irf.accuracy"));
    std::size_t pos_ok = 0, neg_ok = 0;
    for (const Snapshot& snap : test_set) {
        env.restore_state(snap);
        const bool truth = env.ground_truth_success();
        env.begin_irf_phase(irf_horizon);
        const Trajectory traj = run_policy_inplace(pi_r, env, /*stochastic=*/false, rng);
        const bool pred = classify_outcome(d, traj.terminal_obs);
        acc.n++;
        if (truth) {
            acc.n_pos++;
            pos_ok += pred == truth;
        } else {
            acc.n_neg++;
            neg_ok += pred == truth;
        }
    }
    if (acc.n == 0) throw EnvError("empty verification test set");
    acc.positive_correct = acc.n_pos ? double(pos_ok) / double(acc.n_pos) : 0.0;
    acc.negative_correct = acc.n_neg ? double(neg_ok) / double(acc.n_neg) : 0.0;
    acc.accuracy = double(pos_ok + neg_ok) / double(acc.n);
    return acc;
}

VerifyTrace verify_execute(Policy& pi_t, Verifier& verifier, Env& env, int task_horizon,
                           const EpisodeConfig& initial, int max_iter) {
    if (max_iter < 1) throw EnvError("verify needs at least one iteration");
    VerifyTrace trace;
    env.reset(initial);
    Rng rng(derive_seed(initial.seed, "verify.rng"));
    for (int i = 1; i <= max_iter; ++i) {
        env.begin_task_phase(task_horizon);
        VerifyAttempt at;
        at.index = i;
        at.task_traj = run_policy_inplace(pi_t, env, /*stochastic=*/false, rng);
        VerifyDecision dec = verifier.verify(env, rng);
        at.irf_traj = std::move(dec.irf_traj);
        at.d_star = dec.score;
        at.accepted = dec.accept;
        at.gt_after = env.ground_truth_success();
        trace.attempts.push_back(std::move(at));
        trace.iterations = i;
        if (dec.accept) {
            trace.accepted = true;
            break;
        }
    }
    trace.final_gt = env.ground_truth_success();
    return trace;
}

VerifyTrace verify_execute(Policy& pi_t, Policy& pi_r, const SuccessClassifier& d,
                           Env& env, int task_horizon, int irf_horizon,
                           const EpisodeConfig& initial, int max_iter) {
    LearnedVerifier v(pi_r, d, irf_horizon);
    return verify_execute(pi_t, v, env, task_horizon, initial, max_iter);
}

double evaluate_with_retries(Policy& policy, Verifier& verifier, Env& env,
                             int task_horizon, int attempts, int episodes,
                             std::uint64_t eval_seed) {
    int wins = 0;
    for (int i = 0; i < episodes; ++i) {
        EpisodeConfig ec;
        ec.horizon = task_horizon;
        ec.phase = Phase::task;
        ec.seed = derive_seed(eval_seed, "retry.episode", std::uint64_t(i));
        const VerifyTrace t = verify_execute(policy, verifier, env, task_horizon, ec, attempts);
        wins += t.final_gt ? 1 : 0;
    }
    return double(wins) / double(episodes);
}

// ---------------------------------------------------------------------------
// Example generation
// ---------------------------------------------------------------------------

std::vector<Snapshot> generate_positive_states(const std::string& task, Env& curator,
                                               int n, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "positives." + task));
    std::vector<Snapshot> out;
    out.reserve(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        if (task == "door_lock") {
            out.push_back(DoorEnvBase::make_state(task, rng.uniform(-38.0, 38.0), 0.0,
                                                  rng.uniform(-0.2, 0.2), false));
        } else if (task == "door_close") {
            out.push_back(DoorEnvBase::make_state(task, rng.uniform(90.0, 180.0), 0.0,
                                                  rng.uniform(-0.2, 0.2), false));
        } else if (task == "screw") {
            out.push_back(ScrewEnv::make_state(rng.uniform(171.0, 189.0), true));
        } else if (task == "block_stack") {
            const double bx = rng.uniform(0.15, 0.85);
            const double by = rng.uniform(0.15, 0.85);
            const int heavy = int(rng.uniform_index(3));
            int rest[2], ri = 0;
            for (int b = 0; b < 3; ++b)
                if (b != heavy) rest[ri++] = b;
            if (rng.bernoulli(0.5)) std::swap(rest[0], rest[1]);
            std::array<BlockStackEnv::BlockInit, 3> blocks{};
            blocks[std::size_t(heavy)] = {bx, by, 0, -1, -1.0};
            double px = bx, py = by;
            int below = heavy;
            for (int lvl = 1; lvl <= 2; ++lvl) {
                const double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
                const double rad = rng.uniform(0.0, 0.02);
                px = std::clamp(px + rad * std::cos(ang), 0.0, 1.0);
                py = std::clamp(py + rad * std::sin(ang), 0.0, 1.0);
                const int id = rest[lvl - 1];
                blocks[std::size_t(id)] = {px, py, lvl, below, -1.0};
                below = id;
            }
            out.push_back(BlockStackEnv::make_state(blocks, heavy));
        } else {
            throw EnvError("unknown task kind: " + task);
        }
        // Sanity: every generated state must satisfy the oracle.
        curator.restore_state(out.back());
        if (!curator.ground_truth_success())
            throw EnvError("generated positive rejected by the oracle");
    }
    return out;
}

void populate_positive_bank(ExampleBank& bank, const std::string& task, Env& curator,
                            int actionable_budget, int classifier_obs, std::uint64_t seed) {
    const auto actionable =
        generate_positive_states(task, curator, actionable_budget, derive_seed(seed, "bank"));
    for (std::size_t i = 0; i < actionable.size(); ++i)
        bank.insert_positive(actionable[i], curator, derive_seed(seed, "bank", i));
    const auto obs_states =
        generate_positive_states(task, curator, classifier_obs, derive_seed(seed, "obs"));
    for (const auto& s : obs_states) {
        curator.restore_state(s);
        bank.add_positive_observation(curator.observe_now());
    }
}

// ---------------------------------------------------------------------------
// PipelineRun
// ---------------------------------------------------------------------------

PipelineRun::PipelineRun(RunConfig cfg, std::uint64_t seed, bool write_artifacts)
    : cfg_(std::move(cfg)),
      seed_(seed),
      write_artifacts_(write_artifacts),
      run_dir_(cfg_.out_dir + "/" + cfg_.task + "/" + std::to_string(seed)),
      metrics_(),
      train_env_(make_env(cfg_.task, cfg_.env_overrides)),
      eval_env_(make_env(cfg_.task, cfg_.env_overrides)),
      curator_env_(make_env(cfg_.task, cfg_.env_overrides)) {
    const TaskDefaults td = task_defaults(cfg_.task);
    task_horizon_ = td.task_horizon;
    irf_horizon_ = td.irf_horizon;
    if (write_artifacts_) {
        fs::create_directories(run_dir_);
        metrics_ = MetricsWriter(run_dir_ + "/metrics.csv");
        std::ofstream f(run_dir_ + "/config.json", std::ios::trunc);
        json j = cfg_.to_json();
        j["config_hash"] = cfg_.config_hash();
        f << j.dump(2) << "\n";
    }
}

PipelineRun::~PipelineRun() = default;

std::string PipelineRun::phase_dir(int phase) const {
    return run_dir_ + "/phase" + std::to_string(phase);
}

std::unique_ptr<SacAgent> PipelineRun::make_task_agent(std::uint64_t init_seed) const {
    const std::size_t obs = train_env_->obs_dim();
    const std::size_t act = train_env_->action_spec(Phase::task).dim();
    const int H = cfg_.sac.history;
    SacConfig sc = cfg_.sac;
    std::unique_ptr<Net> actor, critic;
    if (cfg_.task == "block_stack") {
        SetSpec a;
        a.num_objects = 3;
        a.obj_feat = BlockStackEnv::kObjFeatures;
        a.frame_global = act;
        a.slots = std::size_t(H);
        a.tail_global = 0;
        a.enc_hidden = cfg_.net.set_enc;
        a.head_hidden = cfg_.net.set_head;
        a.output_dim = 2 * act;
        SetSpec c = a;
        c.tail_global = act;
        c.output_dim = 1;
        actor = std::make_unique<SetNet>(a);
        critic = std::make_unique<SetNet>(c);
    } else {
        const std::size_t win = std::size_t(H) * (obs + act);
        actor = std::make_unique<MlpNet>(MlpSpec{win, cfg_.net.hidden, 2 * act, false});
        critic = std::make_unique<MlpNet>(MlpSpec{win + act, cfg_.net.hidden, 1, false});
    }
    return std::make_unique<SacAgent>(std::move(actor), std::move(critic), act, sc, init_seed);
}

std::unique_ptr<SacAgent> PipelineRun::make_irf_agent(std::uint64_t init_seed) const {
    const std::size_t obs = train_env_->obs_dim();
    const std::size_t act = train_env_->action_spec(Phase::irf).dim();
    SacConfig sc = cfg_.sac;
    sc.history = cfg_.irf_history;
    sc.entropy_target = 0.0;  // resolve to -|A| of the verification action space
    std::unique_ptr<Net> actor, critic;
    if (cfg_.task == "block_stack") {
        SetSpec a;
        a.num_objects = 3;
        a.obj_feat = BlockStackEnv::kObjFeatures;
        a.frame_global = act;
        a.slots = std::size_t(sc.history);
        a.tail_global = 0;
        a.enc_hidden = cfg_.net.set_enc;
        a.head_hidden = cfg_.net.set_head;
        a.output_dim = 2 * act;
        SetSpec c = a;
        c.tail_global = act;
        c.output_dim = 1;
        actor = std::make_unique<SetNet>(a);
        critic = std::make_unique<SetNet>(c);
    } else {
        const std::size_t win = std::size_t(sc.history) * (obs + act);
        actor = std::make_unique<MlpNet>(MlpSpec{win, cfg_.net.hidden, 2 * act, false});
        critic = std::make_unique<MlpNet>(MlpSpec{win + act, cfg_.net.hidden, 1, false});
    }
    return std::make_unique<SacAgent>(std::move(actor), std::move(critic), act, sc, init_seed);
}

std::unique_ptr<SuccessClassifier> PipelineRun::make_classifier(std::uint64_t init_seed) const {
    std::unique_ptr<Net> net;
    if (cfg_.task == "block_stack") {
        SetSpec s;
        s.num_objects = 3;
        s.obj_feat = BlockStackEnv::kObjFeatures;
        s.frame_global = 0;
        s.slots = 1;
        s.tail_global = 0;
        s.enc_hidden = cfg_.net.set_enc;
        s.head_hidden = cfg_.net.set_head;
        s.output_dim = 1;
        net = std::make_unique<SetNet>(s);
    } else {
        net = std::make_unique<MlpNet>(
            MlpSpec{train_env_->obs_dim(), cfg_.net.hidden, 1, false});
    }
    ClassifierConfig cc;
    cc.lr = cfg_.reward.classifier_lr;
    cc.batch = cfg_.reward.classifier_batch;
    cc.label_smoothing = cfg_.reward.label_smoothing;
    return std::make_unique<SuccessClassifier>(std::move(net), train_env_->obs_scale(), cc,
                                               init_seed);
}

void PipelineRun::require_phase(int phase) const {
    if (phase_done_ < phase)
        throw EnvError("pipeline phases run strictly in order: phase " +
                       std::to_string(phase) + " has not completed");
}

void PipelineRun::write_phase_manifest(int phase, const json& extra) {
    if (!write_artifacts_) return;
    fs::create_directories(phase_dir(phase));
    json m;
    m["phase"] = phase;
    m["task"] = cfg_.task;
    m["seed"] = seed_;
    m["config_hash"] = cfg_.config_hash();
    m["global_step"] = global_step_;
    m["extra"] = extra;
    if (phase > 1) {
        std::ifstream prev(phase_dir(phase - 1) + "/manifest.json");
        if (!prev)
            throw EnvError("phase " + std::to_string(phase) +
                           " artifacts require phase " + std::to_string(phase - 1));
        m["parent_hash"] = hash_json_canonical(json::parse(prev));
    }
    std::ofstream f(phase_dir(phase) + "/manifest.json", std::ios::trunc);
    f << m.dump(2) << "\n";
}

void PipelineRun::build_bank() {
    bank_ = ExampleBank();
    populate_positive_bank(bank_, cfg_.task, *curator_env_, cfg_.bank.positive_budget,
                           cfg_.bank.classifier_positive_obs, derive_seed(seed_, "bank"));
}

namespace {
void push_ring(std::vector<Obs>& pool, std::size_t& next, std::size_t cap, Obs o) {
    if (pool.size() < cap) {
        pool.push_back(std::move(o));
    } else {
        pool[next] = std::move(o);
        next = (next + 1) % cap;
    }
}
constexpr std::size_t kNegativePoolCap = 10000;
}  // namespace

void PipelineRun::refresh_classifier_now(std::int64_t step, int phase) {
    if (negative_obs_pool_.empty() || bank_.positive_observations().empty()) return;
    Rng rng(derive_seed(seed_, "cls.refresh", std::uint64_t(step)));
    const std::size_t B = cfg_.reward.classifier_batch;
    double loss = 0.0;
    for (int u = 0; u < cfg_.phases.classifier_updates; ++u) {
        std::vector<const Obs*> pos(B), neg(B);
        for (auto& p : pos)
            p = &bank_.positive_observations()[rng.uniform_index(
                bank_.positive_observations().size())];
        for (auto& n : neg)
            n = &negative_obs_pool_[rng.uniform_index(negative_obs_pool_.size())];
        loss = classifier_->train_step(pos, neg);
    }
    metrics_.append({step, phase, "classifier.loss", loss, seed_, cfg_.task});
}

double PipelineRun::eval_success(Policy& policy, const std::string& metric, int phase) {
    const double s = evaluate_success_rate(policy, *eval_env_, task_horizon_,
                                           cfg_.eval.episodes, derive_seed(seed_, "eval"));
    metrics_.append({global_step_, phase, metric, s, seed_, cfg_.task});
    return s;
}

IrfAccuracy PipelineRun::eval_irf(Policy& pi_r, const std::string& metric, int phase) {
    const IrfAccuracy acc = evaluate_irf_accuracy(pi_r, *classifier_, test_set_, *eval_env_,
                                                  irf_horizon_, derive_seed(seed_, "eval.irf"));
    metrics_.append({global_step_, phase, metric, acc.accuracy, seed_, cfg_.task});
    return acc;
}

Obs PipelineRun::run_embedded_irf(Policy& irf) {
    // Deterministic verifier rollout inside the training episode's world.
    train_env_->begin_irf_phase(irf_horizon_);
    Rng unused(0);
    const Trajectory t = run_policy_inplace(irf, *train_env_, /*stochastic=*/false, unused);
    return t.terminal_obs;
}

void PipelineRun::train_task_policy(const TaskTrainSpec& spec) {
    Env& env = *train_env_;
    const std::uint64_t gt_before = env.gt_query_count();
    const ActionSpec& aspec = env.action_spec(Phase::task);
    HistoryWindow window(env.obs_dim(), aspec.dim(), spec.agent->history_len(),
                         env.obs_scale());
    Rng policy_rng(derive_seed(seed_, "policy.p" + std::to_string(spec.phase)));
    Rng update_rng(derive_seed(seed_, "update.p" + std::to_string(spec.phase)));
    const std::size_t warmup = spec.agent->config().warmup_steps;
    const int eval_every = cfg_.phases.eval_every > 0
                               ? cfg_.phases.eval_every
                               : std::max(2000, spec.steps / 5);
    std::int64_t step = 0;
    std::uint64_t episode = 0;
    SacLossReport rep;
    while (step < spec.steps) {
        EpisodeConfig ec;
        ec.horizon = task_horizon_;
        ec.phase = Phase::task;
        ec.seed = derive_seed(seed_, "episode.p" + std::to_string(spec.phase), episode);
        Obs o = env.reset(ec);
        window.reset();
        window.push_obs(o);
        spec.agent->begin_episode();
        if (spec.refresh_classifier)
            push_ring(negative_obs_pool_, negative_obs_next_, kNegativePoolCap, o);
        bool done = false;
        while (!done && step < spec.steps) {
            std::vector<double> canonical;
            if (std::size_t(step) < warmup) {
                canonical.resize(aspec.dim());
                for (auto& c : canonical) c = policy_rng.uniform(-1.0, 1.0);
            } else {
                canonical = spec.agent->act(window.features(), true, policy_rng);
            }
            auto [next, d] = env.step(to_physical(aspec, canonical));
            ++step;
            ++global_step_;
            Transition t;
            t.window = window.features();
            t.action = canonical;
            t.next_obs = next;
            t.done = d;
            if (d && spec.embedded_irf) {
                t.o_star = run_embedded_irf(*spec.embedded_irf);
                t.has_o_star = true;
            }
            window.push_action(canonical);
            window.push_obs(next);
            t.next_window = window.features();
            if (!spec.provider) t.reward = spec.stored_reward(d);
            if (spec.refresh_classifier)
                push_ring(negative_obs_pool_, negative_obs_next_, kNegativePoolCap, next);
            spec.agent->push_transition(std::move(t));
            if (std::size_t(step) >= warmup &&
                spec.agent->buffer().size() >= spec.agent->config().batch_size) {
                for (int g = 0; g < spec.agent->config().grad_steps_per_env_step; ++g)
                    rep = spec.agent->update(update_rng, spec.provider);
            }
            if (spec.refresh_classifier && step % cfg_.phases.classifier_refresh == 0)
                refresh_classifier_now(global_step_, spec.phase);
            if (step % eval_every == 0 || step == spec.steps) {
                metrics_.append({global_step_, spec.phase, "sac.critic1", rep.critic1, seed_,
                                 cfg_.task});
                metrics_.append({global_step_, spec.phase, "sac.actor", rep.actor, seed_,
                                 cfg_.task});
                metrics_.append({global_step_, spec.phase, "sac.alpha", rep.alpha, seed_,
                                 cfg_.task});
                eval_success(*spec.agent, spec.success_metric, spec.phase);
            }
            done = d;
        }
        ++episode;
    }
    training_gt_queries_ += env.gt_query_count() - gt_before;
}

void PipelineRun::phase1_bootstrap() {
    if (bank_.positive_observations().empty())
        throw EnvError("phase 1 needs at least one positive observation");
    classifier_ = make_classifier(derive_seed(seed_, "classifier"));
    pi0_ = make_task_agent(derive_seed(seed_, "pi0"));
    negative_obs_pool_.clear();
    negative_obs_next_ = 0;
    TaskTrainSpec spec;
    spec.agent = pi0_.get();
    spec.steps = cfg_.phases.phase1_steps;
    spec.phase = 1;
    SuccessClassifier* d = classifier_.get();
    spec.provider = [d](const Transition& t) { return d->score(t.next_obs); };
    spec.refresh_classifier = true;
    spec.success_metric = "success.vice";
    train_task_policy(spec);
    phase_done_ = 1;
    metrics_.append({global_step_, 1, "audit.gt_queries_training",
                     double(training_gt_queries_), seed_, cfg_.task});
    if (write_artifacts_) {
        fs::create_directories(phase_dir(1));
        classifier_->save(phase_dir(1) + "/classifier.bin");
        pi0_->save(phase_dir(1) + "/pi0.ckpt");
        write_phase_manifest(1, {{"steps", cfg_.phases.phase1_steps}});
    }
}

void PipelineRun::phase2_collect_negatives() {
    require_phase(1);
    Rng rng(derive_seed(seed_, "phase2"));
    int contaminated = 0;
    for (int i = 0; i < cfg_.phases.phase2_rollouts; ++i) {
        EpisodeConfig ec;
        ec.horizon = task_horizon_;
        ec.phase = Phase::task;
        ec.seed = derive_seed(seed_, "phase2.episode", std::uint64_t(i));
        rollout(*pi0_, *train_env_, ec, nullptr, /*stochastic=*/true, rng);
        const Snapshot outcome = train_env_->snapshot_state();
        // Every rollout outcome is banked as a negative (the literal rule);
        // true successes slip in as label noise, which we only measure.
        bank_.insert_negative(outcome, *curator_env_, ec.seed);
        curator_env_->restore_state(outcome);
        contaminated += curator_env_->ground_truth_success() ? 1 : 0;
    }
    metrics_.append({global_step_, 2, "bank.negatives", double(cfg_.phases.phase2_rollouts),
                     seed_, cfg_.task});
    metrics_.append({global_step_, 2, "bank.negative_contamination",
                     double(contaminated) / double(cfg_.phases.phase2_rollouts), seed_,
                     cfg_.task});

    // Held-out examples for verification accuracy: fresh positives plus fresh
    // bootstrap outcomes, labels judged by the oracle at evaluation time.
    test_set_ = generate_positive_states(cfg_.task, *curator_env_, 64,
                                         derive_seed(seed_, "test.positives"));
    for (int i = 0; i < 128; ++i) {
        EpisodeConfig ec;
        ec.horizon = task_horizon_;
        ec.phase = Phase::task;
        ec.seed = derive_seed(seed_, "test.negatives", std::uint64_t(i));
        rollout(*pi0_, *train_env_, ec, nullptr, /*stochastic=*/true, rng);
        curator_env_->restore_state(train_env_->snapshot_state());
        curator_env_->begin_irf_phase(1);
        test_set_.push_back(curator_env_->snapshot_state());
    }
    phase_done_ = 2;
    if (write_artifacts_) {
        fs::create_directories(phase_dir(2));
        bank_.save(phase_dir(2) + "/bank");
        ByteWriter w;
        w.u64(test_set_.size());
        for (const auto& s : test_set_) {
            const auto rec = s.serialize();
            for (auto b : rec) w.u8(b);
        }
        write_file(phase_dir(2) + "/test_set.bin", w.bytes());
        write_phase_manifest(2, {{"negatives", cfg_.phases.phase2_rollouts}});
    }
}

void PipelineRun::train_irf_on_bank(ExampleBank& bank, SacAgent& agent,
                                    const std::string& tag, bool record_metrics) {
    Env& env = *train_env_;
    const std::uint64_t gt_before = env.gt_query_count();
    const ActionSpec& aspec = env.action_spec(Phase::irf);
    HistoryWindow window(env.obs_dim(), aspec.dim(), agent.history_len(), env.obs_scale());
    Rng bank_rng(derive_seed(seed_, "bank." + tag));
    Rng policy_rng(derive_seed(seed_, "policy." + tag));
    Rng update_rng(derive_seed(seed_, "update." + tag));
    const std::size_t warmup = agent.config().warmup_steps;
    const int eval_every = std::max(1000, cfg_.phases.phase3_steps / 5);
    const double floor = cfg_.reward.log_floor;
    const SuccessClassifier& d = *classifier_;
    std::int64_t step = 0;
    std::int64_t next_eval = eval_every;
    while (step < cfg_.phases.phase3_steps) {
        std::size_t idx;
        try {
            idx = bank.sample(bank_rng);
        } catch (const EnvError&) {
            if (bank.usable(ExampleLabel::positive) == 0)
                throw EnvError("verification training aborted: every positive example "
                               "has been destroyed");
            throw;
        }
        const BankEntry& entry = bank.entry(idx);
        const bool positive = entry.label == ExampleLabel::positive;
        env.restore_state(entry.snap);
        env.begin_irf_phase(irf_horizon_);
        window.reset();
        window.push_obs(env.observe_now());
        agent.begin_episode();
        bool done = false;
        while (!done) {
            std::vector<double> canonical;
            if (std::size_t(step) < warmup) {
                canonical.resize(aspec.dim());
                for (auto& c : canonical) c = policy_rng.uniform(-1.0, 1.0);
            } else {
                canonical = agent.act(window.features(), true, policy_rng);
            }
            auto [next, dn] = env.step(to_physical(aspec, canonical));
            ++step;
            ++global_step_;
            const double p = d.score(next);
            Transition t;
            t.window = window.features();
            t.action = canonical;
            t.reward = std::log(std::max(positive ? p : 1.0 - p, floor));
            t.done = dn;
            t.next_obs = next;
            window.push_action(canonical);
            window.push_obs(next);
            t.next_window = window.features();
            agent.push_transition(std::move(t));
            if (std::size_t(step) >= warmup &&
                agent.buffer().size() >= agent.config().batch_size)
                agent.update(update_rng, nullptr);
            done = dn;
        }
        bank.curate_after_episode(idx, env.snapshot_state(), *curator_env_);
        if (record_metrics && (step >= next_eval || step >= cfg_.phases.phase3_steps)) {
            eval_irf(agent, "irf.accuracy", 3);
            next_eval += eval_every;
        }
    }
    training_gt_queries_ += env.gt_query_count() - gt_before;
}

void PipelineRun::phase3_train_irf() {
    require_phase(2);
    pi_r_ = make_irf_agent(derive_seed(seed_, "pi_r"));
    train_irf_on_bank(bank_, *pi_r_, "p3", /*record_metrics=*/true);
    phase_done_ = 3;
    metrics_.append({global_step_, 3, "bank.episodes_with_positives",
                     double(bank_.episodes_with(ExampleLabel::positive)), seed_, cfg_.task});
    metrics_.append({global_step_, 3, "bank.distinct_positives_used",
                     double(bank_.distinct_used(ExampleLabel::positive)), seed_, cfg_.task});
    metrics_.append({global_step_, 3, "bank.destroyed_positives",
                     double(bank_.destroyed_count()), seed_, cfg_.task});
    metrics_.append({global_step_, 3, "audit.gt_queries_training",
                     double(training_gt_queries_), seed_, cfg_.task});
    if (write_artifacts_) {
        fs::create_directories(phase_dir(3));
        pi_r_->save(phase_dir(3) + "/pi_r.ckpt");
        bank_.save(phase_dir(3) + "/bank");
        write_phase_manifest(3, {{"steps", cfg_.phases.phase3_steps}});
    }
}

void PipelineRun::phase4_train_lirf() {
    require_phase(3);
    pi_t_ = make_task_agent(derive_seed(seed_, "pi_t"));
    TaskTrainSpec spec;
    spec.agent = pi_t_.get();
    spec.steps = cfg_.phases.phase4_steps;
    spec.phase = 4;
    const SuccessClassifier* d = classifier_.get();
    const double lambda = cfg_.reward.lambda;
    spec.provider = [d, lambda](const Transition& t) {
        double r = d->score(t.next_obs);
        if (t.has_o_star) r += lambda * d->score(t.o_star);
        return r;
    };
    spec.embedded_irf = pi_r_.get();
    spec.success_metric = "success.lirf";
    train_task_policy(spec);
    phase_done_ = 4;
    metrics_.append({global_step_, 4, "audit.gt_queries_training",
                     double(training_gt_queries_), seed_, cfg_.task});
    if (write_artifacts_) {
        fs::create_directories(phase_dir(4));
        pi_t_->save(phase_dir(4) + "/pi_t.ckpt");
        write_phase_manifest(4, {{"steps", cfg_.phases.phase4_steps},
                                 {"lambda", cfg_.reward.lambda}});
    }
}

void PipelineRun::run_all() {
    build_bank();
    phase1_bootstrap();
    phase2_collect_negatives();
    phase3_train_irf();
    phase4_train_lirf();
}

std::unique_ptr<SacAgent> PipelineRun::train_phase4_variant(double lambda,
                                                            Policy* irf_policy,
                                                            const std::string& tag) {
    require_phase(3);
    auto agent = make_task_agent(derive_seed(seed_, "pi_t." + tag));
    TaskTrainSpec spec;
    spec.agent = agent.get();
    spec.steps = cfg_.phases.phase4_steps;
    spec.phase = 4;
    const SuccessClassifier* d = classifier_.get();
    spec.provider = [d, lambda](const Transition& t) {
        double r = d->score(t.next_obs);
        if (t.has_o_star) r += lambda * d->score(t.o_star);
        return r;
    };
    spec.embedded_irf = irf_policy ? irf_policy : pi_r_.get();
    spec.success_metric = "success.lirf." + tag;
    train_task_policy(spec);
    return agent;
}

std::unique_ptr<SacAgent> PipelineRun::train_irf_variant(ExampleBank& bank,
                                                         const std::string& tag) {
    require_phase(2);
    auto agent = make_irf_agent(derive_seed(seed_, "pi_r." + tag));
    train_irf_on_bank(bank, *agent, "p3." + tag, /*record_metrics=*/false);
    return agent;
}

std::unique_ptr<SacAgent> PipelineRun::train_gt_baseline(int steps) {
    auto agent = make_task_agent(derive_seed(seed_, "pi_gt"));
    Env* env = train_env_.get();
    const std::uint64_t before = env->gt_query_count();
    TaskTrainSpec spec;
    spec.agent = agent.get();
    spec.steps = steps;
    spec.phase = 0;
    spec.provider = nullptr;
    spec.stored_reward = [env](bool done) {
        return done && env->ground_truth_success() ? 1.0 : 0.0;
    };
    spec.success_metric = "success.gt";
    train_task_policy(spec);
    // The oracle is sanctioned for this baseline; do not charge the audit.
    training_gt_queries_ -= env->gt_query_count() - before;
    metrics_.append({global_step_, 0, "audit.gt_queries_baseline",
                     double(env->gt_query_count() - before), seed_, cfg_.task});
    return agent;
}

VerifyTrace PipelineRun::run_verify(std::uint64_t episode_seed, int max_iter) {
    require_phase(4);
    EpisodeConfig ec;
    ec.horizon = task_horizon_;
    ec.phase = Phase::task;
    ec.seed = episode_seed;
    return verify_execute(*pi_t_, *pi_r_, *classifier_, *eval_env_, task_horizon_,
                          irf_horizon_, ec, max_iter);
}

// ---------------------------------------------------------------------------
// Manual verification policies
// ---------------------------------------------------------------------------

std::unique_ptr<Policy> manual_irf(const std::string& task) {
    if (task == "screw") return std::make_unique<ManualScrewIrf>();
    if (task == "block_stack") return std::make_unique<ManualBlockIrf>(2.5);
    throw EnvError("no manual verification policy for task: " + task);
}

LoadedArtifacts load_run_artifacts(const RunConfig& cfg, const std::string& run_dir) {
    LoadedArtifacts a;
    const auto need = [&](const std::string& p) {
        if (!fs::exists(p)) throw EnvError("missing artifact, expected at: " + p);
        return p;
    };
    a.classifier = SuccessClassifier::load(need(run_dir + "/phase1/classifier.bin"));
    a.pi0 = SacAgent::load(need(run_dir + "/phase1/pi0.ckpt"), cfg.sac);
    a.pi_r = SacAgent::load(need(run_dir + "/phase3/pi_r.ckpt"), cfg.sac);
    a.pi_t = SacAgent::load(need(run_dir + "/phase4/pi_t.ckpt"), cfg.sac);
    const auto bytes = read_file(need(run_dir + "/phase2/test_set.bin"));
    ByteReader header(bytes);
    const std::uint64_t count = header.u64();
    std::size_t off = 8;
    for (std::uint64_t i = 0; i < count; ++i) {
        if (off + 8 > bytes.size()) throw SerialError("truncated test set");
        std::uint64_t len;
        std::memcpy(&len, bytes.data() + off, 8);
        if (off + 8 + len > bytes.size()) throw SerialError("truncated test set");
        std::vector<std::uint8_t> rec(bytes.begin() + std::ptrdiff_t(off),
                                      bytes.begin() + std::ptrdiff_t(off + 8 + len));
        a.test_set.push_back(Snapshot::deserialize(rec));
        off += 8 + len;
    }
    return a;
}

GridSearchResult manual_block_grid_search(const SuccessClassifier& d, Env& env,
                                          const std::vector<Snapshot>& calibration,
                                          int irf_horizon, std::uint64_t seed) {
    GridSearchResult res;
    double best = -1.0;
    for (int i = 1; i <= 10; ++i) {
        const double m = 0.5 * i;
        ManualBlockIrf probe(m);
        const IrfAccuracy acc =
            evaluate_irf_accuracy(probe, d, calibration, env, irf_horizon,
                                  derive_seed(seed, "grid", std::uint64_t(i)));
        res.accuracy_by_magnitude.emplace_back(m, acc.accuracy);
        if (acc.accuracy > best) {
            best = acc.accuracy;
            res.best_magnitude = m;
        }
    }
    return res;
}

}  // namespace lirf
