#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lirf/env.hpp"
#include "lirf/net.hpp"

namespace lirf {

struct SacConfig {
    double gamma = 0.99;
    double lr_actor = 3e-4;
    double lr_critic = 3e-4;
    double lr_alpha = 3e-4;
    double tau = 0.005;          // target smoothing coefficient
    std::size_t batch_size = 64;
    double entropy_target = 0.0; // defaults to -action_dim when left at 0
    int history = 4;
    int grad_steps_per_env_step = 1;
    std::size_t replay_capacity = 100000;
    std::size_t warmup_steps = 1000;
    double log_std_min = -5.0;
    double log_std_max = 2.0;
};

struct Transition {
    std::vector<double> window;
    std::vector<double> action;  // canonical, in [-1,1]^d
    double reward = 0.0;
    std::vector<double> next_window;
    bool done = false;
    Obs next_obs;                // raw observation reached by the action
    Obs o_star;                  // post-verifier observation on terminal steps
    bool has_o_star = false;
};

// Recomputes a transition's reward at update time (classifier-based rewards
// follow the live classifier); when absent the stored reward is used.
using RewardProvider = std::function<double(const Transition&)>;

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);
    void push(Transition t);  // FIFO eviction once full
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return data_[i]; }
    std::size_t sample_index(Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> data_;
};

class Adam {
public:
    Adam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}
    void step(double* p, const double* g, std::size_t n);
    void set_lr(double lr) { lr_ = lr; }
    void save(ByteWriter& w) const;
    void load(ByteReader& r);

private:
    double lr_;
    std::uint64_t t_ = 0;
    std::vector<double> m_, v_;
};

struct SquashConfig {
    double log_std_min = -5.0;
    double log_std_max = 2.0;
};

// Squashed-Gaussian head over the actor output [mean_0..mean_d, raw_0..raw_d].
// eps == nullptr takes the deterministic mean action. Returns a in (-1,1)^d
// and, when logp is non-null, the tanh-corrected log density.
void squashed_sample(const double* actor_out, std::size_t act_dim, const SquashConfig& sq,
                     const double* eps, double* a, double* logp);

// Training objectives, exposed so the finite-difference oracle can drive the
// exact code paths the updates use. Each accumulates analytic gradients when
// the grad pointer is non-null and returns the scalar loss.
double critic_mse_loss_grad(const Net& critic,
                            const std::vector<std::vector<double>>& inputs,
                            const std::vector<double>& targets,
                            std::vector<double>* grad);

double actor_loss_grad(const Net& actor, const Net& critic1, const Net& critic2,
                       const std::vector<std::vector<double>>& windows,
                       const std::vector<std::vector<double>>& eps, double alpha,
                       const SquashConfig& sq, std::vector<double>* grad,
                       double* mean_logp_out);

struct SacLossReport {
    double critic1 = 0.0, critic2 = 0.0;
    double actor = 0.0;
    double alpha_loss = 0.0;
    double alpha = 1.0;
    double mean_logp = 0.0;
};

// Twin-critic entropy-regularized actor-critic over history windows.
class SacAgent final : public Policy {
public:
    SacAgent(std::unique_ptr<Net> actor, std::unique_ptr<Net> critic_template,
             std::size_t act_dim, SacConfig cfg, std::uint64_t init_seed);

    std::size_t action_dim() const override { return act_dim_; }
    int history_len() const override { return cfg_.history; }
    std::vector<double> act(const std::vector<double>& window, bool stochastic,
                            Rng& rng) override;

    void push_transition(Transition t) { buffer_.push(std::move(t)); }
    ReplayBuffer& buffer() { return buffer_; }
    const SacConfig& config() const { return cfg_; }
    std::uint64_t updates_done() const { return updates_; }

    // One gradient step on critics, actor and temperature plus a soft target
    // update. Throws LearnerError if the buffer holds fewer than a batch or
    // if any loss or parameter goes non-finite.
    SacLossReport update(Rng& rng, const RewardProvider& reward_provider);

    double alpha() const;
    const Net& actor_net() const { return *actor_; }

    void save(const std::string& path) const;
    static std::unique_ptr<SacAgent> load(const std::string& path, SacConfig cfg);

private:
    std::vector<double>& critic_input(const std::vector<double>& window,
                                      const std::vector<double>& action);

    std::size_t act_dim_;
    SacConfig cfg_;
    SquashConfig sq_;
    std::unique_ptr<Net> actor_, critic1_, critic2_, target1_, target2_;
    double log_alpha_ = 0.0;
    Adam opt_actor_, opt_critic1_, opt_critic2_, opt_alpha_;
    ReplayBuffer buffer_;
    std::uint64_t updates_ = 0;

    // update-loop scratch
    std::vector<double> in_buf_;
    FwdCache cache_a_, cache_c_;
};

}  // namespace lirf
