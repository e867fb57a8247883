#include "lirf/sac.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "lirf/kernels.hpp"

namespace lirf {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5*log(2*pi)
constexpr double kTanhEps = 1e-6;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr char kCkptMagic[8] = {'L', 'I', 'R', 'F', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCkptVersion = 1;

void check_finite(const std::vector<double>& p, const char* what) {
    for (double x : p)
        if (!std::isfinite(x)) throw LearnerError(std::string("non-finite parameter in ") + what);
}
}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw LearnerError("replay capacity must be positive");
    data_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[next_] = std::move(t);
        next_ = (next_ + 1) % capacity_;
    }
}

std::size_t ReplayBuffer::sample_index(Rng& rng) const {
    if (data_.empty()) throw LearnerError("sampling from empty replay buffer");
    return std::size_t(rng.uniform_index(data_.size()));
}

void Adam::step(double* p, const double* g, std::size_t n) {
    ++t_;
    const double bias1 = 1.0 - std::pow(kAdamBeta1, double(t_));
    const double bias2 = 1.0 - std::pow(kAdamBeta2, double(t_));
    kern::adam_step(p, m_.data(), v_.data(), g, n, lr_, kAdamBeta1, kAdamBeta2, kAdamEps,
                    bias1, bias2);
}

void Adam::save(ByteWriter& w) const {
    w.u64(t_);
    w.f64(lr_);
    w.f64_vec(m_);
    w.f64_vec(v_);
}

void Adam::load(ByteReader& r) {
    t_ = r.u64();
    lr_ = r.f64();
    m_ = r.f64_vec();
    v_ = r.f64_vec();
}

void squashed_sample(const double* actor_out, std::size_t d, const SquashConfig& sq,
                     const double* eps, double* a, double* logp) {
    double lp = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double mean = actor_out[j];
        const double raw = actor_out[d + j];
        const double ls =
            sq.log_std_min + 0.5 * (sq.log_std_max - sq.log_std_min) * (std::tanh(raw) + 1.0);
        const double e = eps ? eps[j] : 0.0;
        const double u = mean + std::exp(ls) * e;
        a[j] = std::tanh(u);
        if (logp) {
            lp += -0.5 * e * e - ls - kLogSqrt2Pi;
            lp -= std::log(1.0 - a[j] * a[j] + kTanhEps);
        }
    }
    if (logp) *logp = lp;
}

double critic_mse_loss_grad(const Net& critic,
                            const std::vector<std::vector<double>>& inputs,
                            const std::vector<double>& targets,
                            std::vector<double>* grad) {
    if (inputs.empty() || inputs.size() != targets.size())
        throw LearnerError("critic loss needs matched nonempty batch");
    const double inv = 1.0 / double(inputs.size());
    FwdCache cache;
    double loss = 0.0;
    double q;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        critic.forward(inputs[i].data(), &q, cache);
        const double diff = q - targets[i];
        loss += diff * diff * inv;
        if (grad) {
            const double dout = 2.0 * diff * inv;
            critic.backward(cache, &dout, grad->data(), nullptr);
        }
    }
    if (!std::isfinite(loss)) throw LearnerError("critic loss is non-finite");
    return loss;
}

double actor_loss_grad(const Net& actor, const Net& critic1, const Net& critic2,
                       const std::vector<std::vector<double>>& windows,
                       const std::vector<std::vector<double>>& eps, double alpha,
                       const SquashConfig& sq, std::vector<double>* grad,
                       double* mean_logp_out) {
    if (windows.empty() || windows.size() != eps.size())
        throw LearnerError("actor loss needs matched nonempty batch");
    const std::size_t d = eps[0].size();
    const std::size_t win = windows[0].size();
    const double inv = 1.0 / double(windows.size());
    const double half_range = 0.5 * (sq.log_std_max - sq.log_std_min);

    FwdCache cache_a, cache_c;
    std::vector<double> out(2 * d), a(d), input(win + d), din(win + d), dout(2 * d);
    double loss = 0.0, mean_logp = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        actor.forward(windows[i].data(), out.data(), cache_a);
        double logp;
        squashed_sample(out.data(), d, sq, eps[i].data(), a.data(), &logp);
        std::memcpy(input.data(), windows[i].data(), win * sizeof(double));
        std::memcpy(input.data() + win, a.data(), d * sizeof(double));
        double q1, q2;
        FwdCache cache_spare;
        critic1.forward(input.data(), &q1, cache_c);
        const Net* qnet = &critic1;
        double qmin = q1;
        critic2.forward(input.data(), &q2, cache_spare);
        if (q2 < q1) {
            qmin = q2;
            qnet = &critic2;
            std::swap(cache_c.bufs, cache_spare.bufs);
        }
        loss += (alpha * logp - qmin) * inv;
        mean_logp += logp * inv;
        if (!grad) continue;

        // dq/da via the chosen critic's input gradient.
        std::fill(din.begin(), din.end(), 0.0);
        const double one = 1.0;
        qnet->backward(cache_c, &one, nullptr, din.data());
        for (std::size_t j = 0; j < d; ++j) {
            const double mean = out[j];
            const double raw = out[d + j];
            const double th = std::tanh(raw);
            const double ls = sq.log_std_min + half_range * (th + 1.0);
            const double std_j = std::exp(ls);
            const double e = eps[i][j];
            const double aj = a[j];
            const double sech2 = 1.0 - aj * aj;
            const double tcorr = 2.0 * aj * sech2 / (sech2 + kTanhEps);
            const double dq_da = din[win + j];
            const double g_mean = alpha * tcorr - dq_da * sech2;
            const double g_ls =
                alpha * (-1.0 + tcorr * std_j * e) - dq_da * sech2 * std_j * e;
            dout[j] = g_mean * inv;
            dout[d + j] = g_ls * half_range * (1.0 - th * th) * inv;
            (void)mean;
        }
        actor.backward(cache_a, dout.data(), grad->data(), nullptr);
    }
    if (!std::isfinite(loss)) throw LearnerError("actor loss is non-finite");
    if (mean_logp_out) *mean_logp_out = mean_logp;
    return loss;
}

SacAgent::SacAgent(std::unique_ptr<Net> actor, std::unique_ptr<Net> critic_template,
                   std::size_t act_dim, SacConfig cfg, std::uint64_t init_seed)
    : act_dim_(act_dim),
      cfg_(cfg),
      sq_{cfg.log_std_min, cfg.log_std_max},
      actor_(std::move(actor)),
      critic1_(std::move(critic_template)),
      opt_actor_(actor_->param_count(), cfg.lr_actor),
      opt_critic1_(critic1_->param_count(), cfg.lr_critic),
      opt_critic2_(critic1_->param_count(), cfg.lr_critic),
      opt_alpha_(1, cfg.lr_alpha),
      buffer_(cfg.replay_capacity) {
    if (actor_->output_dim() != 2 * act_dim_)
        throw LearnerError("actor output must be 2*action_dim (mean, log-std)");
    if (critic1_->output_dim() != 1) throw LearnerError("critic output must be scalar");
    if (cfg_.entropy_target == 0.0) cfg_.entropy_target = -double(act_dim_);
    Rng rng(init_seed);
    actor_->init(rng);
    critic1_->init(rng);
    critic2_ = critic1_->clone();
    critic2_->init(rng);
    target1_ = critic1_->clone();
    target2_ = critic2_->clone();
}

double SacAgent::alpha() const { return std::exp(log_alpha_); }

std::vector<double> SacAgent::act(const std::vector<double>& window, bool stochastic,
                                  Rng& rng) {
    if (window.size() != actor_->input_dim())
        throw LearnerError("policy window dimension mismatch");
    std::vector<double> out(2 * act_dim_), a(act_dim_);
    FwdCache cache;
    actor_->forward(window.data(), out.data(), cache);
    if (stochastic) {
        std::vector<double> eps(act_dim_);
        for (auto& e : eps) e = rng.normal();
        squashed_sample(out.data(), act_dim_, sq_, eps.data(), a.data(), nullptr);
    } else {
        squashed_sample(out.data(), act_dim_, sq_, nullptr, a.data(), nullptr);
    }
    return a;
}

std::vector<double>& SacAgent::critic_input(const std::vector<double>& window,
                                            const std::vector<double>& action) {
    in_buf_.resize(window.size() + action.size());
    std::memcpy(in_buf_.data(), window.data(), window.size() * sizeof(double));
    std::memcpy(in_buf_.data() + window.size(), action.data(), action.size() * sizeof(double));
    return in_buf_;
}

SacLossReport SacAgent::update(Rng& rng, const RewardProvider& reward_provider) {
    const std::size_t B = cfg_.batch_size;
    if (buffer_.size() < B) throw LearnerError("replay buffer holds fewer than one batch");

    std::vector<std::size_t> idx(B);
    for (auto& i : idx) i = buffer_.sample_index(rng);

    // Bellman targets through the target critics with entropy bonus.
    std::vector<std::vector<double>> critic_in(B);
    std::vector<double> targets(B);
    std::vector<double> out(2 * act_dim_), a2(act_dim_), eps(act_dim_);
    const double alpha_now = alpha();
    for (std::size_t b = 0; b < B; ++b) {
        const Transition& t = buffer_.at(idx[b]);
        const double r = reward_provider ? reward_provider(t) : t.reward;
        double y = r;
        if (!t.done) {
            actor_->forward(t.next_window.data(), out.data(), cache_a_);
            for (auto& e : eps) e = rng.normal();
            double logp;
            squashed_sample(out.data(), act_dim_, sq_, eps.data(), a2.data(), &logp);
            const auto& in = critic_input(t.next_window, a2);
            double q1, q2;
            target1_->forward(in.data(), &q1, cache_c_);
            target2_->forward(in.data(), &q2, cache_c_);
            y += cfg_.gamma * (std::min(q1, q2) - alpha_now * logp);
        }
        targets[b] = y;
        critic_in[b] = critic_input(buffer_.at(idx[b]).window, buffer_.at(idx[b]).action);
    }

    SacLossReport rep;
    std::vector<double> grad(critic1_->param_count(), 0.0);
    rep.critic1 = critic_mse_loss_grad(*critic1_, critic_in, targets, &grad);
    opt_critic1_.step(critic1_->params().data(), grad.data(), grad.size());
    std::fill(grad.begin(), grad.end(), 0.0);
    rep.critic2 = critic_mse_loss_grad(*critic2_, critic_in, targets, &grad);
    opt_critic2_.step(critic2_->params().data(), grad.data(), grad.size());

    // Actor against the freshly updated critics, reparameterized noise.
    std::vector<std::vector<double>> windows(B), noise(B);
    for (std::size_t b = 0; b < B; ++b) {
        windows[b] = buffer_.at(idx[b]).window;
        noise[b].resize(act_dim_);
        for (auto& e : noise[b]) e = rng.normal();
    }
    std::vector<double> agrad(actor_->param_count(), 0.0);
    rep.actor = actor_loss_grad(*actor_, *critic1_, *critic2_, windows, noise, alpha_now,
                                sq_, &agrad, &rep.mean_logp);
    opt_actor_.step(actor_->params().data(), agrad.data(), agrad.size());

    // Temperature toward the entropy target.
    rep.alpha_loss = -alpha_now * (rep.mean_logp + cfg_.entropy_target);
    const double galpha = -alpha_now * (rep.mean_logp + cfg_.entropy_target);
    opt_alpha_.step(&log_alpha_, &galpha, 1);
    rep.alpha = alpha();

    // Soft target update: exact tau-weighted interpolation.
    for (std::size_t k = 0; k < critic1_->param_count(); ++k) {
        target1_->params()[k] =
            (1.0 - cfg_.tau) * target1_->params()[k] + cfg_.tau * critic1_->params()[k];
        target2_->params()[k] =
            (1.0 - cfg_.tau) * target2_->params()[k] + cfg_.tau * critic2_->params()[k];
    }

    check_finite(actor_->params(), "actor");
    check_finite(critic1_->params(), "critic1");
    check_finite(critic2_->params(), "critic2");
    if (!std::isfinite(log_alpha_)) throw LearnerError("non-finite temperature");
    ++updates_;
    return rep;
}

void SacAgent::save(const std::string& path) const {
    ByteWriter w;
    for (char c : kCkptMagic) w.u8(std::uint8_t(c));
    w.u32(kCkptVersion);
    w.u64(act_dim_);
    w.u64(std::uint64_t(cfg_.history));
    w.u64(updates_);
    actor_->describe(w);
    w.f64_vec(actor_->params());
    critic1_->describe(w);
    w.f64_vec(critic1_->params());
    w.f64_vec(critic2_->params());
    w.f64_vec(target1_->params());
    w.f64_vec(target2_->params());
    w.f64(log_alpha_);
    opt_actor_.save(w);
    opt_critic1_.save(w);
    opt_critic2_.save(w);
    opt_alpha_.save(w);
    write_file(path, w.bytes());
}

std::unique_ptr<SacAgent> SacAgent::load(const std::string& path, SacConfig cfg) {
    const auto bytes = read_file(path);
    ByteReader r(bytes);
    for (char c : kCkptMagic)
        if (r.u8() != std::uint8_t(c)) throw SerialError("bad checkpoint magic");
    if (r.u32() != kCkptVersion) throw SerialError("unsupported checkpoint version");
    const auto act_dim = r.u64();
    cfg.history = int(r.u64());
    const auto updates = r.u64();
    auto actor = net_from_descriptor(r);
    auto actor_params = r.f64_vec();
    auto critic = net_from_descriptor(r);
    auto critic1_params = r.f64_vec();
    // The constructor runs a fresh init; restore the stored tensors after.
    auto agent = std::make_unique<SacAgent>(std::move(actor), std::move(critic),
                                            act_dim, cfg, /*init_seed=*/0);
    agent->actor_->params() = std::move(actor_params);
    agent->critic1_->params() = std::move(critic1_params);
    agent->critic2_->params() = r.f64_vec();
    agent->target1_->params() = r.f64_vec();
    agent->target2_->params() = r.f64_vec();
    agent->log_alpha_ = r.f64();
    agent->opt_actor_.load(r);
    agent->opt_critic1_.load(r);
    agent->opt_critic2_.load(r);
    agent->opt_alpha_.load(r);
    agent->updates_ = updates;
    return agent;
}

}  // namespace lirf
