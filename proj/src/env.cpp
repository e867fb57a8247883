#include "lirf/env.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lirf/serial.hpp"

namespace lirf {

namespace {
constexpr char kSnapshotMagic[8] = {'L', 'I', 'R', 'F', 'S', 'N', 'A', 'P'};
}

std::vector<std::uint8_t> Snapshot::serialize() const {
    ByteWriter w;
    for (char c : kSnapshotMagic) w.u8(std::uint8_t(c));
    w.u32(version);
    w.str(kind);
    w.f64_vec(fields);
    // Length-prefixed framing: total record size up front so records can be
    // concatenated in bank files.
    ByteWriter framed;
    framed.u64(w.bytes().size());
    auto out = framed.bytes();
    out.insert(out.end(), w.bytes().begin(), w.bytes().end());
    return out;
}

Snapshot Snapshot::deserialize(const std::vector<std::uint8_t>& bytes) {
    ByteReader outer(bytes);
    const auto len = outer.u64();
    if (len + 8 != bytes.size()) throw SerialError("snapshot length prefix mismatch");
    ByteReader r(bytes.data() + 8, bytes.size() - 8);
    for (char c : kSnapshotMagic) {
        if (r.u8() != std::uint8_t(c)) throw SerialError("bad snapshot magic");
    }
    Snapshot s;
    s.version = r.u32();
    s.kind = r.str();
    s.fields = r.f64_vec();
    return s;
}

std::string Snapshot::debug_text(const std::vector<std::string>& field_names) const {
    std::ostringstream os;
    os << kind << " v" << version << " {";
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ", ";
        if (i < field_names.size()) os << field_names[i] << "=";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", fields[i]);
        os << buf;
    }
    os << "}";
    return os.str();
}

Obs Env::reset(const EpisodeConfig& cfg) {
    if (cfg.horizon < 1) throw EnvError("horizon must be >= 1");
    phase_ = cfg.phase;
    horizon_ = cfg.horizon;
    steps_ = 0;
    done_ = false;
    episode_active_ = true;
    if (cfg.restore_from) {
        const Snapshot& s = *cfg.restore_from;
        if (s.kind != kind())
            throw EnvError("snapshot kind '" + s.kind + "' does not match env '" + kind() + "'");
        decode_fields(s.fields);
    } else {
        Rng rng(cfg.seed);
        sample_initial(rng);
    }
    return observe();
}

std::pair<Obs, bool> Env::step(const std::vector<double>& action) {
    if (!episode_active_) throw EnvError("step before reset");
    if (done_) throw EnvError("step after episode end");
    const ActionSpec& spec = action_spec(phase_);
    if (action.size() != spec.dim()) throw EnvError("action dimension mismatch");
    std::vector<double> a(action.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] = std::clamp(action[i], spec.lo[i], spec.hi[i]);
    if (phase_ == Phase::task)
        apply_task_action(a);
    else
        apply_irf_action(a);
    ++steps_;
    done_ = steps_ >= horizon_ || absorbing();
    return {observe(), done_};
}

Snapshot Env::snapshot_state() const {
    Snapshot s;
    s.kind = kind();
    s.version = schema_version();
    s.fields = encode_fields();
    return s;
}

Obs Env::restore_state(const Snapshot& snap) {
    if (snap.kind != kind())
        throw EnvError("snapshot kind '" + snap.kind + "' does not match env '" + kind() + "'");
    if (snap.version != schema_version()) throw EnvError("snapshot schema version mismatch");
    decode_fields(snap.fields);
    steps_ = 0;
    done_ = false;
    episode_active_ = true;
    return observe();
}

bool Env::ground_truth_success() const {
    ++gt_queries_;
    return oracle();
}

void Env::begin_irf_phase(int horizon) {
    if (horizon < 1) throw EnvError("horizon must be >= 1");
    phase_ = Phase::irf;
    horizon_ = horizon;
    steps_ = 0;
    done_ = false;
    episode_active_ = true;
    scrub_epistemic();
}

void Env::begin_task_phase(int horizon) {
    if (horizon < 1) throw EnvError("horizon must be >= 1");
    phase_ = Phase::task;
    horizon_ = horizon;
    steps_ = 0;
    done_ = false;
    episode_active_ = true;
}

HistoryWindow::HistoryWindow(std::size_t obs_dim, std::size_t act_dim, int len,
                             std::vector<double> obs_scale)
    : obs_dim_(obs_dim), act_dim_(act_dim), len_(len), scale_(std::move(obs_scale)) {
    if (len_ < 1) throw EnvError("history length must be >= 1");
    if (scale_.size() != obs_dim_) throw EnvError("obs scale dimension mismatch");
}

void HistoryWindow::reset() {
    obs_hist_.clear();
    act_hist_.clear();
}

void HistoryWindow::push_obs(const Obs& o) {
    if (o.size() != obs_dim_) throw EnvError("observation dimension mismatch");
    std::vector<double> f(obs_dim_);
    for (std::size_t i = 0; i < obs_dim_; ++i) f[i] = o[i] / scale_[i];
    if (obs_hist_.size() == act_hist_.size()) {
        // No action recorded since the last observation: pad slot.
        act_hist_.emplace_back(act_dim_, kPad);
    }
    obs_hist_.push_back(std::move(f));
    if (int(obs_hist_.size()) > len_) {
        obs_hist_.erase(obs_hist_.begin());
        act_hist_.erase(act_hist_.begin());
    }
}

void HistoryWindow::push_action(const std::vector<double>& a) {
    if (a.size() != act_dim_) throw EnvError("action dimension mismatch");
    act_hist_.push_back(a);  // becomes the `previous action' of the next obs
}

std::vector<double> HistoryWindow::features() const {
    std::vector<double> out(feature_dim(), kPad);
    const std::size_t have = obs_hist_.size();
    const std::size_t offset = std::size_t(len_) - have;
    for (std::size_t i = 0; i < have; ++i) {
        double* slot = out.data() + (offset + i) * slot_dim();
        std::copy(obs_hist_[i].begin(), obs_hist_[i].end(), slot);
        std::copy(act_hist_[i].begin(), act_hist_[i].end(), slot + obs_dim_);
    }
    return out;
}

std::vector<double> to_physical(const ActionSpec& spec, const std::vector<double>& canonical) {
    std::vector<double> a(spec.dim());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double c = std::clamp(canonical[i], -1.0, 1.0);
        a[i] = spec.lo[i] + (c + 1.0) * 0.5 * (spec.hi[i] - spec.lo[i]);
    }
    return a;
}

Trajectory rollout(Policy& policy, Env& env, const EpisodeConfig& cfg,
                   const RewardFn& reward_fn, bool stochastic, Rng& rng) {
    const ActionSpec& spec = env.action_spec(cfg.phase);
    if (policy.action_dim() != spec.dim())
        throw EnvError("policy action dimension does not match env action spec");
    HistoryWindow window(env.obs_dim(), spec.dim(), policy.history_len(), env.obs_scale());

    Trajectory traj;
    Obs o = env.reset(cfg);
    window.push_obs(o);
    policy.begin_episode();
    bool done = false;
    while (!done) {
        const std::vector<double> canonical = policy.act(window.features(), stochastic, rng);
        const std::vector<double> physical = to_physical(spec, canonical);
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

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw SerialError("cannot open for write: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) throw SerialError("write failed: " + path);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw SerialError("cannot open for read: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace lirf
