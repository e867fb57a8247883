#include "lirf/envs/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lirf {

namespace {
constexpr double kPi = 3.14159265358979323846;

double dist2(double ax, double ay, double bx, double by) {
    const double dx = ax - bx, dy = ay - by;
    return dx * dx + dy * dy;
}
}  // namespace

BlockStackEnv::BlockStackEnv(BlockParams params) : params_(params) {
    task_spec_.lo = {0.0, 0.0, 0.0, 0.0};
    task_spec_.hi = {1.0, 1.0, 1.0, 1.0};
    irf_spec_.lo = {0.0, 0.0, 0.0};
    irf_spec_.hi = {1.0, 360.0, params_.poke_max};
    for (int i = 0; i < kBlocks; ++i) {
        x_[i] = y_[i] = 0.0;
        level_[i] = 0;
        support_[i] = -1;
        weight_[i] = -1.0;
    }
}

const std::string& BlockStackEnv::kind() const {
    static const std::string k = "block_stack";
    return k;
}

const ActionSpec& BlockStackEnv::action_spec(Phase phase) const {
    return phase == Phase::task ? task_spec_ : irf_spec_;
}

std::vector<double> BlockStackEnv::obs_scale() const {
    std::vector<double> s;
    for (int i = 0; i < kBlocks; ++i) {
        s.push_back(1.0);
        s.push_back(1.0);
        s.push_back(kBlocks * params_.block_height);
        s.push_back(1.0);
    }
    return s;
}

std::vector<std::string> BlockStackEnv::field_names() const {
    std::vector<std::string> n;
    for (int i = 0; i < kBlocks; ++i) {
        const std::string b = "b" + std::to_string(i);
        n.insert(n.end(), {b + ".x", b + ".y", b + ".level", b + ".support", b + ".w"});
    }
    n.push_back("heavy");
    return n;
}

BlockView BlockStackEnv::block(int i) const {
    return {x_[i], y_[i], level_[i], support_[i], weight_[i]};
}

bool BlockStackEnv::exposed(int i) const {
    for (int j = 0; j < kBlocks; ++j)
        if (support_[j] == i) return false;
    return true;
}

int BlockStackEnv::top_of_tallest_pile() const {
    int best = -1;
    for (int i = 0; i < kBlocks; ++i) {
        if (!exposed(i) || level_[i] == 0) continue;
        if (best < 0 || level_[i] > level_[best]) best = i;
    }
    return best;  // -1: everything sits on the table
}

std::vector<int> BlockStackEnv::pile_of(int top) const {
    std::vector<int> pile;
    for (int i = top; i >= 0; i = support_[i]) pile.push_back(i);
    return pile;
}

bool BlockStackEnv::tower_standing() const {
    for (int i = 0; i < kBlocks; ++i)
        if (level_[i] == kBlocks - 1) return true;
    return false;
}

bool BlockStackEnv::oracle() const {
    // A standing tower of all three with the heavy block at the bottom.
    for (int i = 0; i < kBlocks; ++i) {
        if (level_[i] != kBlocks - 1) continue;
        const auto pile = pile_of(i);
        return pile.back() == heavy_;
    }
    return false;
}

void BlockStackEnv::sample_initial(Rng& rng) {
    for (int i = 0; i < kBlocks; ++i) {
        for (;;) {
            const double px = rng.uniform(0.1, 0.9);
            const double py = rng.uniform(0.1, 0.9);
            bool ok = true;
            for (int j = 0; j < i; ++j)
                ok = ok && dist2(px, py, x_[j], y_[j]) >=
                               params_.min_separation * params_.min_separation;
            if (ok) {
                x_[i] = px;
                y_[i] = py;
                break;
            }
        }
        level_[i] = 0;
        support_[i] = -1;
        weight_[i] = -1.0;
    }
    heavy_ = int(rng.uniform_index(kBlocks));
}

void BlockStackEnv::apply_task_action(const std::vector<double>& a) {
    const double px = a[0], py = a[1], qx = a[2], qy = a[3];
    // Pick snaps to the nearest block; buried blocks cannot be picked.
    int picked = -1;
    double best = params_.capture_radius * params_.capture_radius;
    for (int i = 0; i < kBlocks; ++i) {
        const double d2 = dist2(px, py, x_[i], y_[i]);
        if (d2 <= best) {
            best = d2;
            picked = i;
        }
    }
    if (picked < 0 || !exposed(picked)) return;

    weight_[picked] = picked == heavy_ ? 1.0 : 0.0;  // hefting reveals the weight

    // Place: stack on the nearest exposed top within snap range, else table.
    int target = -1;
    double tbest = params_.stack_snap * params_.stack_snap;
    for (int i = 0; i < kBlocks; ++i) {
        if (i == picked || !exposed(i)) continue;
        const double d2 = dist2(qx, qy, x_[i], y_[i]);
        if (d2 <= tbest) {
            tbest = d2;
            target = i;
        }
    }
    x_[picked] = qx;
    y_[picked] = qy;
    if (target >= 0) {
        support_[picked] = target;
        level_[picked] = level_[target] + 1;
    } else {
        support_[picked] = -1;
        level_[picked] = 0;
    }
}

double BlockStackEnv::pile_resistance(int height_band) const {
    const int top = top_of_tallest_pile();
    if (top < 0) return std::numeric_limits<double>::infinity();
    const auto pile = pile_of(top);
    // Bad pile: the heavy block rests above at least one light block.
    bool heavy_above_light = false;
    for (std::size_t k = 0; k + 1 < pile.size(); ++k)
        if (pile[k] == heavy_) heavy_above_light = true;
    const double base = heavy_above_light ? params_.threshold_low : params_.threshold_high;
    const double height_factor = height_band == 0 ? 1.0 : 0.5;
    double mean_off = 0.0;
    int n = 0;
    for (int i : pile) {
        if (support_[i] < 0) continue;
        mean_off += std::sqrt(dist2(x_[i], y_[i], x_[support_[i]], y_[support_[i]]));
        ++n;
    }
    if (n > 0) mean_off /= n;
    const double align =
        1.0 - (1.0 - params_.align_floor) * std::min(mean_off / params_.align_scale, 1.0);
    return base * height_factor * align;
}

void BlockStackEnv::apply_irf_action(const std::vector<double>& a) {
    const double height_raw = a[0];
    const double direction = a[1];
    const double magnitude = a[2];
    const int top = top_of_tallest_pile();
    if (top < 0) return;  // nothing to poke over
    const int band = height_raw < 1.0 / 3 ? 0 : (height_raw < 2.0 / 3 ? 1 : 2);
    if (magnitude <= pile_resistance(band)) return;

    // Topple: the pile scatters along the poke direction, base block stays.
    const auto pile = pile_of(top);
    const double rad = direction * kPi / 180.0;
    const double cx = std::cos(rad), cy = std::sin(rad);
    for (int i : pile) {
        const int lvl = level_[i];
        if (lvl > 0) {
            x_[i] = std::clamp(x_[i] + cx * params_.scatter_step * lvl, 0.0, 1.0);
            y_[i] = std::clamp(y_[i] + cy * params_.scatter_step * lvl, 0.0, 1.0);
        }
        level_[i] = 0;
        support_[i] = -1;
    }
}

Obs BlockStackEnv::observe() const {
    Obs o;
    o.reserve(obs_dim());
    for (int i = 0; i < kBlocks; ++i) {
        o.push_back(x_[i]);
        o.push_back(y_[i]);
        o.push_back(level_[i] * params_.block_height);
        o.push_back(weight_[i]);
    }
    return o;
}

std::vector<double> BlockStackEnv::encode_fields() const {
    std::vector<double> f;
    for (int i = 0; i < kBlocks; ++i) {
        f.push_back(x_[i]);
        f.push_back(y_[i]);
        f.push_back(double(level_[i]));
        f.push_back(double(support_[i]));
        f.push_back(weight_[i]);
    }
    f.push_back(double(heavy_));
    return f;
}

void BlockStackEnv::decode_fields(const std::vector<double>& fields) {
    if (fields.size() != kBlocks * 5 + 1) throw EnvError("block snapshot needs 16 fields");
    for (int i = 0; i < kBlocks; ++i) {
        x_[i] = fields[i * 5 + 0];
        y_[i] = fields[i * 5 + 1];
        level_[i] = int(fields[i * 5 + 2]);
        support_[i] = int(fields[i * 5 + 3]);
        weight_[i] = fields[i * 5 + 4];
    }
    heavy_ = int(fields[kBlocks * 5]);
}

Snapshot BlockStackEnv::make_state(const std::array<BlockInit, kBlocks>& blocks,
                                   int heavy_index) {
    Snapshot s;
    s.kind = "block_stack";
    s.version = 1;
    for (const auto& b : blocks)
        s.fields.insert(s.fields.end(),
                        {b.x, b.y, double(b.level), double(b.support), b.weight});
    s.fields.push_back(double(heavy_index));
    return s;
}

}  // namespace lirf
