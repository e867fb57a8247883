#pragma once

#include <array>

#include "lirf/env.hpp"

namespace lirf {

// Three visually identical blocks on a unit table, exactly one heavy. Task
// view: pick-and-place primitive, 4-D action (pick x/y, place x/y). Picking
// hefts the block and reveals its weight feature for the rest of the episode.
// IRF view: poke primitive, 3-D action (height, direction, magnitude). A pile
// topples when the poke magnitude exceeds its resistance; resistance depends
// on whether the heavy block sits above a light one, on the poke height, and
// on how well the pile is aligned.
struct BlockParams {
    double capture_radius = 0.15;  // pick snap distance, table units
    double stack_snap = 0.15;      // place-on-column snap distance
    double block_height = 0.1;
    double threshold_high = 12.0;  // resistance base, heavy-at-bottom pile (cm)
    double threshold_low = 3.4;    // resistance base, heavy above a light (cm)
    double align_scale = 0.03;     // mean offset (m) that reaches the floor factor
    double align_floor = 0.4;      // resistance factor range: [floor, 1]
    double poke_max = 5.0;         // cm
    double scatter_step = 0.2;     // displacement per level when a pile topples
    double min_separation = 0.25;  // initial scatter spacing
};

struct BlockView {
    double x, y;
    int level;      // 0 = on the table
    int support;    // index of the block underneath, -1 = table
    double weight;  // -1 unknown, 1 heavy, 0 light
};

class BlockStackEnv final : public Env {
public:
    static constexpr int kBlocks = 3;

    explicit BlockStackEnv(BlockParams params = {});

    const std::string& kind() const override;
    std::size_t obs_dim() const override { return kBlocks * 4; }
    const ActionSpec& action_spec(Phase phase) const override;
    std::vector<double> obs_scale() const override;
    std::vector<std::string> field_names() const override;

    // Per-object feature layout of the flat observation, used by the
    // permutation-invariant nets.
    static constexpr std::size_t kObjFeatures = 4;

    BlockView block(int i) const;
    int heavy_index() const { return heavy_; }
    bool tower_standing() const;  // some pile holds all three blocks
    // Poke resistance of the current tallest pile, cm (test/oracle hook).
    double pile_resistance(int height_band) const;

    struct BlockInit {
        double x, y;
        int level;
        int support;
        double weight;
    };
    static Snapshot make_state(const std::array<BlockInit, kBlocks>& blocks, int heavy_index);

protected:
    void sample_initial(Rng& rng) override;
    void apply_task_action(const std::vector<double>& a) override;
    void apply_irf_action(const std::vector<double>& a) override;
    bool oracle() const override;
    Obs observe() const override;
    std::vector<double> encode_fields() const override;
    void decode_fields(const std::vector<double>& fields) override;
    void scrub_epistemic() override {
        for (auto& w : weight_) w = -1.0;  // the poking effector has not hefted anything
    }

private:
    bool exposed(int i) const;
    int top_of_tallest_pile() const;
    std::vector<int> pile_of(int top) const;  // indices from top down to the base

    BlockParams params_;
    ActionSpec task_spec_, irf_spec_;
    double x_[kBlocks], y_[kBlocks];
    int level_[kBlocks], support_[kBlocks];
    double weight_[kBlocks];
    int heavy_ = 0;
};

}  // namespace lirf
