#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lirf/envs/blocks.hpp"
#include "lirf/envs/door.hpp"
#include "lirf/envs/registry.hpp"
#include "lirf/envs/screw.hpp"

using namespace lirf;

namespace {
EpisodeConfig cfg(int horizon, Phase phase, std::uint64_t seed = 0) {
    EpisodeConfig ec;
    ec.horizon = horizon;
    ec.phase = phase;
    ec.seed = seed;
    return ec;
}

Snapshot tower(double bx, double by, int heavy, int mid, int top, double off = 0.015) {
    std::array<BlockStackEnv::BlockInit, 3> blocks{};
    int bottom = 3 - mid - top;  // indices are a permutation of {0,1,2}
    blocks[std::size_t(bottom)] = {bx, by, 0, -1, -1.0};
    blocks[std::size_t(mid)] = {bx + off, by, 1, bottom, -1.0};
    blocks[std::size_t(top)] = {bx + off, by + off, 2, mid, -1.0};
    return BlockStackEnv::make_state(blocks, heavy);
}
}  // namespace

TEST_CASE("door lock: five rotation steps lock a 120 degree latch") {
    DoorLockEnv env;
    env.reset(cfg(10, Phase::task));
    env.restore_state(DoorEnvBase::make_state("door_lock", 120.0, 0.0, 0.0, true));
    for (int i = 0; i < 5; ++i) env.step({0.0, -20.0});
    CHECK(env.latch_angle() == doctest::Approx(20.0));
    CHECK(env.ground_truth_success());
}

TEST_CASE("door lock: 120 and 30 degree latches observe identically") {
    DoorLockEnv env;
    env.reset(cfg(10, Phase::task));
    const Obs a = env.restore_state(DoorEnvBase::make_state("door_lock", 120.0, 0.0, 0.0, false));
    const Obs b = env.restore_state(DoorEnvBase::make_state("door_lock", 30.0, 0.0, 0.0, false));
    CHECK(a == b);
    // but the oracle tells them apart
    env.restore_state(DoorEnvBase::make_state("door_lock", 10.0, 0.0, 0.0, false));
    CHECK(env.ground_truth_success());
    env.restore_state(DoorEnvBase::make_state("door_lock", 100.0, 0.0, 0.0, false));
    CHECK(!env.ground_truth_success());
}

TEST_CASE("door lock: grasp happens one step before rotation") {
    DoorLockEnv env;
    env.reset(cfg(10, Phase::task));
    env.restore_state(DoorEnvBase::make_state("door_lock", 120.0, 0.0, 0.0, false));
    env.step({0.0, -20.0});  // grasp only
    CHECK(env.latch_angle() == 120.0);
    CHECK(env.engaged());
    env.step({0.0, -20.0});
    CHECK(env.latch_angle() == 100.0);
}

TEST_CASE("door lock: rotation needs a closed door") {
    DoorLockEnv env;
    env.reset(cfg(10, Phase::task));
    env.restore_state(DoorEnvBase::make_state("door_lock", 120.0, 0.8, 0.0, true));
    env.step({0.0, -20.0});
    CHECK(env.latch_angle() == 120.0);  // gripper not on a closed door
}

TEST_CASE("door lock: locked door cannot be pushed open in the task phase") {
    DoorLockEnv env;
    env.reset(cfg(10, Phase::task));
    env.restore_state(DoorEnvBase::make_state("door_lock", 10.0, 0.0, 0.0, false));
    env.step({0.2, 0.0});
    CHECK(env.door_pos() <= env.params().closed_threshold);
}

TEST_CASE("door IRF: pulls reveal the latch state without moving it") {
    DoorLockEnv env;
    env.reset(cfg(5, Phase::irf));

    SUBCASE("locked door holds") {
        env.restore_state(DoorEnvBase::make_state("door_lock", 0.0, 0.0, 0.0, false));
        env.step({1.0});
        CHECK(env.door_pos() == 0.0);
        CHECK(env.latch_angle() == 0.0);
    }
    SUBCASE("unlocked door swings open") {
        env.restore_state(DoorEnvBase::make_state("door_lock", 90.0, 0.0, 0.0, false));
        const Obs o = env.step({1.0}).first;
        CHECK(env.door_pos() > 0.0);
        CHECK(o[0] > 0.0);
        CHECK(env.latch_angle() == 90.0);
    }
    SUBCASE("a weak pull reveals nothing") {
        env.restore_state(DoorEnvBase::make_state("door_lock", 90.0, 0.0, 0.0, false));
        env.step({0.0});
        CHECK(env.door_pos() == 0.0);
    }
}

TEST_CASE("door IRF: the latch never moves over random pull sequences") {
    DoorLockEnv env;
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        env.reset(cfg(5, Phase::task, trial));
        const double theta0 = rng.uniform(-400.0, 400.0);
        env.restore_state(
            DoorEnvBase::make_state("door_lock", theta0, rng.uniform(0.0, 1.0), 0.0, false));
        env.begin_irf_phase(5);
        bool done = false;
        while (!done) done = env.step({rng.uniform(0.0, 1.0)}).second;
        CHECK(env.latch_angle() == theta0);
    }
}

TEST_CASE("door close: success is a closed door, latch irrelevant") {
    DoorCloseEnv env;
    env.reset(cfg(10, Phase::task));
    env.restore_state(DoorEnvBase::make_state("door_close", 137.0, 0.0, 0.0, false));
    CHECK(env.ground_truth_success());
    env.restore_state(DoorEnvBase::make_state("door_close", 137.0, 0.5, 0.0, false));
    CHECK(!env.ground_truth_success());
}

TEST_CASE("screw kinematics and the aliased observation") {
    ScrewEnv env;
    env.reset(cfg(8, Phase::task));
    env.restore_state(ScrewEnv::make_state(0.0, false));
    const Obs o = env.step({30.0}).first;
    CHECK(env.valve_angle() == 30.0);
    CHECK(o[0] == 30.0);
    env.restore_state(ScrewEnv::make_state(100.0, false));
    CHECK(env.observe_now()[0] == 10.0);
    env.restore_state(ScrewEnv::make_state(90.0, false));
    CHECK(env.observe_now()[0] == 0.0);
    env.step({-10.0});
    CHECK(env.observe_now()[0] == 80.0);
}

TEST_CASE("screw: engagement band catches and locks") {
    ScrewEnv env;
    env.reset(cfg(8, Phase::task));
    env.restore_state(ScrewEnv::make_state(170.0, false));
    env.step({20.0});
    CHECK(env.tight());
    CHECK(env.valve_angle() == 190.0);  // the motor catches inside the band
    CHECK(env.ground_truth_success());
}

TEST_CASE("screw: tight is absorbing under every torque") {
    ScrewEnv env;
    env.reset(cfg(8, Phase::irf));
    env.restore_state(ScrewEnv::make_state(180.0, true));
    const Obs before = env.observe_now();
    env.step({-10.0});
    CHECK(env.observe_now() == before);
    CHECK(env.valve_angle() == 180.0);
    env.step({-30.0});
    CHECK(env.valve_angle() == 180.0);
    env.restore_state(ScrewEnv::make_state(180.0, true));
    env.begin_task_phase(8);
    CHECK(env.step({30.0}).second);  // tight absorbs the task episode
}

TEST_CASE("screw: tight and tight-minus-90 observations are identical") {
    ScrewEnv env;
    env.reset(cfg(8, Phase::task));
    env.restore_state(ScrewEnv::make_state(180.0, true));
    const Obs tight = env.observe_now();
    env.restore_state(ScrewEnv::make_state(90.0, false));
    CHECK(env.observe_now() == tight);
    CHECK(!env.ground_truth_success());
}

TEST_CASE("blocks: picking reveals the weight, once") {
    BlockStackEnv env;
    env.reset(cfg(6, Phase::task, 3));
    const int heavy = env.heavy_index();
    const auto b = env.block(heavy);
    CHECK(b.weight == -1.0);
    env.step({b.x, b.y, 0.5, 0.5});
    CHECK(env.block(heavy).weight == 1.0);
    // light block reveals as 0
    const int light = (heavy + 1) % 3;
    const auto lb = env.block(light);
    env.step({lb.x, lb.y, 0.2, 0.2});
    CHECK(env.block(light).weight == 0.0);
    // weights never revert over further activity
    Rng rng(5);
    for (int i = 0; i < 30 && !env.done(); ++i) {
        env.begin_task_phase(6);
        env.step({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0),
                  rng.uniform(0.0, 1.0)});
        CHECK(env.block(heavy).weight == 1.0);
        CHECK(env.block(light).weight == 0.0);
    }
}

TEST_CASE("blocks: stacking all three with the heavy at the bottom succeeds") {
    BlockStackEnv env;
    env.reset(cfg(6, Phase::task, 11));
    const int heavy = env.heavy_index();
    const auto hb = env.block(heavy);
    int others[2], oi = 0;
    for (int i = 0; i < 3; ++i)
        if (i != heavy) others[oi++] = i;
    const auto b1 = env.block(others[0]);
    env.step({b1.x, b1.y, hb.x + 0.01, hb.y});
    const auto b2 = env.block(others[1]);
    env.step({b2.x, b2.y, hb.x + 0.01, hb.y + 0.01});
    CHECK(env.tower_standing());
    CHECK(env.ground_truth_success());
    // heavy on top instead: standing but not a success
    env.restore_state(tower(0.5, 0.5, /*heavy=*/2, /*mid=*/1, /*top=*/2));
    CHECK(env.tower_standing());
    CHECK(!env.ground_truth_success());
}

TEST_CASE("blocks: pick misses when nothing is within the capture radius") {
    BlockStackEnv env;
    env.reset(cfg(6, Phase::task, 19));
    const Snapshot before = env.snapshot_state();
    // table corner far away from the scattered blocks
    env.step({0.999, 0.001, 0.5, 0.5});
    Snapshot after = env.snapshot_state();
    CHECK(before == after);
}

TEST_CASE("blocks: buried blocks cannot be picked") {
    BlockStackEnv env;
    env.reset(cfg(6, Phase::task, 23));
    env.restore_state(tower(0.5, 0.5, 0, 1, 2));
    const Snapshot before = env.snapshot_state();
    env.step({0.5, 0.5, 0.9, 0.9});  // nearest is the buried base
    CHECK(env.snapshot_state() == before);
}

TEST_CASE("blocks: poke outcomes at the calibrated magnitude") {
    BlockStackEnv env;
    env.reset(cfg(3, Phase::irf, 7));

    SUBCASE("heavy on top topples at 2.5 cm from the bottom") {
        env.restore_state(tower(0.5, 0.5, /*heavy=*/2, /*mid=*/1, /*top=*/2));
        env.step({0.0, 90.0, 2.5});
        CHECK(!env.tower_standing());
    }
    SUBCASE("heavy at bottom stands at 2.5 cm from the bottom") {
        env.restore_state(tower(0.5, 0.5, /*heavy=*/0, /*mid=*/1, /*top=*/2));
        env.step({0.0, 90.0, 2.5});
        CHECK(env.tower_standing());
        CHECK(env.ground_truth_success());
    }
    SUBCASE("zero magnitude never topples anything") {
        for (int heavy : {0, 2}) {
            env.restore_state(tower(0.5, 0.5, heavy, 1, 2));
            env.step({0.9, 45.0, 0.0});
            CHECK(env.tower_standing());
        }
    }
    SUBCASE("toppling scatters observably and is deterministic") {
        env.restore_state(tower(0.5, 0.5, 2, 1, 2));
        const Obs before = env.observe_now();
        env.step({0.0, 30.0, 5.0});
        const Obs after = env.observe_now();
        CHECK(before != after);
        env.restore_state(tower(0.5, 0.5, 2, 1, 2));
        env.step({0.0, 30.0, 5.0});
        CHECK(env.observe_now() == after);
    }
    SUBCASE("pokes never reveal weights") {
        env.restore_state(tower(0.5, 0.5, 2, 1, 2));
        env.step({0.0, 30.0, 5.0});
        for (int i = 0; i < 3; ++i) CHECK(env.block(i).weight == -1.0);
    }
}

TEST_CASE("blocks: phase switch resets hefting knowledge") {
    BlockStackEnv env;
    env.reset(cfg(6, Phase::task, 31));
    const auto b = env.block(0);
    env.step({b.x, b.y, 0.9, 0.9});
    CHECK(env.block(0).weight != -1.0);
    env.begin_irf_phase(3);
    CHECK(env.block(0).weight == -1.0);
}

TEST_CASE("exactly one heavy block ever maps to weight one") {
    BlockStackEnv env;
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        env.reset(cfg(6, Phase::task, 100 + trial));
        bool done = false;
        while (!done)
            done = env.step({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0),
                             rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)})
                       .second;
        int heavies = 0;
        for (int i = 0; i < 3; ++i) heavies += env.block(i).weight == 1.0;
        CHECK(heavies <= 1);
    }
}

TEST_CASE("registry knows the stable kind identifiers") {
    for (const char* k : {"door_lock", "block_stack", "screw", "door_close"}) {
        CHECK(is_known_env_kind(k));
        auto env = make_env(k);
        CHECK(env->kind() == k);
    }
    CHECK(!is_known_env_kind("bottle_cap"));
    CHECK_THROWS_AS(make_env("bottle_cap"), EnvError);
    CHECK_THROWS_AS(make_env("screw", {{"no_such_param", 1.0}}), EnvError);
}
