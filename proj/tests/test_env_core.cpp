#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lirf/envs/door.hpp"
#include "lirf/envs/registry.hpp"
#include "lirf/envs/screw.hpp"
#include "lirf/pipeline.hpp"

using namespace lirf;

namespace {
EpisodeConfig task_cfg(int horizon, std::uint64_t seed) {
    EpisodeConfig ec;
    ec.horizon = horizon;
    ec.phase = Phase::task;
    ec.seed = seed;
    return ec;
}
}  // namespace

TEST_CASE("reset samples the initial distribution") {
    DoorLockEnv env;
    const Obs o = env.reset(task_cfg(10, 123));
    CHECK(env.latch_angle() > 90.0);
    CHECK(env.latch_angle() < 180.0);
    CHECK(o.size() == 4);
    // two resets with the same seed are identical
    DoorLockEnv env2;
    const Obs o2 = env2.reset(task_cfg(10, 123));
    CHECK(o == o2);
    const Obs o3 = env2.reset(task_cfg(10, 124));
    CHECK(o != o3);
}

TEST_CASE("restore from snapshot reproduces the aliased observation") {
    DoorLockEnv env;
    env.reset(task_cfg(10, 1));
    const Snapshot s30 = DoorEnvBase::make_state("door_lock", 30.0, 0.0, 0.05, false);
    const Obs o = env.restore_state(s30);
    CHECK(o[2] == 30.0);
    const Snapshot s100 = DoorEnvBase::make_state("door_lock", 100.0, 0.0, 0.05, false);
    CHECK(env.restore_state(s100)[2] == 10.0);
    CHECK(env.steps_taken() == 0);
}

TEST_CASE("snapshot restore round-trips bit-exactly") {
    ScrewEnv env;
    env.reset(task_cfg(8, 77));
    env.step({17.3});
    env.step({-4.2});
    const Snapshot a = env.snapshot_state();
    const auto bytes = a.serialize();
    const Snapshot b = Snapshot::deserialize(bytes);
    CHECK(a == b);
    env.restore_state(b);
    CHECK(env.snapshot_state() == a);
}

TEST_CASE("restore plus identical actions reproduces the trajectory") {
    ScrewEnv env;
    env.reset(task_cfg(8, 5));
    env.step({12.0});
    const Snapshot mid = env.snapshot_state();
    std::vector<Obs> first, second;
    for (double t : {9.0, -3.0, 22.0}) first.push_back(env.step({t}).first);
    env.restore_state(mid);
    for (double t : {9.0, -3.0, 22.0}) second.push_back(env.step({t}).first);
    CHECK(first == second);
}

TEST_CASE("snapshot kind mismatch is an error") {
    ScrewEnv screw;
    screw.reset(task_cfg(5, 1));
    const Snapshot door = DoorEnvBase::make_state("door_lock", 30.0, 0.0, 0.0, false);
    CHECK_THROWS_AS(screw.restore_state(door), EnvError);
    EpisodeConfig ec = task_cfg(5, 1);
    ec.restore_from = door;
    CHECK_THROWS_AS(screw.reset(ec), EnvError);
}

TEST_CASE("step after done is an error and actions clamp to bounds") {
    ScrewEnv env;
    env.reset(task_cfg(1, 3));
    // double the torque bound behaves exactly like the bound
    ScrewEnv env2;
    env2.reset(task_cfg(1, 3));
    const auto a = env.step({60.0});
    const auto b = env2.step({30.0});
    CHECK(a.first == b.first);
    CHECK(a.second);
    CHECK_THROWS_AS(env.step({1.0}), EnvError);
}

TEST_CASE("restore of a success snapshot satisfies the oracle") {
    DoorLockEnv env;
    env.reset(task_cfg(10, 1));
    env.restore_state(DoorEnvBase::make_state("door_lock", 20.0, 0.0, 0.1, false));
    CHECK(env.ground_truth_success());
}

TEST_CASE("oracle queries are counted") {
    DoorLockEnv env;
    env.reset(task_cfg(10, 1));
    CHECK(env.gt_query_count() == 0);
    env.ground_truth_success();
    env.ground_truth_success();
    CHECK(env.gt_query_count() == 2);
    env.reset_gt_query_count();
    CHECK(env.gt_query_count() == 0);
}

TEST_CASE("history window pads with the sentinel and keeps slots in order") {
    HistoryWindow w(2, 1, 3, {1.0, 2.0});
    const auto f0 = w.features();
    CHECK(f0.size() == 9);
    for (double v : f0) CHECK(v == HistoryWindow::kPad);
    w.push_obs({1.0, 4.0});
    const auto f1 = w.features();
    // slots: pad, pad, (obs scaled, pad action)
    CHECK(f1[6] == 1.0);
    CHECK(f1[7] == 2.0);
    CHECK(f1[8] == HistoryWindow::kPad);
    CHECK(f1[0] == HistoryWindow::kPad);
    w.push_action({0.5});
    w.push_obs({2.0, 6.0});
    const auto f2 = w.features();
    CHECK(f2[3] == 1.0);
    CHECK(f2[5] == HistoryWindow::kPad);
    CHECK(f2[6] == 2.0);
    CHECK(f2[7] == 3.0);
    CHECK(f2[8] == 0.5);
}

TEST_CASE("rollout contracts") {
    auto env = make_env("screw");
    Rng rng(1);

    struct ZeroPolicy : Policy {
        std::size_t action_dim() const override { return 1; }
        int history_len() const override { return 2; }
        std::vector<double> act(const std::vector<double>&, bool, Rng&) override {
            return {0.0};
        }
    } zero;

    SUBCASE("deterministic policy and fixed seed give identical trajectories") {
        const auto t1 = rollout(zero, *env, task_cfg(5, 9), nullptr, false, rng);
        const auto t2 = rollout(zero, *env, task_cfg(5, 9), nullptr, false, rng);
        CHECK(t1.steps.size() == t2.steps.size());
        CHECK(t1.terminal_obs == t2.terminal_obs);
        for (std::size_t i = 0; i < t1.steps.size(); ++i) {
            CHECK(t1.steps[i].obs == t2.steps[i].obs);
            CHECK(t1.steps[i].action == t2.steps[i].action);
        }
    }
    SUBCASE("horizon one gives exactly one transition") {
        const auto t = rollout(zero, *env, task_cfg(1, 9), nullptr, false, rng);
        CHECK(t.steps.size() == 1);
        CHECK(t.steps.back().done);
    }
    SUBCASE("constant reward function fills the slots") {
        const auto t = rollout(zero, *env, task_cfg(5, 9),
                               [](const Obs&) { return 1.0; }, false, rng);
        CHECK(t.reward_sum() == double(t.steps.size()));
    }
    SUBCASE("done flag true only at the final element") {
        const auto t = rollout(zero, *env, task_cfg(5, 9), nullptr, false, rng);
        for (std::size_t i = 0; i + 1 < t.steps.size(); ++i) CHECK(!t.steps[i].done);
        CHECK(t.steps.back().done);
    }
}

TEST_CASE("rollout rejects mismatched action dimensions") {
    auto env = make_env("door_lock");
    Rng rng(1);
    struct Bad : Policy {
        std::size_t action_dim() const override { return 3; }
        int history_len() const override { return 1; }
        std::vector<double> act(const std::vector<double>&, bool, Rng&) override {
            return {0, 0, 0};
        }
    } bad;
    CHECK_THROWS_AS(rollout(bad, *env, task_cfg(3, 1), nullptr, false, rng), EnvError);
}

TEST_CASE("snapshot debug text names fields") {
    const Snapshot s = DoorEnvBase::make_state("door_lock", 30.0, 0.0, 0.1, true);
    DoorLockEnv env;
    const auto text = s.debug_text(env.field_names());
    CHECK(text.find("door_lock") != std::string::npos);
    CHECK(text.find("theta=30") != std::string::npos);
}
