// lirf: batch experiment runner for the interactive-reward-function pipeline.
//
// Subcommands:
//   train   - run phases 1..4 for every configured seed
//   eval    - re-evaluate checkpointed runs (success rates, verification
//             accuracy, perform-verify success); writes eval.csv per run
//   study   - lambda | positives | verify_curve | gt_retry | door_close
//   report  - merge run directories into a consolidated table
//   verify  - single perform-verify rollout with a JSON trace dump
//
// LIRF_DETERMINISTIC=1 forces sequential execution for bit-exact repeats.

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "lirf/parallel.hpp"
#include "lirf/pipeline.hpp"
#include "lirf/stats.hpp"
#include "lirf/studies.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lirf;

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    std::string task;
    int jobs = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON run configuration");
    cmd->add_option("--seed", o.seeds, "seed list (overrides config)")->delimiter(',');
    cmd->add_option("--out", o.out_dir, "output directory (overrides config)");
    cmd->add_option("--task", o.task, "task kind (overrides config)");
    cmd->add_option("--jobs", o.jobs, "worker pool size; 0 = hardware threads");
}

RunConfig resolve_config(const CommonOpts& o) {
    RunConfig cfg;
    if (!o.config_path.empty()) {
        cfg = RunConfig::from_file(o.config_path);
    } else {
        if (!o.task.empty()) cfg.task = o.task;
        cfg.finalize();
    }
    if (!o.task.empty() && o.task != cfg.task) {
        cfg.task = o.task;
        cfg.sac.history = 0;
        cfg.irf_history = 0;
        cfg.phases.phase1_steps = cfg.phases.phase3_steps = cfg.phases.phase4_steps = 0;
        cfg.bank.positive_budget = 0;
        cfg.finalize();
    }
    if (!o.seeds.empty()) cfg.seeds = o.seeds;
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (o.jobs >= 0) cfg.jobs = o.jobs;
    return cfg;
}

std::string run_dir_for(const RunConfig& cfg, std::uint64_t seed) {
    return cfg.out_dir + "/" + cfg.task + "/" + std::to_string(seed);
}

int cmd_train(const CommonOpts& o) {
    const RunConfig cfg = resolve_config(o);
    parallel_for_index(resolve_jobs(cfg.jobs), cfg.seeds.size(), [&](std::size_t i) {
        TrainedRun tr = train_and_evaluate(cfg, cfg.seeds[i], /*write_artifacts=*/true);
        std::printf("[seed %llu] vice=%.3f lirf=%.3f lirf+verify=%.3f irf_acc=%.3f\n",
                    (unsigned long long)cfg.seeds[i], tr.success_vice, tr.success_lirf,
                    tr.success_verify, tr.irf_accuracy.accuracy);
    });
    std::printf("artifacts under %s/%s\n", cfg.out_dir.c_str(), cfg.task.c_str());
    return 0;
}

int cmd_eval(const CommonOpts& o) {
    const RunConfig cfg = resolve_config(o);
    std::vector<double> vice(cfg.seeds.size()), lirf(cfg.seeds.size()),
        verify(cfg.seeds.size()), acc(cfg.seeds.size());
    parallel_for_index(resolve_jobs(cfg.jobs), cfg.seeds.size(), [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        const std::string dir = run_dir_for(cfg, seed);
        LoadedArtifacts art = load_run_artifacts(cfg, dir);
        auto env = make_env(cfg.task, cfg.env_overrides);
        const TaskDefaults td = task_defaults(cfg.task);
        MetricsWriter out(dir + "/eval.csv");
        vice[i] = evaluate_success_rate(*art.pi0, *env, td.task_horizon, cfg.eval.episodes,
                                        derive_seed(seed, "eval"));
        lirf[i] = evaluate_success_rate(*art.pi_t, *env, td.task_horizon, cfg.eval.episodes,
                                        derive_seed(seed, "eval"));
        const IrfAccuracy ia =
            evaluate_irf_accuracy(*art.pi_r, *art.classifier, art.test_set, *env,
                                  td.irf_horizon, derive_seed(seed, "eval.irf"));
        acc[i] = ia.accuracy;
        int wins = 0;
        for (int e = 0; e < cfg.eval.episodes; ++e) {
            EpisodeConfig ec;
            ec.horizon = td.task_horizon;
            ec.phase = Phase::task;
            ec.seed = derive_seed(seed, "verify.episode", std::uint64_t(e));
            const VerifyTrace t =
                verify_execute(*art.pi_t, *art.pi_r, *art.classifier, *env,
                               td.task_horizon, td.irf_horizon, ec, 10);
            wins += t.final_gt ? 1 : 0;
        }
        verify[i] = double(wins) / double(cfg.eval.episodes);
        out.append({0, 0, "success.vice.final", vice[i], seed, cfg.task});
        out.append({0, 0, "success.lirf.final", lirf[i], seed, cfg.task});
        out.append({0, 0, "success.lirf_verify.final", verify[i], seed, cfg.task});
        out.append({0, 0, "irf.accuracy.final", acc[i], seed, cfg.task});
        out.append({0, 0, "eval.episodes", double(cfg.eval.episodes), seed, cfg.task});
        out.append({0, 0, "eval.seed_count", double(cfg.seeds.size()), seed, cfg.task});
        out.flush();
    });
    std::printf("%-22s %8s %8s  (task=%s, %zu seeds x %d episodes)\n", "method", "mean",
                "stderr", cfg.task.c_str(), cfg.seeds.size(), cfg.eval.episodes);
    std::printf("%-22s %8.3f %8.3f\n", "vice", mean(vice), stderr_mean(vice));
    std::printf("%-22s %8.3f %8.3f\n", "lirf", mean(lirf), stderr_mean(lirf));
    std::printf("%-22s %8.3f %8.3f\n", "lirf+verify", mean(verify), stderr_mean(verify));
    std::printf("%-22s %8.3f %8.3f\n", "irf_accuracy", mean(acc), stderr_mean(acc));
    return 0;
}

int cmd_study(const CommonOpts& o, const std::string& which) {
    const RunConfig cfg = resolve_config(o);
    json summary;
    if (which == "lambda")
        summary = study_lambda(cfg);
    else if (which == "positives")
        summary = study_positives(cfg);
    else if (which == "verify_curve")
        summary = study_verify_curve(cfg);
    else if (which == "gt_retry")
        summary = study_gt_retry(cfg);
    else if (which == "door_close")
        summary = study_door_close(cfg);
    else {
        std::fprintf(stderr, "unknown study: %s\n", which.c_str());
        return 2;
    }
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out_path) {
    if (dirs.empty()) {
        std::fprintf(stderr, "report needs at least one run directory\n");
        return 2;
    }
    std::uint64_t hash = 0;
    bool have_hash = false;
    // metric -> seed -> last value
    std::map<std::string, std::map<std::uint64_t, double>> latest;
    std::string task;
    std::size_t rows_seen = 0;
    for (const auto& dir : dirs) {
        std::ifstream cf(dir + "/config.json");
        if (cf) {
            const json j = json::parse(cf);
            const std::uint64_t h = j.at("config_hash").get<std::uint64_t>();
            if (have_hash && h != hash)
                throw ConfigError("conflicting config hashes across merged runs: " + dir);
            hash = h;
            have_hash = true;
        }
        for (const char* name : {"/metrics.csv", "/eval.csv"}) {
            const std::string p = dir + name;
            if (!fs::exists(p)) continue;
            for (const auto& r : read_metrics(p)) {
                latest[r.metric_name][r.seed] = r.value;
                task = r.task;
                ++rows_seen;
            }
        }
    }
    if (rows_seen == 0) {
        std::printf("no data: merged runs contain no metric rows\n");
        return 0;
    }
    std::string out = "metric,mean,stderr,seeds\n";
    std::printf("%-34s %10s %10s %6s   (task=%s)\n", "metric", "mean", "stderr", "seeds",
                task.c_str());
    for (const auto& [name, by_seed] : latest) {
        std::vector<double> vals;
        for (const auto& [s, v] : by_seed) vals.push_back(v);
        const double m = mean(vals), se = stderr_mean(vals);
        std::printf("%-34s %10.4f %10.4f %6zu\n", name.c_str(), m, se, vals.size());
        out += name + "," + format_metric_value(m) + "," + format_metric_value(se) + "," +
               std::to_string(vals.size()) + "\n";
    }
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::trunc | std::ios::binary);
        f << out;
    }
    return 0;
}

int cmd_verify(const CommonOpts& o, std::uint64_t episode_seed) {
    RunConfig cfg = resolve_config(o);
    const std::uint64_t seed = cfg.seeds.front();
    const std::string dir = run_dir_for(cfg, seed);
    LoadedArtifacts art = load_run_artifacts(cfg, dir);
    auto env = make_env(cfg.task, cfg.env_overrides);
    const TaskDefaults td = task_defaults(cfg.task);
    EpisodeConfig ec;
    ec.horizon = td.task_horizon;
    ec.phase = Phase::task;
    ec.seed = episode_seed;
    const VerifyTrace t = verify_execute(*art.pi_t, *art.pi_r, *art.classifier, *env,
                                         td.task_horizon, td.irf_horizon, ec, 10);
    json out;
    out["task"] = cfg.task;
    out["seed"] = seed;
    out["episode_seed"] = episode_seed;
    out["iterations"] = t.iterations;
    out["accepted"] = t.accepted;
    out["final_gt_success"] = t.final_gt;
    json attempts = json::array();
    for (const auto& a : t.attempts) {
        attempts.push_back({{"index", a.index},
                            {"d_star", a.d_star},
                            {"accepted", a.accepted},
                            {"task_steps", a.task_traj.steps.size()},
                            {"irf_steps", a.irf_traj.steps.size()},
                            {"o_star", a.irf_traj.terminal_obs}});
    }
    out["attempts"] = attempts;
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"interactive-reward-function training and benchmark harness"};
    app.require_subcommand(1);

    CommonOpts train_o, eval_o, study_o, verify_o;
    std::string study_name;
    std::vector<std::string> report_dirs;
    std::string report_out;
    std::uint64_t episode_seed = 0;

    add_common(app.add_subcommand("train", "run the full pipeline"), train_o);
    add_common(app.add_subcommand("eval", "evaluate checkpointed runs"), eval_o);
    auto* study = app.add_subcommand("study", "run a named study");
    study->add_option("name", study_name,
                      "lambda | positives | verify_curve | gt_retry | door_close")
        ->required();
    add_common(study, study_o);
    auto* report = app.add_subcommand("report", "merge run directories");
    report->add_option("dirs", report_dirs, "run directories")->required();
    report->add_option("--out", report_out, "write the merged table here");
    auto* verify = app.add_subcommand("verify", "one perform-verify rollout");
    add_common(verify, verify_o);
    verify->add_option("--episode-seed", episode_seed, "episode seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("train")) return cmd_train(train_o);
        if (app.got_subcommand("eval")) return cmd_eval(eval_o);
        if (app.got_subcommand("study")) return cmd_study(study_o, study_name);
        if (app.got_subcommand("report")) return cmd_report(report_dirs, report_out);
        if (app.got_subcommand("verify")) return cmd_verify(verify_o, episode_seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
