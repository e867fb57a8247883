#include "lirf/studies.hpp"

#include <filesystem>
#include <fstream>

#include "lirf/parallel.hpp"
#include "lirf/stats.hpp"

namespace lirf {

namespace fs = std::filesystem;
using nlohmann::json;

TrainedRun train_and_evaluate(const RunConfig& cfg, std::uint64_t seed,
                              bool write_artifacts) {
    TrainedRun tr;
    tr.run = std::make_unique<PipelineRun>(cfg, seed, write_artifacts);
    tr.run->run_all();
    tr.success_vice = tr.run->eval_success(tr.run->pi0(), "success.vice.final", 1);
    tr.success_lirf = tr.run->eval_success(tr.run->pi_t(), "success.lirf.final", 4);
    tr.irf_accuracy = tr.run->eval_irf(tr.run->pi_r(), "irf.accuracy.final", 3);
    tr.success_verify = verify_success_sweep(*tr.run, cfg.eval.episodes);
    tr.run->metrics().append({0, 0, "success.lirf_verify.final", tr.success_verify, seed,
                              cfg.task});
    tr.run->metrics().flush();
    return tr;
}

double verify_success_sweep(PipelineRun& run, int episodes, int max_iter) {
    int wins = 0;
    for (int i = 0; i < episodes; ++i) {
        const VerifyTrace t = run.run_verify(
            derive_seed(run.seed(), "verify.episode", std::uint64_t(i)), max_iter);
        wins += t.final_gt ? 1 : 0;
    }
    return double(wins) / double(episodes);
}

bool verify_success_at_cap(const VerifyTrace& trace, int k) {
    if (trace.attempts.empty()) return false;
    const int upto = std::min<int>(k, int(trace.attempts.size()));
    // If some attempt <= k was accepted, the policy stopped there; otherwise
    // the world is whatever attempt k left behind.
    for (int i = 0; i < upto; ++i)
        if (trace.attempts[std::size_t(i)].accepted)
            return trace.attempts[std::size_t(i)].gt_after;
    return trace.attempts[std::size_t(upto - 1)].gt_after;
}

void write_study_csv(const std::string& path, const std::string& header,
                     const std::vector<std::string>& rows) {
    const auto dir = fs::path(path).parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    if (!f) throw ConfigError("cannot write study csv: " + path);
    f << header << "\n";
    for (const auto& r : rows) f << r << "\n";
}

void write_study_summary(const std::string& path, const json& summary) {
    const auto dir = fs::path(path).parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    if (!f) throw ConfigError("cannot write study summary: " + path);
    f << summary.dump(2) << "\n";
}

namespace {

std::string fmt(double v) { return format_metric_value(v); }

}  // namespace

json study_lambda(const RunConfig& base, const std::vector<double>& lambdas) {
    const std::string dir = base.out_dir + "/studies/lambda";
    std::vector<std::string> rows;
    // success[l][s]
    std::vector<std::vector<double>> success(lambdas.size(),
                                             std::vector<double>(base.seeds.size(), 0.0));
    parallel_for_index(resolve_jobs(base.jobs), base.seeds.size(), [&](std::size_t si) {
        RunConfig cfg = base;
        cfg.out_dir = dir + "/runs";
        PipelineRun run(cfg, base.seeds[si], /*write_artifacts=*/false);
        run.build_bank();
        run.phase1_bootstrap();
        run.phase2_collect_negatives();
        run.phase3_train_irf();
        for (std::size_t li = 0; li < lambdas.size(); ++li) {
            auto agent = run.train_phase4_variant(lambdas[li], nullptr,
                                                  "lambda" + std::to_string(li));
            success[li][si] =
                evaluate_success_rate(*agent, run.eval_env(), run.task_horizon(),
                                      cfg.eval.episodes, derive_seed(base.seeds[si], "eval"));
        }
    });
    json summary;
    summary["study"] = "lambda";
    summary["task"] = base.task;
    json table = json::array();
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        for (std::size_t si = 0; si < base.seeds.size(); ++si)
            rows.push_back(fmt(lambdas[li]) + "," + std::to_string(base.seeds[si]) + "," +
                           fmt(success[li][si]));
        table.push_back({{"lambda", lambdas[li]},
                         {"mean", mean(success[li])},
                         {"stderr", stderr_mean(success[li])}});
    }
    summary["rows"] = table;
    write_study_csv(dir + "/curve.csv", "lambda,seed,success", rows);
    write_study_summary(dir + "/summary.json", summary);
    return summary;
}

json study_positives(const RunConfig& base, const std::vector<int>& budgets) {
    const std::string dir = base.out_dir + "/studies/positives";
    std::vector<std::string> rows;
    std::vector<std::vector<double>> accuracy(budgets.size(),
                                              std::vector<double>(base.seeds.size(), 0.0));
    std::vector<std::vector<double>> distinct(budgets.size(),
                                              std::vector<double>(base.seeds.size(), 0.0));
    std::vector<std::vector<double>> episodes(budgets.size(),
                                              std::vector<double>(base.seeds.size(), 0.0));
    parallel_for_index(resolve_jobs(base.jobs), base.seeds.size(), [&](std::size_t si) {
        RunConfig cfg = base;
        cfg.out_dir = dir + "/runs";
        // Phases 1-2 are budget-independent (the classifier trains on the
        // companion observation set); the verification policy is retrained
        // per actionable-example budget.
        PipelineRun run(cfg, base.seeds[si], /*write_artifacts=*/false);
        run.build_bank();
        run.phase1_bootstrap();
        run.phase2_collect_negatives();
        for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
            ExampleBank sub;
            int kept = 0;
            for (std::size_t i = 0; i < run.bank().size(); ++i) {
                const BankEntry& e = run.bank().entry(i);
                if (e.label == ExampleLabel::positive) {
                    if (kept < budgets[bi]) {
                        sub.insert_positive(e.snap, run.eval_env(), e.provenance_seed);
                        ++kept;
                    }
                } else {
                    sub.insert_negative(e.snap, run.eval_env(), e.provenance_seed);
                }
            }
            for (const auto& o : run.bank().positive_observations())
                sub.add_positive_observation(o);
            auto agent = run.train_irf_variant(sub, "budget" + std::to_string(budgets[bi]));
            const IrfAccuracy acc = evaluate_irf_accuracy(
                *agent, run.classifier(), run.heldout_test_set(), run.eval_env(),
                run.irf_horizon(), derive_seed(base.seeds[si], "eval.irf"));
            accuracy[bi][si] = acc.accuracy;
            distinct[bi][si] = double(sub.distinct_used(ExampleLabel::positive));
            episodes[bi][si] = double(sub.episodes_with(ExampleLabel::positive));
        }
    });
    json summary;
    summary["study"] = "positives";
    summary["task"] = base.task;
    json table = json::array();
    for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
        for (std::size_t si = 0; si < base.seeds.size(); ++si)
            rows.push_back(std::to_string(budgets[bi]) + "," +
                           std::to_string(base.seeds[si]) + "," + fmt(accuracy[bi][si]) +
                           "," + fmt(distinct[bi][si]) + "," + fmt(episodes[bi][si]));
        table.push_back({{"budget", budgets[bi]},
                         {"accuracy_mean", mean(accuracy[bi])},
                         {"accuracy_stderr", stderr_mean(accuracy[bi])},
                         {"distinct_used_mean", mean(distinct[bi])},
                         {"episodes_with_positives_mean", mean(episodes[bi])}});
    }
    summary["rows"] = table;
    write_study_csv(dir + "/curve.csv",
                    "budget,seed,irf_accuracy,distinct_positives_used,episodes_with_positives",
                    rows);
    write_study_summary(dir + "/summary.json", summary);
    return summary;
}

json study_verify_curve(const RunConfig& base, int k_max) {
    const std::string dir = base.out_dir + "/studies/verify_curve";
    std::vector<std::vector<double>> curve(std::size_t(k_max),
                                           std::vector<double>(base.seeds.size(), 0.0));
    parallel_for_index(resolve_jobs(base.jobs), base.seeds.size(), [&](std::size_t si) {
        RunConfig cfg = base;
        cfg.out_dir = dir + "/runs";
        TrainedRun tr = train_and_evaluate(cfg, base.seeds[si], /*write_artifacts=*/false);
        std::vector<int> wins(std::size_t(k_max), 0);
        for (int e = 0; e < cfg.eval.episodes; ++e) {
            const VerifyTrace t = tr.run->run_verify(
                derive_seed(base.seeds[si], "curve.episode", std::uint64_t(e)), k_max);
            for (int k = 1; k <= k_max; ++k)
                wins[std::size_t(k - 1)] += verify_success_at_cap(t, k) ? 1 : 0;
        }
        for (int k = 1; k <= k_max; ++k)
            curve[std::size_t(k - 1)][si] =
                double(wins[std::size_t(k - 1)]) / double(cfg.eval.episodes);
    });
    std::vector<std::string> rows;
    json table = json::array();
    for (int k = 1; k <= k_max; ++k) {
        const auto& c = curve[std::size_t(k - 1)];
        for (std::size_t si = 0; si < base.seeds.size(); ++si)
            rows.push_back(std::to_string(k) + "," + std::to_string(base.seeds[si]) + "," +
                           fmt(c[si]));
        table.push_back(
            {{"k", k}, {"mean", mean(c)}, {"stderr", stderr_mean(c)}});
    }
    json summary;
    summary["study"] = "verify_curve";
    summary["task"] = base.task;
    summary["rows"] = table;
    write_study_csv(dir + "/curve.csv", "iterations,seed,success", rows);
    write_study_summary(dir + "/summary.json", summary);
    return summary;
}

json study_gt_retry(const RunConfig& base) {
    const std::string dir = base.out_dir + "/studies/gt_retry";
    const std::size_t S = base.seeds.size();
    std::vector<double> gt1(S), gt3(S), gt10(S), gt3c(S), gt10c(S), lirf(S), lirfv(S);
    parallel_for_index(resolve_jobs(base.jobs), S, [&](std::size_t si) {
        RunConfig cfg = base;
        cfg.out_dir = dir + "/runs";
        TrainedRun tr = train_and_evaluate(cfg, base.seeds[si], /*write_artifacts=*/false);
        lirf[si] = tr.success_lirf;
        lirfv[si] = tr.success_verify;
        auto pi_gt = tr.run->train_gt_baseline(cfg.phases.phase1_steps +
                                               cfg.phases.phase4_steps);
        Env& env = tr.run->eval_env();
        const int h = tr.run->task_horizon();
        const std::uint64_t es = derive_seed(base.seeds[si], "gt_retry.eval");
        BlindVerifier blind;
        OracleVerifier oracle;
        gt1[si] = evaluate_with_retries(*pi_gt, blind, env, h, 1, cfg.eval.episodes, es);
        gt3[si] = evaluate_with_retries(*pi_gt, blind, env, h, 3, cfg.eval.episodes, es);
        gt10[si] = evaluate_with_retries(*pi_gt, blind, env, h, 10, cfg.eval.episodes, es);
        gt3c[si] = evaluate_with_retries(*pi_gt, oracle, env, h, 3, cfg.eval.episodes, es);
        gt10c[si] = evaluate_with_retries(*pi_gt, oracle, env, h, 10, cfg.eval.episodes, es);
    });
    const std::vector<std::pair<std::string, std::vector<double>*>> variants = {
        {"gt_no_retries", &gt1},
        {"gt_3_retries", &gt3},
        {"gt_10_retries", &gt10},
        {"gt_3_retries_gt_checking", &gt3c},
        {"gt_10_retries_gt_checking", &gt10c},
        {"lirf", &lirf},
        {"lirf_verify", &lirfv}};
    std::vector<std::string> rows;
    json table = json::array();
    for (const auto& [name, vals] : variants) {
        for (std::size_t si = 0; si < S; ++si)
            rows.push_back(name + "," + std::to_string(base.seeds[si]) + "," +
                           fmt((*vals)[si]));
        table.push_back(
            {{"variant", name}, {"mean", mean(*vals)}, {"stderr", stderr_mean(*vals)}});
    }
    json summary;
    summary["study"] = "gt_retry";
    summary["task"] = base.task;
    summary["rows"] = table;
    write_study_csv(dir + "/curve.csv", "variant,seed,success", rows);
    write_study_summary(dir + "/summary.json", summary);
    return summary;
}

json study_door_close(const RunConfig& base) {
    RunConfig cfg = base;
    cfg.task = "door_close";
    cfg.phases = PhaseBudgets{};
    cfg.sac.history = 0;
    cfg.irf_history = 0;
    cfg.bank.positive_budget = 0;
    cfg.finalize();
    const std::string dir = base.out_dir + "/studies/door_close";
    const std::size_t S = cfg.seeds.size();
    std::vector<double> vice(S), lirf(S);
    parallel_for_index(resolve_jobs(cfg.jobs), S, [&](std::size_t si) {
        RunConfig rc = cfg;
        rc.out_dir = dir + "/runs";
        TrainedRun tr = train_and_evaluate(rc, cfg.seeds[si], /*write_artifacts=*/false);
        vice[si] = tr.success_vice;
        lirf[si] = tr.success_lirf;
    });
    std::vector<std::string> rows;
    for (std::size_t si = 0; si < S; ++si) {
        rows.push_back("vice," + std::to_string(cfg.seeds[si]) + "," + fmt(vice[si]));
        rows.push_back("lirf," + std::to_string(cfg.seeds[si]) + "," + fmt(lirf[si]));
    }
    json summary;
    summary["study"] = "door_close";
    summary["rows"] = {{{"variant", "vice"}, {"mean", mean(vice)}, {"stderr", stderr_mean(vice)}},
                       {{"variant", "lirf"}, {"mean", mean(lirf)}, {"stderr", stderr_mean(lirf)}}};
    write_study_csv(dir + "/curve.csv", "variant,seed,success", rows);
    write_study_summary(dir + "/summary.json", summary);
    return summary;
}

}  // namespace lirf
