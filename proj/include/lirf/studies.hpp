#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "lirf/pipeline.hpp"

namespace lirf {

// A fully trained (task, seed) bundle with its headline numbers.
struct TrainedRun {
    std::unique_ptr<PipelineRun> run;
    double success_vice = 0.0;
    double success_lirf = 0.0;
    double success_verify = 0.0;
    IrfAccuracy irf_accuracy;
};

// Phases 1..4 plus the standard evaluations (bootstrap policy success, final
// policy success, perform-verify success over the eval episode set, held-out
// verification accuracy).
TrainedRun train_and_evaluate(const RunConfig& cfg, std::uint64_t seed,
                              bool write_artifacts = true);

double verify_success_sweep(PipelineRun& run, int episodes, int max_iter = 10);

// Study entry points. Each trains what it needs (sharing phases where the
// schedule allows), writes <out_dir>/studies/<name>/{curve.csv,summary.json}
// and returns the summary document.
nlohmann::json study_lambda(const RunConfig& base,
                            const std::vector<double>& lambdas = {10, 100, 1000, 10000});
nlohmann::json study_positives(const RunConfig& base,
                               const std::vector<int>& budgets = {4, 8, 16, 32, 64});
nlohmann::json study_verify_curve(const RunConfig& base, int k_max = 10);
nlohmann::json study_gt_retry(const RunConfig& base);
nlohmann::json study_door_close(const RunConfig& base);

// Per-episode verify-curve extraction: success at iteration cap k given a
// trace recorded with cap k_max >= k.
bool verify_success_at_cap(const VerifyTrace& trace, int k);

void write_study_csv(const std::string& path, const std::string& header,
                     const std::vector<std::string>& rows);
void write_study_summary(const std::string& path, const nlohmann::json& summary);

}  // namespace lirf
