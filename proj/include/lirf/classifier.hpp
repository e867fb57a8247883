#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lirf/env.hpp"
#include "lirf/net.hpp"
#include "lirf/sac.hpp"

namespace lirf {

// Logistic cross-entropy with smoothed targets over a scalar-output net.
// Exposed for the finite-difference gradient checks.
double classifier_ce_loss_grad(const Net& net,
                               const std::vector<std::vector<double>>& features,
                               const std::vector<double>& targets,
                               std::vector<double>* grad);

struct ClassifierConfig {
    double lr = 3e-4;
    std::size_t batch = 64;  // per class
    double label_smoothing = 0.05;
};

// The single-observation success classifier D(o) -> (0,1). Trained only on
// observations; latent state never reaches it. Scores are strictly inside
// (0,1) by the logistic squashing.
class SuccessClassifier {
public:
    SuccessClassifier(std::unique_ptr<Net> net, std::vector<double> obs_scale,
                      ClassifierConfig cfg, std::uint64_t init_seed);

    double score(const Obs& raw_obs) const;

    // One balanced cross-entropy step: equal-sized batches, smoothed labels.
    // Throws on an empty batch.
    double train_step(const std::vector<const Obs*>& positives,
                      const std::vector<const Obs*>& negatives);

    const Net& net() const { return *net_; }
    const std::vector<double>& obs_scale() const { return scale_; }
    const ClassifierConfig& config() const { return cfg_; }

    void save(const std::string& path) const;
    static std::unique_ptr<SuccessClassifier> load(const std::string& path);

private:
    std::vector<double> featurize(const Obs& o) const;

    std::unique_ptr<Net> net_;
    std::vector<double> scale_;
    ClassifierConfig cfg_;
    Adam opt_;
};

}  // namespace lirf
