#include "lirf/classifier.hpp"

#include <cmath>

namespace lirf {

namespace {
double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
constexpr char kClsMagic[8] = {'L', 'I', 'R', 'F', 'C', 'L', 'S', '1'};
}  // namespace

double classifier_ce_loss_grad(const Net& net,
                               const std::vector<std::vector<double>>& features,
                               const std::vector<double>& targets,
                               std::vector<double>* grad) {
    if (features.empty() || features.size() != targets.size())
        throw LearnerError("classifier loss needs matched nonempty batch");
    const double inv = 1.0 / double(features.size());
    FwdCache cache;
    double loss = 0.0, z;
    for (std::size_t i = 0; i < features.size(); ++i) {
        net.forward(features[i].data(), &z, cache);
        const double p = logistic(z);
        const double y = targets[i];
        // Numerically stable CE in terms of the logit.
        const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        loss += (softplus - y * z) * inv;
        if (grad) {
            const double dz = (p - y) * inv;
            net.backward(cache, &dz, grad->data(), nullptr);
        }
    }
    if (!std::isfinite(loss)) throw LearnerError("classifier loss is non-finite");
    return loss;
}

SuccessClassifier::SuccessClassifier(std::unique_ptr<Net> net, std::vector<double> obs_scale,
                                     ClassifierConfig cfg, std::uint64_t init_seed)
    : net_(std::move(net)), scale_(std::move(obs_scale)), cfg_(cfg),
      opt_(net_->param_count(), cfg.lr) {
    if (net_->output_dim() != 1) throw LearnerError("classifier net must have scalar output");
    if (net_->input_dim() != scale_.size())
        throw LearnerError("classifier input dim does not match observation scale");
    Rng rng(init_seed);
    net_->init(rng);
}

std::vector<double> SuccessClassifier::featurize(const Obs& o) const {
    if (o.size() != scale_.size()) throw LearnerError("classifier observation dim mismatch");
    std::vector<double> f(o.size());
    for (std::size_t i = 0; i < o.size(); ++i) f[i] = o[i] / scale_[i];
    return f;
}

double SuccessClassifier::score(const Obs& raw_obs) const {
    const auto f = featurize(raw_obs);
    FwdCache cache;
    double z;
    net_->forward(f.data(), &z, cache);
    return logistic(z);
}

double SuccessClassifier::train_step(const std::vector<const Obs*>& positives,
                                     const std::vector<const Obs*>& negatives) {
    if (positives.empty() || negatives.empty())
        throw LearnerError("classifier batch must contain both classes");
    std::vector<std::vector<double>> feats;
    std::vector<double> targets;
    feats.reserve(positives.size() + negatives.size());
    for (const Obs* o : positives) {
        feats.push_back(featurize(*o));
        targets.push_back(1.0 - cfg_.label_smoothing);
    }
    for (const Obs* o : negatives) {
        feats.push_back(featurize(*o));
        targets.push_back(cfg_.label_smoothing);
    }
    std::vector<double> grad(net_->param_count(), 0.0);
    const double loss = classifier_ce_loss_grad(*net_, feats, targets, &grad);
    opt_.step(net_->params().data(), grad.data(), grad.size());
    return loss;
}

void SuccessClassifier::save(const std::string& path) const {
    ByteWriter w;
    for (char c : kClsMagic) w.u8(std::uint8_t(c));
    net_->describe(w);
    w.f64_vec(net_->params());
    w.f64_vec(scale_);
    w.f64(cfg_.lr);
    w.u64(cfg_.batch);
    w.f64(cfg_.label_smoothing);
    opt_.save(w);
    write_file(path, w.bytes());
}

std::unique_ptr<SuccessClassifier> SuccessClassifier::load(const std::string& path) {
    const auto bytes = read_file(path);
    ByteReader r(bytes);
    for (char c : kClsMagic)
        if (r.u8() != std::uint8_t(c)) throw SerialError("bad classifier magic");
    auto net = net_from_descriptor(r);
    auto params = r.f64_vec();
    auto scale = r.f64_vec();
    ClassifierConfig cfg;
    cfg.lr = r.f64();
    cfg.batch = r.u64();
    cfg.label_smoothing = r.f64();
    auto cls = std::make_unique<SuccessClassifier>(std::move(net), std::move(scale), cfg, 0);
    cls->net_->params() = std::move(params);
    cls->opt_.load(r);
    return cls;
}

}  // namespace lirf
