#include "lirf/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "lirf/kernels.hpp"

namespace lirf {

namespace {
constexpr std::uint8_t kTagMlp = 0;
constexpr std::uint8_t kTagSet = 1;
}  // namespace

MlpNet::MlpNet(MlpSpec spec) : spec_(std::move(spec)) {
    if (spec_.input_dim == 0 || spec_.output_dim == 0)
        throw LearnerError("mlp needs nonzero input/output dims");
    std::size_t in = spec_.input_dim;
    std::size_t off = 0;
    for (std::size_t h = 0; h <= spec_.hidden.size(); ++h) {
        const bool last = h == spec_.hidden.size();
        const std::size_t out = last ? spec_.output_dim : spec_.hidden[h];
        Layer l;
        l.in = in;
        l.out = out;
        l.w_off = off;
        l.b_off = off + in * out;
        l.relu = last ? spec_.relu_output : true;
        layers_.push_back(l);
        off = l.b_off + out;
        in = out;
    }
    params_.assign(off, 0.0);
}

void MlpNet::init_p(double* p, Rng& rng) const {
    for (const Layer& l : layers_) {
        const double limit = std::sqrt(3.0 / double(l.in));
        for (std::size_t i = 0; i < l.in * l.out; ++i)
            p[l.w_off + i] = rng.uniform(-limit, limit);
        for (std::size_t i = 0; i < l.out; ++i) p[l.b_off + i] = 0.0;
    }
}

void MlpNet::init(Rng& rng) { init_p(params_.data(), rng); }

// Cache layout for layer l at cache_base: slot 2l holds the layer input a_l,
// slot 2l+1 the pre-activation z_l.
void MlpNet::forward_p(const double* p, const double* x, double* y, FwdCache& cache,
                       std::size_t cache_base) const {
    const double* a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& L = layers_[l];
        auto& a_slot = cache.buf(cache_base + 2 * l, L.in);
        std::memcpy(a_slot.data(), a, L.in * sizeof(double));
        auto& z = cache.buf(cache_base + 2 * l + 1, L.out);
        kern::matvec(z.data(), p + L.w_off, a_slot.data(), p + L.b_off, L.out, L.in);
        if (l + 1 == layers_.size()) {
            if (L.relu)
                kern::relu(y, z.data(), L.out);
            else
                std::memcpy(y, z.data(), L.out * sizeof(double));
        } else {
            auto& nxt = cache.buf(cache_base + 2 * (l + 1), L.out);
            kern::relu(nxt.data(), z.data(), L.out);
            a = nxt.data();
        }
    }
}

void MlpNet::backward_p(const double* p, const FwdCache& cache, std::size_t cache_base,
                        const double* dout, double* grad_accum, double* dinput) const {
    std::vector<double> g(dout, dout + layers_.back().out);
    std::vector<double> dz, gprev;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const Layer& L = layers_[li];
        const auto& a = cache.bufs[cache_base + 2 * li];
        const auto& z = cache.bufs[cache_base + 2 * li + 1];
        if (L.relu) {
            dz.assign(L.out, 0.0);
            kern::relu_backward_acc(dz.data(), z.data(), g.data(), L.out);
        } else {
            dz = g;
        }
        if (grad_accum) {
            kern::ger_acc(grad_accum + L.w_off, dz.data(), a.data(), L.out, L.in, 1.0);
            kern::axpy(grad_accum + L.b_off, 1.0, dz.data(), L.out);
        }
        if (li == 0) {
            if (dinput) {
                gprev.assign(L.in, 0.0);
                kern::matvec_t_acc(gprev.data(), p + L.w_off, dz.data(), L.out, L.in);
                kern::axpy(dinput, 1.0, gprev.data(), L.in);
            }
            break;
        }
        gprev.assign(L.in, 0.0);
        kern::matvec_t_acc(gprev.data(), p + L.w_off, dz.data(), L.out, L.in);
        g = std::move(gprev);
    }
}

void MlpNet::forward(const double* x, double* y, FwdCache& cache) const {
    forward_p(params_.data(), x, y, cache, 0);
}

void MlpNet::backward(const FwdCache& cache, const double* dout,
                      double* grad_accum, double* dinput) const {
    backward_p(params_.data(), cache, 0, dout, grad_accum, dinput);
}

std::unique_ptr<Net> MlpNet::clone() const { return std::make_unique<MlpNet>(*this); }

void MlpNet::describe(ByteWriter& w) const {
    w.u8(kTagMlp);
    w.u64(spec_.input_dim);
    w.u64(spec_.hidden.size());
    for (auto h : spec_.hidden) w.u64(h);
    w.u64(spec_.output_dim);
    w.u8(spec_.relu_output ? 1 : 0);
}

namespace {

MlpSpec set_enc_spec(const SetSpec& s) {
    if (s.enc_hidden.empty() || s.output_dim == 0)
        throw LearnerError("set net needs encoder widths and an output dim");
    MlpSpec m;
    m.input_dim = s.obj_input_dim();
    m.hidden.assign(s.enc_hidden.begin(), s.enc_hidden.end() - 1);
    m.output_dim = s.enc_hidden.back();
    m.relu_output = true;
    return m;
}

MlpSpec set_head_spec(const SetSpec& s) {
    MlpSpec m;
    m.input_dim = s.enc_hidden.back();
    m.hidden = s.head_hidden;
    m.output_dim = s.output_dim;
    m.relu_output = false;
    return m;
}

}  // namespace

SetNet::SetNet(SetSpec spec)
    : spec_(std::move(spec)), enc_(set_enc_spec(spec_)), head_(set_head_spec(spec_)) {
    if (spec_.num_objects < 2 || spec_.num_objects > 16)
        throw LearnerError("set net supports 2..16 object slots");
    enc_params_ = enc_.param_count();
    head_params_ = head_.param_count();
    params_.assign(enc_params_ + head_params_, 0.0);
}

void SetNet::init(Rng& rng) {
    enc_.init_p(params_.data(), rng);
    head_.init_p(params_.data() + enc_params_, rng);
}

void SetNet::gather_object(const double* x, std::size_t k, double* xk) const {
    const std::size_t fd = spec_.frame_dim();
    std::size_t o = 0;
    for (std::size_t s = 0; s < spec_.slots; ++s) {
        const double* frame = x + s * fd;
        std::memcpy(xk + o, frame + k * spec_.obj_feat, spec_.obj_feat * sizeof(double));
        o += spec_.obj_feat;
        std::memcpy(xk + o, frame + spec_.num_objects * spec_.obj_feat,
                    spec_.frame_global * sizeof(double));
        o += spec_.frame_global;
    }
    std::memcpy(xk + o, x + spec_.slots * fd, spec_.tail_global * sizeof(double));
}

void SetNet::scatter_object_grad(std::size_t k, const double* dxk, double* dinput) const {
    const std::size_t fd = spec_.frame_dim();
    std::size_t o = 0;
    for (std::size_t s = 0; s < spec_.slots; ++s) {
        double* frame = dinput + s * fd;
        for (std::size_t i = 0; i < spec_.obj_feat; ++i)
            frame[k * spec_.obj_feat + i] += dxk[o + i];
        o += spec_.obj_feat;
        for (std::size_t i = 0; i < spec_.frame_global; ++i)
            frame[spec_.num_objects * spec_.obj_feat + i] += dxk[o + i];
        o += spec_.frame_global;
    }
    for (std::size_t i = 0; i < spec_.tail_global; ++i)
        dinput[spec_.slots * fd + i] += dxk[o + i];
}

// Cache layout: object k occupies [k*(E+1), k*(E+1)+E) for its encoder pass
// plus one slot for h_k, where E = encoder slot count. The head starts at
// K*(E+1); pooled and the gather scratch buffer sit after it.
void SetNet::forward(const double* x, double* y, FwdCache& cache) const {
    const std::size_t K = spec_.num_objects;
    const std::size_t E = enc_.cache_slot_count();
    const std::size_t enc_out = enc_.output_dim();
    const std::size_t head_base = K * (E + 1);
    auto& xk = cache.buf(head_base + head_.cache_slot_count() + 1, enc_.input_dim());
    for (std::size_t k = 0; k < K; ++k) {
        gather_object(x, k, xk.data());
        auto& hk = cache.buf(k * (E + 1) + E, enc_out);
        enc_.forward_p(params_.data(), xk.data(), hk.data(), cache, k * (E + 1));
    }
    auto& pooled = cache.buf(head_base + head_.cache_slot_count(), enc_out);
    double vals[16];
    for (std::size_t j = 0; j < enc_out; ++j) {
        for (std::size_t k = 0; k < K; ++k) vals[k] = cache.bufs[k * (E + 1) + E][j];
        std::sort(vals, vals + K);
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) s += vals[k];
        pooled[j] = s / double(K);
    }
    head_.forward_p(params_.data() + enc_params_, pooled.data(), y, cache, head_base);
}

void SetNet::backward(const FwdCache& cache, const double* dout,
                      double* grad_accum, double* dinput) const {
    const std::size_t K = spec_.num_objects;
    const std::size_t E = enc_.cache_slot_count();
    const std::size_t enc_out = enc_.output_dim();
    std::vector<double> dpooled(enc_out, 0.0);
    head_.backward_p(params_.data() + enc_params_, cache, K * (E + 1), dout,
                     grad_accum ? grad_accum + enc_params_ : nullptr, dpooled.data());
    // Mean pooling: every object receives 1/K of the pooled gradient,
    // independent of the canonical summation order.
    for (std::size_t j = 0; j < enc_out; ++j) dpooled[j] /= double(K);
    std::vector<double> dxk;
    for (std::size_t k = 0; k < K; ++k) {
        if (dinput) {
            dxk.assign(enc_.input_dim(), 0.0);
            enc_.backward_p(params_.data(), cache, k * (E + 1), dpooled.data(), grad_accum,
                            dxk.data());
            scatter_object_grad(k, dxk.data(), dinput);
        } else {
            enc_.backward_p(params_.data(), cache, k * (E + 1), dpooled.data(), grad_accum,
                            nullptr);
        }
    }
}

std::unique_ptr<Net> SetNet::clone() const { return std::make_unique<SetNet>(*this); }

void SetNet::describe(ByteWriter& w) const {
    w.u8(kTagSet);
    w.u64(spec_.num_objects);
    w.u64(spec_.obj_feat);
    w.u64(spec_.frame_global);
    w.u64(spec_.slots);
    w.u64(spec_.tail_global);
    w.u64(spec_.enc_hidden.size());
    for (auto h : spec_.enc_hidden) w.u64(h);
    w.u64(spec_.head_hidden.size());
    for (auto h : spec_.head_hidden) w.u64(h);
    w.u64(spec_.output_dim);
}

std::unique_ptr<Net> net_from_descriptor(ByteReader& r) {
    const auto tag = r.u8();
    if (tag == kTagMlp) {
        MlpSpec s;
        s.input_dim = r.u64();
        const auto nh = r.u64();
        for (std::size_t i = 0; i < nh; ++i) s.hidden.push_back(r.u64());
        s.output_dim = r.u64();
        s.relu_output = r.u8() != 0;
        return std::make_unique<MlpNet>(s);
    }
    if (tag == kTagSet) {
        SetSpec s;
        s.num_objects = r.u64();
        s.obj_feat = r.u64();
        s.frame_global = r.u64();
        s.slots = r.u64();
        s.tail_global = r.u64();
        const auto ne = r.u64();
        for (std::size_t i = 0; i < ne; ++i) s.enc_hidden.push_back(r.u64());
        const auto nd = r.u64();
        for (std::size_t i = 0; i < nd; ++i) s.head_hidden.push_back(r.u64());
        s.output_dim = r.u64();
        return std::make_unique<SetNet>(s);
    }
    throw LearnerError("unknown net descriptor tag");
}

}  // namespace lirf
