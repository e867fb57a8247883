#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lirf/rng.hpp"
#include "lirf/serial.hpp"

namespace lirf {

struct LearnerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scratch buffers for cached forward passes; reused across samples to keep
// the update loop allocation-free.
struct FwdCache {
    std::vector<std::vector<double>> bufs;
    std::vector<double>& buf(std::size_t i, std::size_t n) {
        if (bufs.size() <= i) bufs.resize(i + 1);
        if (bufs[i].size() != n) bufs[i].assign(n, 0.0);
        return bufs[i];
    }
};

// Dense net over a single flat parameter vector. Gradients are same-shaped
// flat vectors, which keeps Adam, checkpoints and the finite-difference
// oracle trivial.
class Net {
public:
    virtual ~Net() = default;
    virtual std::size_t input_dim() const = 0;
    virtual std::size_t output_dim() const = 0;

    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // Fan-in uniform init: W ~ U(-sqrt(3/fan_in), sqrt(3/fan_in)), biases 0,
    // drawn layer by layer in row-major order.
    virtual void init(Rng& rng) = 0;

    virtual void forward(const double* x, double* y, FwdCache& cache) const = 0;
    // dout has output_dim entries. grad_accum (param_count, nullable) is
    // accumulated into; dinput (input_dim, nullable) is accumulated into.
    virtual void backward(const FwdCache& cache, const double* dout,
                          double* grad_accum, double* dinput) const = 0;

    virtual std::unique_ptr<Net> clone() const = 0;
    virtual void describe(ByteWriter& w) const = 0;

    std::vector<double> forward_copy(const std::vector<double>& x) const {
        if (x.size() != input_dim()) throw LearnerError("net input dimension mismatch");
        FwdCache cache;
        std::vector<double> y(output_dim());
        forward(x.data(), y.data(), cache);
        return y;
    }

protected:
    std::vector<double> params_;
};

struct MlpSpec {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden;  // rectified
    std::size_t output_dim = 0;
    bool relu_output = false;
};

class MlpNet final : public Net {
public:
    explicit MlpNet(MlpSpec spec);
    std::size_t input_dim() const override { return spec_.input_dim; }
    std::size_t output_dim() const override { return spec_.output_dim; }
    void init(Rng& rng) override;
    void forward(const double* x, double* y, FwdCache& cache) const override;
    void backward(const FwdCache& cache, const double* dout,
                  double* grad_accum, double* dinput) const override;
    std::unique_ptr<Net> clone() const override;
    void describe(ByteWriter& w) const override;
    const MlpSpec& spec() const { return spec_; }

private:
    friend class SetNet;
    struct Layer {
        std::size_t in, out, w_off, b_off;
        bool relu;
    };
    // Explicit-parameter forward/backward so SetNet can run its sub-nets over
    // slices of one shared flat parameter vector.
    void forward_p(const double* p, const double* x, double* y, FwdCache& cache,
                   std::size_t cache_base) const;
    void backward_p(const double* p, const FwdCache& cache, std::size_t cache_base,
                    const double* dout, double* grad_accum, double* dinput) const;
    void init_p(double* p, Rng& rng) const;
    std::size_t cache_slot_count() const { return 2 * layers_.size(); }

    MlpSpec spec_;
    std::vector<Layer> layers_;
};

// Permutation-invariant net over a fixed number of object slots (Deep Sets):
// shared per-object encoder, mean pooling across objects, dense head. The
// input is a flat window of `slots` frames, each frame holding `num_objects`
// object feature groups followed by frame-global features; `tail_global`
// features (e.g. the critic's action input) sit at the very end.
//
// Pooling sums each unit's per-object activations in sorted value order, so
// the output is bit-identical under any permutation of the object groups.
struct SetSpec {
    std::size_t num_objects = 3;
    std::size_t obj_feat = 4;     // per object, per frame
    std::size_t frame_global = 0; // per frame
    std::size_t slots = 1;        // frames in the window
    std::size_t tail_global = 0;
    std::vector<std::size_t> enc_hidden;   // encoder widths; output width = last
    std::vector<std::size_t> head_hidden;  // head hidden widths
    std::size_t output_dim = 0;

    std::size_t frame_dim() const { return num_objects * obj_feat + frame_global; }
    std::size_t input_dim() const { return slots * frame_dim() + tail_global; }
    std::size_t obj_input_dim() const { return slots * (obj_feat + frame_global) + tail_global; }
};

class SetNet final : public Net {
public:
    explicit SetNet(SetSpec spec);
    std::size_t input_dim() const override { return spec_.input_dim(); }
    std::size_t output_dim() const override { return spec_.output_dim; }
    void init(Rng& rng) override;
    void forward(const double* x, double* y, FwdCache& cache) const override;
    void backward(const FwdCache& cache, const double* dout,
                  double* grad_accum, double* dinput) const override;
    std::unique_ptr<Net> clone() const override;
    void describe(ByteWriter& w) const override;
    const SetSpec& spec() const { return spec_; }

private:
    void gather_object(const double* x, std::size_t k, double* xk) const;
    void scatter_object_grad(std::size_t k, const double* dxk, double* dinput) const;

    SetSpec spec_;
    MlpNet enc_;   // parameters live in this->params_; enc_/head_ hold offsets
    MlpNet head_;
    std::size_t enc_params_, head_params_;
};

std::unique_ptr<Net> net_from_descriptor(ByteReader& r);

}  // namespace lirf
