#pragma once

#include <cstddef>
#include <string>

// Dense numeric kernels behind the learner. Every kernel has a scalar
// reference implementation and an AVX2 variant selected at runtime; the two
// are bit-identical by contract, not merely close:
//
//   * Reductions (dot) accumulate in 4 independent lane chains, element i
//     feeding chain i mod 4, each chain a plain mul-then-add sequence in
//     ascending i, combined as (c0+c1)+(c2+c3). The AVX2 code realizes the
//     same chains in the 4 lanes of a ymm register.
//   * Elementwise kernels perform the identical operation per element.
//   * No FMA contraction on either path (the build disables contraction).
//
// This makes training runs reproduce bit-exactly whichever variant the
// dispatcher picks, which the equivalence tests assert outright.

namespace lirf::kern {

enum class Isa { scalar, avx2 };

// Active variant. Resolved once: honors LIRF_KERNELS=scalar|avx2 if set,
// otherwise picks the widest ISA the CPU supports.
Isa active_isa();
const char* isa_name(Isa isa);
// Test hook; throws if the requested ISA is unavailable on this machine.
void force_isa(Isa isa);

double dot(const double* x, const double* y, std::size_t n);

// y = W x + b, W row-major [rows x cols]; b may be null.
void matvec(double* y, const double* w, const double* x, const double* b,
            std::size_t rows, std::size_t cols);

// out = W^T d, accumulated row by row (out must be zeroed by the caller if a
// fresh product is wanted: the kernel adds into out).
void matvec_t_acc(double* out, const double* w, const double* d,
                  std::size_t rows, std::size_t cols);

// W += scale * d x^T (rank-1 gradient accumulation).
void ger_acc(double* w, const double* d, const double* x,
             std::size_t rows, std::size_t cols, double scale);

// y += a * x
void axpy(double* y, double a, const double* x, std::size_t n);

// y = x > 0 ? x : +0.0
void relu(double* y, const double* x, std::size_t n);

// dx = pre > 0 ? dy : +0.0 (accumulates: dx += ...)
void relu_backward_acc(double* dx, const double* pre, const double* dy, std::size_t n);

// Adam update, elementwise. bias1/bias2 are the 1-beta^t corrections already
// computed by the caller so the kernel stays stateless.
void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double bias1, double bias2);

namespace detail {
struct KernelTable {
    double (*dot)(const double*, const double*, std::size_t);
    void (*matvec)(double*, const double*, const double*, const double*, std::size_t, std::size_t);
    void (*matvec_t_acc)(double*, const double*, const double*, std::size_t, std::size_t);
    void (*ger_acc)(double*, const double*, const double*, std::size_t, std::size_t, double);
    void (*axpy)(double*, double, const double*, std::size_t);
    void (*relu)(double*, const double*, std::size_t);
    void (*relu_backward_acc)(double*, const double*, const double*, std::size_t);
    void (*adam_step)(double*, double*, double*, const double*, std::size_t,
                      double, double, double, double, double, double);
};
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // null when the TU was not built or CPU lacks AVX2
}  // namespace detail

}  // namespace lirf::kern
