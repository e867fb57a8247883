// AVX2 variants. Compiled with -mavx2 only; the dispatcher never calls in
// here unless the CPU reports AVX2. Each kernel mirrors the scalar reference
// operation-for-operation (see kernels.hpp for the equivalence contract).

#include "lirf/kernels.hpp"

#if defined(LIRF_HAVE_AVX2_TU)

#include <immintrin.h>

#include <cmath>

namespace lirf::kern::detail {
namespace {

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d yv = _mm256_loadu_pd(y + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(xv, yv));
    }
    double c[4];
    _mm256_storeu_pd(c, acc);
    if (i < n) c[0] += x[i] * y[i];
    if (i + 1 < n) c[1] += x[i + 1] * y[i + 1];
    if (i + 2 < n) c[2] += x[i + 2] * y[i + 2];
    return (c[0] + c[1]) + (c[2] + c[3]);
}

void matvec_avx2(double* out, const double* w, const double* x, const double* b,
                 std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        out[r] = dot_avx2(w + r * cols, x, cols) + (b ? b[r] : 0.0);
}

void axpy_avx2(double* y, double a, const double* x, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_add_pd(yv, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void matvec_t_acc_avx2(double* out, const double* w, const double* d,
                       std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_avx2(out, d[r], w + r * cols, cols);
}

void ger_acc_avx2(double* w, const double* d, const double* x,
                  std::size_t rows, std::size_t cols, double scale) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_avx2(w + r * cols, scale * d[r], x, cols);
}

void relu_avx2(double* y, const double* x, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d mask = _mm256_cmp_pd(xv, zero, _CMP_GT_OQ);
        _mm256_storeu_pd(y + i, _mm256_and_pd(xv, mask));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_acc_avx2(double* dx, const double* pre, const double* dy,
                            std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
        const __m256d gated = _mm256_and_pd(_mm256_loadu_pd(dy + i), mask);
        _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), gated));
    }
    for (; i < n; ++i) dx[i] += pre[i] > 0.0 ? dy[i] : 0.0;
}

void adam_step_avx2(double* p, double* m, double* v, const double* g, std::size_t n,
                    double lr, double beta1, double beta2, double eps,
                    double bias1, double bias2) {
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d ob1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d ob2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vb1c = _mm256_set1_pd(bias1);
    const __m256d vb2c = _mm256_set1_pd(bias2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        mv = _mm256_add_pd(_mm256_mul_pd(b1, mv), _mm256_mul_pd(ob1, gv));
        vv = _mm256_add_pd(_mm256_mul_pd(b2, vv), _mm256_mul_pd(ob2, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_div_pd(mv, vb1c);
        const __m256d vhat = _mm256_div_pd(vv, vb2c);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        const double mhat = m[i] / bias1;
        const double vhat = v[i] / bias2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

const KernelTable* avx2_table() {
    if (!__builtin_cpu_supports("avx2")) return nullptr;
    static const KernelTable t{
        dot_avx2,    matvec_avx2, matvec_t_acc_avx2,      ger_acc_avx2,
        axpy_avx2,   relu_avx2,   relu_backward_acc_avx2, adam_step_avx2,
    };
    return &t;
}

}  // namespace lirf::kern::detail

#else

namespace lirf::kern::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace lirf::kern::detail

#endif
