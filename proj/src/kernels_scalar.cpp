#include "lirf/kernels.hpp"

#include <cmath>

namespace lirf::kern::detail {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        c0 += x[i] * y[i];
        c1 += x[i + 1] * y[i + 1];
        c2 += x[i + 2] * y[i + 2];
        c3 += x[i + 3] * y[i + 3];
    }
    // Tail elements continue their lane chains (i mod 4).
    if (i < n) c0 += x[i] * y[i];
    if (i + 1 < n) c1 += x[i + 1] * y[i + 1];
    if (i + 2 < n) c2 += x[i + 2] * y[i + 2];
    return (c0 + c1) + (c2 + c3);
}

void matvec_scalar(double* y, const double* w, const double* x, const double* b,
                   std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] = dot_scalar(w + r * cols, x, cols) + (b ? b[r] : 0.0);
}

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void matvec_t_acc_scalar(double* out, const double* w, const double* d,
                         std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_scalar(out, d[r], w + r * cols, cols);
}

void ger_acc_scalar(double* w, const double* d, const double* x,
                    std::size_t rows, std::size_t cols, double scale) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_scalar(w + r * cols, scale * d[r], x, cols);
}

void relu_scalar(double* y, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_acc_scalar(double* dx, const double* pre, const double* dy,
                              std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] += pre[i] > 0.0 ? dy[i] : 0.0;
}

void adam_step_scalar(double* p, double* m, double* v, const double* g, std::size_t n,
                      double lr, double beta1, double beta2, double eps,
                      double bias1, double bias2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        const double mhat = m[i] / bias1;
        const double vhat = v[i] / bias2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{
        dot_scalar,    matvec_scalar, matvec_t_acc_scalar,      ger_acc_scalar,
        axpy_scalar,   relu_scalar,   relu_backward_acc_scalar, adam_step_scalar,
    };
    return t;
}

}  // namespace lirf::kern::detail
