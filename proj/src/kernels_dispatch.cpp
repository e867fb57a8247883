#include "lirf/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace lirf::kern {
namespace {

using detail::KernelTable;

struct Dispatch {
    const KernelTable* table;
    Isa isa;
};

Dispatch resolve() {
    const char* want = std::getenv("LIRF_KERNELS");
    const KernelTable* avx2 = detail::avx2_table();
    if (want) {
        const std::string w = want;
        if (w == "scalar") return {&detail::scalar_table(), Isa::scalar};
        if (w == "avx2") {
            if (!avx2) throw std::runtime_error("LIRF_KERNELS=avx2 but AVX2 is unavailable");
            return {avx2, Isa::avx2};
        }
        throw std::runtime_error("unknown LIRF_KERNELS value: " + w);
    }
    if (avx2) return {avx2, Isa::avx2};
    return {&detail::scalar_table(), Isa::scalar};
}

std::atomic<const KernelTable*> g_table{nullptr};
std::atomic<Isa> g_isa{Isa::scalar};

const KernelTable& table() {
    const KernelTable* t = g_table.load(std::memory_order_acquire);
    if (!t) {
        const Dispatch d = resolve();
        g_isa.store(d.isa, std::memory_order_relaxed);
        g_table.store(d.table, std::memory_order_release);
        t = d.table;
    }
    return *t;
}

}  // namespace

Isa active_isa() {
    table();
    return g_isa.load(std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void force_isa(Isa isa) {
    if (isa == Isa::avx2) {
        const KernelTable* avx2 = detail::avx2_table();
        if (!avx2) throw std::runtime_error("AVX2 kernels unavailable on this machine");
        g_table.store(avx2, std::memory_order_release);
    } else {
        g_table.store(&detail::scalar_table(), std::memory_order_release);
    }
    g_isa.store(isa, std::memory_order_relaxed);
}

double dot(const double* x, const double* y, std::size_t n) { return table().dot(x, y, n); }

void matvec(double* y, const double* w, const double* x, const double* b,
            std::size_t rows, std::size_t cols) {
    table().matvec(y, w, x, b, rows, cols);
}

void matvec_t_acc(double* out, const double* w, const double* d,
                  std::size_t rows, std::size_t cols) {
    table().matvec_t_acc(out, w, d, rows, cols);
}

void ger_acc(double* w, const double* d, const double* x,
             std::size_t rows, std::size_t cols, double scale) {
    table().ger_acc(w, d, x, rows, cols, scale);
}

void axpy(double* y, double a, const double* x, std::size_t n) { table().axpy(y, a, x, n); }

void relu(double* y, const double* x, std::size_t n) { table().relu(y, x, n); }

void relu_backward_acc(double* dx, const double* pre, const double* dy, std::size_t n) {
    table().relu_backward_acc(dx, pre, dy, n);
}

void adam_step(double* p, double* m, double* v, const double* g, std::size_t n,
               double lr, double beta1, double beta2, double eps,
               double bias1, double bias2) {
    table().adam_step(p, m, v, g, n, lr, beta1, beta2, eps, bias1, bias2);
}

}  // namespace lirf::kern
