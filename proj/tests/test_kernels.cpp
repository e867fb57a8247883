#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "lirf/kernels.hpp"
#include "lirf/rng.hpp"

using namespace lirf;
namespace kd = lirf::kern::detail;

namespace {
std::vector<double> rand_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-2.0, 2.0);
    return v;
}
}  // namespace

TEST_CASE("dot matches a plain sum within roundoff and the contract exactly") {
    Rng rng(1);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 128u, 1001u}) {
        const auto x = rand_vec(rng, n), y = rand_vec(rng, n);
        double naive = 0.0;
        for (std::size_t i = 0; i < n; ++i) naive += x[i] * y[i];
        const double got = kd::scalar_table().dot(x.data(), y.data(), n);
        CHECK(got == doctest::Approx(naive).epsilon(1e-12));
        // Contract: 4 lane chains combined as (c0+c1)+(c2+c3).
        double c[4] = {0, 0, 0, 0};
        for (std::size_t i = 0; i < n; ++i) c[i % 4] += x[i] * y[i];
        CHECK(got == (c[0] + c[1]) + (c[2] + c[3]));
    }
}

TEST_CASE("scalar and avx2 variants agree bit for bit") {
    const auto* avx2 = kd::avx2_table();
    if (!avx2) return;  // machine without AVX2: dispatcher stays scalar
    const auto& ref = kd::scalar_table();
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t rows = 1 + rng.uniform_index(40);
        const std::size_t cols = 1 + rng.uniform_index(70);
        const auto w = rand_vec(rng, rows * cols);
        const auto x = rand_vec(rng, cols);
        const auto b = rand_vec(rng, rows);
        const auto d = rand_vec(rng, rows);

        CHECK(ref.dot(x.data(), x.data(), cols) == avx2->dot(x.data(), x.data(), cols));

        std::vector<double> y1(rows), y2(rows);
        ref.matvec(y1.data(), w.data(), x.data(), b.data(), rows, cols);
        avx2->matvec(y2.data(), w.data(), x.data(), b.data(), rows, cols);
        CHECK(std::memcmp(y1.data(), y2.data(), rows * sizeof(double)) == 0);

        std::vector<double> o1(cols, 0.0), o2(cols, 0.0);
        ref.matvec_t_acc(o1.data(), w.data(), d.data(), rows, cols);
        avx2->matvec_t_acc(o2.data(), w.data(), d.data(), rows, cols);
        CHECK(std::memcmp(o1.data(), o2.data(), cols * sizeof(double)) == 0);

        auto g1 = w, g2 = w;
        ref.ger_acc(g1.data(), d.data(), x.data(), rows, cols, 0.37);
        avx2->ger_acc(g2.data(), d.data(), x.data(), rows, cols, 0.37);
        CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(double)) == 0);

        auto a1 = x, a2 = x;
        ref.axpy(a1.data(), -1.25, b.size() >= cols ? b.data() : x.data(), cols);
        avx2->axpy(a2.data(), -1.25, b.size() >= cols ? b.data() : x.data(), cols);
        CHECK(std::memcmp(a1.data(), a2.data(), cols * sizeof(double)) == 0);

        std::vector<double> r1(cols), r2(cols);
        ref.relu(r1.data(), x.data(), cols);
        avx2->relu(r2.data(), x.data(), cols);
        CHECK(std::memcmp(r1.data(), r2.data(), cols * sizeof(double)) == 0);

        std::vector<double> dx1(cols, 0.5), dx2(cols, 0.5);
        ref.relu_backward_acc(dx1.data(), x.data(), a1.data(), cols);
        avx2->relu_backward_acc(dx2.data(), x.data(), a2.data(), cols);
        CHECK(std::memcmp(dx1.data(), dx2.data(), cols * sizeof(double)) == 0);

        auto p1 = x, p2 = x;
        auto m1 = rand_vec(rng, cols), v1 = rand_vec(rng, cols);
        for (auto& vv : v1) vv = std::fabs(vv);
        auto m2 = m1, v2 = v1;
        const auto g = rand_vec(rng, cols);
        ref.adam_step(p1.data(), m1.data(), v1.data(), g.data(), cols, 3e-4, 0.9, 0.999,
                      1e-8, 0.1, 0.001);
        avx2->adam_step(p2.data(), m2.data(), v2.data(), g.data(), cols, 3e-4, 0.9, 0.999,
                        1e-8, 0.1, 0.001);
        CHECK(std::memcmp(p1.data(), p2.data(), cols * sizeof(double)) == 0);
        CHECK(std::memcmp(m1.data(), m2.data(), cols * sizeof(double)) == 0);
        CHECK(std::memcmp(v1.data(), v2.data(), cols * sizeof(double)) == 0);
    }
}

TEST_CASE("relu canonicalizes negative zero") {
    const double x[4] = {-0.0, 0.0, -1.0, 2.0};
    double y[4];
    kd::scalar_table().relu(y, x, 4);
    CHECK(!std::signbit(y[0]));
    CHECK(y[2] == 0.0);
    CHECK(y[3] == 2.0);
    if (const auto* avx2 = kd::avx2_table()) {
        double z[4];
        avx2->relu(z, x, 4);
        CHECK(std::memcmp(y, z, sizeof y) == 0);
    }
}

TEST_CASE("adam with zero learning rate leaves parameters bit-identical") {
    Rng rng(5);
    auto p = rand_vec(rng, 37);
    const auto p0 = p;
    std::vector<double> m(37, 0.0), v(37, 0.0);
    const auto g = rand_vec(rng, 37);
    kd::scalar_table().adam_step(p.data(), m.data(), v.data(), g.data(), 37, 0.0, 0.9,
                                 0.999, 1e-8, 0.1, 0.001);
    CHECK(std::memcmp(p.data(), p0.data(), p.size() * sizeof(double)) == 0);
}

TEST_CASE("dispatcher reports a valid isa and can be forced to scalar") {
    const auto isa = kern::active_isa();
    CHECK((isa == kern::Isa::scalar || isa == kern::Isa::avx2));
    kern::force_isa(kern::Isa::scalar);
    CHECK(kern::active_isa() == kern::Isa::scalar);
    const double x[5] = {1, 2, 3, 4, 5};
    CHECK(kern::dot(x, x, 5) == kd::scalar_table().dot(x, x, 5));
    if (kd::avx2_table()) {
        kern::force_isa(kern::Isa::avx2);
        CHECK(kern::active_isa() == kern::Isa::avx2);
        CHECK(kern::dot(x, x, 5) == kd::scalar_table().dot(x, x, 5));
    }
}
