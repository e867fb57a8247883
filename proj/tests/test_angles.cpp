#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lirf/angles.hpp"
#include "lirf/rng.hpp"

using namespace lirf;

TEST_CASE("alias basics") {
    CHECK(alias90(30.0) == 30.0);
    CHECK(alias90(100.0) == 10.0);
    CHECK(alias90(190.0) == 10.0);
    CHECK(alias90(280.0) == 10.0);
    CHECK(alias90(-5.0) == 85.0);
    CHECK(alias90(0.0) == 0.0);
}

TEST_CASE("wrap180") {
    CHECK(wrap180(10.0) == 10.0);
    CHECK(wrap180(100.0) == 100.0);
    CHECK(wrap180(190.0) == -170.0);
    CHECK(wrap180(350.0) == -10.0);
    CHECK(wrap180(-350.0) == 10.0);
    CHECK(wrap180(180.0) == 180.0);
}

TEST_CASE("aliasing is exact on representable offsets") {
    // Angles drawn on a dyadic grid keep theta + 90k exactly representable,
    // so the symmetry class maps to bit-identical representatives.
    Rng rng(9);
    for (int i = 0; i < 10000; ++i) {
        const double theta = double(rng.uniform_index(360ull << 20)) * 0x1.0p-20;
        for (int k = -4; k <= 4; ++k)
            CHECK(alias90(theta + 90.0 * k) == alias90(theta));
    }
}

TEST_CASE("canon360 range") {
    Rng rng(4);
    for (int i = 0; i < 10000; ++i) {
        const double t = rng.uniform(-2000.0, 2000.0);
        const double c = canon360(t);
        CHECK(c >= 0.0);
        CHECK(c < 360.0);
    }
}
