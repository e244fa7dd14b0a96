#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "ume/rng.hpp"

using namespace ume;

TEST_CASE("philox4x32-10 known-answer vectors") {
    using A = std::array<std::uint32_t, 4>;
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32_10({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}) == A{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
    CounterRng a({42, 7, 0}), b({42, 7, 0}), c({42, 8, 0}), d({42, 7, 1});
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        CHECK(x == b());
        CHECK(x != c());
        CHECK(x != d());
    }
}

TEST_CASE("uniform and normal moments") {
    CounterRng rng({1, 0, 0});
    oracle::Mean u, z, z2;
    for (int i = 0; i < 200000; ++i) {
        const double x = rng.uniform();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        u.add(x);
        const double g = rng.normal();
        z.add(g);
        z2.add(g * g);
    }
    CHECK(std::abs(u.mean() - 0.5) < 3 * u.se() + 1e-12);
    CHECK(std::abs(z.mean()) < 3 * z.se());
    CHECK(std::abs(z2.mean() - 1.0) < 3 * z2.se());
}
