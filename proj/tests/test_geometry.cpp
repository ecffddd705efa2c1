#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace wormkern;
using wormtest::random_strip_point;

TEST_CASE("make_params derives nu and the default shift", "[geometry]") {
    const auto p = make_params(3.0 * kPi / 2.0);
    CHECK(p.nu == Catch::Approx(0.5).epsilon(1e-15));
    CHECK(p.nu < p.h);
    CHECK(p.h < std::min(1.0, 2.0 * p.nu));
    CHECK(p.c0 == 1.0);

    const auto p2 = make_params(2.0 * kPi);
    CHECK(p2.nu == Catch::Approx(1.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(make_params(kPi), std::invalid_argument);
    CHECK_THROWS_AS(make_params(3.0), std::invalid_argument);
    CHECK_THROWS_AS(make_params(3.0 * kPi / 2.0, 0.5), std::invalid_argument);  // h = nu
    CHECK_THROWS_AS(make_params(3.0 * kPi / 2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_params(3.0 * kPi / 2.0, std::nullopt, -1.0), std::invalid_argument);
}

TEST_CASE("lp_range endpoints and conjugacy", "[geometry]") {
    const auto p = make_params(3.0 * kPi / 2.0);
    const auto [lo, hi] = lp_range(p);
    CHECK(lo == Catch::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(hi == Catch::Approx(4.0).epsilon(1e-15));
    // conjugate-exponent symmetry 1/p_min + 1/p_max = 1 for several beta
    for (double beta : {3.2, 4.0, 3.0 * kPi / 2.0, 7.0, 30.0}) {
        const auto [a, b] = lp_range(make_params(beta));
        CHECK(1.0 / a + 1.0 / b == Catch::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("membership predicates", "[geometry]") {
    const auto p = make_params(3.0 * kPi / 2.0);
    CHECK(in_strip_worm({cplx(0, 0), cplx(1, 0)}, p));
    CHECK(in_halfplane_worm({cplx(1, 0), cplx(1, 0)}, p));
    CHECK_FALSE(in_strip_worm({cplx(0, kPi), cplx(1, 0)}, p));  // |Im z1| = pi >= pi/2
    CHECK_FALSE(in_strip_worm({cplx(0, 0), cplx(0, 0)}, p));    // z2 = 0
    CHECK_FALSE(in_halfplane_worm({cplx(1, 0), cplx(0, 0)}, p));
    // boundary points are outside (open domain)
    CHECK_FALSE(in_strip_worm({cplx(0, kPi / 2.0), cplx(1, 0)}, p));
    // beta-independence of the iPi example
    for (double beta : {3.2, 5.0, 9.0})
        CHECK_FALSE(in_strip_worm({cplx(0, kPi), cplx(1, 0)}, make_params(beta)));
}

TEST_CASE("phi round trip and branch window", "[geometry]") {
    const auto p = make_params(3.0 * kPi / 2.0);
    CHECK(phi_map({cplx(0, 0), cplx(1, 0)}).zeta1 == cplx(1, 0));

    std::mt19937_64 rng(2024);
    for (int t = 0; t < 100; ++t) {
        const auto q = random_strip_point(rng, p, 0.05);
        const auto back = phi_inverse(phi_map(q), p);
        CHECK(std::abs(back.z1 - q.z1) < 1e-12 * (1.0 + std::abs(q.z1)));
        CHECK(std::abs(back.z2 - q.z2) < 1e-14 * (1.0 + std::abs(q.z2)));
    }

    // Im z1 = 3 pi/4, |z2|^2 = e^{pi/2}: arg of e^{z1} lands inside the
    // slice window (log|z2|^2 - pi/2, log|z2|^2 + pi/2)
    const StripPoint s{cplx(0.3, 3.0 * kPi / 4.0), cplx(std::exp(kPi / 4.0), 0.0)};
    REQUIRE(in_strip_worm(s, p));
    const auto q = phi_map(s);
    const double a = arg_zeta1(q);
    CHECK(a == Catch::Approx(3.0 * kPi / 4.0).epsilon(1e-12));
    const double l2 = std::log(std::norm(q.zeta2));
    CHECK(a > l2 - kPi / 2.0);
    CHECK(a < l2 + kPi / 2.0);

    CHECK_THROWS(log_zeta1(WormPoint{cplx(0, 0), cplx(1, 0)}));
}

TEST_CASE("reduce lands in the reduced domain", "[geometry]") {
    const auto p = make_params(3.0 * kPi / 2.0);
    const auto d = reduce({cplx(0, 0), cplx(1, 0)}, {cplx(0, 0), cplx(1, 0)});
    CHECK(d.tau == cplx(0, 0));
    CHECK(d.lambda == cplx(1, 0));

    std::mt19937_64 rng(99);
    for (int t = 0; t < 200; ++t) {
        const auto z = random_strip_point(rng, p, 0.02);
        const auto w = random_strip_point(rng, p, 0.02);
        const auto tl = reduce(z, w);
        CHECK(in_reduced_domain(tl, p));
        CHECK(std::abs(tl.tau.imag()) < 2.0 * p.beta);
    }

    // diagonal z = w: tau = 2i Im z1, lambda = |z2|^2
    const StripPoint z{cplx(0.7, 0.4), std::polar(1.2, 0.9)};
    const auto tl = reduce(z, z);
    CHECK(tl.tau.real() == Catch::Approx(0.0).margin(1e-15));
    CHECK(tl.tau.imag() == Catch::Approx(0.8).epsilon(1e-14));
    CHECK(std::abs(tl.lambda - cplx(1.44, 0.0)) < 1e-14);
}
