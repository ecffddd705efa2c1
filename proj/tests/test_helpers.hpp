#pragma once

#include <random>

#include "wormkern/geometry.hpp"

namespace wormtest {

using namespace wormkern;

// Random interior point of D'_beta with at least `margin` slack in every
// defining inequality.
inline StripPoint random_strip_point(std::mt19937_64& rng, const WormParams& p,
                                     double margin = 0.2) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double W = p.strip_halfwidth();
    for (;;) {
        const double l2 = (W - margin) * (2.0 * U(rng) - 1.0);
        const double im = l2 + (kPi / 2.0 - margin) * (2.0 * U(rng) - 1.0);
        const double re = 4.0 * (2.0 * U(rng) - 1.0);
        const double th = 2.0 * kPi * U(rng);
        StripPoint q{cplx(re, im), std::polar(std::exp(l2 / 2.0), th)};
        if (distance_to_boundary(q, p) >= margin * 0.99) return q;
    }
}

// Random (tau, lambda) in the reduced domain D with interior margin.
inline TauLambda random_reduced_point(std::mt19937_64& rng, const WormParams& p,
                                      double margin = 0.25, double re_lo = 0.5,
                                      double re_hi = 5.0, bool both_signs = true) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double W2 = 2.0 * p.strip_halfwidth();
    for (;;) {
        const double v = 2.0 * U(rng) - 1.0;
        const double llam2 = v + (kPi - margin) * (2.0 * U(rng) - 1.0);  // log|lam|^2
        if (std::abs(llam2) >= W2 - margin) continue;
        const double u = (re_lo + (re_hi - re_lo) * U(rng)) *
                         (both_signs && U(rng) < 0.5 ? -1.0 : 1.0);
        TauLambda tl{cplx(u, v), std::polar(std::exp(llam2 / 2.0), 2.0 * kPi * U(rng))};
        if (in_reduced_domain(tl, p) && reduced_domain_margin(tl, p) >= margin * 0.99) return tl;
    }
}

}  // namespace wormtest
