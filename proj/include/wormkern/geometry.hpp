#pragma once

#include <algorithm>
#include <optional>

#include "wormkern/numerics.hpp"

namespace wormkern {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Parameters of the worm pair D_beta / D'_beta. nu = pi/(2 beta - pi) is the
// decay rate of the principal kernel term; h is the contour shift, constrained
// to nu < h < min(1, 2 nu) so the shifted line stays strictly between the two
// pole rows of the mode integrand.
struct WormParams {
    double beta;
    double nu;
    double h;
    double c0;

    double strip_halfwidth() const { return beta - kPi / 2.0; }  // |log|z2|^2| bound
    double R() const { return 2.0 * beta - kPi; }
    double S() const { return kPi; }
};

inline WormParams make_params(double beta, std::optional<double> h = std::nullopt,
                              std::optional<double> c0 = std::nullopt) {
    if (!(beta > kPi))
        throw std::invalid_argument("make_params: beta must exceed pi (else nu >= 1)");
    WormParams p{};
    p.beta = beta;
    p.nu = kPi / (2.0 * beta - kPi);
    const double hmax = std::min(1.0, 2.0 * p.nu);
    p.h = h ? *h : 0.5 * (p.nu + hmax);
    if (!(p.nu < p.h && p.h < hmax))
        throw std::invalid_argument("make_params: h must satisfy nu < h < min(1, 2 nu)");
    p.c0 = c0 ? *c0 : 1.0;
    if (!(p.c0 > 0.0)) throw std::invalid_argument("make_params: c0 must be positive");
    return p;
}

// Sharp L^p boundedness range of the Bergman projection on D_beta,
// open interval (2/(1+nu), 2/(1-nu)).
inline std::pair<double, double> lp_range(const WormParams& p) {
    return {2.0 / (1.0 + p.nu), 2.0 / (1.0 - p.nu)};
}

struct StripPoint {
    cplx z1;
    cplx z2;
};

struct WormPoint {
    cplx zeta1;
    cplx zeta2;
};

// Reduced coordinates tau = z1 - conj(w1), lambda = z2 * conj(w2).
struct TauLambda {
    cplx tau;
    cplx lambda;
};

inline bool in_strip_worm(const StripPoint& p, const WormParams& wp) {
    if (p.z2 == cplx(0.0)) return false;
    const double l2 = std::log(std::norm(p.z2));
    return std::abs(p.z1.imag() - l2) < kPi / 2.0 && std::abs(l2) < wp.strip_halfwidth();
}

inline bool in_halfplane_worm(const WormPoint& q, const WormParams& wp) {
    if (q.zeta2 == cplx(0.0) || q.zeta1 == cplx(0.0)) return false;
    const double l2 = std::log(std::norm(q.zeta2));
    const cplx rot = q.zeta1 * std::exp(cplx(0.0, -l2));
    return rot.real() > 0.0 && std::abs(l2) < wp.strip_halfwidth();
}

// Minimum slack over the defining inequalities of D'_beta; negative outside.
// Used by the tests to generate points with a controlled interior margin.
inline double distance_to_boundary(const StripPoint& p, const WormParams& wp) {
    if (p.z2 == cplx(0.0)) return -1.0;
    const double l2 = std::log(std::norm(p.z2));
    const double d1 = kPi / 2.0 - std::abs(p.z1.imag() - l2);
    const double d2 = wp.strip_halfwidth() - std::abs(l2);
    return std::min(d1, d2);
}

inline WormPoint phi_map(const StripPoint& p) { return {std::exp(p.z1), p.z2}; }

// arg zeta1 in the window (-pi/2 + log|zeta2|^2, pi/2 + log|zeta2|^2),
// computed by unwrapping from the principal branch.
inline double arg_zeta1(const WormPoint& q) {
    const double l2 = std::log(std::norm(q.zeta2));
    return std::arg(q.zeta1 * std::exp(cplx(0.0, -l2))) + l2;
}

inline cplx log_zeta1(const WormPoint& q) {
    if (q.zeta1 == cplx(0.0)) throw std::invalid_argument("log_zeta1: zeta1 = 0");
    return cplx(std::log(std::abs(q.zeta1)), arg_zeta1(q));
}

inline StripPoint phi_inverse(const WormPoint& q, const WormParams& wp) {
    if (!in_halfplane_worm(q, wp)) throw DomainViolation("phi_inverse: point not in D_beta");
    return {log_zeta1(q), q.zeta2};
}

inline TauLambda reduce(const StripPoint& z, const StripPoint& w) {
    return {z.z1 - std::conj(w.z1), z.z2 * std::conj(w.z2)};
}

// Membership in the reduced domain D = {|Im tau - log|lambda|^2| < pi,
// e^{-(beta - pi/2)} < |lambda| < e^{beta - pi/2}}.
inline bool in_reduced_domain(const TauLambda& tl, const WormParams& wp) {
    if (tl.lambda == cplx(0.0)) return false;
    const double llam = std::log(std::norm(tl.lambda));
    return std::abs(tl.tau.imag() - llam) < kPi && std::abs(llam) < 2.0 * wp.strip_halfwidth();
}

// Slack version of the D membership, for tail-bound margins.
inline double reduced_domain_margin(const TauLambda& tl, const WormParams& wp) {
    const double llam = std::log(std::norm(tl.lambda));
    const double d1 = kPi - std::abs(tl.tau.imag() - llam);
    const double d2 = 2.0 * wp.strip_halfwidth() - std::abs(llam);
    return std::min(d1, d2);
}

}  // namespace wormkern
