#pragma once

#include "wormkern/geometry.hpp"
#include "wormkern/quadrature.hpp"

namespace wormkern {

struct ModeResult {
    int j = 0;
    cplx value{0.0, 0.0};
    double err_estimate = 0.0;
};

// Fourier-mode integrand
//   g_j(xi) = (1/2pi) e^{i tau xi} xi (xi - (j+1)/2)
//             / [ sinh(pi xi) sinh((2 beta - pi)(xi - (j+1)/2)) ].
// Both apparent poles on the real line (xi = 0 and xi = (j+1)/2) are
// removable; inside pole_eps of either one the x/sinh factor switches to its
// Taylor series.
inline cplx g_j(double xi, cplx tau, int j, const WormParams& p, double pole_eps = 1e-2) {
    const double m = 0.5 * (j + 1);
    const cplx f1 = x_over_sinh(cplx(xi), kPi, pole_eps);
    const cplx f2 = x_over_sinh(cplx(xi - m), p.R(), pole_eps);
    return std::exp(cplx(0.0, 1.0) * tau * xi) * f1 * f2 / (2.0 * kPi);
}

// g_j evaluated on the shifted line Im xi = shift.
inline cplx g_j_shifted(double xi, double shift, cplx tau, int j, const WormParams& p,
                        double pole_eps = 1e-2) {
    const double m = 0.5 * (j + 1);
    const cplx z(xi, shift);
    const cplx f1 = x_over_sinh(z, kPi, std::abs(shift) < 1e-12 ? pole_eps : 0.0);
    const cplx f2 = x_over_sinh(z - m, p.R(), std::abs(shift) < 1e-12 ? pole_eps : 0.0);
    return std::exp(cplx(0.0, 1.0) * tau * z) * f1 * f2 / (2.0 * kPi);
}

namespace detail {

// Truncation radius from the analytic decay: beyond X the integrand is
// bounded by e^{log_pref} xi^2 e^{-rate xi}; picks X per side so the tail
// stays below `target`, capped at xi_cap.
inline double choose_truncation(double m, double rate, double log_pref, double target,
                                double xi_cap, double* tail_bound) {
    double X = std::max({1.0, std::abs(m) + 1.0}) + 2.0 / rate;
    double bound;
    for (;;) {
        bound = std::exp(std::min(log_pref, 600.0)) * exp_poly_tail(X, rate);
        if (bound <= target || X >= xi_cap) break;
        X += std::max(0.5, 0.25 * X);
    }
    X = std::min(X, xi_cap);
    *tail_bound = bound;
    return X;
}

template <typename F>
ModeResult integrate_mode(const F& f, cplx tau, int j, const WormParams& p,
                          const QuadratureSpec& quad) {
    if (!(std::abs(tau.imag()) < 2.0 * p.beta))
        throw NonConvergent("mode integral: |Im tau| >= 2 beta");
    const double m = 0.5 * (j + 1);
    // decay rates to the right / left; the sinh((2beta-pi)(xi-m)) factor
    // contributes e^{+R m} (right tail) resp. e^{-R m} (left tail).
    const double rate_r = 2.0 * p.beta - tau.imag();
    const double rate_l = 2.0 * p.beta + tau.imag();
    double tail_r = 0.0, tail_l = 0.0;
    const double Xr = detail::choose_truncation(m, rate_r, p.R() * m, 1e-16, quad.xi_cap, &tail_r);
    const double Xl = detail::choose_truncation(m, rate_l, -p.R() * m, 1e-16, quad.xi_cap, &tail_l);
    const double max_panel = std::min(1.0, kPi / std::max(1.0, std::abs(tau.real())));
    std::vector<double> brk{0.0, m};
    auto r = integrate_adaptive(f, -Xl, Xr, quad.tol, 1e-300, quad.max_subdiv, brk, max_panel);
    ModeResult out;
    out.j = j;
    out.value = r.value;
    out.err_estimate = r.err + tail_r + tail_l;
    return out;
}

}  // namespace detail

// I_j(tau) = int_R g_j(xi) d xi by adaptive quadrature with an analytic
// tail bound (decay e^{(|Im tau| - 2 beta)|xi|}).
inline ModeResult compute_I_j(cplx tau, int j, const WormParams& p, const QuadratureSpec& quad) {
    auto f = [&](double xi) { return g_j(xi, tau, j, p, quad.pole_eps); };
    return detail::integrate_mode(f, tau, j, p, quad);
}

// Mode weight of the strip decomposition: lambda_j(y) =
// (chi_{pi/2} * [e^{(j+1)(.)} chi_{beta-pi/2}])(y), evaluated in closed form.
inline double weight_lambda_j(double y, int j, const WormParams& p) {
    const double lo = std::max(-p.strip_halfwidth(), y - kPi / 2.0);
    const double hi = std::min(p.strip_halfwidth(), y + kPi / 2.0);
    if (hi <= lo) return 0.0;
    const int a = j + 1;
    if (a == 0) return hi - lo;
    return (std::exp(a * hi) - std::exp(a * lo)) / a;
}

}  // namespace wormkern
