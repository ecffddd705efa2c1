#pragma once

#include <algorithm>
#include <queue>
#include <vector>

#include "wormkern/numerics.hpp"

namespace wormkern {

struct QuadratureSpec {
    double tol = 1e-10;       // target relative error
    double xi_cap = 200.0;    // hard truncation radius on the xi-line
    double pole_eps = 1e-2;   // switch-to-Taylor radius at removable points
    int max_subdiv = 4000;
};

struct QuadResult {
    cplx value{0.0, 0.0};
    double err = 0.0;
};

namespace detail {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK values).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
QuadResult gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), hl = 0.5 * (b - a);
    cplx fc = f(c);
    cplx kron = kWgk[7] * fc;
    cplx gauss = kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = hl * kXgk[i];
        const cplx fsum = f(c - dx) + f(c + dx);
        kron += kWgk[i] * fsum;
        if (i % 2 == 1) gauss += kWg[i / 2] * fsum;
    }
    kron *= hl;
    gauss *= hl;
    const double diff = std::abs(kron - gauss);
    // QUADPACK-style sharpened estimate
    const double err = std::min(diff, 200.0 * diff * std::sqrt(std::max(diff, 1e-300)));
    return {kron, err};
}

struct Panel {
    double a, b;
    cplx value;
    double err;
    bool operator<(const Panel& o) const { return err < o.err; }
};

}  // namespace detail

// Adaptive Gauss-Kronrod over [a, b]. Seeds panels at the supplied
// breakpoints (integrand kinks) and caps the initial panel length to
// resolve e^{i tau xi} oscillation; then bisects the worst panel.
template <typename F>
QuadResult integrate_adaptive(const F& f, double a, double b, double tol_rel, double tol_abs,
                              int max_subdiv, const std::vector<double>& breakpoints = {},
                              double max_panel = 1e300) {
    if (!(b > a)) return {};
    std::vector<double> knots{a, b};
    for (double p : breakpoints)
        if (p > a && p < b) knots.push_back(p);
    std::sort(knots.begin(), knots.end());

    std::priority_queue<detail::Panel> heap;
    cplx total{0.0, 0.0};
    double toterr = 0.0;
    int used = 0;
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
        const double lo = knots[i], hi = knots[i + 1];
        const int pieces = std::max(1, (int)std::ceil((hi - lo) / max_panel));
        for (int k = 0; k < pieces; ++k) {
            const double pa = lo + (hi - lo) * k / pieces;
            const double pb = lo + (hi - lo) * (k + 1) / pieces;
            auto r = detail::gk15(f, pa, pb);
            heap.push({pa, pb, r.value, r.err});
            total += r.value;
            toterr += r.err;
            ++used;
        }
    }
    while (!heap.empty() && used < max_subdiv) {
        if (toterr <= std::max(tol_abs, tol_rel * std::abs(total))) break;
        auto worst = heap.top();
        if (worst.err <= 1e-3 * std::max(tol_abs, tol_rel * std::abs(total)) / (heap.size() + 1))
            break;  // everything left is negligible
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto rl = detail::gk15(f, worst.a, mid);
        auto rr = detail::gk15(f, mid, worst.b);
        total += rl.value + rr.value - worst.value;
        toterr += rl.err + rr.err - worst.err;
        heap.push({worst.a, mid, rl.value, rl.err});
        heap.push({mid, worst.b, rr.value, rr.err});
        used += 2;
    }
    if (toterr > std::max(tol_abs, tol_rel * std::abs(total)) && used >= max_subdiv)
        throw ToleranceNotMet("integrate_adaptive: max_subdiv reached");
    return {total, toterr};
}

// Analytic bound for int_X^inf t^2 e^{-a t} dt.
inline double exp_poly_tail(double X, double a) {
    if (a <= 0.0) return 1e300;
    return std::exp(-a * X) * (X * X / a + 2.0 * X / (a * a) + 2.0 / (a * a * a));
}

}  // namespace wormkern
