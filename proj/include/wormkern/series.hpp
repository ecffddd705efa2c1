#pragma once

#include <array>

#include "wormkern/residues.hpp"

namespace wormkern {

// ---------------------------------------------------------------------------
// Entire building blocks
// ---------------------------------------------------------------------------

// E(x) = (1 - e^{x/2})/(x/2), entire, E(0) = -1. Taylor branch below 1e-3.
inline cplx E_func(cplx x) {
    if (std::abs(x) < 1e-3) {
        const cplx y = 0.5 * x;
        return -(1.0 + y / 2.0 + y * y / 6.0 + y * y * y / 24.0);
    }
    return (1.0 - std::exp(0.5 * x)) / (0.5 * x);
}

// The six entire coefficient functions of the Q-factorization; the signed
// variant G^- is obtained by delta -> -delta, and `sign` selects it. The
// delta-dependent pieces were derived from the difference-quotient form and
// are checked against it numerically (route A == route B); the decomposition
// is not unique because (alpha-lambda)^2 = alpha^2 - alpha lambda -
// lambda (alpha-lambda), and this gauge keeps G5, G6 proportional to delta.
struct GValues {
    cplx G1, G2, G3, G4, G5, G6;
};

inline GValues G_funcs(cplx x, double delta, double h, int sign) {
    const double d = sign >= 0 ? delta : -delta;
    const cplx ihx1 = cplx(0.0, h) * x - 1.0;
    const cplx E = std::exp(-0.5 * x);
    const cplx u1 = em1(-0.5 * x);
    GValues g;
    g.G1 = ihx1 * em2m1(-0.5 * x) / 4.0 + d * ihx1 * em2(-0.5 * x) + (h * h - d * d) * u1;
    g.G2 = -4.0 * d * d * ihx1 * E * em2(-2.0 * d * x) + 2.0 * d * d * E * em1(-2.0 * d * x) +
           0.5 * d * u1;
    g.G3 = -16.0 * d * d * d * ihx1 * em2m1(-2.0 * d * x) -
           4.0 * d * (h * h - d * d) * em1(-2.0 * d * x);
    g.G4 = -ihx1 * u1 * u1 / 4.0 + d * u1;
    g.G5 = d * ihx1 * u1;       // == -2 delta (ihx-1)(e^{-x/2}-1)/x
    g.G6 = -d * em1(-x);        // == +- delta (e^{-x}-1)/x
    return g;
}

// Q_{+-delta}: difference-quotient form (route A). Catastrophically cancelled
// near x = 0; kept for cross-testing against route B.
inline cplx Q_delta_routeA(cplx x, double alpha, cplx lambda, double delta, double h, int sign) {
    const double d = sign >= 0 ? delta : -delta;
    if (std::abs(alpha - lambda) < 1e-12 || std::abs(alpha * std::exp(-0.5 * x) - lambda) < 1e-12)
        throw DenominatorVanishes("Q_delta: alpha e^{-x/2} - lambda or alpha - lambda vanishes");
    auto f = [&](cplx y) { return 1.0 / (alpha * std::exp(-0.5 * y) - lambda); };
    auto fp = [&](cplx y) {
        const cplx den = alpha * std::exp(-0.5 * y) - lambda;
        return 0.5 * alpha * std::exp(-0.5 * y) / (den * den);
    };
    auto F = [&](cplx y) { return std::exp(-2.0 * d * y) * f(y); };
    auto Fp = [&](cplx y) {
        return std::exp(-2.0 * d * y) * (fp(y) - 2.0 * d * f(y));
    };
    const cplx ihx1 = cplx(0.0, h) * x - 1.0;
    return ihx1 / (x * x) * (2.0 * (F(x) - F(0.0)) / x - (Fp(x) + Fp(0.0))) +
           (1.0 / x) * ((h * h - d * d) * (F(x) - F(0.0)) -
                        d * (std::exp(-2.0 * d * x) * fp(x) - fp(0.0)));
}

// Q_{+-delta}: factored entire form (route B), finite at the removable x = 0.
inline cplx Q_delta_routeB(cplx x, double alpha, cplx lambda, double delta, double h, int sign) {
    if (std::abs(alpha - lambda) < 1e-12 || std::abs(alpha * std::exp(-0.5 * x) - lambda) < 1e-12)
        throw DenominatorVanishes("Q_delta: alpha e^{-x/2} - lambda or alpha - lambda vanishes");
    const auto g = G_funcs(x, delta, h, sign);
    const cplx u = alpha * std::exp(-0.5 * x) - lambda;
    const cplx v = alpha - lambda;
    return alpha / (2.0 * u * u * v * v) *
           (u * v * g.G1 + v * v * g.G2 + u * v * v / alpha * g.G3 + alpha * lambda * g.G4 +
            lambda * v * g.G5 + alpha * alpha * g.G6);
}

// ---------------------------------------------------------------------------
// Sum of the residues (closed form)
// ---------------------------------------------------------------------------

// One-sided geometric sums behind the residue series, s = sgn(Re tau):
//   F1 = sum_{j != -1} sgn(j+1) e^{-i sgn(j+1) s pi nu} e^{i tau (j+1)/2 - pi|j+1|/2} lam^j
//   F2 = same with an extra factor (j+1)/2.
// The closed forms are pinned against the direct partial sums in the tests:
inline cplx F1(cplx tau, cplx lambda, const WormParams& p, int s = 1) {
    const cplx X = std::exp((cplx(0.0, 1.0) * tau - kPi) / 2.0);
    const cplx Y = std::exp(-(cplx(0.0, 1.0) * tau + kPi) / 2.0);
    if (std::abs(X * lambda) >= 1.0 || std::abs(Y / lambda) >= 1.0)
        throw AnnulusViolation("F1: lambda outside the convergence annulus");
    const cplx em = std::exp(cplx(0.0, -s * kPi * p.nu));
    const cplx ep = std::exp(cplx(0.0, s * kPi * p.nu));
    return em * X / (1.0 - X * lambda) - ep / (lambda - Y) + ep / lambda;
}

inline cplx F2(cplx tau, cplx lambda, const WormParams& p, int s = 1) {
    const cplx X = std::exp((cplx(0.0, 1.0) * tau - kPi) / 2.0);
    const cplx Y = std::exp(-(cplx(0.0, 1.0) * tau + kPi) / 2.0);
    if (std::abs(X * lambda) >= 1.0 || std::abs(Y / lambda) >= 1.0)
        throw AnnulusViolation("F2: lambda outside the convergence annulus");
    const cplx em = std::exp(cplx(0.0, -s * kPi * p.nu));
    const cplx ep = std::exp(cplx(0.0, s * kPi * p.nu));
    const cplx d1 = 1.0 - X * lambda, d2 = lambda - Y;
    return 0.5 * em * X / (d1 * d1) + 0.5 * ep * Y / (d2 * d2);
}

struct SumR {
    cplx main{0.0, 0.0};          // the two double-pole terms
    cplx error_series{0.0, 0.0};  // 1/lambda piece + geometric remainder series
    cplx total{0.0, 0.0};
};

// sum_j R_j(tau) lambda^j in closed form:
//   (nu^2/pi) e^{-s nu tau} [ pos/(1-X lam)^2 + neg/(lam-Y)^2 + regular ],
// with the regular part summed numerically (terms decay like
// e^{-3 pi |j+1|/2} |lam e^{i tau/2}|^j, far inside D).
inline SumR sum_R_closed(cplx tau, cplx lambda, const WormParams& p) {
    TauLambda tl{tau, lambda};
    if (!in_reduced_domain(tl, p)) throw DomainViolation("sum_R_closed: (tau, lambda) not in D");
    const int s = sign_re(tau);
    const double nu = p.nu;
    const cplx i1(0.0, 1.0);
    const cplx X = std::exp((i1 * tau - kPi) / 2.0);
    const cplx Y = std::exp(-(i1 * tau + kPi) / 2.0);
    const cplx em = std::exp(cplx(0.0, -s * kPi * nu));
    const cplx ep = std::exp(cplx(0.0, s * kPi * nu));
    const cplx d1 = 1.0 - X * lambda, d2 = lambda - Y;
    const cplx pref = (nu * nu / kPi) * std::exp(-double(s) * nu * tau);

    const cplx pos = em * X * (1.0 + 2.0 * i1 * double(s) * nu * d1) / (d1 * d1);
    const cplx neg = ep * (Y - 2.0 * i1 * double(s) * nu * d2) / (d2 * d2);
    const cplx one_over_lam = (2.0 * i1 * double(s) * nu * ep + nu / std::sin(kPi * nu)) / lambda;

    // remainder series from the sinh geometric tails (j = -1 has none)
    cplx E{0.0, 0.0};
    for (int side = 0; side < 2; ++side) {
        cplx acc{0.0, 0.0};
        cplx pw = side == 0 ? cplx(1.0) : 1.0 / (lambda * lambda);  // lambda^j at j=0 / j=-2
        for (int k = 0; k < 300; ++k) {
            const int j = side == 0 ? k : -2 - k;
            const double m = 0.5 * (j + 1);
            const double sg = (j + 1) > 0 ? 1.0 : -1.0;
            const cplx rj = 2.0 * sg * std::exp(cplx(0.0, -3.0 * sg * s * kPi * nu)) *
                            std::exp(-3.0 * kPi * std::abs(m)) /
                            (1.0 - std::exp(cplx(-2.0 * kPi * std::abs(m), -2.0 * sg * s * kPi * nu)));
            const cplx term = (m + i1 * double(s) * nu) * rj * std::exp(i1 * tau * m) * pw;
            acc += term;
            if (std::abs(term) < 1e-18 * (std::abs(acc) + 1e-30) && k > 2) break;
            pw = side == 0 ? pw * lambda : pw / lambda;
        }
        E += acc;
    }

    SumR out;
    out.main = pref * (pos + neg);
    out.error_series = pref * (one_over_lam + E);
    out.total = out.main + out.error_series;
    return out;
}

// ---------------------------------------------------------------------------
// The script-I sums (closed forms behind the M_j part of the kernel)
// ---------------------------------------------------------------------------

struct RSParams {
    double R;
    double S;
    double delta = 0.0;
    double h;
};

inline bool in_reduced_domain_rs(cplx tau, cplx lambda, const RSParams& rs) {
    if (lambda == cplx(0.0)) return false;
    const double llam = std::log(std::norm(lambda));
    return std::abs(tau.imag() - llam) < rs.S && std::abs(llam) < rs.R;
}

namespace detail {

struct PsiSet {
    cplx psi1p, psi2p, psi1m, psi2m, psi4p, psi4m;
};

inline PsiSet psi_set(cplx tau, cplx lambda, const RSParams& rs) {
    const cplx i1(0.0, 1.0);
    const cplx pp = i1 * tau + rs.R + rs.S;
    const cplx qq = i1 * tau - rs.R - rs.S;
    const cplx dh = rs.delta - i1 * rs.h;   // delta - ih
    const cplx dph = rs.delta + i1 * rs.h;  // delta + ih
    PsiSet ps;
    ps.psi1p = dh * pp + 2.0 * (1.0 - std::exp(-rs.R / 2.0) * lambda) * (2.0 * dh + dh * dh * pp);
    ps.psi2p = -dph * qq + 2.0 * (1.0 - std::exp((-rs.S + i1 * tau) / 2.0) * lambda) *
                               (2.0 * dph - dph * dph * qq);
    ps.psi1m = -dph * qq +
               2.0 * (std::exp(rs.R / 2.0) * lambda - 1.0) * (2.0 * dph - dph * dph * qq);
    ps.psi2m = dh * pp + 2.0 * (lambda * std::exp((i1 * tau + rs.S) / 2.0) - 1.0) *
                             (2.0 * dh + dh * dh * pp);
    ps.psi4p = E_func(i1 * tau + (rs.R + rs.S));
    ps.psi4m = E_func(i1 * tau - (rs.R + rs.S));
    return ps;
}

}  // namespace detail

// sum_j script-I_j(tau) lambda^j, grouped form: the cubic 1/(i tau +- (R+S))^3
// pieces of the one-sided sums are already cancelled into the psi4 coupling
// terms, and the inner II-sums enter through the entire Q factorization.
inline cplx sum_script_I_closed(cplx tau, cplx lambda, const RSParams& rs) {
    if (!in_reduced_domain_rs(tau, lambda, rs))
        throw DomainViolation("sum_script_I_closed: (tau, lambda) outside D_{R,S}");
    const cplx i1(0.0, 1.0);
    const double R = rs.R, S = rs.S, d = rs.delta, h = rs.h;
    const cplx pp = i1 * tau + R + S;
    const cplx qq = i1 * tau - R - S;
    const auto ps = detail::psi_set(tau, lambda, rs);
    const cplx A = std::exp(cplx(0.0, h * (R + S))) * std::exp(-d * pp);
    const cplx B = std::exp(cplx(0.0, -h * (R + S))) * std::exp(-d * qq);
    const cplx eR = std::exp(R / 2.0), emR = std::exp(-R / 2.0);
    const cplx Yp = std::exp(-(i1 * tau + S) / 2.0);  // e^{-[i tau + S]/2}
    const cplx Ym = std::exp((S - i1 * tau) / 2.0);   // e^{[S - i tau]/2}
    const cplx dR = eR - lambda, dYp = lambda - Yp, dYm = Ym - lambda, dmR = lambda - emR;

    cplx total = A / (pp * pp) *
                 (eR * (1.0 + ps.psi1p) / (2.0 * dR * dR) +
                  Yp * (1.0 + ps.psi2m) / (2.0 * dYp * dYp) +
                  Yp * ps.psi4p / (dR * (Yp - lambda)));
    total += B / (qq * qq) *
             (Ym * (1.0 + ps.psi2p) / (2.0 * dYm * dYm) +
              emR * (1.0 + ps.psi1m) / (2.0 * dmR * dmR) +
              Ym * ps.psi4m / ((emR - lambda) * (Ym - lambda)));

    const cplx x1 = i1 * tau + R - S;
    const cplx x2 = i1 * tau - R + S;
    total += std::exp(cplx(0.0, h * (R - S))) * std::exp(d * x1) *
             Q_delta_routeB(x1, std::exp(R / 2.0), lambda, d, h, +1);
    total += std::exp(cplx(0.0, -h * (R - S))) * std::exp(d * x2) *
             Q_delta_routeB(x2, std::exp(-R / 2.0), lambda, d, h, -1);
    return total;
}

// One-sided closed sums, exposed for testing against per-mode quadrature of
// the matching integrand pieces. positive_j selects j >= 0 (else j <= -1).
// The outer-piece sums keep their explicit cubic 1/(i tau +- (R+S))^3 terms.
inline cplx sum_one_sided_outer(cplx tau, cplx lambda, const RSParams& rs, bool positive_j) {
    const cplx i1(0.0, 1.0);
    const double R = rs.R, S = rs.S, d = rs.delta;
    const cplx pp = i1 * tau + R + S;
    const cplx qq = i1 * tau - R - S;
    const cplx dh = d - i1 * rs.h, dph = d + i1 * rs.h;
    const cplx A = std::exp(cplx(0.0, rs.h * (R + S))) * std::exp(-d * pp);
    const cplx B = std::exp(cplx(0.0, -rs.h * (R + S))) * std::exp(-d * qq);
    const cplx eR = std::exp(R / 2.0), emR = std::exp(-R / 2.0);
    const cplx Yp = std::exp(-(i1 * tau + S) / 2.0);
    const cplx Ym = std::exp((S - i1 * tau) / 2.0);
    if (positive_j) {
        cplx t = eR / (2.0 * (eR - lambda) * (eR - lambda)) * A * (1.0 / (pp * pp) + dh / pp);
        t += A / (eR - lambda) * (2.0 / (pp * pp * pp) + 2.0 * dh / (pp * pp) + dh * dh / pp);
        t += Ym / (2.0 * (Ym - lambda) * (Ym - lambda)) * B * (1.0 / (qq * qq) - dph / qq);
        t -= B / (Ym - lambda) * (2.0 / (qq * qq * qq) - 2.0 * dph / (qq * qq) + dph * dph / qq);
        return t;
    }
    cplx t = B / (lambda - emR) * (-2.0 / (qq * qq * qq) + 2.0 * dph / (qq * qq) - dph * dph / qq);
    t += emR / (2.0 * (lambda - emR) * (lambda - emR)) * B * (1.0 / (qq * qq) - dph / qq);
    t += A / (lambda - Yp) * (2.0 / (pp * pp * pp) + 2.0 * dh / (pp * pp) + dh * dh / pp);
    t += Yp / (2.0 * (lambda - Yp) * (lambda - Yp)) * A * (1.0 / (pp * pp) + dh / pp);
    return t;
}

// Closed form of the literal inner-piece sums: sum_j lambda^j times the
// integral of the full integrand over (0, m) resp. (m, 0). The script-I
// total is the plain sum of outer and inner pieces.
inline cplx sum_one_sided_inner(cplx tau, cplx lambda, const RSParams& rs, bool positive_j) {
    const cplx i1(0.0, 1.0);
    if (positive_j) {
        const cplx x1 = i1 * tau + rs.R - rs.S;
        return std::exp(cplx(0.0, rs.h * (rs.R - rs.S))) * std::exp(rs.delta * x1) *
               Q_delta_routeB(x1, std::exp(rs.R / 2.0), lambda, rs.delta, rs.h, +1);
    }
    const cplx x2 = i1 * tau - rs.R + rs.S;
    return std::exp(cplx(0.0, -rs.h * (rs.R - rs.S))) * std::exp(rs.delta * x2) *
           Q_delta_routeB(x2, std::exp(-rs.R / 2.0), lambda, rs.delta, rs.h, -1);
}

// Pre-grouping variant: the one-sided sums with their explicit cubic
// 1/(i tau +- (R+S))^3 terms left in place. Used to verify the cubic
// cancellation against the grouped form.
inline cplx sum_script_I_pregroup(cplx tau, cplx lambda, const RSParams& rs) {
    if (!in_reduced_domain_rs(tau, lambda, rs))
        throw DomainViolation("sum_script_I_pregroup: (tau, lambda) outside D_{R,S}");
    return sum_one_sided_outer(tau, lambda, rs, true) +
           sum_one_sided_inner(tau, lambda, rs, true) +
           sum_one_sided_outer(tau, lambda, rs, false) +
           sum_one_sided_inner(tau, lambda, rs, false);
}

// Oracle for the script-I sums: per-mode quadrature of the defining integral.
inline cplx script_I_quad(cplx tau, int j, const RSParams& rs, const QuadratureSpec& quad) {
    const double m = 0.5 * (j + 1);
    const cplx i1(0.0, 1.0);
    const cplx b = 2.0 * i1 * rs.h - m;
    const cplx c = i1 * rs.h * (i1 * rs.h - m);
    auto f = [&](double xi) {
        const double sg0 = xi >= 0 ? 1.0 : -1.0;
        const double sgm = xi - m >= 0 ? 1.0 : -1.0;
        const cplx sig = sg0 * sgm * std::exp(cplx(0.0, -rs.h * (sgm * rs.R + sg0 * rs.S)));
        return sig * (xi * xi + b * xi + c) * std::exp(i1 * tau * xi) *
               std::exp(-rs.R * std::abs(xi - m)) * std::exp(-rs.S * std::abs(xi));
    };
    const double rate_r = rs.R + rs.S - tau.imag();
    const double rate_l = rs.R + rs.S + tau.imag();
    const double Xr = std::max(std::abs(m), 1.0) + 45.0 / rate_r;
    const double Xl = std::max(std::abs(m), 1.0) + 45.0 / rate_l;
    const double max_panel = std::min(1.0, kPi / std::max(1.0, std::abs(tau.real())));
    auto r = integrate_adaptive(f, -Xl, Xr, quad.tol, 1e-300, quad.max_subdiv, {0.0, m}, max_panel);
    return r.value;
}

// ---------------------------------------------------------------------------
// sum of the M_j and the E^{(k)} error sums
// ---------------------------------------------------------------------------

// sum_j M_j lambda^j = (2/pi) e^{-s h tau} * script-I sum with R = 2 beta - pi,
// S = pi, delta = 0, and the h sign tied to sgn(Re tau).
inline cplx sum_M_closed(cplx tau, cplx lambda, const WormParams& p,
                         std::optional<double> h_override = std::nullopt) {
    const int s = sign_re(tau);
    const double h_eff = h_override ? *h_override : p.h;
    RSParams rs{p.R(), p.S(), 0.0, s * h_eff};
    return (2.0 / kPi) * std::exp(-double(s) * h_eff * tau) * sum_script_I_closed(tau, lambda, rs);
}

namespace detail {

// E^{(k)}_j by quadrature; k selects which geometric-remainder factor
// multiplies the M-integrand (1: the sinh(pi .) tail, 2: the sinh((2b-pi).)
// tail, 3: both). The products (xi + ih) * remainder are evaluated in the
// fused form w/(e^w - 1): at h = 0 the remainder has a pole at the jump
// point that the linear factor cancels.
inline cplx E_k_mode(cplx tau, int j, int k, double h_signed, const WormParams& p,
                     const QuadratureSpec& quad) {
    const double m = 0.5 * (j + 1);
    const double R = p.R(), S = p.S();
    const cplx i1(0.0, 1.0);
    const cplx ih = i1 * h_signed;
    auto f = [&](double xi) {
        const double sg0 = xi >= 0 ? 1.0 : -1.0;
        const double sgm = xi - m >= 0 ? 1.0 : -1.0;
        const cplx sig = sg0 * sgm * std::exp(cplx(0.0, -h_signed * (sgm * R + sg0 * S)));
        const cplx base = sig * std::exp(i1 * tau * xi) * std::exp(-S * std::abs(xi)) *
                          std::exp(-R * std::abs(xi - m));
        // P1 ~ (xi + ih) (times the k=1 remainder), P2 ~ (xi + ih - m)
        const cplx w1 = 2.0 * S * sg0 * (cplx(xi) + ih);
        const cplx w2 = 2.0 * R * sgm * (cplx(xi - m) + ih);
        const cplx P1 = (k == 1 || k == 3) ? w_over_expm1(w1) / (2.0 * S * sg0) : cplx(xi) + ih;
        const cplx P2 = (k == 2 || k == 3) ? w_over_expm1(w2) / (2.0 * R * sgm) : cplx(xi - m) + ih;
        return base * P1 * P2;
    };
    // extra e^{-2S|xi|} (resp. e^{-2R|xi-m|}) decay; reuse the base rates
    const double rate_r = R + S - tau.imag();
    const double rate_l = R + S + tau.imag();
    const double Xr = std::max(std::abs(m), 1.0) + 40.0 / rate_r;
    const double Xl = std::max(std::abs(m), 1.0) + 40.0 / rate_l;
    const double max_panel = std::min(1.0, kPi / std::max(1.0, std::abs(tau.real())));
    auto r = integrate_adaptive(f, -Xl, Xr, quad.tol, 1e-300, quad.max_subdiv, {0.0, m}, max_panel);
    return (2.0 / kPi) * std::exp(-h_signed * tau) * r.value;
}

}  // namespace detail

// sum_j E_j^{(k)}(tau) lambda^j by direct numeric summation with geometric
// tail stopping; this realizes the bounded error terms of the kernel
// expansion as black-box values.
inline cplx sum_E_k(cplx tau, cplx lambda, int k, const WormParams& p, const QuadratureSpec& quad,
                    std::optional<double> h_override = std::nullopt) {
    TauLambda tl{tau, lambda};
    if (!in_reduced_domain(tl, p)) throw DomainViolation("sum_E_k: (tau, lambda) not in D");
    if (k < 1 || k > 3) throw std::invalid_argument("sum_E_k: k must be 1, 2 or 3");
    const int s = sign_re(tau);
    const double h_signed = s * (h_override ? *h_override : p.h);
    cplx acc{0.0, 0.0};
    for (int side = 0; side < 2; ++side) {
        int consec_small = 0;
        for (int k2 = 0; k2 < 64; ++k2) {
            const int j = side == 0 ? k2 : -1 - k2;
            const cplx term =
                detail::E_k_mode(tau, j, k, h_signed, p, quad) * std::pow(lambda, j);
            acc += term;
            if (std::abs(term) < std::max(1e-16, quad.tol * 1e-2) * (std::abs(acc) + 1e-30)) {
                if (++consec_small >= 2 && k2 >= 4) break;
            } else {
                consec_small = 0;
            }
        }
    }
    return acc;
}

}  // namespace wormkern
