#pragma once

#include "wormkern/modes.hpp"

namespace wormkern {

// First pole row crossed by the contour shift: xi = (j+1)/2 + i s nu,
// s = sgn(Re tau).
struct PoleSpec {
    cplx location;
    int sign = 1;
    int j = 0;
};

inline PoleSpec pole_spec(cplx tau, int j, const WormParams& p) {
    const int s = sign_re(tau);
    return {cplx(0.5 * (j + 1), s * p.nu), s, j};
}

// Two sign conventions for the extracted residue are plausible a priori,
// with middle factor (nu -+ i (j+1)/2) resp. (nu +- i (j+1)/2); neither
// matches the contour integral on its own. `oracle` is the variant the
// numeric pole oracle confirms: R_j = (nu^2/pi) xi0 e^{i tau xi0} /
// sinh(pi xi0), which equals i * sgn(Re tau) times the minus-convention
// value.
enum class ResidueConvention { oracle, candidate_minus, candidate_plus };

inline cplx residue_R_j(cplx tau, int j, const WormParams& p,
                        ResidueConvention conv = ResidueConvention::oracle) {
    const int s = sign_re(tau);
    const double m = 0.5 * (j + 1);
    const double nu = p.nu;
    const cplx xi0(m, s * nu);
    switch (conv) {
        case ResidueConvention::oracle:
            return (nu * nu / kPi) * xi0 * std::exp(cplx(0.0, 1.0) * tau * xi0) /
                   std::sinh(kPi * xi0);
        case ResidueConvention::candidate_minus:
            return (nu * nu / kPi) * (nu - cplx(0.0, s * m)) *
                   std::exp(-double(s) * nu * tau + cplx(0.0, m) * tau) /
                   std::sinh(cplx(kPi * m, s * nu * kPi));
        case ResidueConvention::candidate_plus:
            return (nu * nu / kPi) * (nu + cplx(0.0, s * m)) *
                   std::exp(-double(s) * nu * tau + cplx(0.0, m) * tau) /
                   std::sinh(cplx(kPi * m, s * nu * kPi));
    }
    return {};
}

// Numeric pole oracle: sgn(Re tau) * contour integral of g_j around the
// crossed pole (trapezoid rule on a circle; spectrally accurate). This is
// exactly the R_j appearing in I_j = R_j + J_j.
inline cplx residue_contour_oracle(cplx tau, int j, const WormParams& p, int n_nodes = 512) {
    const auto pole = pole_spec(tau, j, p);
    const double r = std::min(0.1, p.nu / 2.0);
    cplx acc{0.0, 0.0};
    for (int k = 0; k < n_nodes; ++k) {
        const double th = 2.0 * kPi * k / n_nodes;
        const cplx z = pole.location + r * std::exp(cplx(0.0, th));
        const cplx dz = cplx(0.0, 1.0) * r * std::exp(cplx(0.0, th));
        const double m = 0.5 * (j + 1);
        const cplx g = std::exp(cplx(0.0, 1.0) * tau * z) * z * (z - m) /
                       (std::sinh(kPi * z) * std::sinh(p.R() * (z - m))) / (2.0 * kPi);
        acc += g * dz;
    }
    return double(pole.sign) * acc * (2.0 * kPi / n_nodes);
}

// J_j(tau) = int g_j(xi + i s h) d xi along the shifted line. The default
// shift is params.h with s = sgn(Re tau); h_override = 0 reproduces I_j.
inline ModeResult compute_J_j(cplx tau, int j, const WormParams& p, const QuadratureSpec& quad,
                              std::optional<double> h_override = std::nullopt) {
    const int s = sign_re(tau);
    const double h_eff = h_override ? *h_override : p.h;
    // reject shifts landing on a pole row (Im xi = k or k nu, k != 0)
    const double near_int = std::abs(h_eff - std::round(h_eff));
    const double knu = std::round(h_eff / p.nu);
    if ((std::abs(h_eff) > 1e-9 && near_int < 1e-9) ||
        (knu != 0.0 && std::abs(h_eff - knu * p.nu) < 1e-9))
        throw std::invalid_argument("compute_J_j: shift hits a pole row");
    const double shift = s * h_eff;
    auto f = [&](double xi) { return g_j_shifted(xi, shift, tau, j, p, quad.pole_eps); };
    return detail::integrate_mode(f, tau, j, p, quad);
}

struct ModeDefect {
    int j;
    cplx I, R, J;
    double defect;
};

// Record-keeping sweep for the decomposition identity I_j = R_j + J_j.
inline std::vector<ModeDefect> decompose_modes(cplx tau, int j_min, int j_max,
                                               const WormParams& p, const QuadratureSpec& quad) {
    std::vector<ModeDefect> out;
    for (int j = j_min; j <= j_max; ++j) {
        const auto I = compute_I_j(tau, j, p, quad);
        const auto J = compute_J_j(tau, j, p, quad);
        const cplx R = residue_R_j(tau, j, p);
        out.push_back({j, I.value, R, J.value, std::abs(I.value - R - J.value)});
    }
    return out;
}

// Minimum distance from the shifted line to any pole of g_j; positive by
// the h-window (1.4). Asserted at configuration time by the validate suite.
inline double pole_line_safety(const WormParams& p) {
    return std::min({p.h - p.nu, 2.0 * p.nu - p.h, 1.0 - p.h});
}

}  // namespace wormkern
