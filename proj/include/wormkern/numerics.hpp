#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wormkern {

using cplx = std::complex<double>;

struct NonConvergent : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ToleranceNotMet : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AnnulusViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DenominatorVanishes : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TailNotSummable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoValidB : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IntegrationUnstable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// sgn(Re tau) with the Re tau = 0 convention fixed to +1.
inline int sign_re(cplx tau) { return tau.real() >= 0.0 ? 1 : -1; }

// (e^z - 1)/z, entire.
inline cplx em1(cplx z) {
    if (std::abs(z) < 0.5) {
        cplx sum = 1.0, term = 1.0;
        for (int n = 1; n < 24; ++n) {
            term *= z / double(n + 1);
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    return (std::exp(z) - 1.0) / z;
}

// (e^z - 1 - z)/z^2, entire.
inline cplx em2(cplx z) {
    if (std::abs(z) < 0.5) {
        cplx sum = 0.5, term = 0.5;
        for (int n = 1; n < 24; ++n) {
            term *= z / double(n + 2);
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    return (std::exp(z) - 1.0 - z) / (z * z);
}

// (2*em2(z) - em1(z))/z = -sum_{n>=0} (n+1) z^n/(n+3)!, entire.
inline cplx em2m1(cplx z) {
    if (std::abs(z) < 0.5) {
        cplx sum = 0.0, pw = 1.0;
        double fact = 6.0;  // 3!
        for (int n = 0; n < 26; ++n) {
            cplx term = -double(n + 1) / fact * pw;
            sum += term;
            pw *= z;
            fact *= double(n + 4);
            if (std::abs(term) < 1e-18 * std::abs(sum) && n > 2) break;
        }
        return sum;
    }
    return (2.0 * em2(z) - em1(z)) / z;
}

// x/sinh(a*x) with the removable singularity at x = 0 evaluated by a
// 3-term Taylor series inside |x| < pole_eps (relative error O(eps^6)).
inline cplx x_over_sinh(cplx x, double a, double pole_eps) {
    if (std::abs(x) < pole_eps) {
        cplx y = a * x, y2 = y * y;
        return (1.0 - y2 / 6.0 + 7.0 * y2 * y2 / 360.0) / a;
    }
    return x / std::sinh(a * x);
}

// v/(1 - v) with v = e^{-w}, Re w >= 0. Stable for large Re w.
inline cplx geom_remainder(cplx w) {
    cplx v = std::exp(-w);
    return v / (1.0 - v);
}

// w/(e^w - 1), stable across w = 0 and for large Re w.
inline cplx w_over_expm1(cplx w) {
    if (std::abs(w) < 0.5) return 1.0 / em1(w);
    if (w.real() > 40.0) return w * std::exp(-w);
    return w / (std::exp(w) - 1.0);
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double d = n * sxx - sx * sx;
    LinearFit f;
    f.slope = (n * sxy - sx * sy) / d;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

// C^2 cutoff: 1 on |x| <= c0, 0 on |x| >= 2 c0, quintic smoothstep between.
inline double chi1_cutoff(double x, double c0) {
    const double ax = std::abs(x);
    if (ax <= c0) return 1.0;
    if (ax >= 2.0 * c0) return 0.0;
    const double u = (ax - c0) / c0;
    return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

inline unsigned hardware_threads_cap() {
    if (const char* env = std::getenv("WORMKERN_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

// Deterministic parallel map: fn(i) writes only to slot i of its own output.
template <typename Fn>
void parallel_for(size_t n, Fn&& fn) {
    const unsigned nt = std::min<size_t>(hardware_threads_cap(), n);
    if (nt <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace wormkern
