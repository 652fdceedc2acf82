#pragma once

// Detection theory for the chi-squared(2) statistics: Marcum Q, thresholds,
// noncentralities and analytical ROC points.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "mimo_radar/detectors.hpp"

namespace mimo_radar {

namespace detail {

/// e^{-x} I_k(x) for k = 0..kmax, x > 0, by Miller's backward recurrence
/// normalized with e^{-x}(I_0 + 2 sum_k I_k) = 1.
inline std::vector<double> scaled_bessel_i(double x, long kmax) {
    const long start = kmax + 30 + static_cast<long>(2.0 * std::sqrt(40.0 * static_cast<double>(kmax + 1)));
    std::vector<double> out(static_cast<std::size_t>(kmax + 1), 0.0);
    double next = 0.0; // I_{k+1}
    double cur = 1e-300; // I_k
    double sum = 0.0;  // I_0 + 2 sum_{k>=1} I_k, same scale
    for (long k = start; k >= 1; --k) {
        const double prev = next + 2.0 * static_cast<double>(k) / x * cur; // I_{k-1}
        if (k <= kmax) out[static_cast<std::size_t>(k)] = cur;
        sum += 2.0 * cur;
        next = cur;
        cur = prev;
        if (cur > 1e250) {
            const double s = 1e-250;
            cur *= s;
            next *= s;
            sum *= s;
            for (long i = k; i <= kmax; ++i) out[static_cast<std::size_t>(i)] *= s;
        }
    }
    out[0] = cur;
    sum += cur;
    for (double& v : out) v /= sum;
    return out;
}

}  // namespace detail

/// Marcum Q function of order one.
inline double marcum_q1(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidArgumentError("marcum_q1 needs finite arguments");
    if (a < 0.0 || b < 0.0) throw InvalidArgumentError("marcum_q1 needs nonnegative arguments");
    if (b == 0.0) return 1.0;
    if (a == 0.0) return std::exp(-0.5 * b * b);
    const double x = a * b;
    const double front = std::exp(-0.5 * (a - b) * (a - b));
    if (front == 0.0) return a < b ? 0.0 : 1.0;
    const long kmax = static_cast<long>(std::ceil(x + 25.0 * std::sqrt(x) + 60.0));
    const std::vector<double> s = detail::scaled_bessel_i(x, kmax);
    if (a < b) {
        // e^{-(a^2+b^2)/2} sum_{k>=0} (a/b)^k I_k(ab)
        const double r = a / b;
        double acc = 0.0;
        double rk = 1.0;
        for (long k = 0; k <= kmax; ++k) {
            const double term = rk * s[static_cast<std::size_t>(k)];
            acc += term;
            if (term < 1e-17 * acc && k > x) break;
            rk *= r;
        }
        return std::clamp(front * acc, 0.0, 1.0);
    }
    // 1 - e^{-(a^2+b^2)/2} sum_{k>=1} (b/a)^k I_k(ab)
    const double r = b / a;
    double acc = 0.0;
    double rk = r;
    for (long k = 1; k <= kmax; ++k) {
        const double term = rk * s[static_cast<std::size_t>(k)];
        acc += term;
        if (term < 1e-17 * std::max(acc, 1e-300) && k > x) break;
        rk *= r;
    }
    return std::clamp(1.0 - front * acc, 0.0, 1.0);
}

/// gamma = -2 ln(P_FA); shared by all four detectors.
inline double threshold_from_pfa(double pfa) {
    if (!(pfa > 0.0 && pfa < 1.0)) throw InvalidArgumentError("P_FA must lie in (0, 1)");
    return -2.0 * std::log(pfa);
}

inline double pfa_from_threshold(double gamma) {
    if (!(gamma >= 0.0)) throw InvalidArgumentError("threshold must be nonnegative");
    return std::exp(-0.5 * gamma);
}

inline double pd(double lambda, double gamma) {
    if (!(lambda >= 0.0) || !(gamma >= 0.0)) throw InvalidArgumentError("pd needs lambda >= 0 and gamma >= 0");
    return marcum_q1(std::sqrt(lambda), std::sqrt(gamma));
}

inline double chi2_2_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-0.5 * x); }

inline double ncx2_2_cdf(double x, double lambda) {
    if (x <= 0.0) return 0.0;
    return 1.0 - marcum_q1(std::sqrt(lambda), std::sqrt(x));
}

/// Closed-form noncentrality of each detector for an object of amplitude b.
/// RS and GS need side info; LCMV uses r_tilde when given, otherwise the
/// exact normalized covariance built from side info.
inline double noncentrality(Detector det, cdouble b, double sigma2, const CVector& a_t, const CVector& a_r,
                            const InterferenceSideInfo* side = nullptr, const CMatrix* r_tilde = nullptr,
                            const Tolerances& tol = {}) {
    detail::check_sigma2(sigma2);
    const double snr = 2.0 * std::norm(b) / sigma2;
    const double md = static_cast<double>(a_t.size());
    switch (det) {
        case Detector::Clairvoyant:
            return snr * a_t.squaredNorm() * a_r.squaredNorm();
        case Detector::Rs: {
            if (!side) throw InvalidArgumentError("RS noncentrality needs interference side info");
            detail::check_side(a_r, *side);
            const CVector g = side->q() == 0 ? CVector(a_r) : CVector(proj_perp(side->a_r_tilde, tol) * a_r);
            return snr * a_t.squaredNorm() * g.squaredNorm();
        }
        case Detector::Gs: {
            if (!side) throw InvalidArgumentError("GS noncentrality needs interference side info");
            const CMatrix pp = reg_proj_perp(a_t, a_r, *side, tol);
            return snr * md * a_r.dot(pp * a_r).real();
        }
        case Detector::Lcmv: {
            const CVector a = kron(a_t, a_r);
            if (r_tilde) return snr * a.dot(r_tilde->partialPivLu().solve(a)).real();
            if (!side) throw InvalidArgumentError("LCMV noncentrality needs a covariance or side info");
            return snr * a.dot(essential_covariance(a_t, *side, tol).r_inv * a).real();
        }
    }
    return 0.0;
}

struct DetectionCurve {
    Detector detector = Detector::Gs;
    std::vector<double> gamma_grid;
    std::vector<double> pfa;
    std::vector<double> pd;
    double lambda = 0.0;
};

/// 10^{-2 + 2i/points}, i = 0..points-1: log-uniform in [1e-2, 1).
inline std::vector<double> default_pfa_grid(long points = 20) {
    if (points < 1) throw InvalidArgumentError("P_FA grid needs at least one point");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (long i = 0; i < points; ++i)
        g[static_cast<std::size_t>(i)] = std::pow(10.0, -2.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points));
    return g;
}

/// Analytical ROC over a P_FA grid; points are returned in increasing gamma.
inline DetectionCurve curve(Detector det, double lambda, std::vector<double> pfa_grid) {
    std::sort(pfa_grid.begin(), pfa_grid.end(), std::greater<>());
    DetectionCurve c{det, {}, {}, {}, lambda};
    for (double p : pfa_grid) {
        const double gamma = threshold_from_pfa(p);
        c.gamma_grid.push_back(gamma);
        c.pfa.push_back(p);
        c.pd.push_back(pd(lambda, gamma));
    }
    return c;
}

}  // namespace mimo_radar
