#pragma once

// Spatial detectors on one MN snapshot. sigma2 is the total complex noise
// variance, so every statistic is chi-squared with 2 DoF under H0.

#include <string>
#include <vector>

#include "mimo_radar/array_math.hpp"

namespace mimo_radar {

enum class Detector { Clairvoyant, Rs, Lcmv, Gs };

inline const char* to_string(Detector d) {
    switch (d) {
        case Detector::Clairvoyant: return "clairvoyant";
        case Detector::Rs: return "rs";
        case Detector::Lcmv: return "lcmv";
        case Detector::Gs: return "gs";
    }
    return "?";
}

inline Detector detector_from_string(const std::string& s) {
    if (s == "clairvoyant" || s == "c") return Detector::Clairvoyant;
    if (s == "rs") return Detector::Rs;
    if (s == "lcmv") return Detector::Lcmv;
    if (s == "gs") return Detector::Gs;
    throw InvalidArgumentError("unknown detector '" + s + "'");
}

inline const std::vector<Detector>& all_detectors() {
    static const std::vector<Detector> all{Detector::Clairvoyant, Detector::Rs, Detector::Lcmv, Detector::Gs};
    return all;
}

/// Interference Rx steering vectors and their EINRs h_q^2 / sigma^2.
struct InterferenceSideInfo {
    CMatrix a_r_tilde; // N x Q
    RVector lambda;    // Q
    double sigma2 = 1.0;

    long q() const { return static_cast<long>(a_r_tilde.cols()); }
};

struct GsWeights {
    CVector w;
};

namespace detail {

inline void check_sigma2(double sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw InvalidArgumentError("noise power must be positive, got " + std::to_string(sigma2));
}

inline void check_snapshot(const CVector& y, const CVector& a_t, const CVector& a_r) {
    if (y.size() != a_t.size() * a_r.size())
        throw InvalidDimensionError("snapshot length " + std::to_string(y.size()) + " != M*N = " +
                                    std::to_string(a_t.size() * a_r.size()));
}

inline void check_side(const CVector& a_r, const InterferenceSideInfo& side) {
    if (side.a_r_tilde.cols() > 0 && side.a_r_tilde.rows() != a_r.size())
        throw InvalidDimensionError("interference steering vectors must have N rows");
    if (side.lambda.size() != side.a_r_tilde.cols()) throw InvalidDimensionError("EINR count != interferer count");
    if (side.q() > a_r.size()) throw OverdeterminedInterferenceError(side.q(), a_r.size());
}

/// (2 / sigma2) |w^H y|^2 / norm
inline double quadratic_statistic(const CVector& w, const CVector& y, double norm, double sigma2) {
    return 2.0 / sigma2 * std::norm(w.dot(y)) / norm;
}

}  // namespace detail

/// b~ = a_t^H a~'_t / ||a_t||^2
inline cdouble essential_amplitude(const CVector& a_t_tilde, const CVector& a_t) {
    if (a_t_tilde.size() != a_t.size()) throw InvalidDimensionError("Tx vectors differ in length");
    return a_t.dot(a_t_tilde) / a_t.squaredNorm();
}

struct EssentialCovariance {
    CMatrix r;
    CMatrix r_inv;
};

/// R = sum_q lambda_q (a_t x a~_rq)(a_t x a~_rq)^H + I, with the inverse
/// assembled as I - P_{a_t} x P~.
inline EssentialCovariance essential_covariance(const CVector& a_t, const InterferenceSideInfo& side,
                                                const Tolerances& tol = {}) {
    const long m = a_t.size();
    const long n = side.a_r_tilde.rows();
    if (side.lambda.size() != side.q()) throw InvalidDimensionError("EINR count != interferer count");
    if (side.q() > n) throw OverdeterminedInterferenceError(side.q(), n);
    const long mn = m * n;
    EssentialCovariance out{CMatrix::Identity(mn, mn), CMatrix::Identity(mn, mn)};
    for (long q = 0; q < side.q(); ++q) {
        const CVector v = kron(a_t, CVector(side.a_r_tilde.col(q)));
        out.r += side.lambda(q) * v * v.adjoint();
    }
    if (side.q() == 0) return out;
    const CMatrix p_t = a_t * a_t.adjoint() / a_t.squaredNorm();
    out.r_inv -= kron(p_t, reg_proj(side.a_r_tilde, side.lambda, m, tol));
    return out;
}

inline CMatrix reg_proj_perp(const CVector& a_t, const CVector& a_r, const InterferenceSideInfo& side,
                             const Tolerances& tol) {
    detail::check_side(a_r, side);
    const long n = a_r.size();
    if (side.q() == 0) return CMatrix::Identity(n, n);
    return CMatrix::Identity(n, n) - reg_proj(side.a_r_tilde, side.lambda, a_t.size(), tol);
}

/// w = (a_t x P~perp a_r) / (M a_r^H P~perp a_r)
inline GsWeights gs_weights(const CVector& a_t, const CVector& a_r, const InterferenceSideInfo& side,
                            const Tolerances& tol = {}) {
    const CMatrix pp = reg_proj_perp(a_t, a_r, side, tol);
    const CVector g = pp * a_r;
    const double md = static_cast<double>(a_t.size());
    const double denom = md * a_r.dot(g).real();
    if (!(denom > tol.denominator_ratio * md * static_cast<double>(a_r.size())))
        throw DegenerateGeometryError("object Rx steering vector lies in the interference subspace");
    return {kron(a_t, g) / denom};
}

/// Matched filter on y minus the known interference terms.
inline double t_clairvoyant(const CVector& y, const CVector& a_t, const CVector& a_r,
                            const std::vector<CVector>& interference, double sigma2) {
    detail::check_sigma2(sigma2);
    detail::check_snapshot(y, a_t, a_r);
    CVector clean = y;
    for (const CVector& s : interference) {
        if (s.size() != y.size()) throw InvalidDimensionError("interference snapshot length != M*N");
        clean -= s;
    }
    const CVector a = kron(a_t, a_r);
    return detail::quadratic_statistic(a, clean, a.squaredNorm(), sigma2);
}

inline double t_matched(const CVector& y, const CVector& a_t, const CVector& a_r, double sigma2) {
    return t_clairvoyant(y, a_t, a_r, {}, sigma2);
}

/// Receive-subspace GLRT: null the interference Rx subspace, then match.
inline double t_rs(const CVector& y, const CVector& a_t, const CVector& a_r, const CMatrix& a_r_tilde, double sigma2,
                   const Tolerances& tol = {}) {
    detail::check_sigma2(sigma2);
    detail::check_snapshot(y, a_t, a_r);
    if (a_r_tilde.cols() > 0 && a_r_tilde.rows() != a_r.size())
        throw InvalidDimensionError("interference steering vectors must have N rows");
    if (a_r_tilde.cols() > a_r.size()) throw OverdeterminedInterferenceError(a_r_tilde.cols(), a_r.size());
    const CVector g = a_r_tilde.cols() == 0 ? CVector(a_r) : CVector(proj_perp(a_r_tilde, tol) * a_r);
    const double gnorm = g.squaredNorm();
    if (!(gnorm > tol.denominator_ratio * static_cast<double>(a_r.size())))
        throw DegenerateGeometryError("object Rx steering vector lies in the interference subspace");
    const CVector w = kron(a_t, g);
    return detail::quadratic_statistic(w, y, a_t.squaredNorm() * gnorm, sigma2);
}

/// LCMV statistic from the raw formula with an LU solve. No definiteness
/// check: a perturbed covariance may be indefinite and the value may then
/// be negative or non-finite.
inline double t_lcmv_unchecked(const CVector& y, const CVector& a_t, const CVector& a_r, const CMatrix& r_tilde,
                               double sigma2) {
    const CVector a = kron(a_t, a_r);
    const CVector ra = r_tilde.partialPivLu().solve(a);
    return 2.0 / sigma2 * std::norm(ra.dot(y)) / a.dot(ra).real();
}

inline double t_lcmv(const CVector& y, const CVector& a_t, const CVector& a_r, const CMatrix& r_tilde, double sigma2) {
    detail::check_sigma2(sigma2);
    detail::check_snapshot(y, a_t, a_r);
    if (r_tilde.rows() != y.size() || r_tilde.cols() != y.size())
        throw InvalidDimensionError("normalized covariance must be MN x MN");
    Eigen::LLT<CMatrix> llt(r_tilde);
    if (llt.info() != Eigen::Success) throw NotPositiveDefiniteError("LCMV normalized covariance");
    const CVector a = kron(a_t, a_r);
    const CVector ra = llt.solve(a);
    return detail::quadratic_statistic(ra, y, a.dot(ra).real(), sigma2);
}

/// Generalized-subspace detector.
inline double t_gs(const CVector& y, const CVector& a_t, const CVector& a_r, const InterferenceSideInfo& side,
                   const Tolerances& tol = {}) {
    detail::check_sigma2(side.sigma2);
    detail::check_snapshot(y, a_t, a_r);
    const CMatrix pp = reg_proj_perp(a_t, a_r, side, tol);
    const CVector g = pp * a_r;
    const double md = static_cast<double>(a_t.size());
    const double denom = md * a_r.dot(g).real();
    if (!(denom > tol.denominator_ratio * md * static_cast<double>(a_r.size())))
        throw DegenerateGeometryError("object Rx steering vector lies in the interference subspace");
    return detail::quadratic_statistic(kron(a_t, g), y, denom, side.sigma2);
}

}  // namespace mimo_radar
