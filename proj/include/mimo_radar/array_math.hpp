#pragma once

// Complex vector/matrix primitives shared by the signal chain, the
// detectors and the estimators: Fourier steering vectors, Kronecker
// products, orthogonal and EINR-regularized projectors, and guarded
// Hermitian inverses.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "mimo_radar/errors.hpp"

namespace mimo_radar {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Fourier vector with entry n = exp(-j 2 pi f n).
using SteeringVector = CVector;
/// Orthogonal projector P_H or its complement.
using ProjectionMatrix = CMatrix;
/// EINR-regularized projector onto an interference Rx subspace.
using RegularizedProjection = CMatrix;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;

/// Numerical guards. Defaults are the project-wide values; every routine
/// that uses one accepts an override.
struct Tolerances {
    /// Smallest singular value relative to the largest for a full-rank H.
    double rank_ratio = 1e-10;
    /// Smallest LDLT pivot relative to the largest for a Hermitian inverse.
    double pivot_ratio = 1e-12;
    /// Relative floor for the GS / RS normalization terms.
    double denominator_ratio = 1e-12;
};

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

inline cdouble unit_phasor(double cycles) {
    const double phase = kTwoPi * cycles;
    return {std::cos(phase), std::sin(phase)};
}

/// Normalized spatial frequency d sin(phi) / lambda.
inline double spatial_frequency(double spacing, double angle_deg, double wavelength) {
    return spacing * std::sin(deg_to_rad(angle_deg)) / wavelength;
}

inline SteeringVector steering(long length, double f) {
    if (length < 1) throw InvalidDimensionError("steering vector length must be >= 1, got " + std::to_string(length));
    SteeringVector v(length);
    for (long n = 0; n < length; ++n) v(n) = unit_phasor(-f * static_cast<double>(n));
    return v;
}

inline CVector kron(const CVector& a, const CVector& b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Inverse of a Hermitian positive-definite matrix via pivoted LDL^H.
/// Throws SingularSubspaceError when the smallest pivot falls below
/// tol.pivot_ratio times the largest (or any pivot is non-positive).
inline CMatrix hermitian_inverse(const CMatrix& a, const std::string& what, const Tolerances& tol = {}) {
    if (a.rows() != a.cols()) throw InvalidDimensionError(what + " must be square");
    if (a.rows() == 0) return CMatrix(0, 0);
    Eigen::LDLT<CMatrix> ldlt(a);
    const RVector d = ldlt.vectorD().real();
    const double dmax = d.cwiseAbs().maxCoeff();
    const double dmin = d.minCoeff();
    if (ldlt.info() != Eigen::Success || !(dmax > 0.0) || dmin <= tol.pivot_ratio * dmax) {
        const double cond = dmin > 0.0 ? dmax / dmin : std::numeric_limits<double>::infinity();
        throw SingularSubspaceError(what, cond);
    }
    return ldlt.solve(CMatrix::Identity(a.rows(), a.cols()));
}

/// Condition number of H from its singular values (inf when rank deficient).
inline double condition_number(const CMatrix& h) {
    if (h.cols() == 0) return 1.0;
    Eigen::JacobiSVD<CMatrix> svd(h);
    const RVector s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(s.size() - 1);
    if (h.cols() > h.rows() || smin <= 0.0) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

inline void require_full_column_rank(const CMatrix& h, const std::string& what, const Tolerances& tol = {}) {
    if (h.cols() == 0) return;
    const double cond = condition_number(h);
    if (!(cond < 1.0 / tol.rank_ratio)) throw SingularSubspaceError(what + " is rank deficient", cond);
}

/// P_H = H (H^H H)^{-1} H^H. An empty H projects onto {0}.
inline ProjectionMatrix proj(const CMatrix& h, const Tolerances& tol = {}) {
    const Eigen::Index n = h.rows();
    if (h.cols() == 0) return CMatrix::Zero(n, n);
    require_full_column_rank(h, "projection basis", tol);
    const CMatrix gram_inv = hermitian_inverse(h.adjoint() * h, "projection Gram matrix", tol);
    return h * gram_inv * h.adjoint();
}

inline ProjectionMatrix proj_perp(const CMatrix& h, const Tolerances& tol = {}) {
    const Eigen::Index n = h.rows();
    return CMatrix::Identity(n, n) - proj(h, tol);
}

/// M A_r (Lambda^{-1} + M A_r^H A_r)^{-1} A_r^H. Columns whose EINR is
/// zero contribute nothing and are dropped before the inverse.
inline RegularizedProjection reg_proj(const CMatrix& a_r, const RVector& lambda, long m,
                                      const Tolerances& tol = {}) {
    const Eigen::Index n = a_r.rows();
    const Eigen::Index q = a_r.cols();
    if (lambda.size() != q)
        throw InvalidDimensionError("EINR count " + std::to_string(lambda.size()) + " != interferer count " +
                                    std::to_string(q));
    if (q > n) throw OverdeterminedInterferenceError(q, n);
    if (m < 1) throw InvalidDimensionError("Tx count M must be >= 1");
    for (Eigen::Index i = 0; i < q; ++i)
        if (!(lambda(i) >= 0.0) || !std::isfinite(lambda(i)))
            throw InvalidArgumentError("EINR must be finite and nonnegative, got " + std::to_string(lambda(i)));

    Eigen::Index kept = 0;
    for (Eigen::Index i = 0; i < q; ++i) kept += lambda(i) > 0.0 ? 1 : 0;
    if (kept == 0) return CMatrix::Zero(n, n);

    CMatrix a(n, kept);
    RVector inv_lambda(kept);
    for (Eigen::Index i = 0, j = 0; i < q; ++i) {
        if (lambda(i) <= 0.0) continue;
        a.col(j) = a_r.col(i);
        inv_lambda(j) = 1.0 / lambda(i);
        ++j;
    }
    const double md = static_cast<double>(m);
    CMatrix inner = md * (a.adjoint() * a);
    inner.diagonal() += inv_lambda.cast<cdouble>();
    return md * a * hermitian_inverse(inner, "regularized projection kernel", tol) * a.adjoint();
}

/// Reshape an MN virtual-array vector (m-major) into an M x N matrix.
inline CMatrix reshape_virtual(const CVector& y, long m, long n) {
    if (y.size() != m * n) throw InvalidDimensionError("virtual vector length != M*N");
    CMatrix out(m, n);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < n; ++j) out(i, j) = y(i * n + j);
    return out;
}

/// Ratio of the second to the first singular value (0 for rank <= 1).
inline double rank_one_residual(const CMatrix& a) {
    Eigen::JacobiSVD<CMatrix> svd(a);
    const RVector s = svd.singularValues();
    if (s.size() < 2 || s(0) == 0.0) return 0.0;
    return s(1) / s(0);
}

inline double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace mimo_radar
