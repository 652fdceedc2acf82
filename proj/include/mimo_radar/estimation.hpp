#pragma once

// Interference and noise statistics: the synthetic covariance perturbation
// and the training-bin estimators used when nothing is known a priori.

#include <cstdint>
#include <vector>

#include "mimo_radar/array_math.hpp"
#include "mimo_radar/rng.hpp"

namespace mimo_radar {

struct PerturbationModel {
    std::vector<double> rho;           // per interferer
    std::vector<double> sigma_tilde2;  // per interferer, linear
    double sigma2_pert = 0.0;
    std::uint64_t seed = 0;
};

inline void validate(const PerturbationModel& p) {
    if (p.rho.size() != p.sigma_tilde2.size()) throw InvalidArgumentError("rho and sigma_tilde2 lengths differ");
    for (double r : p.rho)
        if (!(std::abs(r) < 1.0)) throw InvalidArgumentError("|rho| must be < 1");
    for (double s : p.sigma_tilde2)
        if (!(s >= 0.0)) throw InvalidArgumentError("interference power must be >= 0");
    if (!(p.sigma2_pert >= 0.0)) throw InvalidArgumentError("sigma2_pert must be >= 0");
}

/// sigma~^2 R_t .* (1 1^H + E), E real symmetric with N(0, sigma2_pert)
/// entries on and above the diagonal.
inline CMatrix perturb_cov(const CMatrix& r_t, double sigma_tilde2, double sigma2_pert, Rng& rng) {
    if (r_t.rows() != r_t.cols()) throw InvalidDimensionError("covariance must be square");
    const long m = r_t.rows();
    Eigen::MatrixXd e = Eigen::MatrixXd::Ones(m, m);
    if (sigma2_pert > 0.0) {
        for (long i = 0; i < m; ++i)
            for (long j = i; j < m; ++j) {
                const double v = real_normal(rng, sigma2_pert);
                e(i, j) += v;
                if (j != i) e(j, i) += v;
            }
    }
    return sigma_tilde2 * r_t.cwiseProduct(e.cast<cdouble>());
}

/// Draw for interferer q from the model's own counter-based stream.
inline CMatrix perturb_cov(const CMatrix& r_t, const PerturbationModel& model, std::size_t q,
                           std::uint64_t draw = 0) {
    if (q >= model.sigma_tilde2.size()) throw InvalidArgumentError("interferer index out of range");
    Rng rng = substream(model.seed, 0x9e27ULL + q, draw);
    return perturb_cov(r_t, model.sigma_tilde2[q], model.sigma2_pert, rng);
}

/// sum_q C_q / sigma2 (x) a~_rq a~_rq^H + I, where C_q is the (possibly
/// perturbed) interference Tx covariance including its power.
inline CMatrix build_rtilde_est(const std::vector<CMatrix>& tx_cov, const CMatrix& a_r_tilde, double sigma2) {
    if (static_cast<long>(tx_cov.size()) != a_r_tilde.cols())
        throw InvalidDimensionError("one Tx covariance per interference steering vector is required");
    if (!(sigma2 > 0.0)) throw InvalidArgumentError("noise power must be positive");
    if (tx_cov.empty()) throw InvalidArgumentError("build_rtilde_est needs M; pass at least one covariance");
    const long m = tx_cov.front().rows();
    const long n = a_r_tilde.rows();
    CMatrix out = CMatrix::Identity(m * n, m * n);
    for (std::size_t q = 0; q < tx_cov.size(); ++q) {
        if (tx_cov[q].rows() != m || tx_cov[q].cols() != m) throw InvalidDimensionError("Tx covariances must be M x M");
        const CVector a = a_r_tilde.col(static_cast<Eigen::Index>(q));
        out += kron(CMatrix(tx_cov[q] / sigma2), CMatrix(a * a.adjoint()));
    }
    return out;
}

/// a_t^H R a_t / ||a_t||^4
inline double h2_from_cov(const CMatrix& r, const CVector& a_t) {
    if (r.rows() != a_t.size() || r.cols() != a_t.size()) throw InvalidDimensionError("covariance must be M x M");
    const double n2 = a_t.squaredNorm();
    return a_t.dot(r * a_t).real() / (n2 * n2);
}

struct BinEstimate {
    double sigma2_hat = 0.0;
    std::vector<CVector> a_t_tilde_hat; // per interferer, length M
    std::vector<cdouble> b_hat;
};

/// Least-squares split of an object-free snapshot into interference Tx
/// vectors along the known Rx steering vectors plus a noise residual.
/// The noise power uses the unbiased M(N-Q) normalization.
inline BinEstimate estimate_bin_stats(const CVector& y, const CVector& a_t, const CMatrix& a_r_tilde,
                                      const Tolerances& tol = {}) {
    const long m = a_t.size();
    const long n = a_r_tilde.rows();
    const long q = a_r_tilde.cols();
    if (y.size() != m * n) throw InvalidDimensionError("snapshot length != M*N");
    if (q > n - 1) throw OverdeterminedInterferenceError(q, n - 1);
    const CMatrix ymat = reshape_virtual(y, m, n); // rows y_m^T
    BinEstimate out;
    CMatrix residual = ymat;
    if (q > 0) {
        require_full_column_rank(a_r_tilde, "interference Rx steering matrix", tol);
        const CMatrix gram_inv = hermitian_inverse(a_r_tilde.adjoint() * a_r_tilde, "interference Gram matrix", tol);
        const CMatrix w = a_r_tilde * gram_inv;           // N x Q, column q = A b_q
        const CMatrix coef = ymat * w.conjugate();        // M x Q
        residual = ymat - coef * a_r_tilde.transpose();
        const double an2 = a_t.squaredNorm();
        for (long i = 0; i < q; ++i) {
            out.a_t_tilde_hat.emplace_back(coef.col(i));
            out.b_hat.push_back(a_t.dot(coef.col(i)) / an2);
        }
    }
    out.sigma2_hat = residual.squaredNorm() / static_cast<double>(m * (n - q));
    return out;
}

struct EstimatedStats {
    double sigma2_hat = 0.0;
    std::vector<double> h2_hat;        // mean |b_hat_q|^2
    std::vector<CMatrix> r_t_hat;      // mean a'_hat a'_hat^H, includes noise bias
    std::size_t bins = 0;
};

inline EstimatedStats aggregate_stats(const std::vector<BinEstimate>& per_bin) {
    if (per_bin.empty()) throw InvalidArgumentError("aggregate_stats needs at least one training bin");
    const std::size_t q = per_bin.front().b_hat.size();
    const long m = q > 0 ? per_bin.front().a_t_tilde_hat.front().size() : 0;
    EstimatedStats s;
    s.h2_hat.assign(q, 0.0);
    s.r_t_hat.assign(q, CMatrix::Zero(m, m));
    for (const BinEstimate& e : per_bin) {
        if (e.b_hat.size() != q || e.a_t_tilde_hat.size() != q)
            throw InvalidDimensionError("training bins disagree on the interferer count");
        s.sigma2_hat += e.sigma2_hat;
        for (std::size_t i = 0; i < q; ++i) {
            s.h2_hat[i] += std::norm(e.b_hat[i]);
            s.r_t_hat[i] += e.a_t_tilde_hat[i] * e.a_t_tilde_hat[i].adjoint();
        }
    }
    const double inv = 1.0 / static_cast<double>(per_bin.size());
    s.sigma2_hat *= inv;
    for (std::size_t i = 0; i < q; ++i) {
        s.h2_hat[i] *= inv;
        s.r_t_hat[i] *= inv;
    }
    s.bins = per_bin.size();
    return s;
}

struct TrainingBins {
    std::vector<long> range_bins;
    std::vector<long> doppler_bins;
    long guard = 2;
};

/// Training cells at +-offset in range and Doppler around the cell under
/// test (wrapped), used as the full product set. offset must exceed the
/// guard-free zone, i.e. offset >= guard.
inline TrainingBins default_training_bins(long range_bin, long doppler_bin, long range_fft, long doppler_fft,
                                          long guard = 2, long offset = 2) {
    if (offset < 1 || offset < guard) throw InvalidArgumentError("training offset must be >= max(1, guard)");
    auto wrap = [](long b, long size) { return ((b % size) + size) % size; };
    TrainingBins t;
    t.guard = guard;
    t.range_bins = {wrap(range_bin - offset, range_fft), wrap(range_bin + offset, range_fft)};
    t.doppler_bins = {wrap(doppler_bin - offset, doppler_fft), wrap(doppler_bin + offset, doppler_fft)};
    return t;
}

}  // namespace mimo_radar
