#include <catch_amalgamated.hpp>

#include "mimo_radar/detectors.hpp"
#include "mimo_radar/theory.hpp"
#include "oracles.hpp"

using namespace mimo_radar;
using Catch::Approx;

namespace {

// object 30 deg, interferers 40 and 10 deg; d_t = 2 lambda, d_r = lambda / 2
struct Geometry {
    CVector a_t = oracle::steering(4, 2.0 * std::sin(deg_to_rad(30.0)));
    CVector a_r = oracle::steering(4, 0.5 * std::sin(deg_to_rad(30.0)));
    CMatrix a_r_tilde;
    Geometry() {
        a_r_tilde.resize(4, 2);
        a_r_tilde.col(0) = oracle::steering(4, 0.5 * std::sin(deg_to_rad(40.0)));
        a_r_tilde.col(1) = oracle::steering(4, 0.5 * std::sin(deg_to_rad(10.0)));
    }
    InterferenceSideInfo side(double l0, double l1, double sigma2 = 1.0) const {
        RVector l(2);
        l << l0, l1;
        return {a_r_tilde, l, sigma2};
    }
};

struct Instance {
    CVector a_t, a_r;
    InterferenceSideInfo side;
};

Instance random_instance(std::mt19937_64& g, long max_dim = 8) {
    std::uniform_int_distribution<long> dim(2, max_dim);
    std::uniform_real_distribution<double> f(-0.5, 0.5), lam(-2.0, 3.0);
    const long m = dim(g), n = dim(g);
    std::uniform_int_distribution<long> qd(1, n - 1);
    const long q = qd(g);
    Instance s{oracle::steering(m, f(g)), oracle::steering(n, f(g)), {CMatrix(n, q), RVector(q), 1.0}};
    for (long i = 0; i < q; ++i) {
        s.side.a_r_tilde.col(i) = oracle::steering(n, f(g));
        s.side.lambda(i) = std::pow(10.0, lam(g));
    }
    return s;
}

CMatrix brute_r(const Instance& s) {
    const long mn = s.a_t.size() * s.a_r.size();
    CMatrix r = CMatrix::Identity(mn, mn);
    for (long q = 0; q < s.side.q(); ++q) {
        const CVector v = oracle::kron(s.a_t, s.side.a_r_tilde.col(q));
        r += s.side.lambda(q) * v * v.adjoint();
    }
    return r;
}

// residuals of both constraint families
double constraint_residual(const CVector& w, const Instance& s) {
    double worst = std::abs(oracle::kron(s.a_t, s.a_r).dot(w) - cdouble(1.0));
    const long m = s.a_t.size();
    const CMatrix pperp = CMatrix::Identity(m, m) - s.a_t * s.a_t.adjoint() / s.a_t.squaredNorm();
    for (long q = 0; q < s.side.q(); ++q)
        for (long i = 0; i < m; ++i)
            worst = std::max(worst, std::abs(oracle::kron(pperp.col(i), s.side.a_r_tilde.col(q)).dot(w)));
    return worst;
}

}  // namespace

TEST_CASE("essential amplitude", "[detectors]") {
    const CVector a_t = oracle::steering(4, 0.3);
    CHECK(std::abs(essential_amplitude(a_t, a_t) - cdouble(1.0)) < 1e-15);
    CVector orth = oracle::steering(4, 0.3 + 0.25);
    CHECK(std::abs(essential_amplitude(orth, a_t)) < 1e-15);

    std::mt19937_64 g(1);
    const CMatrix pperp = CMatrix::Identity(4, 4) - a_t * a_t.adjoint() / a_t.squaredNorm();
    for (int i = 0; i < 20; ++i) {
        const CVector r = pperp * oracle::random_vector(4, g);
        const CVector v = a_t + r;
        const cdouble b = essential_amplitude(v, a_t);
        CHECK(std::abs(b - cdouble(1.0)) < 1e-14);
        CHECK((b * a_t + pperp * v - v).norm() < 1e-13);
    }
    CHECK_THROWS_AS(essential_amplitude(CVector::Ones(3), a_t), InvalidDimensionError);
}

TEST_CASE("essential covariance", "[detectors]") {
    const Geometry geo;
    const EssentialCovariance none = essential_covariance(geo.a_t, {CMatrix(4, 0), RVector(0), 1.0});
    CHECK((none.r - CMatrix::Identity(16, 16)).norm() == 0.0);

    std::mt19937_64 g(2);
    for (int i = 0; i < 50; ++i) {
        const Instance s = random_instance(g);
        const EssentialCovariance ec = essential_covariance(s.a_t, s.side);
        const long mn = ec.r.rows();
        CHECK((ec.r - brute_r(s)).norm() < 1e-10 * ec.r.norm());
        CHECK((ec.r * ec.r_inv - CMatrix::Identity(mn, mn)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((ec.r_inv - brute_r(s).inverse()).norm() < 1e-8 * ec.r_inv.norm());
    }

    InterferenceSideInfo one{CMatrix(oracle::steering(4, 0.2)), RVector::Ones(1), 1.0};
    const EssentialCovariance ec = essential_covariance(oracle::steering(4, 0.1), one);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(ec.r);
    CHECK(es.eigenvalues().maxCoeff() == Approx(17.0).epsilon(1e-12));
    CHECK(es.eigenvalues().minCoeff() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("GS weights satisfy the constraints", "[detectors]") {
    const Geometry geo;
    const Instance fig{geo.a_t, geo.a_r, geo.side(0.1, 0.1)};
    CHECK(constraint_residual(gs_weights(fig.a_t, fig.a_r, fig.side).w, fig) <= 1e-10);

    std::mt19937_64 g(3);
    for (int i = 0; i < 1000; ++i) {
        const Instance s = random_instance(g);
        GsWeights w;
        try {
            w = gs_weights(s.a_t, s.a_r, s.side);
        } catch (const DegenerateGeometryError&) {
            continue;
        }
        CHECK(constraint_residual(w.w, s) <= 1e-10);
    }
}

TEST_CASE("GS weights minimize interference-plus-noise power", "[detectors]") {
    std::mt19937_64 g(4);
    for (int i = 0; i < 100; ++i) {
        const Instance s = random_instance(g, 6);
        const CVector w = gs_weights(s.a_t, s.a_r, s.side).w;
        const CMatrix r = brute_r(s);
        // null space of the constraint matrix C^H w = e_0
        const long m = s.a_t.size(), mn = w.size();
        const CMatrix pperp = CMatrix::Identity(m, m) - s.a_t * s.a_t.adjoint() / s.a_t.squaredNorm();
        CMatrix c(mn, 1 + m * s.side.q());
        c.col(0) = oracle::kron(s.a_t, s.a_r);
        for (long q = 0; q < s.side.q(); ++q)
            for (long j = 0; j < m; ++j) c.col(1 + q * m + j) = oracle::kron(pperp.col(j), s.side.a_r_tilde.col(q));
        const CMatrix null = CMatrix::Identity(mn, mn) - oracle::projector(c);
        const double best = w.dot(r * w).real();
        for (int t = 0; t < 20; ++t) {
            const CVector wp = w + null * oracle::random_vector(mn, g) * 0.1;
            CHECK(constraint_residual(wp, s) <= 1e-9);
            CHECK(wp.dot(r * wp).real() >= best - 1e-10);
        }
    }
}

TEST_CASE("GS weights in the limits", "[detectors]") {
    const Geometry geo;
    const GsWeights mf = gs_weights(geo.a_t, geo.a_r, geo.side(0.0, 0.0));
    CHECK((mf.w - oracle::kron(geo.a_t, geo.a_r) / 16.0).norm() < 1e-15);

    const GsWeights rs = gs_weights(geo.a_t, geo.a_r, geo.side(1e8, 1e8));
    const CVector g = (CMatrix::Identity(4, 4) - oracle::projector(geo.a_r_tilde)) * geo.a_r;
    const CVector want = oracle::kron(geo.a_t, g) / (4.0 * g.squaredNorm());
    CHECK((rs.w - want).norm() / want.norm() < 1e-4);

    // object inside the interference subspace with huge EINR
    InterferenceSideInfo same{CMatrix(geo.a_r), RVector::Constant(1, 1e20), 1.0};
    CHECK_THROWS_AS(gs_weights(geo.a_t, geo.a_r, same), DegenerateGeometryError);
    InterferenceSideInfo finite{CMatrix(geo.a_r), RVector::Constant(1, 10.0), 1.0};
    CHECK_NOTHROW(gs_weights(geo.a_t, geo.a_r, finite));
}

TEST_CASE("clairvoyant detector", "[detectors]") {
    const Geometry geo;
    std::mt19937_64 g(5);
    const CVector a = oracle::kron(geo.a_t, geo.a_r);
    std::vector<CVector> tx, intf;
    for (long q = 0; q < 2; ++q) {
        tx.push_back(oracle::random_vector(4, g));
        intf.push_back(oracle::kron(tx.back(), geo.a_r_tilde.col(q)));
    }
    CHECK(t_clairvoyant(intf[0] + intf[1], geo.a_t, geo.a_r, intf, 0.7) < 1e-25);

    const cdouble b(0.3, -0.2);
    CHECK(t_clairvoyant(b * a, geo.a_t, geo.a_r, {}, 0.5) == Approx(2.0 * 16.0 * std::norm(b) / 0.5).epsilon(1e-13));

    // only the essential part along a_t has to be cancelled
    for (int i = 0; i < 10; ++i) {
        const CVector y = b * a + intf[0] + intf[1] + oracle::random_vector(16, g);
        CVector essential = y;
        for (std::size_t q = 0; q < 2; ++q)
            essential -= essential_amplitude(tx[q], geo.a_t) * oracle::kron(geo.a_t, geo.a_r_tilde.col(static_cast<long>(q)));
        const double direct = 2.0 / 1.3 * std::norm(a.dot(essential)) / a.squaredNorm();
        const double t = t_clairvoyant(y, geo.a_t, geo.a_r, intf, 1.3);
        CHECK(std::abs(t - direct) <= 1e-10 * std::max(1.0, direct));
    }
    CHECK_THROWS_AS(t_clairvoyant(a, geo.a_t, geo.a_r, {}, 0.0), InvalidArgumentError);
    CHECK_THROWS_AS(t_clairvoyant(CVector::Ones(15), geo.a_t, geo.a_r, {}, 1.0), InvalidDimensionError);
}

TEST_CASE("RS detector", "[detectors]") {
    const Geometry geo;
    std::mt19937_64 g(6);
    for (long q = 0; q < 2; ++q) {
        const CVector y = oracle::kron(oracle::random_vector(4, g), geo.a_r_tilde.col(q));
        CHECK(t_rs(y, geo.a_t, geo.a_r, geo.a_r_tilde, 1.0) < 1e-25);
    }
    const CVector y0 = oracle::random_vector(16, g);
    CHECK(t_rs(y0, geo.a_t, geo.a_r, CMatrix(4, 0), 1.0) == Approx(t_matched(y0, geo.a_t, geo.a_r, 1.0)).epsilon(1e-13));

    const CVector gvec = (CMatrix::Identity(4, 4) - oracle::projector(geo.a_r_tilde)) * geo.a_r;
    const CVector w = oracle::kron(geo.a_t, gvec);
    for (int i = 0; i < 20; ++i) {
        const CVector y = oracle::random_vector(16, g);
        const double want = 2.0 / 0.4 * std::norm(w.dot(y)) / w.squaredNorm();
        CHECK(std::abs(t_rs(y, geo.a_t, geo.a_r, geo.a_r_tilde, 0.4) - want) <= 1e-10 * want);
    }
    CHECK_THROWS_AS(t_rs(y0, geo.a_t, geo.a_r, CMatrix(geo.a_r), 1.0), DegenerateGeometryError);
}

TEST_CASE("LCMV detector", "[detectors]") {
    const Geometry geo;
    std::mt19937_64 g(7);
    const CVector y = oracle::random_vector(16, g);
    CHECK(t_lcmv(y, geo.a_t, geo.a_r, CMatrix::Identity(16, 16), 2.0) ==
          Approx(t_matched(y, geo.a_t, geo.a_r, 2.0)).epsilon(1e-13));

    for (int i = 0; i < 100; ++i) {
        const Instance s = random_instance(g);
        const CVector yy = oracle::random_vector(s.a_t.size() * s.a_r.size(), g);
        const double gs = t_gs(yy, s.a_t, s.a_r, s.side);
        const double lc = t_lcmv(yy, s.a_t, s.a_r, brute_r(s), 1.0);
        CHECK(std::abs(gs - lc) <= 1e-8 * std::max(gs, 1e-12));
    }

    const InterferenceSideInfo side = geo.side(0.1, 0.1);
    CMatrix r = essential_covariance(geo.a_t, side).r;
    const double exact = t_lcmv(y, geo.a_t, geo.a_r, r, 1.0);
    r(0, 1) += 0.05;
    r(1, 0) += 0.05;
    CHECK(t_lcmv(y, geo.a_t, geo.a_r, r, 1.0) != exact);

    CMatrix indef = CMatrix::Identity(16, 16);
    indef(3, 3) = -1.0;
    CHECK_THROWS_AS(t_lcmv(y, geo.a_t, geo.a_r, indef, 1.0), NotPositiveDefiniteError);
    CHECK(std::isfinite(t_lcmv_unchecked(y, geo.a_t, geo.a_r, indef, 1.0)));
}

TEST_CASE("GS detector", "[detectors]") {
    const Geometry geo;
    std::mt19937_64 g(8);
    for (int i = 0; i < 20; ++i) {
        const CVector y = oracle::random_vector(16, g);
        CHECK(t_gs(y, geo.a_t, geo.a_r, geo.side(0.0, 0.0, 0.8)) ==
              Approx(t_clairvoyant(y, geo.a_t, geo.a_r, {}, 0.8)).epsilon(1e-12));
        const double rs = t_rs(y, geo.a_t, geo.a_r, geo.a_r_tilde, 0.8);
        CHECK(std::abs(t_gs(y, geo.a_t, geo.a_r, geo.side(1e8, 1e8, 0.8)) - rs) <= 1e-4 * rs);
    }

    // interference residual after beamforming: b~_q M a_r^H P~perp a~_rq
    const InterferenceSideInfo side = geo.side(0.3, 2.0);
    const CVector w = gs_weights(geo.a_t, geo.a_r, side).w;
    const CMatrix pp = CMatrix::Identity(4, 4) - reg_proj(geo.a_r_tilde, side.lambda, 4);
    const double denom = 4.0 * geo.a_r.dot(pp * geo.a_r).real();
    for (long q = 0; q < 2; ++q) {
        const CVector tx = oracle::random_vector(4, g);
        const CVector s = oracle::kron(tx, geo.a_r_tilde.col(q));
        const cdouble b = essential_amplitude(tx, geo.a_t);
        const cdouble want = b * 4.0 * geo.a_r.dot(pp * geo.a_r_tilde.col(q)) / denom;
        CHECK(std::abs(w.dot(s) - want) <= 1e-10);
    }
}

TEST_CASE("statistics ignore a global phase", "[detectors]") {
    const Geometry geo;
    const InterferenceSideInfo side = geo.side(0.5, 0.05);
    const CMatrix r = essential_covariance(geo.a_t, side).r;
    std::mt19937_64 g(9);
    std::vector<CVector> intf{oracle::kron(oracle::random_vector(4, g), geo.a_r_tilde.col(0))};
    for (int i = 0; i < 10; ++i) {
        const CVector y = oracle::random_vector(16, g);
        const cdouble rot = oracle::cis(0.1 * i + 0.03);
        std::vector<CVector> rot_intf{intf[0] * rot};
        CHECK(t_clairvoyant(y * rot, geo.a_t, geo.a_r, rot_intf, 1.0) ==
              Approx(t_clairvoyant(y, geo.a_t, geo.a_r, intf, 1.0)).epsilon(1e-12));
        CHECK(t_rs(y * rot, geo.a_t, geo.a_r, geo.a_r_tilde, 1.0) ==
              Approx(t_rs(y, geo.a_t, geo.a_r, geo.a_r_tilde, 1.0)).epsilon(1e-12));
        CHECK(t_lcmv(y * rot, geo.a_t, geo.a_r, r, 1.0) == Approx(t_lcmv(y, geo.a_t, geo.a_r, r, 1.0)).epsilon(1e-12));
        CHECK(t_gs(y * rot, geo.a_t, geo.a_r, side) == Approx(t_gs(y, geo.a_t, geo.a_r, side)).epsilon(1e-12));
        CHECK(t_gs(y, geo.a_t, geo.a_r, side) >= 0.0);
    }
}

TEST_CASE("noncentrality chain", "[detectors]") {
    std::mt19937_64 g(10);
    for (int i = 0; i < 500; ++i) {
        const Instance s = random_instance(g);
        const long m = s.a_t.size(), n = s.a_r.size();
        const CVector gvec = (CMatrix::Identity(n, n) - oracle::projector(s.side.a_r_tilde)) * s.a_r;
        const double rs = static_cast<double>(m) * gvec.squaredNorm();
        const CMatrix pp = CMatrix::Identity(n, n) - reg_proj(s.side.a_r_tilde, s.side.lambda, m);
        const double gs = static_cast<double>(m) * s.a_r.dot(pp * s.a_r).real();
        CHECK(rs <= gs + 1e-10);
        CHECK(gs <= static_cast<double>(m * n) + 1e-10);
    }
}
