#include <catch_amalgamated.hpp>

#include "mimo_radar/rng.hpp"
#include "mimo_radar/theory.hpp"
#include "oracles.hpp"

using namespace mimo_radar;
using Catch::Approx;

TEST_CASE("Marcum Q against numerical integration", "[theory]") {
    CHECK(marcum_q1(2.5, 0.0) == 1.0);
    CHECK(marcum_q1(0.0, 2.0) == Approx(std::exp(-2.0)).margin(1e-15));
    CHECK(marcum_q1(0.0, 2.0) == Approx(0.135335).margin(1e-6));
    CHECK(marcum_q1(1.0, 1.0) == Approx(oracle::marcum_q1(1.0, 1.0)).margin(1e-10));
    CHECK(marcum_q1(1.0, 1.0) == Approx(0.73288).margin(1e-5));

    double worst = 0.0;
    for (double a : {0.05, 0.5, 1.0, 2.0, 3.18, 5.0, 8.0, 12.0})
        for (double b : {0.1, 0.7, 1.0, 2.146, 3.0, 4.5, 7.0, 10.0, 14.0})
            worst = std::max(worst, std::abs(marcum_q1(a, b) - oracle::marcum_q1(a, b)));
    CHECK(worst <= 1e-10);

    CHECK_THROWS_AS(marcum_q1(-1.0, 1.0), InvalidArgumentError);
    CHECK_THROWS_AS(marcum_q1(1.0, std::nan("")), InvalidArgumentError);
    // far tails stay in [0, 1]
    CHECK(marcum_q1(1.0, 60.0) == 0.0);
    CHECK(marcum_q1(60.0, 1.0) == 1.0);
}

TEST_CASE("Marcum Q monotonicity", "[theory]") {
    std::mt19937_64 g(12);
    std::uniform_real_distribution<double> u(0.0, 10.0), step(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double a = u(g), b = u(g), d = step(g);
        CHECK(marcum_q1(a + d, b) >= marcum_q1(a, b) - 1e-14);
        CHECK(marcum_q1(a, b + d) <= marcum_q1(a, b) + 1e-14);
    }
}

TEST_CASE("thresholds", "[theory]") {
    CHECK(threshold_from_pfa(std::exp(-0.5)) == Approx(1.0).epsilon(1e-15));
    CHECK(threshold_from_pfa(0.1) == Approx(4.60517).margin(1e-5));
    CHECK(threshold_from_pfa(1.0 - 1e-12) < 1e-11);
    CHECK(pfa_from_threshold(threshold_from_pfa(0.037)) == Approx(0.037).epsilon(1e-14));
    CHECK_THROWS_AS(threshold_from_pfa(0.0), InvalidArgumentError);
    CHECK_THROWS_AS(threshold_from_pfa(1.0), InvalidArgumentError);
    CHECK_THROWS_AS(pfa_from_threshold(-1.0), InvalidArgumentError);
}

TEST_CASE("detection probability", "[theory]") {
    for (double gamma : {0.3, 1.0, 4.60517, 9.0}) CHECK(pd(0.0, gamma) == Approx(std::exp(-gamma / 2.0)).epsilon(1e-13));
    CHECK(pd(5.0, 0.0) == 1.0);
    const double lambda = 2.0 * 16.0 * std::pow(10.0, -0.5);
    CHECK(std::abs(pd(lambda, 4.605) - oracle::marcum_q1(std::sqrt(lambda), std::sqrt(4.605))) <= 1e-9);
    CHECK(ncx2_2_cdf(3.0, 2.0) == Approx(1.0 - oracle::marcum_q1(std::sqrt(2.0), std::sqrt(3.0))).margin(1e-10));
    CHECK(chi2_2_cdf(2.0) == Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(pd(-1.0, 1.0), InvalidArgumentError);
}

TEST_CASE("noncentrality parameters", "[theory]") {
    const CVector a_t = oracle::steering(4, 1.0), a_r = oracle::steering(4, 0.25);
    const cdouble b = std::sqrt(std::pow(10.0, -0.5));
    const double lc = noncentrality(Detector::Clairvoyant, b, 1.0, a_t, a_r);
    CHECK(lc == Approx(2.0 * 16.0 * std::pow(10.0, -0.5)).epsilon(1e-14));
    CHECK(lc == Approx(10.119).margin(1e-3));

    InterferenceSideInfo zero{CMatrix(oracle::steering(4, 0.1)), RVector::Zero(1), 1.0};
    CHECK(noncentrality(Detector::Gs, b, 1.0, a_t, a_r, &zero) == Approx(lc).epsilon(1e-14));
    CHECK(noncentrality(Detector::Lcmv, b, 1.0, a_t, a_r, &zero) == Approx(lc).epsilon(1e-12));

    InterferenceSideInfo same{CMatrix(a_r), RVector::Ones(1), 1.0};
    CHECK(noncentrality(Detector::Rs, b, 1.0, a_t, a_r, &same) < 1e-12);

    CHECK_THROWS_AS(noncentrality(Detector::Gs, b, 1.0, a_t, a_r), InvalidArgumentError);
    CHECK_THROWS_AS(noncentrality(Detector::Rs, b, 1.0, a_t, a_r), InvalidArgumentError);
    CHECK_THROWS_AS(noncentrality(Detector::Lcmv, b, 1.0, a_t, a_r), InvalidArgumentError);
}

TEST_CASE("noncentrality ordering on random geometries", "[theory]") {
    std::mt19937_64 g(13);
    std::uniform_real_distribution<double> f(-0.5, 0.5), lam(-3.0, 4.0);
    for (int i = 0; i < 500; ++i) {
        const long m = 2 + i % 7, n = 2 + (i / 7) % 7, q = 1 + i % (n - 1);
        const CVector a_t = oracle::steering(m, f(g)), a_r = oracle::steering(n, f(g));
        InterferenceSideInfo side{CMatrix(n, q), RVector(q), 1.0};
        for (long j = 0; j < q; ++j) {
            side.a_r_tilde.col(j) = oracle::steering(n, f(g));
            side.lambda(j) = std::pow(10.0, lam(g));
        }
        const cdouble b(0.4, 0.1);
        const double c = noncentrality(Detector::Clairvoyant, b, 0.5, a_t, a_r);
        const double gs = noncentrality(Detector::Gs, b, 0.5, a_t, a_r, &side);
        const double lc = noncentrality(Detector::Lcmv, b, 0.5, a_t, a_r, &side);
        const double rs = noncentrality(Detector::Rs, b, 0.5, a_t, a_r, &side);
        CHECK(rs > 0.0);
        CHECK(rs <= gs * (1.0 + 1e-10));
        CHECK(gs <= c * (1.0 + 1e-10));
        CHECK(std::abs(gs - lc) <= 1e-8 * gs);
    }
}

TEST_CASE("ROC curves", "[theory]") {
    const std::vector<double> grid = default_pfa_grid(20);
    REQUIRE(grid.size() == 20);
    CHECK(grid.front() == Approx(0.01));
    CHECK(grid.back() < 1.0);

    const DetectionCurve diag = curve(Detector::Rs, 0.0, grid);
    for (std::size_t i = 0; i < diag.pd.size(); ++i) CHECK(diag.pd[i] == Approx(diag.pfa[i]).epsilon(1e-12));

    // EINR-driven ordering: a louder interferer never helps
    const CVector a_t = oracle::steering(4, 1.0), a_r = oracle::steering(4, 0.25);
    RVector angles(2);
    angles << 40.0, 10.0;
    CMatrix a_rt(4, 2);
    for (long q = 0; q < 2; ++q) a_rt.col(q) = oracle::steering(4, 0.5 * std::sin(deg_to_rad(angles(q))));
    const cdouble b = std::sqrt(std::pow(10.0, -0.5));
    std::vector<DetectionCurve> gs;
    for (double inr : {-15.0, -10.0, -5.0}) {
        InterferenceSideInfo side{a_rt, RVector::Constant(2, 4.0 * std::pow(10.0, inr / 10.0)), 1.0};
        gs.push_back(curve(Detector::Gs, noncentrality(Detector::Gs, b, 1.0, a_t, a_r, &side), grid));
        const DetectionCurve c = curve(Detector::Clairvoyant, noncentrality(Detector::Clairvoyant, b, 1.0, a_t, a_r), grid);
        const DetectionCurve rs = curve(Detector::Rs, noncentrality(Detector::Rs, b, 1.0, a_t, a_r, &side), grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(rs.pd[i] <= gs.back().pd[i]);
            CHECK(gs.back().pd[i] <= c.pd[i]);
        }
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(gs[0].pd[i] > gs[1].pd[i]);
        CHECK(gs[1].pd[i] > gs[2].pd[i]);
    }
    for (const DetectionCurve& c : gs)
        for (std::size_t i = 1; i < c.pd.size(); ++i) {
            CHECK(c.gamma_grid[i] > c.gamma_grid[i - 1]);
            CHECK(c.pfa[i] <= c.pfa[i - 1]);
            CHECK(c.pd[i] <= c.pd[i - 1]);
            CHECK(c.pd[i] >= c.pfa[i]);
        }
}

TEST_CASE("GS statistic follows the chi-squared laws", "[theory]") {
    // Gaussian essential interference with EINR lambda_q, arbitrary
    // non-essential Tx components, white noise
    const long m = 4, n = 4;
    const CVector a_t = oracle::steering(m, 1.0), a_r = oracle::steering(n, 0.25);
    CMatrix a_rt(n, 2);
    a_rt.col(0) = oracle::steering(n, 0.5 * std::sin(deg_to_rad(40.0)));
    a_rt.col(1) = oracle::steering(n, 0.5 * std::sin(deg_to_rad(10.0)));
    const double sigma2 = 1.0;
    const InterferenceSideInfo side{a_rt, RVector::Constant(2, 0.4), sigma2};
    const CMatrix pperp = CMatrix::Identity(m, m) - a_t * a_t.adjoint() / a_t.squaredNorm();
    const cdouble b = std::sqrt(std::pow(10.0, -0.5));
    const double lambda = noncentrality(Detector::Gs, b, sigma2, a_t, a_r, &side);
    const CVector a = oracle::kron(a_t, a_r);

    const std::size_t count = 100000;
    std::vector<double> h0(count), h1(count);
    Rng rng = substream(2024, 0, 0);
    for (std::size_t i = 0; i < count; ++i) {
        CVector z = CVector::Zero(m * n);
        for (long w = 0; w < m * n; ++w) z(w) = complex_normal(rng, sigma2);
        for (long q = 0; q < 2; ++q) {
            const cdouble bq = complex_normal(rng, side.lambda(q) * sigma2);
            CVector junk(m);
            for (long j = 0; j < m; ++j) junk(j) = complex_normal(rng, 5.0);
            z += oracle::kron(CVector(bq * a_t + pperp * junk), a_rt.col(q));
        }
        h0[i] = t_gs(z, a_t, a_r, side);
        h1[i] = t_gs(z + b * a, a_t, a_r, side);
    }
    const double crit = oracle::ks_critical(count, 0.01);
    const double d0 = oracle::ks_statistic(h0, [](double x) { return chi2_2_cdf(x); });
    const double d1 = oracle::ks_statistic(h1, [lambda](double x) { return ncx2_2_cdf(x, lambda); });
    INFO("KS H0 " << d0 << " H1 " << d1 << " critical " << crit);
    CHECK(d0 < crit);
    CHECK(d1 < crit);
}
