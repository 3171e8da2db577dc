#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "covtest/errors.hpp"
#include "covtest/linalg.hpp"
#include "covtest/rmt.hpp"
#include "oracles.hpp"

namespace covtest {
namespace {

using rmt::MpParams;

TEST(MpEdges, HandValues) {
    auto e = rmt::mp_edges({1.0, 1.0});
    EXPECT_DOUBLE_EQ(e.lower, 0.0);
    EXPECT_DOUBLE_EQ(e.upper, 4.0);
    e = rmt::mp_edges({0.5, 0.25});
    EXPECT_NEAR(e.lower, 0.125, 1e-15);
    EXPECT_NEAR(e.upper, 1.125, 1e-15);
    e = rmt::mp_edges({1.0, 0.5});
    EXPECT_NEAR(e.lower, 0.0857864376269049512, 1e-15);
    EXPECT_NEAR(e.upper, 2.9142135623730950488, 1e-15);
}

TEST(MpEdges, RejectsBadParams) {
    EXPECT_THROW(rmt::mp_edges({0.0, 0.5}), DomainError);
    EXPECT_THROW(rmt::mp_edges({1.0, -1.0}), DomainError);
    EXPECT_THROW(rmt::mp_edges({1.0, std::nan("")}), DomainError);
}

TEST(MpDensity, ZeroOutsideSupport) {
    const MpParams p{1.0, 0.5};
    const auto e = rmt::mp_edges(p);
    EXPECT_EQ(rmt::mp_density(e.lower - 1e-3, p), 0.0);
    EXPECT_EQ(rmt::mp_density(e.upper + 1e-3, p), 0.0);
    EXPECT_EQ(rmt::mp_density(-1.0, p), 0.0);
}

TEST(MpDensity, TotalMassIsOne) {
    for (const MpParams p : {MpParams{1.0, 0.5}, MpParams{0.5, 0.25}, MpParams{2.0, 1.7}, MpParams{0.3, 0.05}}) {
        const auto e = rmt::mp_edges(p);
        const double mass = oracle::integrate_edges([&](double x) { return rmt::mp_density(x, p); }, e.lower, e.upper);
        EXPECT_NEAR(mass + rmt::mp_atom_mass(p), 1.0, 1e-6) << "c=" << p.c;
        EXPECT_NEAR(mass, 1.0 - std::max(0.0, 1.0 - 1.0 / p.c), 1e-6);
    }
}

TEST(MpDensity, MatchesWishartHistogram) {
    // Real Gaussian data share the complex limit law.
    const int M = 2000;
    const int N = 4000;
    std::mt19937_64 gen(11);
    std::normal_distribution<double> nd;
    RMatrix x(M, N);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            x(i, j) = nd(gen);
        }
    }
    RMatrix scm = RMatrix::Zero(M, M);
    scm.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / N);
    const RVector ev = Eigen::SelfAdjointEigenSolver<RMatrix>(scm.selfadjointView<Eigen::Lower>(), Eigen::EigenvaluesOnly)
                           .eigenvalues();
    const MpParams p{1.0, 0.5};
    const double lo = 1.4;
    const double hi = 1.6;
    int count = 0;
    for (double v : ev) {
        count += (v >= lo && v < hi) ? 1 : 0;
    }
    const double histogram = count / (static_cast<double>(M) * (hi - lo));
    const double bin_mass = oracle::integrate_edges([&](double t) { return rmt::mp_density(t, p); }, lo, hi) / (hi - lo);
    EXPECT_NEAR(rmt::mp_density(1.5, p) / bin_mass, 1.0, 1e-3);
    EXPECT_NEAR(histogram / bin_mass, 1.0, 0.03);
}

TEST(SpikeForward, Examples) {
    EXPECT_DOUBLE_EQ(rmt::spike_forward(1.0, {1.0, 0.5}).location, 3.0);
    EXPECT_NEAR(rmt::spike_forward(3.0, {0.5, 0.25}).location, 3.5 * 3.125 / 3.0, 1e-14);
    const MpParams p{0.7, 0.3};
    const double thr = rmt::detection_threshold(p);
    const double edge = rmt::mp_edges(p).upper;
    EXPECT_NEAR(rmt::spike_forward(thr, p).location, edge, 1e-14);
    EXPECT_DOUBLE_EQ(rmt::spike_forward(0.5 * thr, p).location, edge);
    EXPECT_DOUBLE_EQ(rmt::spike_forward(0.0, p).location, edge);
    EXPECT_THROW(rmt::spike_forward(-0.1, p), DomainError);
}

TEST(SpikeForward, MonotoneAndScaleCovariant) {
    const MpParams p{0.5, 0.4};
    double prev = rmt::spike_forward(0.0, p).location;
    for (double g = 0.01; g < 20.0; g += 0.01) {
        const double loc = rmt::spike_forward(g, p).location;
        EXPECT_GE(loc, prev - 1e-14);
        if (g > rmt::detection_threshold(p) + 0.01) {
            EXPECT_GT(loc, prev);
        }
        prev = loc;
    }
    for (double s : {0.1, 2.0, 37.0}) {
        for (double g : {0.1, 0.5, 3.0}) {
            const double lhs = rmt::spike_forward(s * g, {s * p.sigma2, p.c}).location;
            EXPECT_NEAR(lhs, s * rmt::spike_forward(g, p).location, 1e-12 * s * (1.0 + g));
        }
    }
}

TEST(SpikeInverse, ExamplesAndClamp) {
    EXPECT_NEAR(rmt::spike_inverse(3.0, {1.0, 0.5}), 1.0, 1e-14);
    const MpParams p{1.0, 0.5};
    const double edge = rmt::mp_edges(p).upper;
    EXPECT_DOUBLE_EQ(rmt::spike_inverse(edge - 0.1, p), std::sqrt(0.5));
    EXPECT_DOUBLE_EQ(rmt::spike_inverse(0.0, p), std::sqrt(0.5));
}

TEST(SpikeInverse, RoundTrip) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const MpParams p{0.1 + 2.0 * u(gen), 0.05 + 0.9 * u(gen)};
        const double g = rmt::detection_threshold(p) * (1.0 + 1e-3 + 10.0 * u(gen));
        const double back = rmt::spike_inverse(rmt::spike_forward(g, p).location, p);
        EXPECT_NEAR(back, g, 1e-12 * g);
    }
}

// m(z) = integral of dmu(x) / (x - z) over the MP law including the atom.
double stieltjes_quadrature(double z, const MpParams& p, int power) {
    const auto e = rmt::mp_edges(p);
    const double cont = oracle::integrate_edges(
        [&](double x) { return rmt::mp_density(x, p) / std::pow(x - z, power); }, e.lower, e.upper);
    return cont + rmt::mp_atom_mass(p) / std::pow(-z, power);
}

TEST(Stieltjes, ClosedFormsMatchQuadratureAndDifferences) {
    for (const auto& [g, p] : {std::pair{1.0, MpParams{1.0, 0.5}}, std::pair{3.0, MpParams{0.5, 0.25}},
                               std::pair{2.5, MpParams{1.0, 1.6}}, std::pair{0.9, MpParams{0.8, 0.7}}}) {
        const auto v = rmt::stieltjes_at_spike(g, p);
        const double z = rmt::spike_forward(g, p).location;
        const double c = p.c;
        auto m = [&](double t) { return stieltjes_quadrature(t, p, 1); };
        // Companion transform of the N x N matrix.
        auto mt = [&](double t) { return c * m(t) - (1.0 - c) / t; };
        auto tau = [&](double t) { return t * m(t) * mt(t); };
        const double h = 1e-4 * z;
        const double rel = 1e-4;
        EXPECT_NEAR(v.m / m(z), 1.0, rel);
        EXPECT_NEAR(v.m_tilde / mt(z), 1.0, rel);
        EXPECT_NEAR(v.m_prime / stieltjes_quadrature(z, p, 2), 1.0, rel);
        EXPECT_NEAR(v.m_prime / oracle::central_difference(m, z, h), 1.0, rel);
        EXPECT_NEAR(v.m_tilde_prime / oracle::central_difference(mt, z, h), 1.0, rel);
        EXPECT_NEAR(v.tau / tau(z), 1.0, rel);
        EXPECT_NEAR(v.tau_prime / oracle::central_difference(tau, z, h), 1.0, rel);
    }
}

TEST(Stieltjes, HandValues) {
    const auto v = rmt::stieltjes_at_spike(1.0, {1.0, 0.5});
    EXPECT_NEAR(v.m, -2.0 / 3.0, 1e-15);
    EXPECT_NEAR(v.tau, 1.0, 1e-15);
    EXPECT_NEAR(v.m_prime, 1.0 / (2.25 * 0.5), 1e-15);
    EXPECT_THROW(rmt::stieltjes_at_spike(0.5, {1.0, 0.5}), DomainError);
}

TEST(Wachter, SupportAndMass) {
    const auto e = rmt::wachter_edges(0.5, 0.25);
    EXPECT_EQ(rmt::wachter_density(e.lower * 0.99, 0.5, 0.25), 0.0);
    EXPECT_EQ(rmt::wachter_density(e.upper * 1.01, 0.5, 0.25), 0.0);
    for (const auto& [cl, c] : {std::pair{0.5, 0.25}, std::pair{0.2, 0.1}, std::pair{0.9, 0.3}}) {
        const auto s = rmt::wachter_edges(cl, c);
        const double mass = oracle::integrate_edges([&](double x) { return rmt::wachter_density(x, cl, c); },
                                                    s.lower, s.upper);
        EXPECT_NEAR(mass, 1.0, 1e-6) << cl << ' ' << c;
    }
    EXPECT_THROW(rmt::wachter_edges(0.25, 0.5), DomainError);
    EXPECT_THROW(rmt::wachter_density(1.0, 1.2, 0.5), DomainError);
}

TEST(WOutsideSupport, InvertsPhi) {
    const MpParams p{0.5, 0.3};
    const double s2 = p.sigma2;
    auto phi = [&](double w) { return w * (1.0 - s2 * p.c / (s2 - w)); };
    for (double x : {2.0, 5.0, 40.0}) {
        const double w = rmt::w_outside_support(x, p);
        EXPECT_NEAR(phi(w), x, 1e-12 * x);
        EXPECT_GT(oracle::central_difference(phi, w, 1e-6), 0.0);
    }
    EXPECT_THROW(rmt::w_outside_support(0.5, p), DomainError);
}

}  // namespace
}  // namespace covtest
