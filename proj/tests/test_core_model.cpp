#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nmkdv/nmkdv.hpp"

using namespace nmkdv;

namespace {

const double sqrt_pi = std::sqrt(std::numbers::pi);

// A where A sqrt(pi) e^{2 A sqrt(pi)} = 1 for u = A e^{-x^2}, by bisection
double no_zeros_threshold()
{
    double lo = 0.0, hi = 1.0;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double l1 = mid * sqrt_pi;
        (l1 * std::exp(2.0 * l1) < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST(SpaceGrid, NodesAndMirror)
{
    SpaceGrid g(20.0, 1024);
    EXPECT_DOUBLE_EQ(g.x(0), -20.0);
    EXPECT_NEAR(g.x(1023), 20.0, 1e-12);
    for (int i = 0; i < g.size(); ++i) EXPECT_NEAR(g.x(g.mirror(i)), -g.x(i), 1e-12);
    EXPECT_EQ(g.nearest(0.0), 512);
    EXPECT_THROW(SpaceGrid(0.0, 10), AdmissibilityError);
    EXPECT_THROW(SpaceGrid(1.0, 1), AdmissibilityError);
}

TEST(SpaceGrid, CellAlignedEdgesSitOnMultiplesOfH)
{
    const double h = 1.0 / 64;
    SpaceGrid g = SpaceGrid::cell_aligned(h, 256);
    EXPECT_NEAR(g.spacing(), h, 1e-15);
    for (int i = 0; i < g.size(); ++i) {
        const double edge = (g.x(i) + 0.5 * h) / h;
        EXPECT_NEAR(edge, std::round(edge), 1e-9);
    }
    EXPECT_THROW(SpaceGrid::cell_aligned(h, 255), AdmissibilityError);
}

TEST(SpectralGrid, SymmetricUnderNegation)
{
    SpectralGrid s(20.0, 1024);
    for (int j = 0; j < s.size(); ++j) EXPECT_NEAR(s.z(s.mirror(j)), -s.z(j), 1e-12);
}

TEST(SampledPotential, RejectsNonFiniteWithIndex)
{
    SpaceGrid g(5.0, 11);
    cvec v = cvec::Zero(11);
    v[7] = cplx(std::nan(""), 0.0);
    try {
        SampledPotential(g, v, 1);
        FAIL() << "expected rejection";
    } catch (const AdmissibilityError& e) {
        EXPECT_NE(std::string(e.what()).find("index 7"), std::string::npos);
        EXPECT_EQ(e.exit_code(), 2);
    }
    EXPECT_THROW(SampledPotential(g, cvec::Zero(11), 0), AdmissibilityError);
    EXPECT_THROW(SampledPotential(g, cvec::Zero(10), 1), AdmissibilityError);
}

TEST(SampledPotential, DecayGate)
{
    SpaceGrid g(20.0, 1024);
    EXPECT_NO_THROW(gaussian_potential(g, 1, 0.1, 1.0).require_decay(1e-12));
    EXPECT_THROW(gaussian_potential(g, 1, 0.1, 10.0).require_decay(1e-12), AdmissibilityError);
}

TEST(Norms, ZeroPotential)
{
    SpaceGrid g(20.0, 256);
    NormReport n = compute_norms(SampledPotential(g, cvec::Zero(256), -1));
    EXPECT_EQ(n.l1, 0.0);
    EXPECT_EQ(n.h3, 0.0);
    EXPECT_TRUE(n.flag_no_zeros);
    EXPECT_TRUE(n.flag_r_below_one);
}

// closed-form Gaussian integrals for u = A e^{-(x/w)^2}
TEST(Norms, GaussianClosedForms)
{
    SpaceGrid g(20.0, 1024);
    for (double w : {1.0, 1.5}) {
        const double A = 0.1;
        NormReport n = compute_norms(gaussian_potential(g, 1, A, w));
        const double m0 = w * std::sqrt(std::numbers::pi / 2.0);  // int e^{-2x^2/w^2}
        const double m2 = m0 * w * w / 4.0;                          // int x^2 e^{-2x^2/w^2}
        const double m4 = m0 * 3.0 * std::pow(w, 4) / 16.0;
        const double m6 = m0 * 15.0 * std::pow(w, 6) / 64.0;
        EXPECT_NEAR(n.l1, A * w * sqrt_pi, 1e-12);
        EXPECT_NEAR(n.l2, A * std::sqrt(m0), 1e-12);
        EXPECT_NEAR(n.l2_1, A * std::sqrt(m0 + m2), 1e-12);
        EXPECT_NEAR(n.l2_3, A * std::sqrt(m0 + 3 * m2 + 3 * m4 + m6), 1e-12);
        // |u'|^2 = A^2 (4x^2/w^4) e^{-2x^2/w^2}
        const double d1 = 4.0 / std::pow(w, 4) * m2;
        EXPECT_NEAR(n.h1, A * std::sqrt(m0 + d1), 1e-11);
        EXPECT_NEAR(n.h11, A * std::sqrt(m0 + m2 + d1 + 4.0 / std::pow(w, 4) * m4), 1e-11);
        EXPECT_LE(n.l2, n.l2_1);
        EXPECT_LE(n.l2_1, n.l2_3);
    }
}

TEST(Norms, SmallGaussianFlags)
{
    NormReport n = compute_norms(gaussian_potential(SpaceGrid(20.0, 1024), 1, 0.1, 1.0));
    EXPECT_NEAR(n.l1, 0.1 * sqrt_pi, 1e-12);
    EXPECT_TRUE(n.flag_no_zeros);
    EXPECT_TRUE(n.flag_r_below_one);
}

TEST(Norms, NoZerosFlagFlipsAtBisectedThreshold)
{
    const double Astar = no_zeros_threshold();
    SpaceGrid g(20.0, 1024);
    EXPECT_FALSE(compute_norms(gaussian_potential(g, 1, Astar * (1 + 1e-3), 1.0)).flag_no_zeros);
    EXPECT_TRUE(compute_norms(gaussian_potential(g, 1, Astar * (1 - 1e-3), 1.0)).flag_no_zeros);
}

TEST(Norms, FlagsMonotoneInAmplitude)
{
    SpaceGrid g(20.0, 512);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> amp(0.0, 1.0), c(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double A = amp(rng), scale = c(rng);
        NormReport big = compute_norms(gaussian_potential(g, 1, A, 1.0));
        NormReport small = compute_norms(gaussian_potential(g, 1, A * scale, 1.0));
        if (big.flag_no_zeros) EXPECT_TRUE(small.flag_no_zeros);
        if (big.flag_r_below_one) EXPECT_TRUE(small.flag_r_below_one);
    }
}

TEST(Reflect, EvenOddBoxAndInvolution)
{
    SpaceGrid g(10.0, 401);
    auto even = gaussian_potential(g, 1, 0.3, 1.0);
    // x_i and -x_{n-1-i} agree only to rounding
    EXPECT_LT((reflect_potential(even).values() - even.values()).cwiseAbs().maxCoeff(), 1e-15);
    auto odd = SampledPotential::from_function(g, 1, [](double x) { return cplx(x * std::exp(-x * x)); });
    EXPECT_LT((reflect_potential(odd).values() + odd.values()).cwiseAbs().maxCoeff(), 1e-14);
    auto box = box_potential(g, -1, 0.3, 1.0);
    auto rb = reflect_potential(box);
    for (int i = 0; i < g.size(); ++i) {
        const double x = g.x(i);
        if (x < -1.0 - 1e-9 || x > 1e-9) EXPECT_EQ(rb[i], cplx(0.0));
        if (x > -1.0 + 1e-9 && x < -1e-9) EXPECT_EQ(rb[i], cplx(0.3));
    }
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    cvec v(g.size());
    for (auto& e : v) e = cplx(nd(rng), nd(rng));
    SampledPotential r(g, v, 1);
    EXPECT_EQ(reflect_potential(reflect_potential(r)).values(), r.values());
}

TEST(PotentialFile, LosslessRoundTrip)
{
    SpaceGrid g(20.0, 257);
    auto u = gaussian_potential(g, -1, cplx(0.1, -0.03), 1.3, 0.2);
    std::stringstream ss;
    write_potential(ss, u);
    SampledPotential back = read_potential(ss);
    EXPECT_EQ(back.values(), u.values());
    EXPECT_EQ(back.sigma(), -1);
    std::stringstream again;
    write_potential(again, back);
    std::stringstream first;
    write_potential(first, u);
    EXPECT_EQ(again.str(), first.str());
}

TEST(PotentialFile, MalformedInputIsIoError)
{
    std::stringstream bad("# nmkdv-potential v1 sigma=+1 L=1 N=3\n-1 0 0\n0 0\n");
    EXPECT_THROW(read_potential(bad), IoError);
    std::stringstream wrong_tag("# something v1\n");
    EXPECT_THROW(read_potential(wrong_tag), IoError);
}
