#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nmkdv/nmkdv.hpp"

using namespace nmkdv;

namespace {

ScatteringData gaussian_data(int sigma, double A = 0.1, const SpectralGrid& s = SpectralGrid(20.0, 512))
{
    return reflection_coefficients(forward_coefficients(gaussian_potential(SpaceGrid(20.0, 1024), sigma, A, 1.0, 0.3), s));
}

} // namespace

TEST(Reflection, ZeroB)
{
    SpectralGrid s(5.0, 33);
    ScatteringData sd = reflection_coefficients(s, 1, cvec::Ones(33), cvec::Zero(33), cvec::Ones(33));
    EXPECT_EQ(sd.r1, cvec::Zero(33));
    EXPECT_EQ(sd.r2, cvec::Zero(33));
}

TEST(Reflection, ZeroCrossingNamesThePoint)
{
    SpectralGrid s(5.0, 11);
    cvec a = cvec::Ones(11);
    a[3] = 0.0;
    try {
        reflection_coefficients(s, 1, a, cvec::Zero(11), cvec::Ones(11));
        FAIL();
    } catch (const AdmissibilityError& e) {
        EXPECT_NE(std::string(e.what()).find("z = -2"), std::string::npos) << e.what();
    }
}

TEST(Reflection, BoxRatioMatchesOracle)
{
    const SpectralGrid s(10.0, 201);
    for (int sigma : {1, -1}) {
        ScatteringData sd = reflection_coefficients(
            forward_coefficients(box_potential(SpaceGrid::cell_aligned(1.0 / 512, 2048), sigma, 0.3, 1.0), s));
        ScatteringData ex = box_scattering_exact(0.3, 1.0, sigma, s);
        EXPECT_LT((sd.r1 - ex.r1).cwiseAbs().maxCoeff(), 1e-7);
        EXPECT_LT((sd.r2 - ex.r2).cwiseAbs().maxCoeff(), 1e-7);
    }
}

TEST(Reflection, SmallGaussianHasSubunitReflection)
{
    for (int sigma : {1, -1}) {
        const SampledPotential u = gaussian_potential(SpaceGrid(20.0, 1024), sigma, 0.1, 1.0);
        ASSERT_TRUE(compute_norms(u).flag_r_below_one);
        DataAudit a = symmetry_and_identity_audit(gaussian_data(sigma));
        EXPECT_LT(a.max_r1, 1.0);
        EXPECT_LT(a.max_r2, 1.0);
    }
}

// c is computed on its own; the real-potential symmetry is met to quadrature accuracy
TEST(Reflection, IndependentCAgreesWithSymmetryForRealPotential)
{
    for (int sigma : {1, -1}) {
        const SpectralGrid s(20.0, 512);
        double gap[2];
        for (int level = 0; level < 2; ++level) {
            const auto u = gaussian_potential(SpaceGrid(20.0, 1024 << level), sigma, 0.2, 1.0, 0.5);
            ScatteringCoefficients sc = forward_coefficients(u, s);
            ScatteringData with_c = reflection_coefficients(sc);
            ScatteringData from_b = reflection_coefficients(s, sigma, sc.a, sc.b, sc.d);
            gap[level] = (with_c.r2 - from_b.r2).cwiseAbs().maxCoeff();
        }
        EXPECT_LT(gap[1], 1e-7);
        EXPECT_GT(gap[0] / gap[1], 4.0);
    }
}

TEST(TimeEvolution, ZeroTimeIsIdentity)
{
    ScatteringData sd = gaussian_data(1);
    ScatteringData e = time_evolve(sd, 0.0);
    EXPECT_EQ(e.r1, sd.r1);
    EXPECT_EQ(e.r2, sd.r2);
    EXPECT_EQ(e.b, sd.b);
}

TEST(TimeEvolution, ModulusCompositionAndUntouchedAD)
{
    ScatteringData sd = gaussian_data(-1);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ut(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double t1 = ut(rng), t2 = ut(rng);
        ScatteringData a = time_evolve(time_evolve(sd, t1), t2), b = time_evolve(sd, t1 + t2);
        EXPECT_LT((a.r1 - b.r1).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((a.r2 - b.r2).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_EQ(a.a, sd.a);
        EXPECT_EQ(a.d, sd.d);
        EXPECT_DOUBLE_EQ(a.time, t1 + t2);
        for (int j = 0; j < sd.spectral.size(); ++j) {
            EXPECT_NEAR(std::abs(a.r1[j]), std::abs(sd.r1[j]), 1e-15 * std::abs(sd.r1[j]) + 1e-300);
            EXPECT_NEAR(std::abs(a.r2[j]), std::abs(sd.r2[j]), 1e-15 * std::abs(sd.r2[j]) + 1e-300);
        }
    }
}

TEST(TimeEvolution, WeightedNormGrowthBound)
{
    const SpectralGrid fine(8.0, 4096);
    ScatteringData sd = gaussian_data(1, 0.1, fine);
    const rvec z = fine.points();
    auto zdz = [&](const cvec& r) {
        const cvec dr = detail::spectral_derivative(r, fine.spacing(), 1);
        return std::sqrt(detail::trapz(z.cwiseProduct(z).cwiseProduct(dr.cwiseAbs2()).eval(), fine.spacing()));
    };
    const double l23 = std::sqrt(
        detail::trapz((1.0 + z.array().square()).cube().matrix().cwiseProduct(sd.r1.cwiseAbs2()).eval(), fine.spacing()));
    const double base = zdz(sd.r1);
    for (double t : {0.01, 0.1, 0.3, -0.3})
        EXPECT_LE(zdz(time_evolve(sd, t).r1), base + 24.0 * std::abs(t) * l23) << "t = " << t;
}

TEST(Audit, ZeroDataIsClean)
{
    SpectralGrid s(5.0, 33);
    DataAudit a = symmetry_and_identity_audit(reflection_coefficients(s, -1, cvec::Ones(33), cvec::Zero(33), cvec::Ones(33)));
    EXPECT_EQ(a.determinant, 0.0);
    EXPECT_EQ(a.determinant_r, 0.0);
    EXPECT_EQ(a.a_symmetry, 0.0);
    EXPECT_EQ(a.r1_relation, 0.0);
}

TEST(Audit, BoxOracleDataIsTight)
{
    ScatteringData ex = box_scattering_exact(0.3, 1.0, 1, SpectralGrid(10.0, 201));
    DataAudit a = symmetry_and_identity_audit(ex);
    EXPECT_LT(a.determinant, 1e-7);
    EXPECT_LT(a.a_symmetry, 1e-7);
}

TEST(Audit, DeterminantInvariantUnderEvolution)
{
    ScatteringData sd = gaussian_data(1, 0.3);
    DataAudit a0 = symmetry_and_identity_audit(sd), a1 = symmetry_and_identity_audit(time_evolve(sd, 1.0));
    EXPECT_NEAR(a1.determinant, a0.determinant, 1e-12);
    EXPECT_NEAR(a1.determinant_r, a0.determinant_r, 1e-12);
}

TEST(ScatteringFile, LosslessAndByteStable)
{
    ScatteringData sd = time_evolve(gaussian_data(-1, 0.2), 0.37);
    std::stringstream ss;
    write_scattering(ss, sd);
    const std::string first = ss.str();
    ScatteringData back = read_scattering(ss);
    EXPECT_EQ(back.r1, sd.r1);
    EXPECT_EQ(back.r2, sd.r2);
    EXPECT_EQ(back.a, sd.a);
    EXPECT_EQ(back.time, sd.time);
    EXPECT_EQ(back.sigma, -1);
    std::stringstream again;
    write_scattering(again, back);
    EXPECT_EQ(again.str(), first);
}

TEST(ScatteringFile, RejectsMalformedInput)
{
    std::stringstream short_row("# nmkdv-scattering v1 sigma=+1 Z=1 N=2 t=0\n-1 1 0 1 0 0 0 0 0 0\n");
    EXPECT_THROW(read_scattering(short_row), IoError);
    std::stringstream bad_sigma("# nmkdv-scattering v1 sigma=2 Z=1 N=2 t=0\n");
    EXPECT_THROW(read_scattering(bad_sigma), IoError);
    std::stringstream wrong_z("# nmkdv-scattering v1 sigma=+1 Z=1 N=2 t=0\n"
                              "-0.5 1 0 1 0 0 0 0 0 0 0\n1 1 0 1 0 0 0 0 0 0 0\n");
    EXPECT_THROW(read_scattering(wrong_z), IoError);
    EXPECT_THROW(read_scattering("/nonexistent/file"), IoError);
}
