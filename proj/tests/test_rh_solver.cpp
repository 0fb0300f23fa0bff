#include <cmath>

#include <gtest/gtest.h>

#include "nmkdv/nmkdv.hpp"

using namespace nmkdv;

namespace {

ScatteringData gaussian_data(int sigma, double A, int nz = 256, double Z = 20.0)
{
    return reflection_coefficients(
        forward_coefficients(gaussian_potential(SpaceGrid(20.0, 1024), sigma, A, 1.0, 0.3), SpectralGrid(Z, nz)));
}

double max_diff(const RHSolution& a, const RHSolution& b)
{
    double d = 0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) d = std::max(d, (a.psi_minus[r][c] - b.psi_minus[r][c]).cwiseAbs().maxCoeff());
    return d;
}

} // namespace

TEST(Jump, UnitDeterminantAndSplitting)
{
    ScatteringData sd = gaussian_data(1, 0.3);
    JumpData J = build_jump(sd, 0.7, 0.2);
    EXPECT_LT(J.det_residual, 1e-14);
    EXPECT_DOUBLE_EQ(J.t, 0.2);
    for (int j = 0; j < sd.spectral.size(); j += 17) {
        Mat2 diag = Mat2::Zero();
        diag(0, 0) = J.s11[j];
        EXPECT_LT((J.S(j) - J.S_plus(j) - J.S_minus(j) - diag).cwiseAbs().maxCoeff(), 1e-16);
        EXPECT_LT(std::abs(J.V(j).determinant() - 1.0), 1e-14);
    }
}

TEST(Jump, TimeIsMeasuredFromTheData)
{
    ScatteringData sd = gaussian_data(-1, 0.1);
    ScatteringData later = time_evolve(sd, 0.3);
    JumpData a = build_jump(sd, 1.0, 0.3), b = build_jump(later, 1.0, 0.0);
    EXPECT_DOUBLE_EQ(a.t, b.t);
    EXPECT_LT((a.s12 - b.s12).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((a.s21 - b.s21).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Solve, ZeroDataGivesIdentity)
{
    SpectralGrid s(10.0, 64);
    ScatteringData sd = reflection_coefficients(s, 1, cvec::Ones(64), cvec::Zero(64), cvec::Ones(64));
    for (SolverMode m : {SolverMode::direct, SolverMode::gmres, SolverMode::neumann, SolverMode::automatic}) {
        SolverOptions o;
        o.mode = m;
        RHSolution sol = solve_rh(build_jump(sd, 0.5, 0.0), o);
        EXPECT_EQ(psi_minus_l2(sol), 0.0);
        EXPECT_EQ(sol.jump_residual, 0.0);
    }
}

TEST(Solve, ModesAgree)
{
    for (int sigma : {1, -1}) {
        ScatteringData sd = gaussian_data(sigma, 0.1);
        JumpData J = build_jump(sd, -1.3, 0.1);
        SolverOptions o;
        o.mode = SolverMode::direct;
        RHSolution d = solve_rh(J, o);
        o.mode = SolverMode::gmres;
        RHSolution g = solve_rh(J, o);
        o.mode = SolverMode::neumann;
        RHSolution n = solve_rh(J, o);
        EXPECT_EQ(d.method, SolverMode::direct);
        EXPECT_EQ(g.method, SolverMode::gmres);
        EXPECT_EQ(n.method, SolverMode::neumann);
        EXPECT_LT(max_diff(d, g), 1e-10);
        EXPECT_LT(max_diff(d, n), 1e-10);
        EXPECT_LT(d.jump_residual, 1e-13);
        EXPECT_LT(g.jump_residual, 1e-13);
    }
}

TEST(Solve, SolutionSatisfiesTheProjectedEquation)
{
    ScatteringData sd = gaussian_data(1, 0.3);
    JumpData J = build_jump(sd, 0.4, 0.0);
    RHSolution sol = solve_rh(J);
    // Psi- = P-(Psi- S + S) checked entrywise with the projector applied afresh
    for (int r = 0; r < 2; ++r) {
        const cvec& y0 = sol.psi_minus[r][0];
        const cvec& y1 = sol.psi_minus[r][1];
        const int n = sd.spectral.size();
        cvec t0 = y0.cwiseProduct(J.s11) + y1.cwiseProduct(J.s21) + (r == 0 ? J.s11 : J.s21);
        cvec t1 = y0.cwiseProduct(J.s12) + (r == 0 ? J.s12 : cvec::Zero(n));
        EXPECT_LT((plemelj_project(t0, Projection::minus) - y0).cwiseAbs().maxCoeff(), 1e-11);
        EXPECT_LT((plemelj_project(t1, Projection::minus) - y1).cwiseAbs().maxCoeff(), 1e-11);
    }
}

TEST(Solve, NeumannRefusesLargeJumps)
{
    ScatteringData sd = gaussian_data(1, 0.6);
    SolverOptions o;
    o.mode = SolverMode::neumann;
    o.check_positivity = false;
    EXPECT_THROW(solve_rh(build_jump(sd, 0.0, 0.0), o), SolvabilityError);
}

TEST(Positivity, GateAndSingularValueBound)
{
    for (int sigma : {1, -1})
        for (double A : {0.1, 0.3}) {
            ScatteringData sd = gaussian_data(sigma, A, 192);
            for (double x : {-2.0, 0.0, 1.5}) {
                JumpData J = build_jump(sd, x, 0.0);
                PositivityReport p = positivity_report(J, false);
                ASSERT_LT(p.max_r, 1.0);
                EXPECT_GT(p.mu_minus_min, 0.0);
                EXPECT_TRUE(p.ok);
                EXPECT_GE(smallest_singular_value(system_matrix(J)), 0.5 * p.mu_minus_min);
            }
        }
}

TEST(Positivity, ClosedFormEigenvaluesMatchDense)
{
    ScatteringData sd = gaussian_data(-1, 0.3, 128);
    JumpData J = build_jump(sd, 0.8, 0.0);
    PositivityReport p = positivity_report(J);
    double mn = 1e300;
    for (int j = 0; j < sd.spectral.size(); ++j) {
        const Mat2 H = Mat2::Identity() + 0.5 * (J.S(j) + J.S(j).adjoint());
        Eigen::SelfAdjointEigenSolver<Mat2> es(H);
        mn = std::min(mn, es.eigenvalues().minCoeff());
    }
    EXPECT_NEAR(p.mu_minus_min, mn, 1e-13);
}

TEST(Positivity, ReflectionAtOrAboveOneIsRejected)
{
    SpectralGrid s(10.0, 128);
    cvec b(128);
    for (int j = 0; j < 128; ++j) b[j] = 1.5 * std::exp(-s.z(j) * s.z(j));
    ScatteringData bad = reflection_coefficients(s, 1, cvec::Ones(128), b, cvec::Ones(128));
    try {
        solve_rh(build_jump(bad, 0.0, 0.0));
        FAIL();
    } catch (const SolvabilityError& e) {
        EXPECT_EQ(e.exit_code(), 3);
    }
}

TEST(Solve, DeviationBoundedByReflection)
{
    ScatteringData sd = gaussian_data(1, 0.3);
    const double rn = l2_norm_z(sd.r1, sd.spectral) + l2_norm_z(sd.r2, sd.spectral);
    for (double x : {-3.0, 0.0, 3.0}) {
        RHSolution sol = solve_rh(build_jump(sd, x, 0.0));
        EXPECT_LE(psi_minus_l2(sol), sol.positivity.deviation_constant * rn);
    }
}

// The periodic projector truncated at |z| = Z leaves a boundary-value error
// of order 1/Z, independent of N_z; doubling Z should halve it.
TEST(Solve, MatchesJostConstruction)
{
    auto gap = [](int sigma, double Z, int nx, int nz) {
        const SampledPotential u = gaussian_potential(SpaceGrid(20.0, nx), sigma, 0.2, 1.0, 0.3);
        const SpectralGrid s(Z, nz);
        const int node = u.grid().nearest(-1.0);
        JostField jost = compute_jost(u, s, {u.grid().nearest(0.0), node});
        ScatteringData sd = reflection_coefficients(scattering_coefficients(jost));
        RHSolution sol = solve_rh(build_jump(sd, u.grid().x(node), 0.0));
        return jost_rh_crosscheck(jost, 1, sol, sd);
    };
    for (int sigma : {1, -1}) {
        const double coarse = gap(sigma, 20.0, 2048, 1024);
        const double fine = gap(sigma, 40.0, 4096, 2048);
        EXPECT_LT(coarse, 5e-3);
        EXPECT_GT(coarse / fine, 1.8);
    }
}
