#ifndef NMKDV_RH_SOLVER_HPP
#define NMKDV_RH_SOLVER_HPP

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "cauchy_ops.hpp"
#include "detail/gmres.hpp"
#include "scattering_data.hpp"

namespace nmkdv {

// Jump S(x,t;z) = [[s r1 r2, s r2 E], [r1/E, 0]], E = e^{2i theta},
// theta = z x + 4 z^3 t.
struct JumpData {
    SpectralGrid spectral;
    int sigma;
    double x, t;        // t is absolute (data time plus the requested offset)
    cvec s11, s12, s21; // s22 = 0
    cvec theta_phase;   // e^{2 i theta(x, t; z)}
    double det_residual = 0;

    Mat2 S(int j) const
    {
        Mat2 m;
        m << s11[j], s12[j], s21[j], 0.0;
        return m;
    }
    Mat2 V(int j) const { return Mat2::Identity() + S(j); }
    Mat2 S_plus(int j) const
    {
        Mat2 m = Mat2::Zero();
        m(0, 1) = s12[j];
        return m;
    }
    Mat2 S_minus(int j) const
    {
        Mat2 m = Mat2::Zero();
        m(1, 0) = s21[j];
        return m;
    }
};

// t is measured from sd.time: the data are advanced by t through the phase.
inline JumpData build_jump(const ScatteringData& sd, double x, double t)
{
    const int n = sd.spectral.size();
    const double s = sd.sigma;
    JumpData J{sd.spectral, sd.sigma, x, sd.time + t, cvec(n), cvec(n), cvec(n), cvec(n)};
    for (int j = 0; j < n; ++j) {
        const double z = sd.spectral.z(j);
        const cplx E = std::polar(1.0, 2.0 * (z * x + 4.0 * z * z * z * t));
        J.theta_phase[j] = std::polar(1.0, 2.0 * (z * x + 4.0 * z * z * z * J.t));
        J.s11[j] = s * sd.r1[j] * sd.r2[j];
        J.s12[j] = s * sd.r2[j] * E;
        J.s21[j] = sd.r1[j] / E;
        const cplx det = (1.0 + J.s11[j]) - J.s12[j] * J.s21[j];
        J.det_residual = std::max(J.det_residual, std::abs(det - 1.0));
    }
    return J;
}

struct PositivityReport {
    double mu_plus_min = 1, mu_plus_max = 1;
    double mu_minus_min = 1;
    double c_minus = 1;    // positive lower bound of Re g*(I+S)g / g*g
    double c_plus = 0;     // sup sqrt((|r1|+1)^2 + (|r2|+1)^2 + (|r1|+|r2|)^2)
    double min_minor = 1;  // min det(I + S_H)
    double max_r = 0;      // max(|r1|, |r2|)
    double deviation_constant = 0;  // c in ||M- - I|| <= c (||r1|| + ||r2||)
    bool ok = true;
};

// Eigenvalues of I + S_H, S_H = (S + S*)/2, in closed form:
// mu = 1 + a/2 +- sqrt(a^2/4 + |w|^2), a = s Re(r1 r2), w = (s r2 E + conj(r1/E))/2.
inline PositivityReport positivity_report(const JumpData& J, bool enforce = true)
{
    PositivityReport r;
    r.mu_plus_min = r.mu_minus_min = r.min_minor = std::numeric_limits<double>::infinity();
    r.mu_plus_max = -r.mu_plus_min;
    for (int j = 0; j < J.spectral.size(); ++j) {
        const double a = J.s11[j].real();
        const cplx w = 0.5 * (J.s12[j] + std::conj(J.s21[j]));
        const double root = std::sqrt(0.25 * a * a + std::norm(w));
        const double mp = 1.0 + 0.5 * a + root, mm = 1.0 + 0.5 * a - root;
        const double r1 = std::abs(J.s21[j]), r2 = std::abs(J.s12[j]);
        r.mu_plus_min = std::min(r.mu_plus_min, mp);
        r.mu_plus_max = std::max(r.mu_plus_max, mp);
        r.mu_minus_min = std::min(r.mu_minus_min, mm);
        r.min_minor = std::min(r.min_minor, 1.0 + a - std::norm(w));
        r.c_plus = std::max(r.c_plus, std::sqrt((r1 + 1) * (r1 + 1) + (r2 + 1) * (r2 + 1) + (r1 + r2) * (r1 + r2)));
        r.max_r = std::max({r.max_r, r1, r2});
    }
    r.c_minus = r.mu_minus_min;
    r.ok = r.mu_minus_min > 0.0 && r.max_r < 1.0;
    r.deviation_constant = r.ok ? 2.0 * (1.0 + r.max_r) / r.c_minus : std::numeric_limits<double>::infinity();
    if (enforce && !r.ok) {
        std::ostringstream os;
        os << "solvability hypothesis violated at x = " << J.x << ", t = " << J.t << ": min eigenvalue of I + S_H = "
           << r.mu_minus_min << ", max(|r1|,|r2|) = " << r.max_r << " (need > 0 and < 1)";
        throw SolvabilityError(Stage::rh, os.str());
    }
    return r;
}

enum class SolverMode { automatic, direct, neumann, gmres };

inline const char* mode_name(SolverMode m)
{
    switch (m) {
    case SolverMode::automatic: return "auto";
    case SolverMode::direct: return "direct";
    case SolverMode::neumann: return "neumann";
    case SolverMode::gmres: return "gmres";
    }
    return "?";
}

struct SolverOptions {
    SolverMode mode = SolverMode::automatic;
    double tol = 1e-12;
    int max_iter = 400;
    int restart = 60;
    int neumann_steps = 0;  // fixed step count when > 0, otherwise iterate to tol
    bool check_positivity = true;
};

// Boundary values M+- = I + Psi+- at fixed (x, t). psi[r][c] holds entry (r, c).
struct RHSolution {
    SpectralGrid spectral;
    double x = 0, t = 0;
    std::array<std::array<cvec, 2>, 2> psi_minus, psi_plus;
    double jump_residual = 0;
    int iterations = 0;
    SolverMode method = SolverMode::automatic;
    PositivityReport positivity;

    Mat2 M_minus(int j) const
    {
        Mat2 m;
        m << 1.0 + psi_minus[0][0][j], psi_minus[0][1][j], psi_minus[1][0][j], 1.0 + psi_minus[1][1][j];
        return m;
    }
    Mat2 M_plus(int j) const
    {
        Mat2 m;
        m << 1.0 + psi_plus[0][0][j], psi_plus[0][1][j], psi_plus[1][0][j], 1.0 + psi_plus[1][1][j];
        return m;
    }
    // first column of M-
    Eigen::Vector2cd mu_minus(int j) const { return M_minus(j).col(0); }
    // second column of M+
    Eigen::Vector2cd nu_plus(int j) const { return M_plus(j).col(1); }
};

namespace detail {

// row r of S as the pair (S_r0, S_r1)
inline std::array<const cvec*, 2> jump_row(const JumpData& J, int r, const cvec& zero)
{
    if (r == 0) return {&J.s11, &J.s12};
    return {&J.s21, &zero};
}

// y -> y - P-(y S) for a row vector y = [y0, y1] stacked as 2n
inline void apply_row_operator(const JumpData& J, const cvec& y, cvec& out)
{
    const long n = J.spectral.size();
    out.resize(2 * n);
    cvec t0 = y.head(n).cwiseProduct(J.s11) + y.tail(n).cwiseProduct(J.s21);
    cvec t1 = y.head(n).cwiseProduct(J.s12);
    plemelj_inplace(t0.data(), static_cast<int>(n), Projection::minus);
    plemelj_inplace(t1.data(), static_cast<int>(n), Projection::minus);
    out.head(n) = y.head(n) - t0;
    out.tail(n) = y.tail(n) - t1;
}

inline cvec row_rhs(const JumpData& J, int r)
{
    const long n = J.spectral.size();
    cvec zero = cvec::Zero(n);
    auto row = jump_row(J, r, zero);
    cvec out(2 * n);
    out.head(n) = plemelj_project(*row[0], Projection::minus);
    out.tail(n) = plemelj_project(*row[1], Projection::minus);
    return out;
}

} // namespace detail

// Dense matrix of y -> y - P-(y S) acting on one row (size 2 n_z).
inline Eigen::MatrixXcd system_matrix(const JumpData& J)
{
    const int n = J.spectral.size();
    auto P = dense_minus_projector(n);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(2 * n, 2 * n);
    // block (l, j) = delta_lj I - P diag(S_jl)
    A.topLeftCorner(n, n) -= *P * J.s11.asDiagonal();
    A.topRightCorner(n, n) -= *P * J.s21.asDiagonal();
    A.bottomLeftCorner(n, n) -= *P * J.s12.asDiagonal();
    return A;
}

inline double smallest_singular_value(const Eigen::MatrixXcd& A)
{
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A);
    return svd.singularValues().minCoeff();
}

// Solves Psi- = P-(Psi- S + S) row by row.
inline RHSolution solve_psi_minus(const JumpData& J, const SolverOptions& opt = {})
{
    const int n = J.spectral.size();
    RHSolution sol{J.spectral};
    sol.x = J.x;
    sol.t = J.t;
    sol.method = opt.mode;
    if (opt.check_positivity) sol.positivity = positivity_report(J, true);

    std::array<cvec, 2> rows;
    SolverMode mode = opt.mode;

    auto direct = [&] {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(system_matrix(J));
        for (int r = 0; r < 2; ++r) {
            cvec b = detail::row_rhs(J, r);
            rows[r] = lu.solve(b);
            cvec chk;
            detail::apply_row_operator(J, rows[r], chk);
            const double res = (chk - b).norm() / std::max(b.norm(), 1e-300);
            if (!std::isfinite(res) || (b.norm() > 0 && res > 1e-8))
                throw SolvabilityError(Stage::rh, "degenerate jump: dense solve is singular to working precision");
        }
        sol.method = SolverMode::direct;
    };

    auto gmres = [&]() -> bool {
        auto op = [&](const cvec& in, cvec& out) { detail::apply_row_operator(J, in, out); };
        int its = 0;
        for (int r = 0; r < 2; ++r) {
            cvec b = detail::row_rhs(J, r);
            rows[r] = b;  // the Neumann first iterate is a good start
            auto res = detail::gmres(op, b, rows[r], opt.tol, opt.max_iter, opt.restart);
            its += res.iterations;
            if (!res.converged) return false;
        }
        sol.iterations = its;
        sol.method = SolverMode::gmres;
        return true;
    };

    auto neumann = [&] {
        double snorm = 0.0;
        for (int j = 0; j < n; ++j) snorm = std::max(snorm, J.S(j).norm());
        if (!(snorm < 0.5)) {
            std::ostringstream os;
            os << "Neumann iteration needs ||S||_inf < 0.5 (got " << snorm << "); use direct mode";
            throw SolvabilityError(Stage::rh, os.str());
        }
        const int steps = opt.neumann_steps > 0 ? opt.neumann_steps : opt.max_iter;
        int its = 0;
        for (int r = 0; r < 2; ++r) {
            const cvec b = detail::row_rhs(J, r);
            cvec y = b, Ay;
            double prev = std::numeric_limits<double>::infinity();
            for (int k = 0; k < steps; ++k) {
                detail::apply_row_operator(J, y, Ay);
                cvec next = b + (y - Ay);  // b + P-(y S)
                const double step = (next - y).norm();
                y = std::move(next);
                ++its;
                if (opt.neumann_steps == 0 && step <= opt.tol * std::max(1.0, y.norm())) break;
                if (k > 3 && step > 2.0 * prev)
                    throw SolvabilityError(Stage::rh, "Neumann iteration diverges (contraction failure); use direct mode");
                prev = step;
            }
            rows[r] = y;
        }
        sol.iterations = its;
        sol.method = SolverMode::neumann;
    };

    switch (mode) {
    case SolverMode::direct: direct(); break;
    case SolverMode::neumann: neumann(); break;
    case SolverMode::gmres:
        if (!gmres()) throw SolvabilityError(Stage::rh, "GMRES did not reach the requested tolerance");
        break;
    case SolverMode::automatic:
        if (!gmres()) {
            if (2 * n > 4096) throw SolvabilityError(Stage::rh, "GMRES did not converge and the grid is too large for a dense solve");
            direct();
        }
        break;
    }
    for (int r = 0; r < 2; ++r) {
        sol.psi_minus[r][0] = rows[r].head(n);
        sol.psi_minus[r][1] = rows[r].tail(n);
    }
    return sol;
}

// Psi+ = P+(Psi- S + S); records max |M+ - M- V|.
inline void extend_psi_plus(const JumpData& J, RHSolution& sol, double tol = 1e-12)
{
    const int n = J.spectral.size();
    for (int r = 0; r < 2; ++r) {
        const cvec& y0 = sol.psi_minus[r][0];
        const cvec& y1 = sol.psi_minus[r][1];
        cvec t0 = y0.cwiseProduct(J.s11) + y1.cwiseProduct(J.s21) + (r == 0 ? J.s11 : J.s21);
        cvec t1 = y0.cwiseProduct(J.s12) + (r == 0 ? J.s12 : cvec::Zero(n));
        sol.psi_plus[r][0] = plemelj_project(t0, Projection::plus);
        sol.psi_plus[r][1] = plemelj_project(t1, Projection::plus);
    }
    double res = 0.0;
    for (int j = 0; j < n; ++j) res = std::max(res, (sol.M_plus(j) - sol.M_minus(j) * J.V(j)).cwiseAbs().maxCoeff());
    sol.jump_residual = res;
    // P+ - P- = I makes the residual pure rounding; a larger value means a bug
    if (res > std::max(10.0 * tol, 1e-9)) {
        std::ostringstream os;
        os << "jump residual " << res << " exceeds the solver tolerance";
        throw ValidationError(Stage::rh, os.str());
    }
}

inline RHSolution solve_rh(const JumpData& J, const SolverOptions& opt = {})
{
    RHSolution sol = solve_psi_minus(J, opt);
    extend_psi_plus(J, sol, opt.tol);
    return sol;
}

inline double l2_norm_z(const cvec& f, const SpectralGrid& g)
{
    return std::sqrt(detail::trapz(f.cwiseAbs2().eval(), g.spacing()));
}

// ||M- - I||_{L2} over all four entries
inline double psi_minus_l2(const RHSolution& sol)
{
    double s = 0.0;
    for (auto& row : sol.psi_minus)
        for (auto& e : row) s += std::pow(l2_norm_z(e, sol.spectral), 2);
    return std::sqrt(s);
}

// Compares the RH boundary values with the Jost construction
// M+ = [m1+/a, m2-], M- = [m1-, m2+/d] at the station `slot` (t = 0).
inline double jost_rh_crosscheck(const JostField& jost, int slot, const RHSolution& rh, const ScatteringData& sd)
{
    double res = 0.0;
    for (int j = 0; j < jost.spectral.size(); ++j) {
        const Mat2& mp = jost.plus(slot, j);
        const Mat2& mm = jost.minus(slot, j);
        Mat2 Mp, Mm;
        Mp.col(0) = mp.col(0) / sd.a[j];
        Mp.col(1) = mm.col(1);
        Mm.col(0) = mm.col(0);
        Mm.col(1) = mp.col(1) / sd.d[j];
        res = std::max({res, (Mp - rh.M_plus(j)).cwiseAbs().maxCoeff(), (Mm - rh.M_minus(j)).cwiseAbs().maxCoeff()});
    }
    return res;
}

} // namespace nmkdv

#endif
