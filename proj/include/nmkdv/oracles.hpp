#ifndef NMKDV_ORACLES_HPP
#define NMKDV_ORACLES_HPP

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "detail/fft.hpp"
#include "reconstruction.hpp"

namespace nmkdv {

// exp(A) for a 2x2 complex matrix: scale until the norm is below 1/2,
// Taylor to degree 20, then square back.
inline Mat2 expm2(const Mat2& A)
{
    const double nrm = A.cwiseAbs().rowwise().sum().maxCoeff();
    int s = 0;
    if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    const Mat2 B = A / std::ldexp(1.0, s);
    Mat2 E = Mat2::Identity(), term = Mat2::Identity();
    for (int k = 1; k <= 20; ++k) {
        term = term * B / static_cast<double>(k);
        E += term;
    }
    for (int k = 0; k < s; ++k) E = E * E;
    return E;
}

struct BoxCoefficients {
    cvec a, b, c, d;
};

// u = A on [0, ell], zero elsewhere. Q12 = u(x) lives on [0, ell] and
// Q21 = -s u(-x) on [-ell, 0]; the transfer matrix across [-ell, ell] is
// T = exp(B2 ell) exp(B1 ell) and Phi+ = Phi- S with S = e^{iz ell s3} T^{-1} e^{iz ell s3}.
inline BoxCoefficients box_coefficients_exact(cplx A, double ell, int sigma, const SpectralGrid& spectral)
{
    if (!(ell > 0.0)) throw AdmissibilityError(Stage::oracle, "box oracle needs ell > 0");
    const int n = spectral.size();
    BoxCoefficients out{cvec(n), cvec(n), cvec(n), cvec(n)};
    for (int j = 0; j < n; ++j) {
        const cplx iz = I_unit * spectral.z(j);
        Mat2 B1, B2;
        B1 << iz, 0.0, -static_cast<double>(sigma) * A, -iz;
        B2 << iz, A, 0.0, -iz;
        const Mat2 T = expm2(B2 * ell) * expm2(B1 * ell);
        Mat2 P = Mat2::Zero();
        P(0, 0) = std::exp(iz * ell);
        P(1, 1) = std::exp(-iz * ell);
        const Mat2 S = P * T.inverse() * P;
        out.a[j] = S(0, 0);
        out.b[j] = S(1, 0);
        out.c[j] = S(0, 1);
        out.d[j] = S(1, 1);
    }
    return out;
}

inline ScatteringData box_scattering_exact(cplx A, double ell, int sigma, const SpectralGrid& spectral)
{
    BoxCoefficients bc = box_coefficients_exact(A, ell, sigma, spectral);
    return reflection_coefficients(spectral, sigma, bc.a, bc.b, bc.d, bc.c);
}

// Solution of u_t + u_xxx = 0 by the multiplier e^{i k^3 t}. The grid is
// zero-padded to `padding` times its length first so that dispersive tails
// leaving [-L, L] do not wrap around.
inline SampledPotential linear_dispersion_solution(const SampledPotential& u0, double t, int padding = 1)
{
    if (padding < 1) throw AdmissibilityError(Stage::oracle, "padding must be at least 1");
    const int n0 = u0.grid().size();
    const int n = n0 * padding;
    const int offset = (n - n0) / 2;
    const double period = n * u0.grid().spacing();
    cvec v = cvec::Zero(n);
    v.segment(offset, n0) = u0.values();
    detail::apply_multiplier(v.data(), n, [&](int k) -> cplx {
        const double xi = 2.0 * std::numbers::pi * detail::bin_frequency(k, n) / period;
        if (n % 2 == 0 && k == n / 2) return std::cos(xi * xi * xi * t);
        return std::polar(1.0, xi * xi * xi * t);
    });
    return SampledPotential(u0.grid(), v.segment(offset, n0).eval(), u0.sigma());
}

struct ResidualReport {
    std::string name;
    double max_residual = 0;
    double l2_residual = 0;
    double refinement_order = std::nan("");  // set only when two resolutions were run

    bool has_order() const { return !std::isnan(refinement_order); }
};

// order estimate from residuals at step h and h / ratio
inline double refinement_order(double coarse, double fine, double ratio = 2.0)
{
    return std::log(coarse / fine) / std::log(ratio);
}

inline ResidualReport with_refinement(const ResidualReport& coarse, const ResidualReport& fine, double ratio = 2.0)
{
    ResidualReport r = fine;
    r.refinement_order = refinement_order(coarse.l2_residual, fine.l2_residual, ratio);
    return r;
}

// Residual of u_t + u_xxx + 6 s u(x,t) u(-x,-t) u_x at t = t0, using the
// slices t0 - dt, t0 + dt for the central time difference. The nonlocal
// factor comes from the slice at -t0 reversed in x.
inline ResidualReport pde_residual(const ReconstructedField& F, double t0, double dt, const std::string& name = "pde")
{
    auto has = [&](double t) {
        for (auto& s : F.slices)
            if (s.t == t) return true;
        return false;
    };
    const double mt0 = t0 == 0.0 ? 0.0 : -t0;
    if (!(dt > 0.0) || !has(t0) || !has(t0 - dt) || !has(t0 + dt) || !has(mt0))
        throw ValidationError(Stage::oracle, "pde residual needs the slices t0, t0 +- dt and -t0");
    const double h = F.space.spacing();
    const cvec& u = F.at(t0).u;
    const cvec w = F.at(mt0).u.reverse();
    const cvec ut = (F.at(t0 + dt).u - F.at(t0 - dt).u) / (2.0 * dt);
    const cvec ux = detail::spectral_derivative(u, h, 1);
    const cvec uxxx = detail::spectral_derivative(u, h, 3);
    const cvec R = ut + uxxx + 6.0 * F.sigma * u.cwiseProduct(w).cwiseProduct(ux);
    ResidualReport r;
    r.name = name;
    r.max_residual = R.cwiseAbs().maxCoeff();
    r.l2_residual = std::sqrt(std::abs(detail::trapz(R.cwiseAbs2().cast<cplx>().eval(), h)));
    return r;
}

// M(x, t; z0) = I + C(M- S)(z0) off the axis
inline Mat2 offaxis_M(const RHSolution& sol, const JumpData& J, cplx z0)
{
    Mat2 M = Mat2::Identity();
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            cvec f = sol.psi_plus[r][c] - sol.psi_minus[r][c];
            M(r, c) += cauchy_offaxis(BoundaryFunction{J.spectral, std::move(f)}, z0);
        }
    return M;
}

// x-part of the Lax pair checked off the axis: central difference of M in x
// against iz[s3, M] + Q M, with Q from the two reconstruction formulas.
inline ResidualReport lax_residual(const ScatteringData& sd, const std::vector<std::pair<double, double>>& points,
                                   const std::vector<cplx>& z0s, double dx, const ReconstructOptions& opt = {},
                                   const std::string& name = "lax")
{
    std::vector<double> res(points.size() * z0s.size());
    detail::parallel_for(static_cast<long>(points.size()), [&](long k) {
        const auto [x, t] = points[static_cast<std::size_t>(k)];
        const JumpData Jl = build_jump(sd, x - dx, t), Jr = build_jump(sd, x + dx, t), Jc = build_jump(sd, x, t);
        const RHSolution sl = solve_rh(Jl, opt.solver), sr = solve_rh(Jr, opt.solver), sc = solve_rh(Jc, opt.solver);
        const PointValue pv = reconstruct_at(sd, x, t, opt);
        Mat2 Q = Mat2::Zero();
        Q(0, 1) = pv.u;
        Q(1, 0) = -static_cast<double>(sd.sigma) * pv.u_mirror;
        for (std::size_t q = 0; q < z0s.size(); ++q) {
            const cplx z0 = z0s[q];
            const Mat2 Mx = (offaxis_M(sr, Jr, z0) - offaxis_M(sl, Jl, z0)) / (2.0 * dx);
            const Mat2 M = offaxis_M(sc, Jc, z0);
            Mat2 s3 = Mat2::Zero();
            s3(0, 0) = 1.0;
            s3(1, 1) = -1.0;
            const Mat2 rhs = I_unit * z0 * (s3 * M - M * s3) + Q * M;
            res[static_cast<std::size_t>(k) * z0s.size() + q] = (Mx - rhs).cwiseAbs().maxCoeff();
        }
    });
    ResidualReport r;
    r.name = name;
    double s2 = 0;
    for (double v : res) {
        r.max_residual = std::max(r.max_residual, v);
        s2 += v * v;
    }
    r.l2_residual = std::sqrt(s2 / std::max<std::size_t>(1, res.size()));
    return r;
}

// `name max_residual l2_residual order` per line; order is "nan" when absent
inline void write_residuals(std::ostream& out, const std::vector<ResidualReport>& reports)
{
    out << "# nmkdv-residuals v1\n";
    for (auto& r : reports)
        out << r.name << ' ' << detail::fmt17(r.max_residual) << ' ' << detail::fmt17(r.l2_residual) << ' '
            << (r.has_order() ? detail::fmt17(r.refinement_order) : std::string("nan")) << '\n';
}

inline void write_residuals(const std::string& path, const std::vector<ResidualReport>& reports)
{
    auto out = detail::open_out(path);
    write_residuals(out, reports);
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace nmkdv

#endif
