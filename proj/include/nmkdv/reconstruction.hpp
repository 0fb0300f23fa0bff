#ifndef NMKDV_RECONSTRUCTION_HPP
#define NMKDV_RECONSTRUCTION_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "detail/parallel.hpp"
#include "rh_solver.hpp"

namespace nmkdv {

struct ReconstructOptions {
    SolverOptions solver;
    double tail_tol = 1e-8;  // integrand size at |z| = Z that triggers a warning
    bool half_line_split = true;
    // width of the tanh hand-over between the two formulas around x = 0;
    // 0 gives a hard switch, whose seam shows up in spectral x-derivatives
    double blend_width = 1.0;
};

struct PointValue {
    double x = 0, t = 0;
    cplx u;          // u(x, t) = (1/pi) int s r2 E (M-)_11 dz
    cplx u_mirror;   // u(-x, -t) = (s/pi) int r1 E^{-1} (M+)_22 dz
    cplx u_moment;   // -2i lim z M12 through first_moment
    double jump_residual = 0;
    int iterations = 0;
    bool tail_warning = false;
    double mu_minus_min = 1;
};

// Solves the RH problem at (x, sd.time + t) and evaluates both reconstruction formulas.
inline PointValue reconstruct_at(const ScatteringData& sd, double x, double t, const ReconstructOptions& opt = {})
{
    const JumpData J = build_jump(sd, x, t);
    const RHSolution sol = solve_rh(J, opt.solver);
    const int n = sd.spectral.size();
    const double dz = sd.spectral.spacing();
    cvec fu(n), fm(n), fmom(n);
    for (int j = 0; j < n; ++j) {
        fu[j] = J.s12[j] * (1.0 + sol.psi_minus[0][0][j]);
        fm[j] = J.s21[j] * (1.0 + sol.psi_plus[1][1][j]);
        fmom[j] = sol.psi_plus[0][1][j] - sol.psi_minus[0][1][j];
    }
    PointValue p;
    p.x = x;
    p.t = J.t;
    p.u = detail::trapz(fu, dz) / std::numbers::pi;
    p.u_mirror = static_cast<double>(sd.sigma) * detail::trapz(fm, dz) / std::numbers::pi;
    p.u_moment = -2.0 * I_unit * first_moment({sd.spectral, fmom});
    p.jump_residual = sol.jump_residual;
    p.iterations = sol.iterations;
    p.mu_minus_min = sol.positivity.mu_minus_min;
    p.tail_warning = std::max({std::abs(fu[0]), std::abs(fu[n - 1]), std::abs(fm[0]), std::abs(fm[n - 1])}) > opt.tail_tol;
    return p;
}

struct FieldSlice {
    double t = 0;
    cvec u;          // field used downstream
    cvec mu_form;    // (M-)_11 formula at (x, t)
    cvec nu_form;    // (M+)_22 formula from the solve at (-x, -t)
    double overlap = 0;        // max |mu_form - nu_form| over |x| <= L/4
    double moment_gap = 0;     // max |u - u_moment|
    double jump_residual = 0;
    int max_iterations = 0;
    bool tail_warning = false;
};

struct ReconstructedField {
    SpaceGrid space;
    int sigma;
    std::vector<double> requested;
    std::vector<FieldSlice> slices;  // sorted by t, closed under t -> -t

    const FieldSlice& at(double t) const
    {
        for (auto& s : slices)
            if (s.t == t) return s;
        throw ValidationError(Stage::reconstruction, "field has no slice at t = " + std::to_string(t));
    }
};

// u(., T) for each absolute time T in `times`, plus the mirrored times -T
// needed by the nonlocal formulas. With half_line_split the mu formula is used
// for x < 0 and the mirrored nu formula for x > 0, handed over smoothly.
inline ReconstructedField inverse_field(const ScatteringData& sd, const SpaceGrid& space, const std::vector<double>& times,
                                        const ReconstructOptions& opt = {})
{
    std::vector<double> all;
    for (double t : times) {
        all.push_back(t);
        all.push_back(t == 0.0 ? 0.0 : -t);
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    const int nx = space.size();
    const long nt = static_cast<long>(all.size());
    std::vector<PointValue> pts(static_cast<std::size_t>(nt * nx));
    detail::parallel_for(nt * nx, [&](long k) {
        const long it = k / nx;
        const int i = static_cast<int>(k % nx);
        pts[static_cast<std::size_t>(k)] = reconstruct_at(sd, space.x(i), all[static_cast<std::size_t>(it)] - sd.time, opt);
    });

    auto index_of = [&](double t) {
        return static_cast<long>(std::find(all.begin(), all.end(), t) - all.begin());
    };

    ReconstructedField F{space, sd.sigma, times, {}};
    for (long it = 0; it < nt; ++it) {
        const double t = all[static_cast<std::size_t>(it)];
        const long im = index_of(t == 0.0 ? 0.0 : -t);
        FieldSlice s;
        s.t = t;
        s.u.resize(nx);
        s.mu_form.resize(nx);
        s.nu_form.resize(nx);
        for (int i = 0; i < nx; ++i) {
            const PointValue& p = pts[static_cast<std::size_t>(it * nx + i)];
            const PointValue& q = pts[static_cast<std::size_t>(im * nx + space.mirror(i))];
            s.mu_form[i] = p.u;
            s.nu_form[i] = q.u_mirror;
            s.u[i] = s.mu_form[i];
            if (opt.half_line_split) {
                const double x = space.x(i);
                const double w = opt.blend_width > 0.0 ? 0.5 * (1.0 - std::tanh(x / opt.blend_width)) : (x > 0.0 ? 0.0 : 1.0);
                s.u[i] = w * s.mu_form[i] + (1.0 - w) * s.nu_form[i];
            }
            if (std::abs(space.x(i)) <= 0.25 * space.half_width())
                s.overlap = std::max(s.overlap, std::abs(s.mu_form[i] - s.nu_form[i]));
            s.moment_gap = std::max(s.moment_gap, std::abs(p.u - p.u_moment));
            s.jump_residual = std::max(s.jump_residual, p.jump_residual);
            s.max_iterations = std::max(s.max_iterations, p.iterations);
            s.tail_warning = s.tail_warning || p.tail_warning;
        }
        F.slices.push_back(std::move(s));
    }
    return F;
}

struct ForwardResult {
    NormReport norms;
    ScatteringCoefficients coefficients;
    ScatteringData data;
    DataAudit audit;
};

struct PipelineOptions {
    double tail_tol = 1e-12;   // |u(+-L)| admissibility
    CoefficientOptions coefficients;
    ReconstructOptions reconstruct;
};

inline ForwardResult forward_transform(const SampledPotential& u, const SpectralGrid& spectral, const PipelineOptions& opt = {})
{
    u.require_decay(opt.tail_tol);
    NormReport norms = compute_norms(u);
    ScatteringCoefficients sc = forward_coefficients(u, spectral, opt.coefficients);
    ScatteringData sd = reflection_coefficients(sc);
    DataAudit audit = symmetry_and_identity_audit(sd);
    return {norms, std::move(sc), std::move(sd), audit};
}

// direct scattering -> time evolution (through the phase) -> reconstruction
inline ReconstructedField solve_cauchy_problem(const SampledPotential& u0, const SpectralGrid& spectral,
                                               const std::vector<double>& times, const PipelineOptions& opt = {})
{
    ForwardResult fw = forward_transform(u0, spectral, opt);
    return inverse_field(fw.data, u0.grid(), times, opt.reconstruct);
}

inline double relative_l2(const cvec& a, const cvec& ref)
{
    return (a - ref).norm() / ref.norm();
}

struct ConservedValue {
    double t;
    cplx I0, I1;
};

// I0 = int u(x,t) u(-x,-t) dx,
// I1 = int [u_x(x,t) d/dx(u(-x,-t)) - s u(x,t)^2 u(-x,-t)^2] dx
inline std::vector<ConservedValue> conserved_quantities(const ReconstructedField& F)
{
    const double h = F.space.spacing();
    std::vector<ConservedValue> out;
    for (double t : F.requested) {
        const cvec& u = F.at(t).u;
        const cvec w = F.at(t == 0.0 ? 0.0 : -t).u.reverse();
        const cvec ux = detail::spectral_derivative(u, h, 1);
        const cvec wx = detail::spectral_derivative(w, h, 1);
        cvec i1 = ux.cwiseProduct(wx) - static_cast<double>(F.sigma) * u.cwiseProduct(u).cwiseProduct(w).cwiseProduct(w);
        out.push_back({t, detail::trapz(u.cwiseProduct(w).eval(), h), detail::trapz(i1, h)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// text formats for potentials and fields

inline void write_potential(std::ostream& out, const SampledPotential& u)
{
    using detail::fmt17;
    out << "# nmkdv-potential v1 sigma=" << detail::fmt_sigma(u.sigma()) << " L=" << fmt17(u.grid().half_width())
        << " N=" << u.grid().size() << "\n";
    for (int i = 0; i < u.grid().size(); ++i)
        out << fmt17(u.grid().x(i)) << ' ' << fmt17(u[i].real()) << ' ' << fmt17(u[i].imag()) << '\n';
}

inline void write_potential(const std::string& path, const SampledPotential& u)
{
    auto out = detail::open_out(path);
    write_potential(out, u);
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline SampledPotential read_potential(std::istream& in)
{
    std::string header;
    if (!std::getline(in, header)) throw IoError("empty potential file");
    auto kv = detail::parse_header(header, "nmkdv-potential");
    const int sigma = detail::parse_sigma(detail::require_key(kv, "sigma"));
    const double L = detail::to_double(detail::require_key(kv, "L"), "L");
    const int n = detail::to_int(detail::require_key(kv, "N"), "N");
    SpaceGrid g(L, n);
    cvec v(n);
    std::vector<double> row;
    for (int i = 0; i < n; ++i) {
        if (!detail::read_row(in, row) || row.size() != 3) throw IoError("potential rows must read 'x re im'");
        if (std::abs(row[0] - g.x(i)) > 1e-12 * std::max(1.0, L))
            throw IoError("x column does not match the uniform grid at row " + std::to_string(i));
        v[i] = cplx(row[1], row[2]);
    }
    return SampledPotential(g, std::move(v), sigma);
}

inline SampledPotential read_potential(const std::string& path)
{
    auto in = detail::open_in(path);
    return read_potential(in);
}

// Writes the requested times only, in the order given.
inline void write_field(std::ostream& out, const ReconstructedField& F)
{
    using detail::fmt17;
    out << "# nmkdv-field v1 sigma=" << detail::fmt_sigma(F.sigma) << " L=" << fmt17(F.space.half_width())
        << " N_x=" << F.space.size() << " t=";
    for (std::size_t k = 0; k < F.requested.size(); ++k) out << (k ? "," : "") << fmt17(F.requested[k]);
    out << "\n";
    for (double t : F.requested) {
        const FieldSlice& s = F.at(t);
        out << "# t=" << fmt17(t) << "\n";
        for (int i = 0; i < F.space.size(); ++i)
            out << fmt17(F.space.x(i)) << ' ' << fmt17(s.u[i].real()) << ' ' << fmt17(s.u[i].imag()) << '\n';
    }
}

inline void write_field(const std::string& path, const ReconstructedField& F)
{
    auto out = detail::open_out(path);
    write_field(out, F);
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace nmkdv

#endif
