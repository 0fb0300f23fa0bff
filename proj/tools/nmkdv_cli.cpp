// Command-line front end: forward, evolve, inverse, solve, validate.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmkdv/nmkdv.hpp"

using namespace nmkdv;

namespace {

struct Common {
    std::string config_path;
    std::string out_path;
    std::vector<std::string> overrides;
};

RunConfig load_config(const Common& c)
{
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : read_config(c.config_path);
    for (auto& kv : c.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw IoError("--set expects key=value, got '" + kv + "'");
        apply_setting(cfg, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

ReconstructOptions reconstruct_options(const RunConfig& cfg)
{
    ReconstructOptions o;
    o.solver.mode = cfg.solver_mode;
    return o;
}

PipelineOptions pipeline_options(const RunConfig& cfg)
{
    PipelineOptions o;
    o.tail_tol = cfg.tail_tol;
    o.reconstruct = reconstruct_options(cfg);
    return o;
}

void print_norms(const NormReport& n)
{
    std::printf("norms: L1 %.6e  L2 %.6e  L2,1 %.6e  L2,3 %.6e  H1 %.6e  H1,1 %.6e  H3 %.6e\n", n.l1, n.l2, n.l2_1,
                n.l2_3, n.h1, n.h11, n.h3);
    std::printf("small-norm flags: no zeros %s, |r| < 1 %s\n", n.flag_no_zeros ? "yes" : "no",
                n.flag_r_below_one ? "yes" : "no");
}

void print_audit(const DataAudit& a)
{
    std::printf("audit: det %.3e  det_r %.3e  a-sym %.3e  d-sym %.3e  r1-rel %.3e  r2-rel %.3e  max|r1| %.4f  max|r2| %.4f\n",
                a.determinant, a.determinant_r, a.a_symmetry, a.d_symmetry, a.r1_relation, a.r2_relation, a.max_r1,
                a.max_r2);
}

void print_slice_summary(const FieldSlice& s)
{
    std::printf("t = %-8g jump residual %.2e  overlap %.2e  moment gap %.2e  iterations %d%s\n", s.t, s.jump_residual,
                s.overlap, s.moment_gap, s.max_iterations, s.tail_warning ? "  [spectral tail warning]" : "");
}

int cmd_forward(const Common& c)
{
    const RunConfig cfg = load_config(c);
    const SampledPotential u = make_potential(cfg);
    const ForwardResult fw = forward_transform(u, cfg.spectral(), pipeline_options(cfg));
    print_norms(fw.norms);
    std::printf("station audit %.3e  b-integral gap %.3e\n", fw.coefficients.x_audit, fw.coefficients.b_integral_gap);
    print_audit(fw.audit);
    if (!c.out_path.empty()) write_scattering(c.out_path, fw.data);
    return 0;
}

int cmd_evolve(const Common& c, const std::string& in_path, double t)
{
    const ScatteringData sd = read_scattering(in_path);
    const ScatteringData out = time_evolve(sd, t);
    std::printf("evolved from t = %g to t = %g\n", sd.time, out.time);
    if (!c.out_path.empty()) write_scattering(c.out_path, out);
    return 0;
}

int cmd_inverse(const Common& c, const std::string& in_path)
{
    const RunConfig cfg = load_config(c);
    const ScatteringData sd = read_scattering(in_path);
    const ReconstructedField F = inverse_field(sd, cfg.space(), {sd.time}, reconstruct_options(cfg));
    for (auto& s : F.slices) print_slice_summary(s);
    if (!c.out_path.empty()) write_field(c.out_path, F);
    return 0;
}

int cmd_solve(const Common& c)
{
    const RunConfig cfg = load_config(c);
    const SampledPotential u0 = make_potential(cfg);
    std::vector<double> times = cfg.times;
    const bool has_zero = std::find(times.begin(), times.end(), 0.0) != times.end();
    if (!has_zero) times.insert(times.begin(), 0.0);
    const ForwardResult fw = forward_transform(u0, cfg.spectral(), pipeline_options(cfg));
    print_norms(fw.norms);
    print_audit(fw.audit);
    ReconstructedField F = inverse_field(fw.data, u0.grid(), times, reconstruct_options(cfg));
    for (auto& s : F.slices) print_slice_summary(s);

    const auto cq = conserved_quantities(F);
    const cplx I0 = cq.front().I0;
    std::printf("\n%-10s %-26s %-26s %-10s\n", "t", "I0", "I1", "I0 drift");
    for (auto& q : cq)
        std::printf("%-10g %+.6e%+.6ei %+.6e%+.6ei %.2e\n", q.t, q.I0.real(), q.I0.imag(), q.I1.real(), q.I1.imag(),
                    std::abs(q.I0 - I0) / std::abs(I0));

    std::printf("\n%-10s %-14s\n", "t", "|u - u_lin|/|u_lin|");
    for (double t : times) {
        const SampledPotential lin = linear_dispersion_solution(u0, t, 8);
        std::printf("%-10g %.4e\n", t, relative_l2(F.at(t).u, lin.values()));
    }
    if (!has_zero) F.requested = cfg.times;
    if (!c.out_path.empty()) write_field(c.out_path, F);
    return 0;
}

int cmd_validate(const Common& c)
{
    const RunConfig cfg = load_config(c);
    const SampledPotential u0 = make_potential(cfg);
    std::vector<double> times = cfg.times;
    if (std::find(times.begin(), times.end(), 0.0) == times.end()) times.insert(times.begin(), 0.0);

    const ForwardResult fw = forward_transform(u0, cfg.spectral(), pipeline_options(cfg));
    const ReconstructedField F = inverse_field(fw.data, u0.grid(), times, reconstruct_options(cfg));

    struct Gate {
        ResidualReport report;
        double tol;
    };
    std::vector<Gate> gates;
    auto add = [&](const std::string& name, double value, double tol) {
        ResidualReport r;
        r.name = name;
        r.max_residual = value;
        r.l2_residual = value;
        gates.push_back({r, tol});
    };

    add("determinant_identity", fw.audit.determinant, 1e-6);
    add("station_audit", fw.coefficients.x_audit, 1e-6);
    add("round_trip_t0", relative_l2(F.at(0.0).u, u0.values()), 1e-3);
    const int nz = fw.data.spectral.size();
    const double edge_r = std::max({std::abs(fw.data.r1[0]), std::abs(fw.data.r1[nz - 1]), std::abs(fw.data.r2[0]),
                                    std::abs(fw.data.r2[nz - 1])});
    add("spectral_tail", edge_r, 1e-6);
    double overlap = 0, jump = 0;
    for (auto& s : F.slices) {
        overlap = std::max(overlap, s.overlap);
        jump = std::max(jump, s.jump_residual);
    }
    add("half_line_overlap", overlap / u0.values().cwiseAbs().maxCoeff(), 1e-3);
    add("jump_residual", jump, 1e-9);
    const auto cq = conserved_quantities(F);
    double drift = 0;
    for (auto& q : cq) drift = std::max(drift, std::abs(q.I0 - cq.front().I0) / std::abs(cq.front().I0));
    add("conservation_I0", drift, 1e-3);

    bool ok = true;
    for (auto& g : gates) {
        const bool pass = g.report.max_residual <= g.tol;
        ok = ok && pass;
        std::printf("%-22s %.3e  (tol %.0e)  %s\n", g.report.name.c_str(), g.report.max_residual, g.tol,
                    pass ? "PASS" : "FAIL");
    }
    if (!c.out_path.empty()) {
        std::vector<ResidualReport> reports;
        for (auto& g : gates) reports.push_back(g.report);
        write_residuals(c.out_path, reports);
    }
    if (!ok) throw ValidationError(Stage::validate, "one or more validation gates failed");
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"nonlocal mKdV inverse scattering solver"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "parallel width (overrides NMKDV_THREADS)");

    Common common;
    std::string in_path;
    double t = 0.0;
    auto add_common = [&](CLI::App* s, bool needs_config) {
        auto* opt = s->add_option("--config", common.config_path, "key=value run configuration");
        if (needs_config) opt->check(CLI::ExistingFile);
        s->add_option("--out", common.out_path, "output file");
        s->add_option("--set", common.overrides, "override a config entry, key=value");
    };

    auto* forward = app.add_subcommand("forward", "potential -> scattering data");
    add_common(forward, true);
    auto* evolve = app.add_subcommand("evolve", "apply the time phase to a scattering file");
    evolve->add_option("--in", in_path, "scattering file")->required();
    evolve->add_option("--t", t, "time increment")->required();
    evolve->add_option("--out", common.out_path, "output file");
    auto* inverse = app.add_subcommand("inverse", "scattering data -> field on the config x-grid");
    inverse->add_option("--in", in_path, "scattering file")->required();
    add_common(inverse, true);
    auto* solve = app.add_subcommand("solve", "forward, evolve and reconstruct at the config times");
    add_common(solve, true);
    auto* validate = app.add_subcommand("validate", "run the invariant gates");
    add_common(validate, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 4;
    }

    if (threads <= 0)
        if (const char* env = std::getenv("NMKDV_THREADS")) threads = std::atoi(env);
    if (threads > 0) detail::set_threads(threads);

    try {
        if (forward->parsed()) return cmd_forward(common);
        if (evolve->parsed()) return cmd_evolve(common, in_path, t);
        if (inverse->parsed()) return cmd_inverse(common, in_path);
        if (solve->parsed()) return cmd_solve(common);
        if (validate->parsed()) return cmd_validate(common);
    } catch (const Error& e) {
        std::fprintf(stderr, "nmkdv: [%s] %s\n", stage_name(e.stage()), e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "nmkdv: %s\n", e.what());
        return 5;
    }
    return 0;
}
