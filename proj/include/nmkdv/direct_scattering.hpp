#ifndef NMKDV_DIRECT_SCATTERING_HPP
#define NMKDV_DIRECT_SCATTERING_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "core_model.hpp"
#include "detail/parallel.hpp"

namespace nmkdv {

using Mat2 = Eigen::Matrix2cd;

enum class Side { plus, minus };

// Jost matrices m+ and m- stored at a subset of x nodes ("stations").
// Layout: m[slot * n_z + j] for station slot and spectral index j.
struct JostField {
    SpaceGrid space;
    SpectralGrid spectral;
    int sigma;
    std::vector<int> stations;
    std::vector<Mat2> m_plus, m_minus;
    cvec b_integral;  // sigma int e^{2izy} u(-y) m11+(y) dy, filled by the plus sweep

    int slot_of(int node) const
    {
        auto it = std::find(stations.begin(), stations.end(), node);
        return it == stations.end() ? -1 : static_cast<int>(it - stations.begin());
    }
    const Mat2& plus(int slot, int j) const { return m_plus[static_cast<std::size_t>(slot) * spectral.size() + j]; }
    const Mat2& minus(int slot, int j) const { return m_minus[static_cast<std::size_t>(slot) * spectral.size() + j]; }
    const Mat2& at(Side s, int slot, int j) const { return s == Side::plus ? plus(slot, j) : minus(slot, j); }
};

namespace detail {

// d/dx m = iz [sigma3, m] + Q m with Q = [[0, q12], [q21, 0]]
inline Mat2 jost_rhs(const Mat2& m, cplx iz, cplx q12, cplx q21)
{
    Mat2 r;
    r(0, 0) = q12 * m(1, 0);
    r(0, 1) = 2.0 * iz * m(0, 1) + q12 * m(1, 1);
    r(1, 0) = -2.0 * iz * m(1, 0) + q21 * m(0, 0);
    r(1, 1) = q21 * m(0, 1);
    return r;
}

inline void rk4_step(Mat2& m, double s, cplx iz, cplx q12, cplx q21)
{
    const Mat2 k1 = jost_rhs(m, iz, q12, q21);
    const Mat2 k2 = jost_rhs(m + (0.5 * s) * k1, iz, q12, q21);
    const Mat2 k3 = jost_rhs(m + (0.5 * s) * k2, iz, q12, q21);
    const Mat2 k4 = jost_rhs(m + s * k3, iz, q12, q21);
    m += (s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline double max_entry(const Mat2& m)
{
    return m.cwiseAbs().maxCoeff();
}

} // namespace detail

// Largest |Z| h / 2 the integrator accepts (one RK4 step per half cell).
inline constexpr double max_phase_step = 0.5;

inline void require_phase_resolution(const SpaceGrid& g, const SpectralGrid& s)
{
    const double r = s.half_width() * g.spacing() * 0.5;
    if (r > max_phase_step) {
        std::ostringstream os;
        os << "phase resolution violated: |Z| h/2 = " << r << " > " << max_phase_step
           << "; refine the x grid or reduce Z";
        throw RefinementError(s.half_width(), os.str());
    }
}

// Integrates one side of the Jost problem for every z on the spectral grid.
// Sample u_i stands for u on the cell [x_i - h/2, x_i + h/2]; each node
// interval is crossed in two RK4 half steps with the cell's constant Q. The
// plus side starts from I at x_{N-1}, the minus side from I at x_0.
// Returns m at the requested stations (slot-major). If b_integral is given
// (plus side only) the trapezoid sum of sigma e^{2izx} u(-x) m11+ is stored.
inline std::vector<Mat2> integrate_jost(const SampledPotential& u, const SpectralGrid& spectral, Side side,
                                        const std::vector<int>& stations, cvec* b_integral = nullptr)
{
    const SpaceGrid& g = u.grid();
    require_phase_resolution(g, spectral);
    const int n = g.size();
    const int nz = spectral.size();
    const double half = 0.5 * g.spacing();
    const double h = g.spacing();
    const int sigma = u.sigma();
    const cvec& uv = u.values();
    const double limit = 10.0 * std::exp(2.0 * l1_norm(u));

    std::vector<int> slot_at(static_cast<std::size_t>(n), -1);
    for (std::size_t s = 0; s < stations.size(); ++s) {
        if (stations[s] < 0 || stations[s] >= n)
            throw AdmissibilityError(Stage::direct, "Jost station outside the grid");
        slot_at[static_cast<std::size_t>(stations[s])] = static_cast<int>(s);
    }

    std::vector<Mat2> out(stations.size() * static_cast<std::size_t>(nz), Mat2::Identity());
    if (b_integral) b_integral->setZero(nz);

    detail::parallel_for(nz, [&](long jl) {
        const int j = static_cast<int>(jl);
        const double z = spectral.z(j);
        const cplx iz(0.0, z);
        Mat2 m = Mat2::Identity();
        cplx bsum = 0.0;

        auto visit = [&](int i) {
            if (slot_at[i] >= 0) out[static_cast<std::size_t>(slot_at[i]) * nz + j] = m;
            if (detail::max_entry(m) > limit) {
                std::ostringstream os;
                os << "Jost integration unstable at z = " << z << " (|m| = " << detail::max_entry(m)
                   << "); refine the x grid";
                throw RefinementError(z, os.str());
            }
            if (b_integral) {
                double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
                bsum += w * std::exp(cplx(0.0, 2.0 * z * g.x(i))) * uv[n - 1 - i] * m(0, 0);
            }
        };

        auto q12 = [&](int i) { return uv[i]; };
        auto q21 = [&](int i) { return -static_cast<double>(sigma) * uv[n - 1 - i]; };

        if (side == Side::plus) {
            visit(n - 1);
            for (int i = n - 1; i >= 1; --i) {
                detail::rk4_step(m, -half, iz, q12(i), q21(i));
                detail::rk4_step(m, -half, iz, q12(i - 1), q21(i - 1));
                visit(i - 1);
            }
        } else {
            visit(0);
            for (int i = 0; i + 1 < n; ++i) {
                detail::rk4_step(m, half, iz, q12(i), q21(i));
                detail::rk4_step(m, half, iz, q12(i + 1), q21(i + 1));
                visit(i + 1);
            }
        }
        if (b_integral) (*b_integral)[j] = static_cast<double>(sigma) * bsum * h;
    });
    return out;
}

inline std::vector<int> all_stations(const SpaceGrid& g)
{
    std::vector<int> s(static_cast<std::size_t>(g.size()));
    for (int i = 0; i < g.size(); ++i) s[static_cast<std::size_t>(i)] = i;
    return s;
}

// Default stations: the node nearest 0 and the nodes nearest -L/2, +L/2.
inline std::vector<int> audit_stations(const SpaceGrid& g)
{
    return {g.nearest(0.0), g.nearest(-0.5 * g.half_width()), g.nearest(0.5 * g.half_width())};
}

// Both Jost sides at the given stations (all nodes when empty).
inline JostField compute_jost(const SampledPotential& u, const SpectralGrid& spectral, std::vector<int> stations = {})
{
    if (stations.empty()) stations = all_stations(u.grid());
    JostField f{u.grid(), spectral, u.sigma(), stations, {}, {}, {}};
    f.m_plus = integrate_jost(u, spectral, Side::plus, stations, &f.b_integral);
    f.m_minus = integrate_jost(u, spectral, Side::minus, stations);
    return f;
}

// ---------------------------------------------------------------------------
// Neumann series for the Volterra operator of the first plus column

struct NeumannTerm {
    int n;
    double measured;  // sup_x max(|f1|, |f2|) of K^n e1
    double bound;     // l1^n / n!
    bool within;
};

inline std::vector<NeumannTerm> neumann_resolvent_bound(const SampledPotential& u, int n_terms, double z = 0.0)
{
    if (n_terms < 1) throw AdmissibilityError(Stage::direct, "n_terms must be at least 1");
    const SpaceGrid& g = u.grid();
    const int n = g.size();
    const double h = g.spacing();
    const double s = u.sigma();
    const cvec& uv = u.values();
    const cvec vv = uv.reverse();
    const double l1 = l1_norm(u);

    cvec f1 = cvec::Ones(n), f2 = cvec::Zero(n);
    std::vector<NeumannTerm> out;
    double fact = 1.0;
    for (int k = 1; k <= n_terms; ++k) {
        // (K f)_1 = -int_x^inf u f2,  (K f)_2 = s e^{-2izx} int_x^inf e^{2izy} u(-y) f1
        cvec g1(n), g2(n);
        for (int i = 0; i < n; ++i) {
            g1[i] = uv[i] * f2[i];
            g2[i] = std::exp(cplx(0.0, 2.0 * z * g.x(i))) * vv[i] * f1[i];
        }
        cvec c1 = detail::cumtrapz_right(g1, h);
        cvec c2 = detail::cumtrapz_right(g2, h);
        for (int i = 0; i < n; ++i) {
            f1[i] = -c1[i];
            f2[i] = s * std::exp(cplx(0.0, -2.0 * z * g.x(i))) * c2[i];
        }
        fact *= k;
        double meas = 0.0;
        for (int i = 0; i < n; ++i) meas = std::max({meas, std::abs(f1[i]), std::abs(f2[i])});
        const double bound = std::pow(l1, k) / fact;
        out.push_back({k, meas, bound, meas <= bound + 1e-10 * k});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Large-z expansion coefficients of the Jost columns

struct AsymptoticCoefficients {
    Side side;
    // one row per x node, two components per row
    Eigen::MatrixX2cd p1, q1, g1, p2, q2;
};

inline AsymptoticCoefficients asymptotic_coefficients(const SampledPotential& u, Side side)
{
    const SpaceGrid& g = u.grid();
    const int n = g.size();
    const double h = g.spacing();
    const double s = u.sigma();
    const cvec& uu = u.values();
    const cvec v = uu.reverse();                                      // u(-x)
    const cvec du = detail::spectral_derivative(uu, h, 1);            // u'(x)
    const cvec w = du.reverse();                                      // u'(-x)
    const cvec w2 = detail::spectral_derivative(uu, h, 2).reverse();  // u''(-x)

    // int_x^{+inf} for the plus family, int_x^{-inf} for the minus family
    auto I = [&](const cvec& f) -> cvec {
        if (side == Side::plus) return detail::cumtrapz_right(f, h);
        return -detail::cumtrapz_left(f, h);
    };

    const cvec uvp = uu.cwiseProduct(v);
    const cvec P = I(uvp);
    const cvec uvP = I(uvp.cwiseProduct(P));
    const cvec uw = I(uu.cwiseProduct(w));
    const cvec uwP = I(uu.cwiseProduct(w).cwiseProduct(P));
    const cvec uw2 = I(uu.cwiseProduct(w2));
    const cvec u2v2 = I(uvp.cwiseProduct(uvp));
    const cvec triple = I(uvp.cwiseProduct(uvP));
    const cvec uv_uw = I(uvp.cwiseProduct(uw));
    const cvec vdu = I(v.cwiseProduct(du));

    AsymptoticCoefficients c{side, {}, {}, {}, {}, {}};
    c.p1.resize(n, 2);
    c.q1.resize(n, 2);
    c.g1.resize(n, 2);
    c.p2.resize(n, 2);
    c.q2.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        c.p1(i, 0) = s * P[i];
        c.p1(i, 1) = -s * v[i];
        c.q1(i, 0) = s * uw[i] + uvP[i];
        c.q1(i, 1) = -s * w[i] - v[i] * P[i];
        c.g1(i, 0) = s * uw2[i] + uwP[i] + u2v2[i] + s * triple[i] + uv_uw[i];
        c.g1(i, 1) = -w[i] * P[i] - s * v[i] * uvP[i] - v[i] * uw[i] - v[i] * v[i] * uu[i] - s * w2[i];
        c.p2(i, 0) = -uu[i];
        c.p2(i, 1) = -s * P[i];
        c.q2(i, 0) = s * uu[i] * P[i] - du[i];
        c.q2(i, 1) = uvP[i] - s * vdu[i];
    }
    return c;
}

struct AsymptoticResidual {
    double x, z;
    double first, second, third;     // first Jost column, third order advisory
    double first_col2, second_col2;  // second column against p2, q2
};

// Residuals of the expansions m1 = e1 + p1/(2iz) + q1/(2iz)^2 + g1/(2iz)^3 + ...
// and m2 = e2 + p2/(2iz) + q2/(2iz)^2 + ... at every station and probe z.
inline std::vector<AsymptoticResidual> asymptotic_consistency_check(const JostField& jost,
                                                                    const AsymptoticCoefficients& c,
                                                                    const std::vector<double>& z_probe)
{
    std::vector<AsymptoticResidual> out;
    for (std::size_t slot = 0; slot < jost.stations.size(); ++slot) {
        const int i = jost.stations[slot];
        for (double zp : z_probe) {
            const int j = jost.spectral.nearest(zp);
            const double z = jost.spectral.z(j);
            const cplx k(0.0, 2.0 * z);
            const Mat2& m = jost.at(c.side, static_cast<int>(slot), j);
            Eigen::Vector2cd d1(m(0, 0) - 1.0, m(1, 0));
            Eigen::Vector2cd d2(m(0, 1), m(1, 1) - 1.0);
            Eigen::Vector2cd p1 = c.p1.row(i).transpose(), q1 = c.q1.row(i).transpose(), g1 = c.g1.row(i).transpose();
            Eigen::Vector2cd p2 = c.p2.row(i).transpose(), q2 = c.q2.row(i).transpose();
            AsymptoticResidual r;
            r.x = jost.space.x(i);
            r.z = z;
            r.first = (k * d1 - p1).norm();
            r.second = (k * k * d1 - k * p1 - q1).norm();
            r.third = (k * k * k * d1 - k * k * p1 - k * q1 - g1).norm();
            r.first_col2 = (k * d2 - p2).norm();
            r.second_col2 = (k * k * d2 - k * p2 - q2).norm();
            out.push_back(r);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scattering coefficients from the Jost determinants

struct ScatteringCoefficients {
    SpectralGrid spectral;
    int sigma;
    double x_ref;
    cvec a, b, c, d;
    double x_audit = std::numeric_limits<double>::quiet_NaN();  // max discrepancy between stations
    double b_integral_gap = std::numeric_limits<double>::quiet_NaN();
};

struct CoefficientsAt {
    cvec a, b, c, d;
};

inline CoefficientsAt coefficients_at_slot(const JostField& jost, int slot)
{
    const int nz = jost.spectral.size();
    const double x = jost.space.x(jost.stations[static_cast<std::size_t>(slot)]);
    CoefficientsAt r{cvec(nz), cvec(nz), cvec(nz), cvec(nz)};
    for (int j = 0; j < nz; ++j) {
        const Mat2& mp = jost.plus(slot, j);
        const Mat2& mm = jost.minus(slot, j);
        const double z = jost.spectral.z(j);
        const cplx e = std::exp(cplx(0.0, 2.0 * z * x));
        r.a[j] = mp(0, 0) * mm(1, 1) - mp(1, 0) * mm(0, 1);               // det[m1+, m2-]
        r.d[j] = mm(0, 0) * mp(1, 1) - mm(1, 0) * mp(0, 1);               // det[m1-, m2+]
        r.b[j] = (mm(0, 0) * mp(1, 0) - mm(1, 0) * mp(0, 0)) * e;         // det[m1-, m1+] e^{2izx}
        r.c[j] = (mp(0, 1) * mm(1, 1) - mp(1, 1) * mm(0, 1)) / e;         // det[m2+, m2-] e^{-2izx}
    }
    return r;
}

struct CoefficientOptions {
    double x_audit_tol = 1e-6;
    bool enforce_audit = true;
};

// a, b, c, d at the station nearest x = 0; every other station is used for
// the x-independence audit.
inline ScatteringCoefficients scattering_coefficients(const JostField& jost, const CoefficientOptions& opt = {})
{
    const int ref_node = jost.space.nearest(0.0);
    const int ref = jost.slot_of(ref_node);
    if (ref < 0) throw AdmissibilityError(Stage::direct, "Jost field lacks the reference station nearest x = 0");
    CoefficientsAt c0 = coefficients_at_slot(jost, ref);
    ScatteringCoefficients out{jost.spectral, jost.sigma, jost.space.x(ref_node), c0.a, c0.b, c0.c, c0.d};

    double audit = 0.0;
    bool any = false;
    for (std::size_t s = 0; s < jost.stations.size(); ++s) {
        if (static_cast<int>(s) == ref) continue;
        CoefficientsAt ck = coefficients_at_slot(jost, static_cast<int>(s));
        audit = std::max({audit, (ck.a - c0.a).cwiseAbs().maxCoeff(), (ck.b - c0.b).cwiseAbs().maxCoeff(),
                          (ck.c - c0.c).cwiseAbs().maxCoeff(), (ck.d - c0.d).cwiseAbs().maxCoeff()});
        any = true;
    }
    if (any) {
        out.x_audit = audit;
        if (opt.enforce_audit && !(audit <= opt.x_audit_tol)) {
            std::ostringstream os;
            os << "inconsistent Jost solutions: determinants vary with x by " << audit << " > " << opt.x_audit_tol;
            throw ValidationError(Stage::direct, os.str());
        }
    }
    if (jost.b_integral.size() == out.b.size()) out.b_integral_gap = (jost.b_integral - out.b).cwiseAbs().maxCoeff();
    return out;
}

// Jost sweep at the audit stations followed by determinant extraction.
inline ScatteringCoefficients forward_coefficients(const SampledPotential& u, const SpectralGrid& spectral,
                                                   const CoefficientOptions& opt = {})
{
    return scattering_coefficients(compute_jost(u, spectral, audit_stations(u.grid())), opt);
}

} // namespace nmkdv

#endif
