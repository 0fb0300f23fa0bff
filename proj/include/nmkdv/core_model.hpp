#ifndef NMKDV_CORE_MODEL_HPP
#define NMKDV_CORE_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "detail/quadrature.hpp"
#include "errors.hpp"

namespace nmkdv {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;

inline constexpr cplx I_unit{0.0, 1.0};

// Uniform grid on [-L, L] with x_i = -L + i h.
class SpaceGrid {
public:
    SpaceGrid(double half_width, int n_points) : L_(half_width), n_(n_points)
    {
        if (!(half_width > 0.0) || !std::isfinite(half_width) || n_points < 2)
            throw AdmissibilityError(Stage::model, "space grid needs L > 0 and at least 2 points");
    }

    // Grid whose cell boundaries (x_i +- h/2) fall on integer multiples of h.
    // Needs even n; used so that jumps of a piecewise-constant potential sit
    // on cell edges.
    static SpaceGrid cell_aligned(double spacing, int n_points)
    {
        if (n_points % 2 != 0)
            throw AdmissibilityError(Stage::model, "cell-aligned grid needs an even point count");
        return SpaceGrid(0.5 * (n_points - 1) * spacing, n_points);
    }

    double half_width() const { return L_; }
    int size() const { return n_; }
    double spacing() const { return 2.0 * L_ / (n_ - 1); }
    double x(int i) const { return -L_ + i * spacing(); }
    int mirror(int i) const { return n_ - 1 - i; }

    // nearest node; ties go to the larger index
    int nearest(double xv) const
    {
        double s = (xv + L_) / spacing();
        int i = static_cast<int>(std::floor(s + 0.5));
        return std::clamp(i, 0, n_ - 1);
    }

    rvec points() const
    {
        rvec p(n_);
        for (int i = 0; i < n_; ++i) p[i] = x(i);
        return p;
    }

private:
    double L_;
    int n_;
};

// Uniform grid on [-Z, Z]; closed under z -> -z via mirror().
class SpectralGrid {
public:
    SpectralGrid(double half_width, int n_points) : Z_(half_width), n_(n_points)
    {
        if (!(half_width > 0.0) || !std::isfinite(half_width) || n_points < 2)
            throw AdmissibilityError(Stage::model, "spectral grid needs Z > 0 and at least 2 points");
    }

    double half_width() const { return Z_; }
    int size() const { return n_; }
    double spacing() const { return 2.0 * Z_ / (n_ - 1); }
    double z(int j) const { return -Z_ + j * spacing(); }
    int mirror(int j) const { return n_ - 1 - j; }

    int nearest(double zv) const
    {
        int j = static_cast<int>(std::floor((zv + Z_) / spacing() + 0.5));
        return std::clamp(j, 0, n_ - 1);
    }

    rvec points() const
    {
        rvec p(n_);
        for (int j = 0; j < n_; ++j) p[j] = z(j);
        return p;
    }

    bool operator==(const SpectralGrid& o) const { return Z_ == o.Z_ && n_ == o.n_; }

private:
    double Z_;
    int n_;
};

// Complex samples of u on a SpaceGrid together with the sign sigma.
class SampledPotential {
public:
    SampledPotential(SpaceGrid grid, cvec values, int sigma)
    : grid_(grid), values_(std::move(values)), sigma_(sigma)
    {
        if (sigma != 1 && sigma != -1)
            throw AdmissibilityError(Stage::model, "sigma must be +1 or -1");
        if (values_.size() != grid_.size())
            throw AdmissibilityError(Stage::model, "sample count does not match the grid");
        for (long i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag())) {
                std::ostringstream os;
                os << "non-finite potential sample at index " << i << " (x = " << grid_.x(static_cast<int>(i)) << ")";
                throw AdmissibilityError(Stage::model, os.str());
            }
        }
    }

    template<class F>
    static SampledPotential from_function(SpaceGrid grid, int sigma, F&& f)
    {
        cvec v(grid.size());
        for (int i = 0; i < grid.size(); ++i) v[i] = f(grid.x(i));
        return SampledPotential(grid, std::move(v), sigma);
    }

    const SpaceGrid& grid() const { return grid_; }
    const cvec& values() const { return values_; }
    cplx operator[](int i) const { return values_[i]; }
    int sigma() const { return sigma_; }

    double tail_magnitude() const
    {
        return std::max(std::abs(values_[0]), std::abs(values_[values_.size() - 1]));
    }

    // throws when |u(+-L)| exceeds tol
    void require_decay(double tol) const
    {
        if (tail_magnitude() > tol) {
            std::ostringstream os;
            os << "potential does not decay at the grid edge: |u(+-L)| = " << tail_magnitude()
               << " > tail_tol = " << tol;
            throw AdmissibilityError(Stage::model, os.str());
        }
    }

private:
    SpaceGrid grid_;
    cvec values_;
    int sigma_;
};

// A exp(-((x - c)/w)^2)
inline SampledPotential gaussian_potential(const SpaceGrid& g, int sigma, cplx amplitude, double width, double center = 0.0)
{
    return SampledPotential::from_function(g, sigma, [&](double x) {
        double s = (x - center) / width;
        return amplitude * std::exp(-s * s);
    });
}

// A on (0, ell); nodes landing exactly on 0 or ell get A/2
inline SampledPotential box_potential(const SpaceGrid& g, int sigma, cplx amplitude, double ell)
{
    return SampledPotential::from_function(g, sigma, [&](double x) -> cplx {
        if (x > 0.0 && x < ell) return amplitude;
        if (x == 0.0 || x == ell) return 0.5 * amplitude;
        return 0.0;
    });
}

// v_i = u(-x_i): exact index reversal
inline SampledPotential reflect_potential(const SampledPotential& u)
{
    return SampledPotential(u.grid(), u.values().reverse().eval(), u.sigma());
}

struct NormReport {
    double l1 = 0, l2 = 0, l2_1 = 0, l2_3 = 0, h1 = 0, h11 = 0, h3 = 0;
    bool flag_no_zeros = true;     // l1 e^{2 l1} < 1
    bool flag_r_below_one = true;  // 1 - l1 (1 + 2 e^{2 l1}) > 0
};

inline bool small_norm_no_zeros(double l1) { return l1 * std::exp(2.0 * l1) < 1.0; }
inline bool small_norm_r_below_one(double l1) { return 1.0 - l1 * (1.0 + 2.0 * std::exp(2.0 * l1)) > 0.0; }

inline double l1_norm(const SampledPotential& u)
{
    return detail::trapz(u.values().cwiseAbs().eval(), u.grid().spacing());
}

inline NormReport compute_norms(const SampledPotential& u)
{
    const double h = u.grid().spacing();
    const rvec x = u.grid().points();
    const cvec& f = u.values();
    const cvec d1 = detail::spectral_derivative(f, h, 1);
    const cvec d2 = detail::spectral_derivative(f, h, 2);
    const cvec d3 = detail::spectral_derivative(f, h, 3);

    const rvec w1 = (1.0 + x.array().square()).matrix();  // <x>^2
    const rvec w3 = w1.array().cube().matrix();            // <x>^6
    const rvec a0 = f.cwiseAbs2(), a1 = d1.cwiseAbs2(), a2 = d2.cwiseAbs2(), a3 = d3.cwiseAbs2();
    auto tr = [&](const rvec& g) { return detail::trapz(g, h); };

    NormReport r;
    r.l1 = l1_norm(u);
    r.l2 = std::sqrt(tr(a0));
    r.l2_1 = std::sqrt(tr(w1.cwiseProduct(a0)));
    r.l2_3 = std::sqrt(tr(w3.cwiseProduct(a0)));
    r.h1 = std::sqrt(tr(a0) + tr(a1));
    r.h11 = std::sqrt(tr(w1.cwiseProduct(a0)) + tr(w1.cwiseProduct(a1)));
    r.h3 = std::sqrt(tr(a0) + tr(a1) + tr(a2) + tr(a3));
    r.flag_no_zeros = small_norm_no_zeros(r.l1);
    r.flag_r_below_one = small_norm_r_below_one(r.l1);
    return r;
}

} // namespace nmkdv

#endif
