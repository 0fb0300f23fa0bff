#ifndef NMKDV_CAUCHY_OPS_HPP
#define NMKDV_CAUCHY_OPS_HPP

#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "core_model.hpp"
#include "detail/fft.hpp"

namespace nmkdv {

enum class Projection { plus = 1, minus = -1 };

// Samples of a scalar function on the spectral grid.
struct BoundaryFunction {
    SpectralGrid spectral;
    cvec values;

    double edge_magnitude() const
    {
        return std::max(std::abs(values[0]), std::abs(values[values.size() - 1]));
    }
};

// Multiplier of P+ on DFT bin k: 1 for positive frequencies, 0 for negative,
// 1/2 on the zero bin and on the Nyquist bin. P- = P+ - 1.
inline double plemelj_multiplier(int k, int n, Projection sign)
{
    double plus;
    if (k == 0 || (n % 2 == 0 && 2 * k == n))
        plus = 0.5;
    else
        plus = detail::bin_frequency(k, n) > 0 ? 1.0 : 0.0;
    return sign == Projection::plus ? plus : plus - 1.0;
}

inline void plemelj_inplace(cplx* data, int n, Projection sign)
{
    detail::apply_multiplier(data, n, [&](int k) { return plemelj_multiplier(k, n, sign); });
}

inline cvec plemelj_project(const cvec& f, Projection sign)
{
    cvec out = f;
    plemelj_inplace(out.data(), static_cast<int>(out.size()), sign);
    return out;
}

inline BoundaryFunction plemelj_project(const BoundaryFunction& f, Projection sign)
{
    return {f.spectral, plemelj_project(f.values, sign)};
}

// P- as an explicit circulant matrix, built once per grid size and shared.
inline std::shared_ptr<const Eigen::MatrixXcd> dense_minus_projector(int n)
{
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const Eigen::MatrixXcd>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    cvec col = cvec::Zero(n);
    col[0] = 1.0;
    plemelj_inplace(col.data(), n, Projection::minus);
    auto m = std::make_shared<Eigen::MatrixXcd>(n, n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) (*m)(j, k) = col[(j - k + n) % n];
    cache.emplace(n, m);
    return m;
}

// (1/2 pi i) int f(s)/(s - z0) ds by the trapezoid rule.
inline cplx cauchy_offaxis(const BoundaryFunction& f, cplx z0)
{
    const double dz = f.spectral.spacing();
    if (std::abs(z0.imag()) < dz) {
        std::ostringstream os;
        os << "Cauchy evaluation point " << z0 << " lies within one grid spacing of the real axis";
        throw AdmissibilityError(Stage::cauchy, os.str());
    }
    cvec g(f.values.size());
    for (long j = 0; j < g.size(); ++j) g[j] = f.values[j] / (f.spectral.z(static_cast<int>(j)) - z0);
    return detail::trapz(g, dz) / (2.0 * std::numbers::pi * I_unit);
}

// lim z C(f)(z) = -(1/2 pi i) int f
inline cplx first_moment(const BoundaryFunction& f)
{
    return -detail::trapz(f.values, f.spectral.spacing()) / (2.0 * std::numbers::pi * I_unit);
}

} // namespace nmkdv

#endif
