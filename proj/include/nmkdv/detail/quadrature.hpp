#ifndef NMKDV_DETAIL_QUADRATURE_HPP
#define NMKDV_DETAIL_QUADRATURE_HPP

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "fft.hpp"

namespace nmkdv::detail {

// composite trapezoid over a uniform grid
template<class Vec>
auto trapz(const Vec& f, double h)
{
    using T = std::decay_t<decltype(f[0])>;
    const long n = static_cast<long>(f.size());
    T s{};
    if (n < 2) return s;
    for (long i = 1; i + 1 < n; ++i) s += f[i];
    s += (f[0] + f[n - 1]) * 0.5;
    return s * h;
}

// F[i] = int_{x_i}^{x_{n-1}} f   (trapezoid, accumulated from the right end)
inline Eigen::VectorXcd cumtrapz_right(const Eigen::VectorXcd& f, double h)
{
    const long n = f.size();
    Eigen::VectorXcd out(n);
    if (n == 0) return out;
    out[n - 1] = 0.0;
    for (long i = n - 2; i >= 0; --i) out[i] = out[i + 1] + 0.5 * h * (f[i] + f[i + 1]);
    return out;
}

// F[i] = int_{x_0}^{x_i} f
inline Eigen::VectorXcd cumtrapz_left(const Eigen::VectorXcd& f, double h)
{
    const long n = f.size();
    Eigen::VectorXcd out(n);
    if (n == 0) return out;
    out[0] = 0.0;
    for (long i = 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * h * (f[i] + f[i - 1]);
    return out;
}

// p-th derivative by Fourier multiplier on the periodized grid; Nyquist bin dropped
inline Eigen::VectorXcd spectral_derivative(const Eigen::VectorXcd& f, double h, int order)
{
    const int n = static_cast<int>(f.size());
    Eigen::VectorXcd out = f;
    if (order == 0 || n < 2) return out;
    const double dk = 2.0 * std::numbers::pi / (n * h);
    apply_multiplier(out.data(), n, [&](int k) {
        if (n % 2 == 0 && k == n / 2) return std::complex<double>(0.0);
        std::complex<double> ik(0.0, dk * bin_frequency(k, n));
        return std::pow(ik, order);
    });
    return out;
}

} // namespace nmkdv::detail

#endif
