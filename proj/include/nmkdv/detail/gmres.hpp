#ifndef NMKDV_DETAIL_GMRES_HPP
#define NMKDV_DETAIL_GMRES_HPP

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace nmkdv::detail {

struct GmresResult {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

// Restarted GMRES(m) for a matrix-free operator apply(in, out).
// Modified Gram-Schmidt with Givens rotations; x holds the initial guess.
template<class Apply>
GmresResult gmres(Apply&& apply, const Eigen::VectorXcd& b, Eigen::VectorXcd& x, double tol, int max_iter, int restart)
{
    using cplx = std::complex<double>;
    using Vec = Eigen::VectorXcd;
    GmresResult res;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero(b.size());
        res.converged = true;
        return res;
    }
    const long n = b.size();
    std::vector<Vec> V(static_cast<std::size_t>(restart + 1), Vec(n));
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(restart + 1, restart);
    std::vector<cplx> cs(static_cast<std::size_t>(restart)), sn(static_cast<std::size_t>(restart));
    Vec g(restart + 1), w(n), r(n);

    while (res.iterations < max_iter) {
        apply(x, r);
        r = b - r;
        double beta = r.norm();
        res.relative_residual = beta / bnorm;
        if (res.relative_residual <= tol) {
            res.converged = true;
            return res;
        }
        V[0] = r / beta;
        g.setZero();
        g[0] = beta;
        int k = 0;
        for (; k < restart && res.iterations < max_iter; ++k) {
            ++res.iterations;
            apply(V[static_cast<std::size_t>(k)], w);
            for (int i = 0; i <= k; ++i) {
                H(i, k) = V[static_cast<std::size_t>(i)].dot(w);
                w -= H(i, k) * V[static_cast<std::size_t>(i)];
            }
            const double hn = w.norm();
            H(k + 1, k) = hn;
            if (hn > 0.0) V[static_cast<std::size_t>(k + 1)] = w / hn;
            for (int i = 0; i < k; ++i) {
                cplx t = std::conj(cs[i]) * H(i, k) + std::conj(sn[i]) * H(i + 1, k);
                H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
                H(i, k) = t;
            }
            const cplx hkk = H(k, k);
            const double denom = std::sqrt(std::norm(hkk) + hn * hn);
            if (denom == 0.0) {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = hkk / denom;
                sn[k] = hn / denom;
            }
            H(k, k) = std::conj(cs[k]) * hkk + std::conj(sn[k]) * hn;
            H(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = std::conj(cs[k]) * g[k];
            res.relative_residual = std::abs(g[k + 1]) / bnorm;
            if (res.relative_residual <= tol || hn == 0.0) {
                ++k;
                break;
            }
        }
        // back substitution on the k x k triangle
        Vec y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
        for (int i = 0; i < k; ++i) x += y[i] * V[static_cast<std::size_t>(i)];
        if (res.relative_residual <= tol) {
            // confirm with a true residual
            apply(x, r);
            res.relative_residual = (b - r).norm() / bnorm;
            if (res.relative_residual <= 10.0 * tol) {
                res.converged = true;
                return res;
            }
        }
    }
    return res;
}

} // namespace nmkdv::detail

#endif
