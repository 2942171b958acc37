#pragma once

// Truncated Jacobi spectral data and the discrete approximating measures.
//
// Phases of the couplings c_n never reach the measure (they amount to a
// unimodular diagonal conjugation), so the N-truncation is the real symmetric
// tridiagonal matrix with diagonal d_0..d_{N-1} and off-diagonal
// |c_0|..|c_{N-2}|.  Its eigenvalues transported to the carrier line are the
// nodes, and the squared first eigenvector components are the weights, of a
// discrete measure against which P_0..P_{N-1} are exactly orthonormal and
// which integrates polynomials of degree <= 2N - 1 like the limiting
// measure(s).
//
// The eigensolver is self-contained: implicit-shift QL for the eigenvalues,
// then eigenvectors in the analytically exact form
//     v(lambda) = (p_0(lambda), ..., p_{N-1}(lambda)) / norm
// where p_m are the orthonormal polynomials of the truncation.  This keeps
// tiny first components relatively accurate (edge weights decay like
// exp(-const * N); rotation-accumulated vectors would only get them to
// absolute precision).  The forward recurrence cannot represent eigenvectors
// that decay away from index 0 -- localized modes of irregular tables -- so
// any vector it loses is recomputed by partial-pivoted inverse iteration.
// Every returned pair, whichever route produced it, is certified a
// posteriori: ||T v - lambda v||_inf <= tol * ||T||_inf, or eig_error.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyrec/recurrence.hpp"
#include "polyrec/three_term.hpp"

namespace polyrec {

// Eigensolver breakdown or a certificate violation.
class eig_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> offdiag; // size diag.size() - 1, strictly positive
};

inline Tridiagonal truncate_jacobi(const ThreeTermForm& f, std::size_t n) {
    validate(f);
    if (n == 0)
        throw std::invalid_argument("truncation size must be positive");
    if (n > f.size())
        throw insufficient_table("truncation size " + std::to_string(n) +
                                 " exceeds the stored form size " + std::to_string(f.size()));
    Tridiagonal t;
    t.diag.assign(f.d.begin(), f.d.begin() + static_cast<std::ptrdiff_t>(n));
    t.offdiag.resize(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k)
        t.offdiag[k] = std::abs(f.c[k]);
    return t;
}

namespace detail {

// Implicit-shift QL, eigenvalues only; d and e are destroyed, d receives the
// (unordered) eigenvalues.  Budget is per eigenvalue.
inline void ql_eigenvalues(std::vector<double>& d, std::vector<double>& e, int max_sweeps) {
    const int n = static_cast<int>(d.size());
    e.resize(d.size(), 0.0); // sentinel slot: rotations may touch e[n-1]
    const double eps = std::numeric_limits<double>::epsilon();
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd)
                    break;
            }
            if (m != l) {
                if (iter++ == max_sweeps)
                    throw eig_error("eigenvalue " + std::to_string(l) +
                                    " did not converge after " + std::to_string(max_sweeps) +
                                    " implicit-shift sweeps");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) { // negligible rotation: split early
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && i >= l)
                    continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

// Scale v to unit Euclidean length (two-pass, overflow-safe).
inline void unit_normalize(std::vector<double>& v) {
    double vmax = 0.0;
    for (double x : v)
        vmax = std::max(vmax, std::abs(x));
    double ss = 0.0;
    for (double x : v)
        ss += (x / vmax) * (x / vmax);
    const double norm = vmax * std::sqrt(ss);
    for (double& x : v)
        x /= norm;
}

// ||T v - lambda v||_inf.
inline double eigen_residual(const Tridiagonal& t, double lam, const std::vector<double>& v) {
    const std::size_t n = t.diag.size();
    double resid = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = (t.diag[i] - lam) * v[i];
        if (i > 0)
            r += t.offdiag[i - 1] * v[i - 1];
        if (i + 1 < n)
            r += t.offdiag[i] * v[i + 1];
        resid = std::max(resid, std::abs(r));
    }
    return resid;
}

// Overwrite x with the solution of (T - lam I) y = x, by Gaussian
// elimination with partial pivoting; row swaps add a second superdiagonal of
// fill-in.  An exact zero
// pivot (lam hitting an eigenvalue of a leading block exactly) is replaced by
// a negligible value: that only inflates the solution along the wanted
// direction, and the caller normalizes the scale away.
inline void shifted_solve(const Tridiagonal& t, double lam, std::vector<double>& x) {
    const std::size_t n = t.diag.size();
    constexpr double tiny =
        std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    std::vector<double> piv(n), sup1(n, 0.0), sup2(n, 0.0);
    double alpha = t.diag[0] - lam; // running eliminated row: alpha x_i + beta x_{i+1}
    double beta = n > 1 ? t.offdiag[0] : 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double sub = t.offdiag[i];        // row i+1: sub x_i + nxd x_{i+1} + nxe x_{i+2}
        const double nxd = t.diag[i + 1] - lam;
        const double nxe = i + 2 < n ? t.offdiag[i + 1] : 0.0;
        if (std::abs(alpha) >= std::abs(sub)) {
            piv[i] = alpha != 0.0 ? alpha : tiny;
            sup1[i] = beta;
            const double m = sub / piv[i];
            x[i + 1] -= m * x[i];
            alpha = nxd - m * beta;
            beta = nxe;
        } else {
            const double m = alpha / sub; // |m| < 1
            piv[i] = sub;
            sup1[i] = nxd;
            sup2[i] = nxe;
            std::swap(x[i], x[i + 1]);
            x[i + 1] -= m * x[i];
            alpha = beta - m * nxd;
            beta = -m * nxe;
        }
    }
    piv[n - 1] = alpha != 0.0 ? alpha : tiny;
    x[n - 1] /= piv[n - 1];
    if (n >= 2)
        x[n - 2] = (x[n - 2] - sup1[n - 2] * x[n - 1]) / piv[n - 2];
    if (n >= 3)
        for (std::size_t i = n - 2; i-- > 0;)
            x[i] = (x[i] - sup1[i] * x[i + 1] - sup2[i] * x[i + 2]) / piv[i];
}

// Inverse iteration for one eigenpair.  The computed eigenvalue is accurate
// to a few ulps of ||T||, so each solve amplifies the wanted direction by
// roughly 1 / (eps * ||T||); two passes make the result independent of how
// much of that direction the constant start vector contains.
inline void inverse_iteration(const Tridiagonal& t, double lam, std::vector<double>& v) {
    v.assign(t.diag.size(), 1.0);
    for (int pass = 0; pass < 2; ++pass) {
        shifted_solve(t, lam, v);
        unit_normalize(v);
    }
    if (v[0] < 0.0)
        for (double& x : v)
            x = -x;
}

} // namespace detail

struct TridiagonalEigen {
    std::vector<double> values;           // ascending, numerically simple
    std::vector<double> first_components; // of unit eigenvectors, all positive
};

inline TridiagonalEigen eig_tridiagonal(const Tridiagonal& t, double tol = 1e-12,
                                        int max_sweeps = 40) {
    const std::size_t n = t.diag.size();
    if (n == 0)
        throw std::invalid_argument("empty tridiagonal matrix");
    if (t.offdiag.size() + 1 != n)
        throw std::invalid_argument("off-diagonal size must be diagonal size - 1");
    for (double e : t.offdiag)
        if (!(e > 0.0))
            throw std::invalid_argument("off-diagonal entries must be strictly positive");

    std::vector<double> d = t.diag;
    std::vector<double> e = t.offdiag;
    detail::ql_eigenvalues(d, e, max_sweeps);
    std::sort(d.begin(), d.end());
    for (std::size_t k = 0; k + 1 < n; ++k)
        if (!(d[k] < d[k + 1]))
            throw eig_error("eigenvalues " + std::to_string(k) + " and " +
                            std::to_string(k + 1) + " are not numerically simple");

    double norm_t = 0.0; // row-sum norm of the exact input
    for (std::size_t i = 0; i < n; ++i) {
        double row = std::abs(t.diag[i]);
        if (i > 0)
            row += t.offdiag[i - 1];
        if (i + 1 < n)
            row += t.offdiag[i];
        norm_t = std::max(norm_t, row);
    }

    TridiagonalEigen out;
    out.values = std::move(d);
    out.first_components.resize(n);
    const double bound = tol * std::max(norm_t, 1e-300);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = out.values[k];
        // Orthonormal-polynomial eigenvector; rescaling keeps it finite, the
        // normalization cancels any scale.
        v[0] = 1.0;
        for (std::size_t m = 0; m + 1 < n; ++m) {
            double next = (lam - t.diag[m]) * v[m];
            if (m > 0)
                next -= t.offdiag[m - 1] * v[m - 1];
            next /= t.offdiag[m];
            v[m + 1] = next;
            if (std::abs(next) > 1e150) {
                const double s = 1.0 / std::abs(next);
                for (std::size_t j = 0; j <= m + 1; ++j)
                    v[j] *= s;
            }
        }
        detail::unit_normalize(v);
        double resid = detail::eigen_residual(t, lam, v);
        if (!(resid <= bound)) {
            // The forward recurrence lost this vector (it decays away from
            // index 0); recompute it stably and certify the result instead.
            detail::inverse_iteration(t, lam, v);
            resid = detail::eigen_residual(t, lam, v);
        }
        if (!(resid <= bound))
            throw eig_error("eigenpair " + std::to_string(k) + " fails the residual bound: " +
                            std::to_string(resid) + " > tol * ||T||");
        out.first_components[k] = v[0];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Discrete measures.

struct DiscreteMeasure {
    std::vector<cplx> nodes;     // on the carrier line b + a * R
    std::vector<double> weights; // positive, summing to 1
    cplx line_a{1.0, 0.0};
    cplx line_b{0.0, 0.0};

    std::size_t size() const { return nodes.size(); }
};

// The n-point measure against which P_0..P_{n-1} are exactly orthonormal.
inline DiscreteMeasure gauss_measure(const ThreeTermForm& f, std::size_t n,
                                     double tol = 1e-12) {
    const Tridiagonal t = truncate_jacobi(f, n);
    const TridiagonalEigen eig = eig_tridiagonal(t, tol);
    DiscreteMeasure mu;
    mu.line_a = f.a;
    mu.line_b = f.b;
    mu.nodes.resize(n);
    mu.weights.resize(n);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mu.nodes[k] = f.b + f.a * eig.values[k];
        mu.weights[k] = eig.first_components[k] * eig.first_components[k];
        sum += mu.weights[k];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw eig_error("quadrature weights sum to " + std::to_string(sum) +
                        ", expected 1 (eigenvector breakdown)");
    return mu;
}

// Max |G[m][n] - delta[m][n]| over m, n < m_count for the Gram matrix
//   G[m][n] = sum_k w_k conj(P_m(x_k)) P_n(x_k)
// of the table's polynomials against the measure.  For the n-point measure of
// the table's own form this is quadrature-exact while m + n <= 2n - 1, so any
// m_count <= measure size must come out at rounding level.
inline double verify_orthonormality(const RecurrenceTable& t, const DiscreteMeasure& mu,
                                    std::size_t m_count) {
    if (m_count == 0)
        throw std::invalid_argument("Gram size must be positive");
    if (m_count > mu.size())
        throw std::invalid_argument("Gram size " + std::to_string(m_count) +
                                    " exceeds the quadrature-exact range of " +
                                    std::to_string(mu.size()) + " nodes");
    std::vector<std::vector<cplx>> vals(mu.size());
    for (std::size_t k = 0; k < mu.size(); ++k)
        vals[k] = eval_sequence(t, mu.nodes[k], m_count);
    double worst = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
        for (std::size_t n = 0; n < m_count; ++n) {
            cplx g{0.0, 0.0};
            for (std::size_t k = 0; k < mu.size(); ++k)
                g += mu.weights[k] * std::conj(vals[k][m]) * vals[k][n];
            if (m == n)
                g -= 1.0;
            worst = std::max(worst, std::abs(g));
        }
    }
    return worst;
}

// Moments m_j = sum_k w_k x_k^j for j = 0..j_max.
inline std::vector<cplx> moments(const DiscreteMeasure& mu, std::size_t j_max) {
    std::vector<cplx> m(j_max + 1, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < mu.size(); ++k) {
        cplx p{1.0, 0.0};
        for (std::size_t j = 0; j <= j_max; ++j) {
            m[j] += mu.weights[k] * p;
            p *= mu.nodes[k];
        }
    }
    return m;
}

} // namespace polyrec
