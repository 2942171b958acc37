#pragma once

// Banded recurrence tables for graded polynomial sequences.
//
// A table with R rows describes polynomials P_0, ..., P_R with deg P_n = n,
// P_0 = 1, through the relation
//
//     z * P_n(z) = sum_{i = first_n}^{n+1} coeff[i][n] * P_i(z),
//
// one stored row per column n of the associated Hessenberg operator.  The
// subdiagonal entry coeff[n+1][n] is required to be nonzero, so the relation
// determines P_{n+1} from its predecessors.  Everything downstream (band
// analysis, commutator checks, three-term decomposition) works on this type.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polyrec {

using cplx = std::complex<double>;

// Invalid or inconsistent table data.
class table_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A structurally valid table that is too short for the requested operation.
class insufficient_table : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline bool is_finite(cplx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

} // namespace detail

// One stored row: the coefficients coeff[first..n+1] of column n.
struct RecurrenceRow {
    int first = 0;
    std::vector<cplx> coeffs;
};

class RecurrenceTable {
public:
    // Validates and normalizes the rows: exact leading zeros are trimmed so
    // that `first` always points at a nonzero coefficient (or at the single
    // superdiagonal entry).  Throws table_error with the offending row index
    // on malformed input.
    explicit RecurrenceTable(std::vector<RecurrenceRow> rows) : rows_(std::move(rows)) {
        if (rows_.empty())
            throw table_error("recurrence table has no rows");
        for (std::size_t n = 0; n < rows_.size(); ++n) {
            RecurrenceRow& row = rows_[n];
            if (row.coeffs.empty())
                throw table_error("row " + std::to_string(n) + ": no coefficients");
            if (row.first < 0)
                throw table_error("row " + std::to_string(n) + ": negative first index");
            const std::size_t top = row.first + row.coeffs.size() - 1;
            if (top != n + 1)
                throw table_error("row " + std::to_string(n) + ": coefficients end at index " +
                                  std::to_string(top) + ", expected " + std::to_string(n + 1));
            for (const cplx& v : row.coeffs)
                if (!detail::is_finite(v))
                    throw table_error("row " + std::to_string(n) + ": non-finite coefficient");
            while (row.coeffs.size() > 1 && row.coeffs.front() == cplx(0.0, 0.0)) {
                row.coeffs.erase(row.coeffs.begin());
                ++row.first;
            }
            if (row.coeffs.back() == cplx(0.0, 0.0))
                throw table_error("row " + std::to_string(n) +
                                  ": vanishing subdiagonal coefficient");
        }
    }

    std::size_t num_rows() const { return rows_.size(); }

    const RecurrenceRow& row(std::size_t n) const {
        if (n >= rows_.size())
            throw insufficient_table("row " + std::to_string(n) + " requested, table has " +
                                     std::to_string(rows_.size()) + " rows");
        return rows_[n];
    }

    // Index of the first stored (nonzero) coefficient of column n.
    int first_index(std::size_t n) const { return row(n).first; }

    // Operator entry coeff[i][n]; zero outside the stored band of column n.
    cplx entry(std::size_t i, std::size_t n) const {
        const RecurrenceRow& r = row(n);
        if (i < static_cast<std::size_t>(r.first) || i > n + 1)
            return {0.0, 0.0};
        return r.coeffs[i - r.first];
    }

    // The subdiagonal coefficient coeff[n+1][n] (never zero).
    cplx subdiagonal(std::size_t n) const { return row(n).coeffs.back(); }

    // Longest stored row, i.e. the observed band width.
    std::size_t max_row_length() const {
        std::size_t w = 0;
        for (const RecurrenceRow& r : rows_)
            w = std::max(w, r.coeffs.size());
        return w;
    }

    const std::vector<RecurrenceRow>& rows() const { return rows_; }

private:
    std::vector<RecurrenceRow> rows_;
};

// ---------------------------------------------------------------------------
// Coefficient vectors over the basis (P_n).

// A finitely supported coefficient vector v = sum v_n P_n.  Trailing exact
// zeros are trimmed on construction, so degree() is well defined; the zero
// vector has degree -1.
class BasisVector {
public:
    BasisVector() = default;

    explicit BasisVector(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {
        for (const cplx& v : c_)
            if (!detail::is_finite(v))
                throw std::invalid_argument("non-finite coefficient in basis vector");
        trim();
    }

    static BasisVector unit(std::size_t k) {
        std::vector<cplx> c(k + 1, cplx(0.0, 0.0));
        c.back() = 1.0;
        return BasisVector(std::move(c));
    }

    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    std::size_t size() const { return c_.size(); }

    cplx coeff(std::size_t i) const { return i < c_.size() ? c_[i] : cplx(0.0, 0.0); }

    std::span<const cplx> coeffs() const { return c_; }

    friend bool operator==(const BasisVector&, const BasisVector&) = default;

private:
    void trim() {
        while (!c_.empty() && c_.back() == cplx(0.0, 0.0))
            c_.pop_back();
    }

    std::vector<cplx> c_;
};

// Coefficient inner product, conjugate-linear in the first argument.  When the
// basis is orthonormal w.r.t. some measure this is the L^2 pairing.
inline cplx inner_product(const BasisVector& u, const BasisVector& v) {
    cplx s{0.0, 0.0};
    const std::size_t m = std::min(u.size(), v.size());
    for (std::size_t i = 0; i < m; ++i)
        s += std::conj(u.coeff(i)) * v.coeff(i);
    return s;
}

inline bool approx_equal(const BasisVector& u, const BasisVector& v, double tol) {
    const std::size_t m = std::max(u.size(), v.size());
    for (std::size_t i = 0; i < m; ++i)
        if (std::abs(u.coeff(i) - v.coeff(i)) > tol)
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// Band structure.

struct BandProfile {
    // first_nonzero[n] = first stored index of column n (= first_index).
    std::vector<int> first_nonzero;
    // last_column[k] = largest column n with a nonzero entry in operator row k,
    // absent when row k holds no nonzero within the stored table.  Rows
    // 0..num_rows are covered (column n reaches row n+1).
    std::vector<std::optional<int>> last_column;
    // Longest stored row.
    std::size_t max_length = 0;
    // Whether the observed band is narrow enough for truncation-safe
    // commutator analysis: 2*max_length <= num_rows + 2.  This is a statement
    // about the stored rows only; behavior beyond them is assumed, not
    // certified.
    bool band_limited = false;
};

inline BandProfile band_profile(const RecurrenceTable& t) {
    const std::size_t R = t.num_rows();
    BandProfile p;
    p.first_nonzero.resize(R);
    p.last_column.assign(R + 1, std::nullopt);
    for (std::size_t n = 0; n < R; ++n) {
        const RecurrenceRow& row = t.rows()[n];
        p.first_nonzero[n] = row.first;
        p.max_length = std::max(p.max_length, row.coeffs.size());
        for (std::size_t j = 0; j < row.coeffs.size(); ++j)
            if (row.coeffs[j] != cplx(0.0, 0.0))
                p.last_column[row.first + j] = static_cast<int>(n);
    }
    p.band_limited = 2 * p.max_length <= R + 2;
    return p;
}

// Largest polynomial degree on which the adjoint action below is fully
// determined by the stored rows (may be negative for wide tables): unstored
// columns n >= num_rows reach down to index n + 1 - (w - 1) at worst, so
// inputs of degree <= num_rows + 1 - w cannot couple to them.
inline int adjoint_safe_degree(const RecurrenceTable& t) {
    return static_cast<int>(t.num_rows()) + 1 - static_cast<int>(t.max_row_length());
}

// ---------------------------------------------------------------------------
// Operator actions.

// Coefficients of z * v(z) over the basis.  Needs one stored row per nonzero
// input coefficient: deg(v) + 1 <= num_rows.
inline BasisVector multiply_by_z(const RecurrenceTable& t, const BasisVector& v) {
    if (v.is_zero())
        return {};
    const int deg = v.degree();
    if (static_cast<std::size_t>(deg) + 1 > t.num_rows())
        throw insufficient_table("multiply_by_z needs " + std::to_string(deg + 1) +
                                 " rows, table has " + std::to_string(t.num_rows()));
    std::vector<cplx> out(static_cast<std::size_t>(deg) + 2, cplx(0.0, 0.0));
    for (int n = 0; n <= deg; ++n) {
        const cplx vn = v.coeff(n);
        if (vn == cplx(0.0, 0.0))
            continue;
        const RecurrenceRow& row = t.rows()[n];
        for (std::size_t j = 0; j < row.coeffs.size(); ++j)
            out[row.first + j] += row.coeffs[j] * vn;
    }
    return BasisVector(std::move(out));
}

// Adjoint action: (D* v)_m = sum_n conj(coeff[n][m]) v_n, reading stored row m
// directly.  `safe_limit` is the caller's declared bound on input degrees; it
// must not exceed adjoint_safe_degree, and deg(v) must not exceed it.  Within
// that region the result is exact for any extension of the table whose
// unstored rows respect the observed band width.
inline BasisVector multiply_by_z_adjoint(const RecurrenceTable& t, const BasisVector& v,
                                         int safe_limit) {
    const int bound = adjoint_safe_degree(t);
    if (safe_limit > bound)
        throw insufficient_table("adjoint safe limit " + std::to_string(safe_limit) +
                                 " exceeds " + std::to_string(bound) +
                                 " determined by the stored band");
    if (v.degree() > safe_limit)
        throw std::invalid_argument("input degree " + std::to_string(v.degree()) +
                                    " exceeds declared safe limit " +
                                    std::to_string(safe_limit));
    if (v.is_zero())
        return {};
    const int deg = v.degree();
    std::vector<cplx> out(t.num_rows(), cplx(0.0, 0.0));
    for (std::size_t m = 0; m < t.num_rows(); ++m) {
        const RecurrenceRow& row = t.rows()[m];
        cplx s{0.0, 0.0};
        const int hi = std::min<int>(deg, static_cast<int>(m) + 1);
        for (int n = row.first; n <= hi; ++n)
            s += std::conj(row.coeffs[n - row.first]) * v.coeff(n);
        out[m] = s;
    }
    return BasisVector(std::move(out));
}

// ---------------------------------------------------------------------------
// Evaluation.

// Values P_0(z), ..., P_{count-1}(z); needs count - 1 rows.
inline std::vector<cplx> eval_sequence(const RecurrenceTable& t, cplx z, std::size_t count) {
    if (count == 0)
        return {};
    if (count > t.num_rows() + 1)
        throw insufficient_table("eval_sequence of " + std::to_string(count) +
                                 " values needs " + std::to_string(count - 1) +
                                 " rows, table has " + std::to_string(t.num_rows()));
    std::vector<cplx> p(count);
    p[0] = 1.0;
    for (std::size_t n = 0; n + 1 < count; ++n) {
        const RecurrenceRow& row = t.rows()[n];
        //  coeff[n+1][n] P_{n+1} = z P_n - sum_{i<n+1} coeff[i][n] P_i
        cplx acc = z * p[n];
        for (std::size_t j = 0; j + 1 < row.coeffs.size(); ++j)
            acc -= row.coeffs[j] * p[row.first + j];
        p[n + 1] = acc / row.coeffs.back();
    }
    return p;
}

// Monomial coefficients of P_n (length n + 1, leading entry nonzero).
inline std::vector<cplx> monomial_coefficients(const RecurrenceTable& t, std::size_t n) {
    if (n > t.num_rows())
        throw insufficient_table("monomial_coefficients of P_" + std::to_string(n) +
                                 " needs " + std::to_string(n) + " rows, table has " +
                                 std::to_string(t.num_rows()));
    // poly[k] = monomial coefficients of P_k, built by the same elimination as
    // eval_sequence but on coefficient vectors.
    std::vector<std::vector<cplx>> poly(n + 1);
    poly[0] = {cplx(1.0, 0.0)};
    for (std::size_t k = 0; k < n; ++k) {
        const RecurrenceRow& row = t.rows()[k];
        std::vector<cplx> acc(k + 2, cplx(0.0, 0.0));
        for (std::size_t j = 0; j <= k; ++j)
            acc[j + 1] = poly[k][j]; // z * P_k
        for (std::size_t j = 0; j + 1 < row.coeffs.size(); ++j) {
            const std::size_t i = row.first + j;
            for (std::size_t m = 0; m < poly[i].size(); ++m)
                acc[m] -= row.coeffs[j] * poly[i][m];
        }
        const cplx lead = row.coeffs.back();
        for (cplx& v : acc)
            v /= lead;
        poly[k + 1] = std::move(acc);
    }
    return poly[n];
}

// ---------------------------------------------------------------------------
// Gauge changes.

// Rescales the basis by unimodular phases, P~_n = u_n P_n, giving the table
// coeff'[i][n] = coeff[i][n] * u_n * conj(u_i).  Needs num_rows + 1 phases.
inline RecurrenceTable gauge_transform(const RecurrenceTable& t, std::span<const cplx> phases) {
    const std::size_t R = t.num_rows();
    if (phases.size() < R + 1)
        throw std::invalid_argument("gauge_transform needs " + std::to_string(R + 1) +
                                    " phases, got " + std::to_string(phases.size()));
    for (std::size_t i = 0; i <= R; ++i)
        if (std::abs(std::abs(phases[i]) - 1.0) > 1e-12)
            throw std::invalid_argument("gauge phase " + std::to_string(i) +
                                        " is not unimodular");
    std::vector<RecurrenceRow> rows = t.rows();
    for (std::size_t n = 0; n < R; ++n) {
        RecurrenceRow& row = rows[n];
        for (std::size_t j = 0; j < row.coeffs.size(); ++j)
            row.coeffs[j] *= phases[n] * std::conj(phases[row.first + j]);
    }
    return RecurrenceTable(std::move(rows));
}

} // namespace polyrec
