#pragma once

// Canonical three-term data extracted from a decomposable recurrence table.
//
// A table that passes the structural and commutator tests is, up to an affine
// change of variable z = b + a*t with |a| = 1, the Jacobi recurrence of
// orthonormal polynomials on the real line:
//
//     t * Q_n(t) = conj(c_{n-1}) Q_{n-1}(t) + d_n Q_n(t) + c_n Q_{n+1}(t)
//
// with real d_n and nonzero c_n.  ThreeTermForm carries (a, b, c, d) in the
// canonical gauge d_0 = 0, plus the measured unimodular ratio delta = a^2.

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyrec/recurrence.hpp"

namespace polyrec {

// Data that is not (or is no longer) a valid symmetric three-term form.
class form_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ThreeTermForm {
    cplx a{1.0, 0.0};      // unimodular direction of the carrier line
    cplx b{0.0, 0.0};      // offset of the carrier line
    std::vector<cplx> c;   // off-diagonal couplings, all nonzero
    std::vector<double> d; // real diagonal, d[0] == 0 in the canonical gauge
    cplx delta{1.0, 0.0};  // measured square of a

    std::size_t size() const { return c.size(); }
};

inline void validate(const ThreeTermForm& f) {
    if (f.c.empty())
        throw form_error("three-term form has no off-diagonal couplings");
    if (f.d.size() != f.c.size())
        throw form_error("three-term form has " + std::to_string(f.c.size()) +
                         " couplings but " + std::to_string(f.d.size()) + " diagonal entries");
    if (std::abs(std::abs(f.a) - 1.0) > 1e-12)
        throw form_error("line direction is not unimodular");
    if (std::abs(f.a * f.a - f.delta) > 1e-12)
        throw form_error("stored delta does not match the squared line direction");
    for (std::size_t n = 0; n < f.c.size(); ++n) {
        if (f.c[n] == cplx(0.0, 0.0))
            throw form_error("coupling c_" + std::to_string(n) + " vanishes");
        if (!detail::is_finite(f.c[n]) || !std::isfinite(f.d[n]))
            throw form_error("non-finite entry at index " + std::to_string(n));
    }
}

// The table of the symmetric relation itself (a = 1, b = 0): row n holds
// (conj(c_{n-1}), d_n, c_n).
inline RecurrenceTable symmetric_table(std::span<const cplx> c, std::span<const double> d) {
    if (c.empty() || c.size() != d.size())
        throw form_error("symmetric_table needs matching nonempty coupling/diagonal lists");
    std::vector<RecurrenceRow> rows(c.size());
    for (std::size_t n = 0; n < c.size(); ++n) {
        RecurrenceRow& row = rows[n];
        if (n == 0) {
            row.first = 0;
            row.coeffs = {cplx(d[0], 0.0), c[0]};
        } else {
            row.first = static_cast<int>(n) - 1;
            row.coeffs = {std::conj(c[n - 1]), cplx(d[n], 0.0), c[n]};
        }
    }
    return RecurrenceTable(std::move(rows));
}

inline RecurrenceTable symmetric_table(const ThreeTermForm& f) {
    validate(f);
    return symmetric_table(f.c, f.d);
}

namespace detail {

// Reads (c, d) back from a table in symmetric three-term shape; throws
// form_error when the table is not in that shape (band wider than three,
// non-real diagonal, or sub-diagonal not conjugate to the previous coupling).
inline void read_symmetric(const RecurrenceTable& t, std::vector<cplx>& c,
                           std::vector<double>& d, double tol = 1e-12) {
    const std::size_t R = t.num_rows();
    c.resize(R);
    d.resize(R);
    for (std::size_t n = 0; n < R; ++n) {
        if (t.first_index(n) + 1 < static_cast<int>(n))
            throw form_error("row " + std::to_string(n) + " reaches below the three-term band");
        const cplx diag = t.entry(n, n);
        if (std::abs(diag.imag()) > tol)
            throw form_error("row " + std::to_string(n) + " has a non-real diagonal entry");
        c[n] = t.subdiagonal(n);
        d[n] = diag.real();
        if (n > 0) {
            const cplx sub = t.entry(n - 1, n);
            if (std::abs(sub - std::conj(c[n - 1])) > tol)
                throw form_error("row " + std::to_string(n) +
                                 ": sub-diagonal entry is not conjugate to the coupling above");
        }
    }
}

} // namespace detail

// Transports a symmetric three-term table along z = b + a*t: the polynomials
// of the result are P_n(z) = Q_n((z - b)/a), and row n becomes
// (a*conj(c_{n-1}), b + a*d_n, a*c_n).
inline RecurrenceTable affine_table(const RecurrenceTable& symmetric, cplx a, cplx b) {
    if (std::abs(std::abs(a) - 1.0) > 1e-12)
        throw form_error("affine direction is not unimodular");
    std::vector<cplx> c;
    std::vector<double> d;
    detail::read_symmetric(symmetric, c, d);
    const std::size_t R = c.size();
    std::vector<RecurrenceRow> rows(R);
    for (std::size_t n = 0; n < R; ++n) {
        RecurrenceRow& row = rows[n];
        if (n == 0) {
            row.first = 0;
            row.coeffs = {b + a * d[0], a * c[0]};
        } else {
            row.first = static_cast<int>(n) - 1;
            row.coeffs = {a * std::conj(c[n - 1]), b + a * d[n], a * c[n]};
        }
    }
    return RecurrenceTable(std::move(rows));
}

// The full recurrence table a decomposable input is equivalent to:
// affine transport of the form's own symmetric table.
inline RecurrenceTable affine_table(const ThreeTermForm& f) {
    return affine_table(symmetric_table(f), f.a, f.b);
}

} // namespace polyrec
