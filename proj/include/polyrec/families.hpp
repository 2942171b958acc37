#pragma once

// Built-in recurrence families used by the CLI, the demos and the tests.
//
//   monomial         P_n = z^n                  (no orthonormalizing measure)
//   scaled-monomial  P_n = z^n scaled by 2^(+-1) (fails formal normality with
//                    commutator entry 1/4 at the origin)
//   chebyshev        orthonormal Chebyshev, c_0 = 1/sqrt(2), c_n = 1/2
//   hermite          orthonormal Hermite, c_n = sqrt((n+1)/2)
//   geometric        c_n = ratio^(n+1); for ratio > 1 the partial masses
//                    stabilize, the synthetic many-measures exhibit
//   rotated-*        chebyshev/hermite transported to the line b + e^(i arg)*t

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "polyrec/recurrence.hpp"
#include "polyrec/three_term.hpp"

namespace polyrec {

inline std::vector<cplx> chebyshev_couplings(std::size_t count) {
    std::vector<cplx> c(count, cplx(0.5, 0.0));
    if (count > 0)
        c[0] = 1.0 / std::sqrt(2.0);
    return c;
}

inline std::vector<cplx> hermite_couplings(std::size_t count) {
    std::vector<cplx> c(count);
    for (std::size_t n = 0; n < count; ++n)
        c[n] = std::sqrt((static_cast<double>(n) + 1.0) / 2.0);
    return c;
}

inline std::vector<cplx> geometric_couplings(std::size_t count, double ratio) {
    if (!(ratio > 0.0))
        throw std::invalid_argument("geometric coupling ratio must be positive");
    std::vector<cplx> c(count);
    double v = ratio;
    for (std::size_t n = 0; n < count; ++n, v *= ratio)
        c[n] = v;
    return c;
}

inline RecurrenceTable monomial_table(std::size_t rows) {
    std::vector<RecurrenceRow> r(rows);
    for (std::size_t n = 0; n < rows; ++n) {
        r[n].first = static_cast<int>(n) + 1;
        r[n].coeffs = {cplx(1.0, 0.0)};
    }
    return RecurrenceTable(std::move(r));
}

// z^n with alternating normalization 1, 2z, z^2, 2z^3, ...: the leading
// coefficient of column n is 2^((-1)^(n+1)), i.e. 1/2 for even n, 2 for odd.
inline RecurrenceTable scaled_monomial_table(std::size_t rows) {
    std::vector<RecurrenceRow> r(rows);
    for (std::size_t n = 0; n < rows; ++n) {
        r[n].first = static_cast<int>(n) + 1;
        r[n].coeffs = {cplx(n % 2 == 0 ? 0.5 : 2.0, 0.0)};
    }
    return RecurrenceTable(std::move(r));
}

inline RecurrenceTable chebyshev_table(std::size_t rows) {
    return symmetric_table(chebyshev_couplings(rows), std::vector<double>(rows, 0.0));
}

inline RecurrenceTable hermite_table(std::size_t rows) {
    return symmetric_table(hermite_couplings(rows), std::vector<double>(rows, 0.0));
}

inline RecurrenceTable geometric_table(std::size_t rows, double ratio) {
    return symmetric_table(geometric_couplings(rows, ratio), std::vector<double>(rows, 0.0));
}

// Named-family handle for file input and the CLI.
struct FamilySpec {
    std::string name;
    std::size_t rows = 0;
    double a_arg = 0.0; // rotated-* : argument of the line direction
    cplx b{0.0, 0.0};   // rotated-* : line offset
    double ratio = 3.0; // geometric : coupling growth factor
};

inline const std::vector<std::string>& family_names() {
    static const std::vector<std::string> names = {
        "monomial",         "scaled-monomial", "chebyshev",       "hermite",
        "rotated-chebyshev", "rotated-hermite", "geometric",
    };
    return names;
}

inline RecurrenceTable make_family(const FamilySpec& spec) {
    if (spec.rows == 0)
        throw table_error("family '" + spec.name + "' needs a positive row count");
    const cplx a = std::polar(1.0, spec.a_arg);
    if (spec.name == "monomial")
        return monomial_table(spec.rows);
    if (spec.name == "scaled-monomial")
        return scaled_monomial_table(spec.rows);
    if (spec.name == "chebyshev")
        return chebyshev_table(spec.rows);
    if (spec.name == "hermite")
        return hermite_table(spec.rows);
    if (spec.name == "rotated-chebyshev")
        return affine_table(chebyshev_table(spec.rows), a, spec.b);
    if (spec.name == "rotated-hermite")
        return affine_table(hermite_table(spec.rows), a, spec.b);
    if (spec.name == "geometric")
        return geometric_table(spec.rows, spec.ratio);
    throw table_error("unknown family '" + spec.name + "'");
}

} // namespace polyrec
