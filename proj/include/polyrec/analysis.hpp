#pragma once

// Deciding whether a recurrence table admits an orthonormalizing measure.
//
// The multiplication operator D of an orthonormal basis is formally normal
// (D*D = DD*) and irreducible tables with that property collapse, after an
// affine change of variable, to a symmetric real three-term recurrence.  The
// pipeline here mirrors that argument on finite data:
//
//   check_irreducible        sub-diagonal couplings bounded away from zero
//   check_formal_normality   commutator C = D*D - DD* on the truncation-safe
//                            index square
//   verify_three_term_relations   the coefficient identities a formally
//                            normal tridiagonal table must satisfy
//   decompose                extract (a, b, c, d) or report which property
//                            failed, as a value, not an exception
//
// Mathematical rejections are ordinary return values (DecomposeFailure);
// exceptions are reserved for tables too short to decide anything.

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "polyrec/recurrence.hpp"
#include "polyrec/three_term.hpp"

namespace polyrec {

struct IrreducibilityCheck {
    bool irreducible = false;
    int first_failure = -1; // smallest n with |coeff[n+1][n]| <= tol, -1 if none
    double min_subdiagonal = 0.0;
};

inline IrreducibilityCheck check_irreducible(const RecurrenceTable& t, double tol = 1e-10) {
    IrreducibilityCheck res;
    res.min_subdiagonal = std::abs(t.subdiagonal(0));
    for (std::size_t n = 0; n < t.num_rows(); ++n) {
        const double m = std::abs(t.subdiagonal(n));
        res.min_subdiagonal = std::min(res.min_subdiagonal, m);
        if (m <= tol && res.first_failure < 0)
            res.first_failure = static_cast<int>(n);
    }
    res.irreducible = res.first_failure < 0;
    return res;
}

struct NormalityCheck {
    bool formally_normal = false;
    double tolerance = 0.0;
    // The commutator grid covers (m, n) in [0, region_limit]^2; entries there
    // are exact for every extension of the table respecting the stored width.
    int region_limit = -1;
    // Residuals are scale-relative: |C[m][n]| / max(1, sum of |products|
    // feeding the entry).  The floor at 1 makes unit-scale tables read as
    // plain entry magnitudes; at large coefficient scales the division keeps
    // rounding noise in exactly-cancelling sums from registering.
    double max_residual = 0.0;
    int worst_m = -1, worst_n = -1;
    // Lexicographically first entry exceeding the tolerance, if any.
    std::optional<std::pair<int, int>> first_violation;
    double first_violation_residual = 0.0;
};

// Entries of C = D*D - DD*:
//   C[m][n] = sum_k conj(D[k][m]) D[k][n] - sum_k D[m][k] conj(D[n][k]).
// The first sum needs stored columns m, n; the second is truncation-safe only
// when unstored columns cannot reach rows m, n, i.e. min(m,n) <= R + 1 - w for
// stored depth R and band width w.  Hence the grid bound
// region_limit = min(R - 1, R + 1 - w); a negative bound means the table is
// too wide for any safe entry.
inline NormalityCheck check_formal_normality(const RecurrenceTable& t, double tol = 1e-10) {
    const int R = static_cast<int>(t.num_rows());
    const int w = static_cast<int>(t.max_row_length());
    const int K = std::min(R - 1, R + 1 - w);
    if (K < 0)
        throw insufficient_table(
            "stored band too wide for any truncation-safe commutator entry "
            "(need 2 * max_row_length <= num_rows + 2)");
    NormalityCheck res;
    res.tolerance = tol;
    res.region_limit = K;
    for (int m = 0; m <= K; ++m) {
        for (int n = 0; n <= K; ++n) {
            cplx c{0.0, 0.0};
            double scale = 0.0;
            const int klo = std::max(t.first_index(m), t.first_index(n));
            const int khi = std::min(m, n) + 1;
            for (int k = klo; k <= khi; ++k) {
                const cplx term = std::conj(t.entry(k, m)) * t.entry(k, n);
                c += term;
                scale += std::abs(term);
            }
            const int jlo = std::max(0, std::max(m, n) - 1);
            const int jhi = std::min(R - 1, std::min(m, n) + w - 2);
            for (int j = jlo; j <= jhi; ++j) {
                const cplx term = t.entry(m, j) * std::conj(t.entry(n, j));
                c -= term;
                scale += std::abs(term);
            }
            const double r = std::abs(c) / std::max(1.0, scale);
            if (r > res.max_residual) {
                res.max_residual = r;
                res.worst_m = m;
                res.worst_n = n;
            }
            if (r > tol && !res.first_violation) {
                res.first_violation = std::make_pair(m, n);
                res.first_violation_residual = r;
            }
        }
    }
    if (res.worst_m < 0) { // all-zero grid; point at the origin
        res.worst_m = 0;
        res.worst_n = 0;
    }
    res.formally_normal = !res.first_violation.has_value();
    return res;
}

// ---------------------------------------------------------------------------
// Tridiagonal coefficient identities.

namespace detail {

// Views f, g, h of a structurally tridiagonal table:
//   f[n] = coeff[n-1][n] (f[0] = 0),  g[n] = coeff[n][n],  h[n] = coeff[n+1][n].
struct TridiagonalView {
    std::vector<cplx> f, g, h;
};

inline TridiagonalView tridiagonal_view(const RecurrenceTable& t) {
    const std::size_t R = t.num_rows();
    TridiagonalView v;
    v.f.resize(R);
    v.g.resize(R);
    v.h.resize(R);
    v.f[0] = 0.0;
    for (std::size_t n = 0; n < R; ++n) {
        if (t.first_index(n) + 1 < static_cast<int>(n))
            throw form_error("row " + std::to_string(n) + " reaches below the three-term band");
        if (n > 0)
            v.f[n] = t.entry(n - 1, n);
        v.g[n] = t.entry(n, n);
        v.h[n] = t.subdiagonal(n);
    }
    return v;
}

} // namespace detail

// Worst-case residuals of the three commutator identities of a formally
// normal tridiagonal table, one per affected diagonal of C:
//   norm_balance       |f_n|^2 + |h_n|^2 = |h_{n-1}|^2 + |f_{n+1}|^2   (n >= 0)
//   diagonal_shift     g_{n-1} conj(h_{n-1}) + f_n conj(g_n)
//                        = conj(g_{n-1}) f_n + conj(h_{n-1}) g_n       (n >= 1)
//   offdiagonal_ratio  f_n conj(h_{n-2}) = conj(h_{n-1}) f_{n-1}       (n >= 2)
// with f_0 = 0 and h_{-1} = 0.  All three vanish identically iff the table
// restricted to the tested rows commutes with its adjoint.
struct RelationResiduals {
    double norm_balance = 0.0;
    double diagonal_shift = 0.0;
    double offdiagonal_ratio = 0.0;
};

inline RelationResiduals verify_three_term_relations(const RecurrenceTable& t) {
    const std::size_t R = t.num_rows();
    if (R < 2)
        throw insufficient_table("three-term relation check needs at least 2 rows");
    const auto [f, g, h] = detail::tridiagonal_view(t);
    RelationResiduals res;
    auto sq = [](cplx z) { return std::norm(z); };
    for (std::size_t n = 0; n + 1 < R; ++n) {
        const double lhs = sq(f[n]) + sq(h[n]);
        const double rhs = (n > 0 ? sq(h[n - 1]) : 0.0) + sq(f[n + 1]);
        res.norm_balance = std::max(res.norm_balance, std::abs(lhs - rhs));
    }
    for (std::size_t n = 1; n < R; ++n) {
        const cplx lhs = g[n - 1] * std::conj(h[n - 1]) + f[n] * std::conj(g[n]);
        const cplx rhs = std::conj(g[n - 1]) * f[n] + std::conj(h[n - 1]) * g[n];
        res.diagonal_shift = std::max(res.diagonal_shift, std::abs(lhs - rhs));
    }
    for (std::size_t n = 2; n < R; ++n) {
        const cplx lhs = f[n] * std::conj(h[n - 2]);
        const cplx rhs = std::conj(h[n - 1]) * f[n - 1];
        res.offdiagonal_ratio = std::max(res.offdiagonal_ratio, std::abs(lhs - rhs));
    }
    return res;
}

// ---------------------------------------------------------------------------
// Decomposition.

struct DecomposeFailure {
    enum class Reason {
        not_irreducible,
        not_band_limited,
        not_formally_normal,
        not_three_term,
        ratio_not_unimodular,
        offdiagonal_relation,
        diagonal_not_real,
    };
    Reason reason{};
    std::string message;
    int index = -1;        // offending row / entry index when applicable
    double residual = 0.0; // magnitude of the violated identity
};

inline const char* reason_name(DecomposeFailure::Reason r) {
    switch (r) {
    case DecomposeFailure::Reason::not_irreducible: return "not-irreducible";
    case DecomposeFailure::Reason::not_band_limited: return "not-band-limited";
    case DecomposeFailure::Reason::not_formally_normal: return "not-formally-normal";
    case DecomposeFailure::Reason::not_three_term: return "not-three-term";
    case DecomposeFailure::Reason::ratio_not_unimodular: return "ratio-not-unimodular";
    case DecomposeFailure::Reason::offdiagonal_relation: return "offdiagonal-relation";
    case DecomposeFailure::Reason::diagonal_not_real: return "diagonal-not-real";
    }
    return "unknown";
}

using DecomposeResult = std::variant<ThreeTermForm, DecomposeFailure>;

// Extracts the canonical (a, b, c, d) of an irreducible, band-limited,
// formally normal tridiagonal table; otherwise reports the first property
// that fails.  The line direction a is the principal square root of the
// measured coupling ratio delta = f_1 / conj(h_0) (argument in (-pi/2, pi/2]),
// the offset b is the leading diagonal entry, and the gauge is fixed by
// d_0 = 0.  Throws insufficient_table below 2 rows.
inline DecomposeResult decompose(const RecurrenceTable& t, double tol = 1e-10) {
    const std::size_t R = t.num_rows();
    if (R < 2)
        throw insufficient_table("decompose needs at least 2 rows");

    const IrreducibilityCheck irr = check_irreducible(t, tol);
    if (!irr.irreducible)
        return DecomposeFailure{
            DecomposeFailure::Reason::not_irreducible,
            "sub-diagonal coupling at row " + std::to_string(irr.first_failure) +
                " is within tolerance of zero",
            irr.first_failure, irr.min_subdiagonal};

    const BandProfile band = band_profile(t);
    if (!band.band_limited)
        return DecomposeFailure{
            DecomposeFailure::Reason::not_band_limited,
            "stored band of width " + std::to_string(band.max_length) +
                " is too wide relative to the table depth for truncation-safe analysis",
            -1, 0.0};

    const NormalityCheck norm = check_formal_normality(t, tol);
    if (!norm.formally_normal) {
        const auto [m, n] = *norm.first_violation;
        return DecomposeFailure{
            DecomposeFailure::Reason::not_formally_normal,
            "commutator entry (" + std::to_string(m) + ", " + std::to_string(n) +
                ") has relative magnitude " + std::to_string(norm.first_violation_residual) +
                "; the operator does not commute with its adjoint",
            m, norm.first_violation_residual};
    }

    for (std::size_t n = 0; n < R; ++n)
        if (t.first_index(n) + 1 < static_cast<int>(n))
            return DecomposeFailure{DecomposeFailure::Reason::not_three_term,
                                    "row " + std::to_string(n) +
                                        " reaches below the three-term band",
                                    static_cast<int>(n), 0.0};
    const auto [f, g, h] = detail::tridiagonal_view(t);

    const cplx delta = f[1] / std::conj(h[0]);
    if (std::abs(std::abs(delta) - 1.0) > tol)
        return DecomposeFailure{DecomposeFailure::Reason::ratio_not_unimodular,
                                "coupling ratio f_1 / conj(h_0) has modulus " +
                                    std::to_string(std::abs(delta)) + ", expected 1",
                                1, std::abs(std::abs(delta) - 1.0)};

    for (std::size_t n = 1; n < R; ++n) {
        const double r = std::abs(f[n] - delta * std::conj(h[n - 1]));
        if (r > tol)
            return DecomposeFailure{
                DecomposeFailure::Reason::offdiagonal_relation,
                "coupling relation f_n = delta * conj(h_{n-1}) violated at row " +
                    std::to_string(n),
                static_cast<int>(n), r};
    }

    cplx a = std::sqrt(delta);
    if (a.real() < 0.0 || (a.real() == 0.0 && a.imag() < 0.0))
        a = -a; // principal branch: argument in (-pi/2, pi/2]

    ThreeTermForm form;
    form.a = a;
    form.b = g[0];
    form.delta = delta;
    form.c.resize(R);
    form.d.resize(R);
    for (std::size_t n = 0; n < R; ++n) {
        form.c[n] = std::conj(a) * h[n];
        const cplx dn = std::conj(a) * (g[n] - g[0]);
        if (std::abs(dn.imag()) > tol)
            return DecomposeFailure{
                DecomposeFailure::Reason::diagonal_not_real,
                "diagonal entry " + std::to_string(n) +
                    " does not lie on the carrier line",
                static_cast<int>(n), std::abs(dn.imag())};
        form.d[n] = dn.real();
    }
    form.d[0] = 0.0;
    return form;
}

// ---------------------------------------------------------------------------
// One-call report.

struct AnalysisReport {
    std::size_t rows = 0;
    double tolerance = 0.0;
    IrreducibilityCheck irreducibility;
    BandProfile band;
    std::optional<NormalityCheck> normality;    // absent when no safe entry exists
    std::optional<RelationResiduals> relations; // absent unless tridiagonal, >= 2 rows
    std::optional<ThreeTermForm> form;
    std::optional<DecomposeFailure> failure;

    bool decomposable() const { return form.has_value(); }
};

inline AnalysisReport analyze(const RecurrenceTable& t, double tol = 1e-10) {
    if (t.num_rows() < 2)
        throw insufficient_table("analyze needs at least 2 rows");
    AnalysisReport rep;
    rep.rows = t.num_rows();
    rep.tolerance = tol;
    rep.irreducibility = check_irreducible(t, tol);
    rep.band = band_profile(t);
    try {
        rep.normality = check_formal_normality(t, tol);
    } catch (const insufficient_table&) {
        rep.normality = std::nullopt; // band wider than any safe entry
    }
    try {
        rep.relations = verify_three_term_relations(t);
    } catch (const form_error&) {
        rep.relations = std::nullopt; // not structurally tridiagonal
    }
    DecomposeResult r = decompose(t, tol);
    if (std::holds_alternative<ThreeTermForm>(r))
        rep.form = std::get<ThreeTermForm>(std::move(r));
    else
        rep.failure = std::get<DecomposeFailure>(std::move(r));
    return rep;
}

} // namespace polyrec
