#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <variant>
#include <vector>

#include <polyrec/analysis.hpp>
#include <polyrec/families.hpp>
#include <polyrec/recurrence.hpp>
#include <polyrec/three_term.hpp>

#include "oracles.hpp"

using polyrec::cplx;
using polyrec::DecomposeFailure;
using polyrec::RecurrenceRow;
using polyrec::RecurrenceTable;
using polyrec::ThreeTermForm;

namespace {

// A symmetric-form table with explicit couplings/diagonal, for perturbing.
RecurrenceTable tridiagonal(std::vector<cplx> c, std::vector<double> d) {
    return polyrec::symmetric_table(c, d);
}

// Random tridiagonal table with no structure beyond the band: generally
// neither normal nor decomposable.
RecurrenceTable random_tridiagonal(oracles::Rng& rng, std::size_t rows) {
    std::vector<RecurrenceRow> r(rows);
    for (std::size_t n = 0; n < rows; ++n) {
        const cplx g = rng.in_box(1.0);
        const cplx h = rng.on_circle() * rng.uniform(0.4, 1.6);
        if (n == 0) {
            r[n].first = 0;
            r[n].coeffs = {g, h};
        } else {
            r[n].first = static_cast<int>(n) - 1;
            r[n].coeffs = {rng.on_circle() * rng.uniform(0.4, 1.6), g, h};
        }
    }
    return RecurrenceTable(std::move(r));
}

// By value: call sites hand in the DecomposeResult temporary directly.
DecomposeFailure expect_failure(polyrec::DecomposeResult r) {
    REQUIRE(std::holds_alternative<DecomposeFailure>(r));
    return std::get<DecomposeFailure>(std::move(r));
}

ThreeTermForm expect_form(polyrec::DecomposeResult r) {
    REQUIRE(std::holds_alternative<ThreeTermForm>(r));
    return std::get<ThreeTermForm>(std::move(r));
}

} // namespace

TEST_CASE("irreducibility scans the sub-diagonal couplings") {
    CHECK(polyrec::check_irreducible(polyrec::chebyshev_table(16)).irreducible);
    CHECK(polyrec::check_irreducible(polyrec::monomial_table(16)).irreducible);

    const RecurrenceTable t = tridiagonal({cplx(1.0), cplx(1e-12), cplx(1.0)}, {0, 0, 0});
    const polyrec::IrreducibilityCheck res = polyrec::check_irreducible(t);
    CHECK_FALSE(res.irreducible);
    CHECK(res.first_failure == 1);
    CHECK(res.min_subdiagonal == 1e-12);
}

TEST_CASE("formal normality holds for the measure-backed families") {
    for (std::size_t rows : {4u, 9u, 32u}) {
        const polyrec::NormalityCheck res =
            polyrec::check_formal_normality(polyrec::chebyshev_table(rows));
        CHECK(res.formally_normal);
        CHECK(res.max_residual <= 1e-13);
        CHECK(res.region_limit == static_cast<int>(rows) - 2);
    }
    CHECK(polyrec::check_formal_normality(polyrec::hermite_table(24)).formally_normal);
    CHECK(polyrec::check_formal_normality(polyrec::geometric_table(24, 3.0)).formally_normal);
    const RecurrenceTable rot =
        polyrec::make_family({.name = "rotated-hermite", .rows = 24, .a_arg = 0.8, .b = {1, 2}});
    const polyrec::NormalityCheck res = polyrec::check_formal_normality(rot);
    CHECK(res.formally_normal);
    CHECK(res.max_residual <= 1e-12);
}

TEST_CASE("shift tables fail normality at the origin") {
    const polyrec::NormalityCheck mono =
        polyrec::check_formal_normality(polyrec::monomial_table(12));
    CHECK_FALSE(mono.formally_normal);
    REQUIRE(mono.first_violation.has_value());
    CHECK(mono.first_violation->first == 0);
    CHECK(mono.first_violation->second == 0);
    CHECK(mono.first_violation_residual == 1.0);
    CHECK(mono.region_limit == 11);

    const polyrec::NormalityCheck scaled =
        polyrec::check_formal_normality(polyrec::scaled_monomial_table(12));
    CHECK_FALSE(scaled.formally_normal);
    REQUIRE(scaled.first_violation.has_value());
    CHECK(scaled.first_violation->first == 0);
    CHECK(scaled.first_violation->second == 0);
    CHECK(std::abs(scaled.first_violation_residual - 0.25) <= 1e-15);
    // The worst entry sits further in, where the 2 and the 1/2 rows meet:
    // entry 4 - 1/4 = 3.75 against a term scale of 4 + 1/4.
    CHECK(scaled.worst_m == 1);
    CHECK(scaled.worst_n == 1);
    CHECK(std::abs(scaled.max_residual - 3.75 / 4.25) <= 1e-15);
}

TEST_CASE("huge exact couplings stay formally normal despite rounding noise") {
    // Products reach 1e60; the cancellation noise in the diagonal entries is
    // astronomically larger than any absolute tolerance, but vanishes against
    // the term scale.
    const polyrec::NormalityCheck res =
        polyrec::check_formal_normality(polyrec::geometric_table(64, 3.0));
    CHECK(res.formally_normal);
    CHECK(res.max_residual <= 1e-13);
}

TEST_CASE("commutator residuals match a dense-matrix computation") {
    oracles::Rng rng(606);
    std::vector<RecurrenceTable> tables;
    tables.push_back(random_tridiagonal(rng, 9));
    tables.push_back(random_tridiagonal(rng, 14));
    tables.push_back(polyrec::scaled_monomial_table(9));
    {
        std::vector<cplx> phases(13);
        for (cplx& u : phases)
            u = rng.on_circle();
        tables.push_back(gauge_transform(polyrec::hermite_table(12), phases));
    }

    for (const RecurrenceTable& t : tables) {
        const polyrec::NormalityCheck res = polyrec::check_formal_normality(t);
        const auto dense = oracles::dense_operator(t);
        double worst = 0.0;
        int wm = -1, wn = -1;
        for (int m = 0; m <= res.region_limit; ++m) {
            for (int n = 0; n <= res.region_limit; ++n) {
                const std::size_t um = static_cast<std::size_t>(m);
                const std::size_t un = static_cast<std::size_t>(n);
                const double r =
                    std::abs(oracles::dense_commutator_entry(dense, um, un)) /
                    std::max(1.0, oracles::dense_commutator_scale(dense, um, un));
                if (r > worst) {
                    worst = r;
                    wm = m;
                    wn = n;
                }
            }
        }
        CHECK(std::abs(res.max_residual - worst) <= 1e-12);
        // The location is only meaningful when something actually violates
        // normality; at rounding scale both maxima are noise over exact zeros.
        if (worst > 1e-12) {
            CHECK(res.worst_m == wm);
            CHECK(res.worst_n == wn);
        }
    }
}

TEST_CASE("commutator magnitudes are gauge-covariant") {
    oracles::Rng rng(707);
    const RecurrenceTable t = random_tridiagonal(rng, 12);
    std::vector<cplx> phases(13);
    for (cplx& u : phases)
        u = rng.on_circle();
    const polyrec::NormalityCheck plain = polyrec::check_formal_normality(t);
    const polyrec::NormalityCheck gauged =
        polyrec::check_formal_normality(gauge_transform(t, phases));
    CHECK(std::abs(plain.max_residual - gauged.max_residual) <= 1e-12);
}

TEST_CASE("a table stored at full width has a single safe entry") {
    const std::vector<RecurrenceRow> rows = {
        {0, {cplx(1.0), cplx(1.0)}},
        {0, {cplx(1.0), cplx(1.0), cplx(1.0)}},
        {0, {cplx(1.0), cplx(1.0), cplx(1.0), cplx(1.0)}},
    };
    const polyrec::NormalityCheck res =
        polyrec::check_formal_normality(RecurrenceTable(rows));
    CHECK(res.region_limit == 0);
}

TEST_CASE("three-term identity residuals vanish on the exact families") {
    for (const char* name : {"chebyshev", "hermite"}) {
        const polyrec::RelationResiduals res = polyrec::verify_three_term_relations(
            polyrec::make_family({.name = name, .rows = 32}));
        CHECK(res.norm_balance <= 1e-13);
        CHECK(res.diagonal_shift <= 1e-13);
        CHECK(res.offdiagonal_ratio <= 1e-13);
    }
    const polyrec::RelationResiduals rot =
        polyrec::verify_three_term_relations(polyrec::make_family(
            {.name = "rotated-chebyshev", .rows = 32, .a_arg = 1.1, .b = {-2, 0.5}}));
    CHECK(rot.norm_balance <= 1e-12);
    CHECK(rot.diagonal_shift <= 1e-12);
    CHECK(rot.offdiagonal_ratio <= 1e-12);
}

TEST_CASE("geometric couplings satisfy the identities to the last bit") {
    // Both sides of each identity are assembled from the same doubles in the
    // same order, so the residual is exactly zero even at 1e60 scales.
    const polyrec::RelationResiduals res =
        polyrec::verify_three_term_relations(polyrec::geometric_table(64, 3.0));
    CHECK(res.norm_balance == 0.0);
    CHECK(res.diagonal_shift == 0.0);
    CHECK(res.offdiagonal_ratio == 0.0);
}

TEST_CASE("a non-real diagonal perturbation shows up in the shift identity") {
    std::vector<RecurrenceRow> rows = polyrec::chebyshev_table(8).rows();
    rows[1].coeffs[1] += cplx(0.0, 0.1); // g_1 off the carrier line
    const polyrec::RelationResiduals res =
        polyrec::verify_three_term_relations(RecurrenceTable(rows));
    CHECK(res.diagonal_shift >= 0.1);
    // The balance identity only sees f and h, which are untouched.
    CHECK(res.norm_balance <= 1e-13);
}

TEST_CASE("relation checks demand tridiagonal structure and two rows") {
    REQUIRE_THROWS_AS(polyrec::verify_three_term_relations(polyrec::chebyshev_table(1)),
                      polyrec::insufficient_table);
    std::vector<RecurrenceRow> rows = polyrec::chebyshev_table(6).rows();
    rows[4].first = 2; // reach two below the diagonal
    rows[4].coeffs.insert(rows[4].coeffs.begin(), cplx(0.2, 0.0));
    REQUIRE_THROWS_AS(polyrec::verify_three_term_relations(RecurrenceTable(rows)),
                      polyrec::form_error);
}

TEST_CASE("decompose recovers the canonical data of a symmetric family") {
    const polyrec::DecomposeResult res = polyrec::decompose(polyrec::chebyshev_table(12));
    const ThreeTermForm& f = expect_form(res);
    CHECK(std::abs(f.a - cplx(1.0)) <= 1e-14);
    CHECK(std::abs(f.b) <= 1e-14);
    CHECK(std::abs(f.delta - cplx(1.0)) <= 1e-14);
    REQUIRE(f.size() == 12);
    CHECK(f.d[0] == 0.0);
    for (std::size_t n = 0; n < 12; ++n) {
        CHECK(std::abs(f.c[n] - (n == 0 ? cplx(1.0 / std::sqrt(2.0)) : cplx(0.5))) <= 1e-14);
        CHECK(std::abs(f.d[n]) <= 1e-14);
    }
    REQUIRE_NOTHROW(polyrec::validate(f));
}

TEST_CASE("decompose inverts the affine transport") {
    oracles::Rng rng(808);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t rows = 10;
        std::vector<cplx> c(rows);
        std::vector<double> d(rows);
        for (std::size_t n = 0; n < rows; ++n) {
            c[n] = rng.on_circle() * rng.uniform(0.4, 1.6);
            d[n] = rng.uniform(-1.0, 1.0);
        }
        d[0] = 0.0; // canonical gauge in, canonical gauge out
        const cplx a = std::polar(1.0, rng.uniform(-1.5, 1.5));
        const cplx b = rng.in_box(2.0);
        const RecurrenceTable t = affine_table(polyrec::symmetric_table(c, d), a, b);

        const ThreeTermForm& f = expect_form(polyrec::decompose(t));
        CHECK(std::abs(f.a - a) <= 1e-12);
        CHECK(std::abs(f.b - b) <= 1e-12);
        for (std::size_t n = 0; n < rows; ++n) {
            CHECK(std::abs(f.c[n] - c[n]) <= 1e-12);
            CHECK(std::abs(f.d[n] - d[n]) <= 1e-12);
        }

        const RecurrenceTable back = affine_table(f);
        REQUIRE(back.num_rows() == t.num_rows());
        for (std::size_t n = 0; n < rows; ++n)
            for (std::size_t i = 0; i <= n + 1; ++i)
                CHECK(std::abs(back.entry(i, n) - t.entry(i, n)) <= 1e-12);
    }
}

TEST_CASE("a general diagonal is re-gauged onto d_0 = 0") {
    std::vector<cplx> c(8, cplx(0.7, 0.0));
    std::vector<double> d = {0.4, -0.2, 0.1, 0.0, 0.3, -0.5, 0.2, 0.1};
    const cplx a = std::polar(1.0, 0.6);
    const cplx b{-1.0, 2.0};
    const RecurrenceTable t = affine_table(polyrec::symmetric_table(c, d), a, b);
    const ThreeTermForm& f = expect_form(polyrec::decompose(t));
    // The offset absorbs d_0; the diagonal shifts accordingly.
    CHECK(std::abs(f.b - (b + a * d[0])) <= 1e-12);
    for (std::size_t n = 0; n < 8; ++n)
        CHECK(std::abs(f.d[n] - (d[n] - d[0])) <= 1e-12);
}

TEST_CASE("directions beyond the principal branch flip consistently") {
    const double theta = 2.5; // outside (-pi/2, pi/2]
    const cplx a = std::polar(1.0, theta);
    const RecurrenceTable t = affine_table(polyrec::hermite_table(10), a, cplx(0.5, -0.5));
    const ThreeTermForm& f = expect_form(polyrec::decompose(t));
    CHECK(std::abs(f.a - std::polar(1.0, theta - 3.14159265358979323846)) <= 1e-12);
    // Same line, opposite parametrization; the table reconstructs regardless.
    const RecurrenceTable back = affine_table(f);
    for (std::size_t n = 0; n < 10; ++n)
        for (std::size_t i = 0; i <= n + 1; ++i)
            CHECK(std::abs(back.entry(i, n) - t.entry(i, n)) <= 1e-12);
}

TEST_CASE("decompose is insensitive to gauge phases") {
    oracles::Rng rng(909);
    const RecurrenceTable t = polyrec::chebyshev_table(10);
    std::vector<cplx> phases(11);
    for (cplx& u : phases)
        u = rng.on_circle();
    const ThreeTermForm& f = expect_form(polyrec::decompose(gauge_transform(t, phases)));
    CHECK(std::abs(f.a - cplx(1.0)) <= 1e-12);
    CHECK(std::abs(f.b) <= 1e-12);
    for (std::size_t n = 0; n < 10; ++n) {
        CHECK(std::abs(std::abs(f.c[n]) - (n == 0 ? 1.0 / std::sqrt(2.0) : 0.5)) <= 1e-12);
        CHECK(std::abs(f.d[n]) <= 1e-12);
    }
}

TEST_CASE("decompose reports the first failing property") {
    SECTION("vanishing coupling") {
        const DecomposeFailure& f = expect_failure(
            polyrec::decompose(tridiagonal({cplx(1.0), cplx(1e-12), cplx(1.0)}, {0, 0, 0})));
        CHECK(f.reason == DecomposeFailure::Reason::not_irreducible);
        CHECK(f.index == 1);
    }

    SECTION("band too wide for the depth") {
        std::vector<RecurrenceRow> rows = polyrec::chebyshev_table(4).rows();
        rows[3] = {0, {cplx(0.1), cplx(0.5), cplx(0.0), cplx(0.0), cplx(0.5)}};
        const DecomposeFailure& f =
            expect_failure(polyrec::decompose(RecurrenceTable(rows)));
        CHECK(f.reason == DecomposeFailure::Reason::not_band_limited);
    }

    SECTION("shift table is not normal") {
        const DecomposeFailure& f =
            expect_failure(polyrec::decompose(polyrec::monomial_table(8)));
        CHECK(f.reason == DecomposeFailure::Reason::not_formally_normal);
        CHECK(f.index == 0);
        CHECK(std::abs(f.residual - 1.0) <= 1e-15);
    }

    SECTION("sub-band reach too small for the commutator to see") {
        // The stray entry is far below the decision tolerance, so normality
        // passes and the structural scan has to catch the extra reach.
        std::vector<RecurrenceRow> rows = polyrec::chebyshev_table(10).rows();
        rows[9] = {7, {cplx(1e-13), cplx(0.5), cplx(0.0), cplx(0.5)}};
        const DecomposeFailure& f =
            expect_failure(polyrec::decompose(RecurrenceTable(rows)));
        CHECK(f.reason == DecomposeFailure::Reason::not_three_term);
        CHECK(f.index == 9);
    }

    SECTION("coupling ratio off the unit circle") {
        // Couplings this small keep the commutator residual quadratically
        // below tolerance while the ratio is off linearly.
        std::vector<RecurrenceRow> rows =
            tridiagonal(std::vector<cplx>(4, cplx(1e-3)), {0, 0, 0, 0}).rows();
        rows[1].coeffs[0] += 5e-9;
        const DecomposeFailure& f =
            expect_failure(polyrec::decompose(RecurrenceTable(rows)));
        CHECK(f.reason == DecomposeFailure::Reason::ratio_not_unimodular);
        CHECK(f.index == 1);
        CHECK(f.residual > 1e-6);
    }

    SECTION("coupling phase drifts at the table edge") {
        // Beyond the truncation-safe grid the commutator cannot see the
        // drift; the coupling relation picks it up.
        std::vector<RecurrenceRow> rows = polyrec::chebyshev_table(6).rows();
        rows[5].coeffs[0] = std::polar(0.5, 3.14159265358979323846 / 3.0);
        const DecomposeFailure& f =
            expect_failure(polyrec::decompose(RecurrenceTable(rows)));
        CHECK(f.reason == DecomposeFailure::Reason::offdiagonal_relation);
        CHECK(f.index == 5);
        CHECK(std::abs(f.residual - 0.5) <= 1e-12);
    }

    SECTION("diagonal leaves the carrier line at the table edge") {
        std::vector<RecurrenceRow> rows = polyrec::chebyshev_table(6).rows();
        rows[5].coeffs[1] = cplx(0.0, 0.3);
        const DecomposeFailure& f =
            expect_failure(polyrec::decompose(RecurrenceTable(rows)));
        CHECK(f.reason == DecomposeFailure::Reason::diagonal_not_real);
        CHECK(f.index == 5);
        CHECK(std::abs(f.residual - 0.3) <= 1e-12);
    }

    SECTION("reason names are kebab-case strings") {
        CHECK(std::string(polyrec::reason_name(DecomposeFailure::Reason::not_irreducible)) ==
              "not-irreducible");
        CHECK(std::string(polyrec::reason_name(
                  DecomposeFailure::Reason::ratio_not_unimodular)) == "ratio-not-unimodular");
    }
}

TEST_CASE("decompose needs two rows to say anything") {
    REQUIRE_THROWS_AS(polyrec::decompose(polyrec::chebyshev_table(1)),
                      polyrec::insufficient_table);
}

TEST_CASE("analyze assembles a consistent report") {
    SECTION("decomposable input") {
        const polyrec::AnalysisReport rep = polyrec::analyze(polyrec::chebyshev_table(8));
        CHECK(rep.rows == 8);
        CHECK(rep.decomposable());
        CHECK(rep.form.has_value());
        CHECK_FALSE(rep.failure.has_value());
        REQUIRE(rep.normality.has_value());
        CHECK(rep.normality->formally_normal);
        REQUIRE(rep.relations.has_value());
        CHECK(rep.relations->norm_balance <= 1e-13);
        CHECK(rep.band.max_length == 3);
        CHECK(rep.irreducibility.irreducible);
    }

    SECTION("rejected input keeps the diagnostic sections") {
        const polyrec::AnalysisReport rep = polyrec::analyze(polyrec::monomial_table(8));
        CHECK_FALSE(rep.decomposable());
        REQUIRE(rep.failure.has_value());
        CHECK(rep.failure->reason == DecomposeFailure::Reason::not_formally_normal);
        REQUIRE(rep.normality.has_value());
        CHECK(rep.normality->max_residual == 1.0);
        // The shift table is structurally tridiagonal, so the residuals exist,
        // and the boundary norm-balance term sees the same unit defect the
        // commutator scan reports at the corner entry.
        REQUIRE(rep.relations.has_value());
        CHECK(rep.relations->norm_balance == 1.0);
        CHECK(rep.relations->diagonal_shift == 0.0);
        CHECK(rep.relations->offdiagonal_ratio == 0.0);
    }

    SECTION("wide rows drop the relation section") {
        std::vector<RecurrenceRow> rows = polyrec::chebyshev_table(10).rows();
        rows[6].first = 3;
        rows[6].coeffs.insert(rows[6].coeffs.begin(), {cplx(0.3), cplx(0.1)});
        const polyrec::AnalysisReport rep = polyrec::analyze(RecurrenceTable(rows));
        CHECK_FALSE(rep.relations.has_value());
        CHECK_FALSE(rep.decomposable());
    }

    SECTION("too short to analyze") {
        REQUIRE_THROWS_AS(polyrec::analyze(polyrec::chebyshev_table(1)),
                          polyrec::insufficient_table);
    }
}
