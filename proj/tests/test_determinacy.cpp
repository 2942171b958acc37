#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <variant>
#include <vector>

#include <polyrec/analysis.hpp>
#include <polyrec/determinacy.hpp>
#include <polyrec/families.hpp>
#include <polyrec/three_term.hpp>

#include "oracles.hpp"

using polyrec::cplx;
using polyrec::DeterminacyReport;
using polyrec::DeterminacySchedule;
using polyrec::RecurrenceTable;
using polyrec::ThreeTermForm;
using polyrec::Verdict;

using Catch::Matchers::ContainsSubstring;

namespace {

ThreeTermForm decomposed(const RecurrenceTable& t) {
    polyrec::DecomposeResult r = polyrec::decompose(t);
    REQUIRE(std::holds_alternative<ThreeTermForm>(r));
    return std::get<ThreeTermForm>(std::move(r));
}

// Plain-double reference: sum |P_n(z)|^2 directly, no rescaling involved.
double direct_log_mass(const RecurrenceTable& t, cplx z, std::size_t count) {
    const std::vector<cplx> vals = eval_sequence(t, z, count);
    long double acc = 0.0L;
    for (const cplx& v : vals)
        acc += static_cast<long double>(std::norm(v));
    return std::log(static_cast<double>(acc));
}

} // namespace

TEST_CASE("partial masses at pinned points") {
    const RecurrenceTable t = polyrec::chebyshev_table(20);

    CHECK(partial_mass(t, cplx(0.4, -1.3), 1) == 1.0);
    CHECK(partial_mass(t, cplx(0.0, 0.0), 0) == 0.0);
    CHECK(partial_mass_log(t, cplx(0.0, 0.0), 0) ==
          -std::numeric_limits<double>::infinity());

    // At the origin every term is bounded by 2 and the even terms contribute
    // exactly 2 each: S_20 = 1 + 9 * 2.
    for (const cplx& v : eval_sequence(t, cplx(0.0, 0.0), 20))
        CHECK(std::norm(v) <= 2.0 + 1e-12);
    CHECK(std::abs(partial_mass(t, cplx(0.0, 0.0), 20) - 19.0) <= 1e-12);

    // One unit off the line the terms grow geometrically.
    CHECK(partial_mass(t, cplx(0.0, 1.0), 20) >= 1e3);
}

TEST_CASE("log masses match direct summation when no rescaling is needed") {
    SECTION("growing terms") {
        const RecurrenceTable t = polyrec::chebyshev_table(120);
        const cplx z{0.3, 0.7};
        const double lib = partial_mass_log(t, z, 120);
        const double ref = direct_log_mass(t, z, 120);
        CHECK(oracles::floored_rel(lib, ref) <= 1e-10);
    }

    SECTION("shrinking terms") {
        const RecurrenceTable t = polyrec::geometric_table(24, 3.0);
        const cplx z{1.0, 0.5};
        for (std::size_t n : {5u, 10u, 20u}) {
            const double lib = partial_mass_log(t, z, n);
            const double ref = direct_log_mass(t, z, n);
            CHECK(oracles::floored_rel(lib, ref) <= 1e-10);
        }
    }
}

TEST_CASE("windowed rescaling reproduces the asymptotic growth rate") {
    // Far off the line the terms grow like rho^(2n) with rho = 3 + sqrt(10);
    // S_200 overflows double by a wide margin, the log path must not.
    const RecurrenceTable t = polyrec::chebyshev_table(200);
    const cplx z{0.0, 3.0};
    const double diff = partial_mass_log(t, z, 200) - partial_mass_log(t, z, 100);
    const double expected = 200.0 * std::log(3.0 + std::sqrt(10.0));
    CHECK(std::abs(diff - expected) <= 1e-6 * expected);
    CHECK(partial_mass(t, z, 200) == std::numeric_limits<double>::infinity());
}

TEST_CASE("one sweep with checkpoints equals separate sweeps") {
    const struct {
        RecurrenceTable table;
        cplx z;
    } cases[] = {
        {polyrec::chebyshev_table(64), cplx(0.5, 0.25)},
        {polyrec::geometric_table(64, 3.0), cplx(1.0, 0.5)},
    };
    for (const auto& c : cases) {
        DeterminacySchedule sched;
        sched.counts = {10, 20, 40, 60};
        const DeterminacyReport rep =
            classify_determinacy(c.table, decomposed(c.table), c.z, sched);
        REQUIRE(rep.samples.size() == 4);
        for (const polyrec::DeterminacySample& s : rep.samples)
            CHECK(s.log_mass == partial_mass_log(c.table, c.z, s.count));
    }
}

TEST_CASE("divergent families are classified unique-likely") {
    for (const char* name : {"chebyshev", "hermite"}) {
        const RecurrenceTable t = polyrec::make_family({.name = name, .rows = 256});
        const DeterminacyReport rep = classify_determinacy(t, decomposed(t));
        INFO(name);
        CHECK(rep.verdict == Verdict::unique_likely);
        CHECK_THAT(rep.reason, ContainsSubstring("grew"));
        CHECK(std::abs(rep.off_line_distance - 1.0) <= 1e-12);
        REQUIRE(rep.samples.size() == 4);
        CHECK(rep.samples[0].count == 25);
        CHECK(rep.samples[3].count == 200);
        REQUIRE(rep.ratios.size() == 3);
        for (double r : rep.ratios)
            CHECK(r >= 4.0);
        REQUIRE(rep.growth_rate.has_value());
        CHECK(*rep.growth_rate > 1.0);
        CHECK_THAT(DeterminacyReport::note, ContainsSubstring("finite"));
    }
}

TEST_CASE("the growth rate matches the squared escape factor") {
    // For the classical band [-1,1] probed at i, each term gains a factor
    // (1 + sqrt(2))^2, and the schedule-averaged estimate converges to it.
    const RecurrenceTable t = polyrec::chebyshev_table(256);
    const DeterminacyReport rep = classify_determinacy(t, decomposed(t));
    REQUIRE(rep.growth_rate.has_value());
    const double rho2 = (1.0 + std::sqrt(2.0)) * (1.0 + std::sqrt(2.0));
    CHECK(std::abs(*rep.growth_rate - rho2) <= 1e-9 * rho2);
}

TEST_CASE("rapidly shrinking couplings are classified non-unique-likely") {
    const RecurrenceTable t = polyrec::geometric_table(64, 3.0);
    DeterminacySchedule sched;
    sched.counts = {10, 20, 40, 60};
    const DeterminacyReport rep = classify_determinacy(t, decomposed(t), std::nullopt, sched);
    CHECK(rep.verdict == Verdict::non_unique_likely);
    CHECK_THAT(rep.reason, ContainsSubstring("stabilized"));
    REQUIRE(rep.ratios.size() == 3);
    CHECK(std::abs(rep.ratios.back() - 1.0) <= 1e-6);
    for (const polyrec::DeterminacySample& s : rep.samples)
        CHECK(std::isfinite(s.mass));
}

TEST_CASE("points on the carrier line are refused") {
    SECTION("classical line") {
        const RecurrenceTable t = polyrec::chebyshev_table(32);
        const DeterminacyReport rep =
            classify_determinacy(t, decomposed(t), cplx(0.3, 0.0));
        CHECK(rep.verdict == Verdict::inconclusive);
        CHECK_THAT(rep.reason, ContainsSubstring("carrier line"));
        CHECK(rep.samples.empty());
        CHECK(rep.ratios.empty());
        CHECK_FALSE(rep.growth_rate.has_value());
        CHECK(rep.off_line_distance <= 1e-8);
    }

    SECTION("rotated line") {
        const RecurrenceTable t = polyrec::make_family(
            {.name = "rotated-chebyshev", .rows = 32, .a_arg = 0.7853981633974483,
             .b = cplx(1.0, 2.0)});
        const ThreeTermForm f = decomposed(t);
        const DeterminacyReport rep =
            classify_determinacy(t, f, f.b + f.a * cplx(0.4, 0.0));
        CHECK(rep.verdict == Verdict::inconclusive);
        CHECK_THAT(rep.reason, ContainsSubstring("carrier line"));
    }
}

TEST_CASE("partial masses transport affinely") {
    const cplx a = std::polar(1.0, 0.7);
    const cplx b{1.0, -2.0};
    const RecurrenceTable base = polyrec::hermite_table(48);
    const RecurrenceTable moved = affine_table(base, a, b);
    const cplx s{0.4, 0.9};
    for (std::size_t n : {10u, 30u}) {
        const double lhs = partial_mass_log(moved, b + a * s, n);
        const double rhs = partial_mass_log(base, s, n);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("the verdict ignores gauge phases") {
    oracles::Rng rng(444);
    const RecurrenceTable t = polyrec::hermite_table(256);
    std::vector<cplx> phases(257);
    for (cplx& u : phases)
        u = rng.on_circle();
    const RecurrenceTable gauged = gauge_transform(t, phases);

    const DeterminacyReport plain = classify_determinacy(t, decomposed(t));
    const DeterminacyReport twisted = classify_determinacy(gauged, decomposed(gauged));
    CHECK(plain.verdict == twisted.verdict);
    CHECK(std::abs(plain.test_point - twisted.test_point) <= 1e-12);
    REQUIRE(plain.samples.size() == twisted.samples.size());
    for (std::size_t i = 0; i < plain.samples.size(); ++i)
        CHECK(std::abs(plain.samples[i].log_mass - twisted.samples[i].log_mass) <=
              1e-10 * std::max(1.0, std::abs(plain.samples[i].log_mass)));
}

TEST_CASE("the verdict ignores the square-root branch") {
    // A direction angle beyond (-pi/2, pi/2] flips the recovered direction to
    // -a and the auto point to its mirror image; a symmetric family has the
    // same masses at both.
    const cplx b{0.5, 0.5};
    const RecurrenceTable flipped =
        affine_table(polyrec::hermite_table(256), std::polar(1.0, 2.2), b);
    const RecurrenceTable straight =
        affine_table(polyrec::hermite_table(256), std::polar(1.0, 2.2 - 3.14159265358979323846), b);
    const DeterminacyReport lhs = classify_determinacy(flipped, decomposed(flipped));
    const DeterminacyReport rhs = classify_determinacy(straight, decomposed(straight));
    CHECK(lhs.verdict == Verdict::unique_likely);
    CHECK(lhs.verdict == rhs.verdict);
    REQUIRE(lhs.samples.size() == rhs.samples.size());
    for (std::size_t i = 0; i < lhs.samples.size(); ++i)
        CHECK(std::abs(lhs.samples[i].log_mass - rhs.samples[i].log_mass) <=
              1e-10 * std::max(1.0, std::abs(lhs.samples[i].log_mass)));
}

TEST_CASE("schedules are validated") {
    const RecurrenceTable t = polyrec::chebyshev_table(32);
    const ThreeTermForm f = decomposed(t);

    DeterminacySchedule empty;
    empty.counts = {};
    REQUIRE_THROWS_AS(classify_determinacy(t, f, std::nullopt, empty), std::invalid_argument);

    DeterminacySchedule flat;
    flat.counts = {10, 10};
    REQUIRE_THROWS_WITH(classify_determinacy(t, f, std::nullopt, flat),
                        ContainsSubstring("strictly increasing"));

    DeterminacySchedule zero;
    zero.counts = {0, 5};
    REQUIRE_THROWS_AS(classify_determinacy(t, f, std::nullopt, zero), std::invalid_argument);

    DeterminacySchedule single;
    single.counts = {30};
    const DeterminacyReport rep = classify_determinacy(t, f, std::nullopt, single);
    CHECK(rep.verdict == Verdict::inconclusive);
    CHECK_THAT(rep.reason, ContainsSubstring("single sample"));
    CHECK(rep.samples.size() == 1);
    CHECK_FALSE(rep.growth_rate.has_value());
}

TEST_CASE("mass queries respect the table depth") {
    const RecurrenceTable t = polyrec::chebyshev_table(16);
    const cplx z{0.0, 1.0};
    CHECK(std::isfinite(partial_mass_log(t, z, 17)));
    REQUIRE_THROWS_AS(partial_mass_log(t, z, 18), polyrec::insufficient_table);
    // The default schedule reaches 200 terms and needs 199 rows.
    REQUIRE_THROWS_AS(classify_determinacy(t, decomposed(t)), polyrec::insufficient_table);
}
