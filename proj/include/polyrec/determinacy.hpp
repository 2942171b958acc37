#pragma once

// Measure-uniqueness heuristics.
//
// A decomposable table has a unique orthonormalizing measure exactly when the
// mass series sum |P_n(z)|^2 diverges at some (equivalently every) point off
// the carrier line.  Finite data cannot certify divergence, so this module
// reports a graded verdict from partial masses S_N(z) = sum_{n<N} |P_n(z)|^2
// along a refinement schedule: sustained geometric growth suggests a unique
// measure, stabilization suggests many, anything else is inconclusive.  On
// the line itself the criterion is uninformative and the verdict is always
// inconclusive.
//
// Partial masses are accumulated in log scale with windowed rescaling of the
// recurrence values, so S_N far beyond double range is still classified
// correctly (masses overflow around exp(709)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyrec/recurrence.hpp"
#include "polyrec/three_term.hpp"

namespace polyrec {

namespace detail {

inline double logaddexp(double x, double y) {
    if (x == -std::numeric_limits<double>::infinity())
        return y;
    if (y == -std::numeric_limits<double>::infinity())
        return x;
    const double m = std::max(x, y);
    return m + std::log1p(std::exp(-std::abs(x - y)));
}

// log S_N at each checkpoint in one sweep.  Checkpoints must be strictly
// increasing, >= 1, and the last needs checkpoint - 1 stored rows.  The
// recurrence values are kept under a running scale exp(L); only the window a
// row of width w can still reach is rescaled, older slots go stale.
inline std::vector<double> partial_mass_log_at(const RecurrenceTable& t, cplx z,
                                               std::span<const std::size_t> checkpoints) {
    if (checkpoints.empty())
        throw std::invalid_argument("no checkpoints given");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] == 0)
            throw std::invalid_argument("checkpoints must be positive");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
            throw std::invalid_argument("checkpoints must be strictly increasing");
    }
    const std::size_t count = checkpoints.back();
    if (count > t.num_rows() + 1)
        throw insufficient_table("partial mass of " + std::to_string(count) +
                                 " terms needs " + std::to_string(count - 1) +
                                 " rows, table has " + std::to_string(t.num_rows()));

    const std::size_t w = t.max_row_length();
    std::vector<cplx> vals(count);
    vals[0] = 1.0;
    double scale_log = 0.0; // true P_i = vals[i] * exp(scale_log)
    double log_s = 0.0;     // log S_1 = log |P_0|^2

    std::vector<double> out;
    out.reserve(checkpoints.size());
    std::size_t ci = 0;
    if (checkpoints[0] == 1) {
        out.push_back(log_s);
        ++ci;
    }

    for (std::size_t n = 0; n + 1 < count; ++n) {
        const RecurrenceRow& row = t.rows()[n];
        cplx acc = z * vals[n];
        for (std::size_t j = 0; j + 1 < row.coeffs.size(); ++j)
            acc -= row.coeffs[j] * vals[row.first + j];
        vals[n + 1] = acc / row.coeffs.back();

        const double mag = std::abs(vals[n + 1]);
        log_s = logaddexp(log_s, 2.0 * (std::log(mag) + scale_log));

        // Rescale the still-reachable window when it drifts out of range.
        const std::size_t lo = n + 3 > w ? n + 3 - w : 0;
        double peak = 0.0;
        for (std::size_t i = lo; i <= n + 1; ++i)
            peak = std::max(peak, std::abs(vals[i]));
        if (peak > 1e100 || (peak > 0.0 && peak < 1e-100)) {
            for (std::size_t i = lo; i <= n + 1; ++i)
                vals[i] /= peak;
            scale_log += std::log(peak);
        }

        if (ci < checkpoints.size() && checkpoints[ci] == n + 2) {
            out.push_back(log_s);
            ++ci;
        }
    }
    return out;
}

} // namespace detail

// log of S_n(z) = sum_{k<n} |P_k(z)|^2; -inf for n = 0.
inline double partial_mass_log(const RecurrenceTable& t, cplx z, std::size_t n) {
    if (n == 0)
        return -std::numeric_limits<double>::infinity();
    const std::size_t cps[1] = {n};
    return detail::partial_mass_log_at(t, z, cps)[0];
}

// S_n(z) itself; overflows to +inf beyond double range (use the log form).
inline double partial_mass(const RecurrenceTable& t, cplx z, std::size_t n) {
    return std::exp(partial_mass_log(t, z, n));
}

// ---------------------------------------------------------------------------

enum class Verdict { unique_likely, non_unique_likely, inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::unique_likely: return "unique-likely";
    case Verdict::non_unique_likely: return "non-unique-likely";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

struct DeterminacySchedule {
    std::vector<std::size_t> counts{25, 50, 100, 200};
    double ratio_threshold = 4.0;   // per-refinement growth for unique-likely
    double stabilization_rtol = 1e-6; // final relative change for non-unique-likely
    double line_tol = 1e-8;         // distance below which a point counts as on-line
};

struct DeterminacySample {
    std::size_t count = 0;
    double mass = 0.0; // +inf when beyond double range; log_mass stays finite
    double log_mass = 0.0;
};

struct DeterminacyReport {
    cplx test_point{0.0, 0.0};
    double off_line_distance = 0.0;
    std::vector<DeterminacySample> samples;
    std::vector<double> ratios;        // successive mass ratios
    std::optional<double> growth_rate; // geometric mean per-term growth factor
    Verdict verdict = Verdict::inconclusive;
    std::string reason;

    // Every report carries this caveat: the verdict grades finite evidence.
    static constexpr const char* note =
        "finite-data heuristic: divergence of the full mass series cannot be "
        "certified from finitely many terms";
};

// Canonical probe: one unit off the line above the (lower) median diagonal
// entry, so the point sits mid-spectrum rather than near an edge.
inline cplx default_test_point(const ThreeTermForm& f) {
    validate(f);
    std::vector<double> d = f.d;
    std::sort(d.begin(), d.end());
    const double med = d[(d.size() - 1) / 2];
    return f.b + f.a * cplx(med, 1.0);
}

inline DeterminacyReport classify_determinacy(const RecurrenceTable& t, const ThreeTermForm& f,
                                              std::optional<cplx> test_point = std::nullopt,
                                              const DeterminacySchedule& schedule = {}) {
    validate(f);
    if (schedule.counts.empty())
        throw std::invalid_argument("empty refinement schedule");
    for (std::size_t i = 1; i < schedule.counts.size(); ++i)
        if (schedule.counts[i] <= schedule.counts[i - 1])
            throw std::invalid_argument("refinement schedule must be strictly increasing");

    DeterminacyReport rep;
    rep.test_point = test_point.value_or(default_test_point(f));
    // With |a| = 1, Im(conj(a) (z - b)) is the signed distance from the line.
    rep.off_line_distance = std::abs(std::imag(std::conj(f.a) * (rep.test_point - f.b)));

    if (rep.off_line_distance <= schedule.line_tol) {
        rep.verdict = Verdict::inconclusive;
        rep.reason = "test point lies on the carrier line (distance " +
                     std::to_string(rep.off_line_distance) +
                     "); the mass criterion is uninformative there";
        return rep;
    }

    const std::vector<double> logs =
        detail::partial_mass_log_at(t, rep.test_point, schedule.counts);
    rep.samples.resize(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i)
        rep.samples[i] = {schedule.counts[i], std::exp(logs[i]), logs[i]};
    rep.ratios.resize(logs.size() > 0 ? logs.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < logs.size(); ++i)
        rep.ratios[i] = std::exp(logs[i + 1] - logs[i]);

    if (logs.size() < 2) {
        rep.verdict = Verdict::inconclusive;
        rep.reason = "schedule has a single sample; growth cannot be assessed";
        return rep;
    }

    double mean_step = 0.0;
    for (std::size_t i = 0; i + 1 < logs.size(); ++i)
        mean_step += (logs[i + 1] - logs[i]) /
                     static_cast<double>(schedule.counts[i + 1] - schedule.counts[i]);
    rep.growth_rate = std::exp(mean_step / static_cast<double>(logs.size() - 1));

    const bool sustained = std::all_of(rep.ratios.begin(), rep.ratios.end(), [&](double r) {
        return r >= schedule.ratio_threshold;
    });
    const double final_change = std::exp(logs.back() - logs[logs.size() - 2]) - 1.0;
    if (sustained) {
        rep.verdict = Verdict::unique_likely;
        rep.reason = "partial masses grew by at least the threshold factor " +
                     std::to_string(schedule.ratio_threshold) + " at every refinement";
    } else if (std::abs(final_change) <= schedule.stabilization_rtol) {
        rep.verdict = Verdict::non_unique_likely;
        rep.reason = "partial masses stabilized (relative change " +
                     std::to_string(std::abs(final_change)) + " over the last refinement)";
    } else {
        rep.verdict = Verdict::inconclusive;
        rep.reason = "mass growth is neither sustained nor stabilized over the schedule";
    }
    return rep;
}

} // namespace polyrec
