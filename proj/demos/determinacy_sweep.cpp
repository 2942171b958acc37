// Demo: compare the mass-growth heuristic across families.  Chebyshev and
// Hermite masses explode off the line (unique measure); the geometric family
// with fast-growing couplings stabilizes (many measures fit the same table).

#include <cstdio>
#include <variant>

#include "polyrec/polyrec.hpp"

using namespace polyrec;

namespace {

void sweep(const char* name, const RecurrenceTable& table) {
    const auto form = std::get<ThreeTermForm>(decompose(table));
    const DeterminacyReport rep = classify_determinacy(table, form);
    std::printf("%-10s z = %.2f%+.2fi  ", name, rep.test_point.real(), rep.test_point.imag());
    for (const DeterminacySample& s : rep.samples)
        std::printf("log S_%-3zu = %8.2f  ", s.count, s.log_mass);
    std::printf("-> %s\n", verdict_name(rep.verdict));
}

} // namespace

int main() {
    sweep("chebyshev", chebyshev_table(256));
    sweep("hermite", hermite_table(256));
    sweep("geometric", geometric_table(256, 3.0));
    std::printf("(%s)\n", DeterminacyReport::note);
    return 0;
}
