// Demo: take a rotated Hermite table, recover its carrier line, build the
// 12-point approximating measure and integrate a few functions with it.

#include <cstdio>
#include <variant>

#include "polyrec/polyrec.hpp"

using namespace polyrec;

int main() {
    // Hermite recurrence transported to the line z = (1 + 2i) + e^{i pi/4} t.
    const cplx a = std::polar(1.0, 0.78539816339744831);
    const cplx b{1.0, 2.0};
    const RecurrenceTable table = affine_table(hermite_table(32), a, b);

    const DecomposeResult res = decompose(table);
    if (!std::holds_alternative<ThreeTermForm>(res)) {
        std::printf("not decomposable: %s\n",
                    std::get<DecomposeFailure>(res).message.c_str());
        return 1;
    }
    const ThreeTermForm& form = std::get<ThreeTermForm>(res);
    std::printf("carrier line: z = %.3f%+.3fi + (%.3f%+.3fi) t\n", form.b.real(),
                form.b.imag(), form.a.real(), form.a.imag());

    const DiscreteMeasure mu = gauss_measure(form, 12);
    std::printf("12-point measure, node span |t| up to %.3f\n",
                std::abs(std::conj(form.a) * (mu.nodes.back() - form.b)));

    // The polynomials of the table are orthonormal against mu up to the
    // quadrature-exact degree.
    std::printf("gram residual (12x12): %.3e\n", verify_orthonormality(table, mu, 12));

    // First few moments of the measure.
    const std::vector<cplx> m = moments(mu, 4);
    for (std::size_t j = 0; j < m.size(); ++j)
        std::printf("  moment %zu = %.6f%+.6fi\n", j, m[j].real(), m[j].imag());
    return 0;
}
