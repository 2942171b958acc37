// polyrec: recurrence-table analysis from the command line.
//
// Subcommands: analyze, decompose, measure, verify, determinacy, generate.
// The input is a JSON table file or a built-in family; reports go to stdout
// (or --output) as deterministic JSON/CSV, with --format text for a reading
// summary.  Exit status separates mathematics from operations:
//   0  positive verdict (decomposable / orthonormal / unique-likely)
//   2  negative mathematical verdict
//   1  operational failure (bad file, bad flags, not enough rows, ...)

#include <complex>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "polyrec/polyrec.hpp"

namespace {

using polyrec::cplx;

struct InputOpts {
    std::string path;
    std::string family;
    std::size_t rows = 64;
    double a_arg = 0.0;
    std::string b = "0";
    double ratio = 3.0;
};

void add_input_options(CLI::App* cmd, InputOpts& in, bool with_file = true) {
    if (with_file)
        cmd->add_option("input", in.path, "recurrence table file (JSON)")
            ->check(CLI::ExistingFile);
    cmd->add_option("--family", in.family, "built-in family instead of a file")
        ->check(CLI::IsMember(polyrec::family_names()));
    cmd->add_option("--rows", in.rows, "rows to generate for --family (default 64)");
    cmd->add_option("--a-arg", in.a_arg, "line direction argument, rotated-* families");
    cmd->add_option("--b", in.b, "line offset (complex literal), rotated-* families");
    cmd->add_option("--ratio", in.ratio, "coupling growth factor, geometric family");
}

polyrec::RecurrenceTable resolve_input(const InputOpts& in) {
    if (!in.path.empty() && !in.family.empty())
        throw std::runtime_error("give either an input file or --family, not both");
    if (in.path.empty() && in.family.empty())
        throw std::runtime_error("an input file or --family is required");
    if (!in.path.empty())
        return polyrec::load_table(in.path);
    polyrec::FamilySpec spec;
    spec.name = in.family;
    spec.rows = in.rows;
    spec.a_arg = in.a_arg;
    spec.b = polyrec::parse_complex(in.b);
    spec.ratio = in.ratio;
    return polyrec::make_family(spec);
}

void emit(const std::string& content, const std::string& path) {
    std::string out = content;
    if (out.empty() || out.back() != '\n')
        out += '\n';
    if (path.empty())
        std::cout << out;
    else
        polyrec::write_file(path, out);
}

std::string fmt_cplx(cplx z) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real(), z.imag());
    return buf;
}

std::string fmt_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string analysis_text(const polyrec::AnalysisReport& rep) {
    std::string s;
    s += "rows: " + std::to_string(rep.rows) + "\n";
    s += "irreducible: ";
    s += rep.irreducibility.irreducible
             ? "yes (min sub-diagonal " + fmt_num(rep.irreducibility.min_subdiagonal) + ")\n"
             : "no (row " + std::to_string(rep.irreducibility.first_failure) + ")\n";
    s += "band: max length " + std::to_string(rep.band.max_length) +
         (rep.band.band_limited ? ", band-limited\n" : ", too wide for safe analysis\n");
    if (rep.normality) {
        s += "formally normal: ";
        s += rep.normality->formally_normal ? "yes" : "no";
        s += " (max residual " + fmt_num(rep.normality->max_residual) + " at (" +
             std::to_string(rep.normality->worst_m) + "," +
             std::to_string(rep.normality->worst_n) + "), region 0.." +
             std::to_string(rep.normality->region_limit) + ")\n";
    } else {
        s += "formally normal: undecidable (no truncation-safe entries)\n";
    }
    if (rep.relations)
        s += "relation residuals: norm balance " + fmt_num(rep.relations->norm_balance) +
             ", diagonal shift " + fmt_num(rep.relations->diagonal_shift) +
             ", off-diagonal ratio " + fmt_num(rep.relations->offdiagonal_ratio) + "\n";
    if (rep.form) {
        s += "decomposable: yes\n";
        s += "  line: z = " + fmt_cplx(rep.form->b) + " + " + fmt_cplx(rep.form->a) + " * t\n";
        s += "  couplings: " + std::to_string(rep.form->size()) + "\n";
        s += "verdict: admits an orthonormalizing measure on the line above\n";
    } else {
        s += "decomposable: no\n";
        if (rep.failure)
            s += "verdict: " + std::string(polyrec::reason_name(rep.failure->reason)) + " -- " +
                 rep.failure->message + "\n";
    }
    return s;
}

std::string determinacy_text(const polyrec::DeterminacyReport& rep) {
    std::string s;
    s += "test point: " + fmt_cplx(rep.test_point) + " (distance " +
         fmt_num(rep.off_line_distance) + " off the line)\n";
    for (const polyrec::DeterminacySample& smp : rep.samples)
        s += "  S_" + std::to_string(smp.count) + " = " + fmt_num(smp.mass) +
             " (log " + fmt_num(smp.log_mass) + ")\n";
    if (rep.growth_rate)
        s += "mean per-term growth factor: " + fmt_num(*rep.growth_rate) + "\n";
    s += "verdict: " + std::string(polyrec::verdict_name(rep.verdict)) + " -- " + rep.reason +
         "\n";
    s += "note: " + std::string(polyrec::DeterminacyReport::note) + "\n";
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"analysis of banded polynomial recurrence tables"};
    app.require_subcommand(1);

    InputOpts in;
    std::string output;
    std::string format;
    double tol = 1e-10;

    CLI::App* analyze = app.add_subcommand("analyze", "full structural report");
    add_input_options(analyze, in);
    analyze->add_option("--tol", tol, "decision tolerance (default 1e-10)");
    analyze->add_option("--output,-o", output, "write the report here instead of stdout");
    analyze->add_option("--format", format, "json (default) or text")
        ->check(CLI::IsMember({"json", "text"}));

    CLI::App* decompose = app.add_subcommand("decompose", "extract the three-term form");
    add_input_options(decompose, in);
    decompose->add_option("--tol", tol, "decision tolerance (default 1e-10)");
    decompose->add_option("--output,-o", output, "write the result here instead of stdout");
    decompose->add_option("--format", format, "json (default) or text")
        ->check(CLI::IsMember({"json", "text"}));

    std::size_t points = 0;
    double eig_tol = 1e-12;
    CLI::App* measure = app.add_subcommand("measure", "discrete approximating measure");
    add_input_options(measure, in);
    measure->add_option("--points,-N", points, "number of nodes")->required();
    measure->add_option("--tol", tol, "decomposition tolerance (default 1e-10)");
    measure->add_option("--eig-tol", eig_tol, "eigenpair residual tolerance (default 1e-12)");
    measure->add_option("--output,-o", output, "write the measure here instead of stdout");
    measure->add_option("--format", format, "csv (default) or json")
        ->check(CLI::IsMember({"csv", "json"}));

    std::size_t gram_size = 0;
    double gram_tol = 1e-9;
    CLI::App* verify = app.add_subcommand("verify", "orthonormality of the measure");
    add_input_options(verify, in);
    verify->add_option("--points,-N", points, "number of nodes")->required();
    verify->add_option("--gram-size,-M", gram_size,
                       "Gram matrix size (default: number of nodes)");
    verify->add_option("--tol", tol, "decomposition tolerance (default 1e-10)");
    verify->add_option("--eig-tol", eig_tol, "eigenpair residual tolerance (default 1e-12)");
    verify->add_option("--gram-tol", gram_tol, "acceptance threshold (default 1e-9)");
    verify->add_option("--output,-o", output, "write the summary here instead of stdout");
    verify->add_option("--format", format, "json (default) or text")
        ->check(CLI::IsMember({"json", "text"}));

    std::string z_str;
    std::vector<std::size_t> schedule;
    polyrec::DeterminacySchedule sched;
    CLI::App* determinacy = app.add_subcommand("determinacy", "measure-uniqueness heuristic");
    add_input_options(determinacy, in);
    determinacy->add_option("--z", z_str, "test point (complex literal; default: auto)");
    determinacy->add_option("--schedule", schedule,
                            "partial-mass checkpoints (default 25,50,100,200)")
        ->delimiter(',');
    determinacy->add_option("--ratio-threshold", sched.ratio_threshold,
                            "growth factor for unique-likely (default 4)");
    determinacy->add_option("--stabilization-rtol", sched.stabilization_rtol,
                            "relative change for non-unique-likely (default 1e-6)");
    determinacy->add_option("--line-tol", sched.line_tol,
                            "distance treated as on-line (default 1e-8)");
    determinacy->add_option("--tol", tol, "decomposition tolerance (default 1e-10)");
    determinacy->add_option("--output,-o", output, "write the report here instead of stdout");
    determinacy->add_option("--format", format, "json (default), csv or text")
        ->check(CLI::IsMember({"json", "csv", "text"}));

    CLI::App* generate = app.add_subcommand("generate", "emit a built-in family as JSON");
    add_input_options(generate, in, /*with_file=*/false);
    generate->add_option("--output,-o", output, "write the table here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*generate) {
            if (in.family.empty())
                throw std::runtime_error("generate requires --family");
            emit(polyrec::to_json(resolve_input(in)), output);
            return 0;
        }

        const polyrec::RecurrenceTable table = resolve_input(in);

        if (*analyze) {
            const polyrec::AnalysisReport rep = polyrec::analyze(table, tol);
            emit(format == "text" ? analysis_text(rep) : polyrec::to_json(rep), output);
            return rep.decomposable() ? 0 : 2;
        }

        if (*decompose) {
            const polyrec::DecomposeResult res = polyrec::decompose(table, tol);
            if (const auto* form = std::get_if<polyrec::ThreeTermForm>(&res)) {
                if (format == "text") {
                    std::string s = "decomposable: yes\nline: z = " + fmt_cplx(form->b) +
                                    " + " + fmt_cplx(form->a) + " * t\ncouplings: " +
                                    std::to_string(form->size()) + "\n";
                    emit(s, output);
                } else {
                    emit(polyrec::to_json(*form), output);
                }
                return 0;
            }
            const auto& fail = std::get<polyrec::DecomposeFailure>(res);
            if (format == "text")
                emit("decomposable: no\nreason: " +
                         std::string(polyrec::reason_name(fail.reason)) + "\n" + fail.message +
                         "\n",
                     output);
            else
                emit(polyrec::to_json(fail), output);
            return 2;
        }

        // The remaining commands need the three-term form first.
        const polyrec::DecomposeResult res = polyrec::decompose(table, tol);
        if (const auto* fail = std::get_if<polyrec::DecomposeFailure>(&res)) {
            emit(polyrec::to_json(*fail), output);
            return 2;
        }
        const polyrec::ThreeTermForm& form = std::get<polyrec::ThreeTermForm>(res);

        if (*measure) {
            const polyrec::DiscreteMeasure mu = polyrec::gauss_measure(form, points, eig_tol);
            emit(format == "json" ? polyrec::to_json(mu) : polyrec::to_csv(mu), output);
            return 0;
        }

        if (*verify) {
            const polyrec::DiscreteMeasure mu = polyrec::gauss_measure(form, points, eig_tol);
            const std::size_t m = gram_size == 0 ? points : gram_size;
            const double residual = polyrec::verify_orthonormality(table, mu, m);
            if (format == "text")
                emit("gram residual " + fmt_num(residual) + " over " + std::to_string(m) + "x" +
                         std::to_string(m) + " (tolerance " + fmt_num(gram_tol) + "): " +
                         (residual <= gram_tol ? "orthonormal" : "NOT orthonormal") + "\n",
                     output);
            else
                emit(polyrec::gram_check_json(points, m, residual, gram_tol), output);
            return residual <= gram_tol ? 0 : 2;
        }

        if (*determinacy) {
            std::optional<cplx> z;
            if (!z_str.empty())
                z = polyrec::parse_complex(z_str);
            if (!schedule.empty())
                sched.counts = schedule;
            const polyrec::DeterminacyReport rep =
                polyrec::classify_determinacy(table, form, z, sched);
            if (format == "text")
                emit(determinacy_text(rep), output);
            else if (format == "csv")
                emit(polyrec::to_csv(rep), output);
            else
                emit(polyrec::to_json(rep), output);
            return rep.verdict == polyrec::Verdict::unique_likely ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1; // unreachable: a subcommand is required
}
