#pragma once

// File formats and report serialization.
//
// Input (JSON, parsed with the vendored nlohmann header) is either an
// explicit row table
//
//   {"schema_version":1, "kind":"recurrence",
//    "rows":[{"n":0, "first":0, "coeffs":[[re,im], ...]}, ...]}
//
// or a named family
//
//   {"schema_version":1, "kind":"recurrence",
//    "family":"rotated-hermite", "rows":64, "params":{"a_arg":0.785, "b":[1,2]}}
//
// Rows must be stored normalized (leading stored coefficient nonzero); the
// parser rejects rather than repairs.  Output is produced by a small
// deterministic writer: fixed field order, 17 significant digits, "-0"
// normalized to "0", non-finite numbers emitted as null (companion fields
// carry the information, e.g. log_mass next to mass).  Byte-identical reruns
// are part of the CLI contract, which rules out library serializers that
// reorder keys or pick shortest round-trip digits.

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "polyrec/analysis.hpp"
#include "polyrec/determinacy.hpp"
#include "polyrec/families.hpp"
#include "polyrec/recurrence.hpp"
#include "polyrec/spectral.hpp"
#include "polyrec/three_term.hpp"

namespace polyrec {

inline constexpr int schema_version = 1;

// ---------------------------------------------------------------------------
// Small literal parsers.

// Accepts "1.5", "-2i", "1+2i", "3e-2-0.5i", "i", "-i".
inline cplx parse_complex(std::string_view sv) {
    std::string s(sv);
    std::erase(s, ' ');
    const auto fail = [&]() -> cplx {
        throw std::invalid_argument("cannot parse complex literal '" + s + "'");
    };
    if (s.empty())
        return fail();
    const char* q = s.c_str();
    auto read_num = [](const char*& r, double& out) {
        char* end = nullptr;
        const double v = std::strtod(r, &end);
        if (end == r || !std::isfinite(v))
            return false;
        out = v;
        r = end;
        return true;
    };
    auto read_sign_i = [](const char*& r, double& sign) {
        sign = 1.0;
        if (*r == '+') {
            ++r;
        } else if (*r == '-') {
            sign = -1.0;
            ++r;
        }
        if (*r == 'i') {
            ++r;
            return true;
        }
        return false;
    };
    double first = 0.0;
    if (!read_num(q, first)) {
        double sign = 0.0;
        if (read_sign_i(q, sign) && *q == '\0')
            return {0.0, sign};
        return fail();
    }
    if (*q == '\0')
        return {first, 0.0};
    if (*q == 'i' && q[1] == '\0')
        return {0.0, first};
    if (*q == '+' || *q == '-') {
        double second = 0.0;
        const char* r = q;
        if (read_num(r, second)) {
            if (*r == 'i' && r[1] == '\0')
                return {first, second};
            return fail();
        }
        double sign = 0.0;
        if (read_sign_i(q, sign) && *q == '\0')
            return {first, sign};
    }
    return fail();
}

// ---------------------------------------------------------------------------
// Deterministic JSON emission.

namespace jsonfmt {

inline void append_double(std::string& s, double x) {
    if (!std::isfinite(x)) {
        s += "null";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    if (buf[0] == '-' && x == 0.0)
        s += buf + 1; // normalize -0
    else
        s += buf;
}

inline void append_complex(std::string& s, cplx z) {
    s += '[';
    append_double(s, z.real());
    s += ',';
    append_double(s, z.imag());
    s += ']';
}

inline void append_string(std::string& s, std::string_view v) {
    s += '"';
    for (char c : v) {
        switch (c) {
        case '"': s += "\\\""; break;
        case '\\': s += "\\\\"; break;
        case '\n': s += "\\n"; break;
        case '\t': s += "\\t"; break;
        case '\r': s += "\\r"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                s += buf;
            } else {
                s += c;
            }
        }
    }
    s += '"';
}

} // namespace jsonfmt

inline std::string to_json(const RecurrenceTable& t) {
    using namespace jsonfmt;
    std::string s = "{\"schema_version\":1,\"kind\":\"recurrence\",\"rows\":[";
    for (std::size_t n = 0; n < t.num_rows(); ++n) {
        const RecurrenceRow& row = t.rows()[n];
        if (n > 0)
            s += ',';
        s += "{\"n\":" + std::to_string(n) + ",\"first\":" + std::to_string(row.first) +
             ",\"coeffs\":[";
        for (std::size_t j = 0; j < row.coeffs.size(); ++j) {
            if (j > 0)
                s += ',';
            append_complex(s, row.coeffs[j]);
        }
        s += "]}";
    }
    s += "]}";
    return s;
}

namespace jsonfmt {

inline void append_form_body(std::string& s, const ThreeTermForm& f) {
    s += "{\"a\":";
    append_complex(s, f.a);
    s += ",\"a_arg\":";
    append_double(s, std::arg(f.a));
    s += ",\"b\":";
    append_complex(s, f.b);
    s += ",\"delta\":";
    append_complex(s, f.delta);
    s += ",\"size\":" + std::to_string(f.size());
    s += ",\"c\":[";
    for (std::size_t n = 0; n < f.c.size(); ++n) {
        if (n > 0)
            s += ',';
        append_complex(s, f.c[n]);
    }
    s += "],\"d\":[";
    for (std::size_t n = 0; n < f.d.size(); ++n) {
        if (n > 0)
            s += ',';
        append_double(s, f.d[n]);
    }
    s += "]}";
}

inline void append_failure_body(std::string& s, const DecomposeFailure& f) {
    s += "{\"reason\":";
    append_string(s, reason_name(f.reason));
    s += ",\"message\":";
    append_string(s, f.message);
    s += ",\"index\":" + std::to_string(f.index);
    s += ",\"residual\":";
    append_double(s, f.residual);
    s += '}';
}

} // namespace jsonfmt

inline std::string to_json(const ThreeTermForm& f) {
    std::string s = "{\"schema_version\":1,\"kind\":\"decompose\",\"decomposable\":true,\"form\":";
    jsonfmt::append_form_body(s, f);
    s += '}';
    return s;
}

inline std::string to_json(const DecomposeFailure& f) {
    std::string s =
        "{\"schema_version\":1,\"kind\":\"decompose\",\"decomposable\":false,\"failure\":";
    jsonfmt::append_failure_body(s, f);
    s += '}';
    return s;
}

inline std::string to_json(const AnalysisReport& rep) {
    using namespace jsonfmt;
    std::string s = "{\"schema_version\":1,\"kind\":\"analysis\"";
    s += ",\"rows\":" + std::to_string(rep.rows);
    s += ",\"tolerance\":";
    append_double(s, rep.tolerance);
    s += ",\"irreducible\":";
    s += rep.irreducibility.irreducible ? "true" : "false";
    s += ",\"min_subdiagonal\":";
    append_double(s, rep.irreducibility.min_subdiagonal);
    s += ",\"first_reducible_row\":";
    s += rep.irreducibility.first_failure < 0 ? "null"
                                              : std::to_string(rep.irreducibility.first_failure);
    s += ",\"band\":{\"max_length\":" + std::to_string(rep.band.max_length);
    s += ",\"band_limited\":";
    s += rep.band.band_limited ? "true" : "false";
    s += ",\"note\":\"band width measured on stored rows; continuation beyond them is "
         "assumed, not certified\"}";
    s += ",\"formally_normal\":";
    if (rep.normality)
        s += rep.normality->formally_normal ? "true" : "false";
    else
        s += "null";
    s += ",\"normality\":";
    if (rep.normality) {
        const NormalityCheck& n = *rep.normality;
        s += "{\"region_limit\":" + std::to_string(n.region_limit);
        s += ",\"max_residual\":";
        append_double(s, n.max_residual);
        s += ",\"worst_entry\":[" + std::to_string(n.worst_m) + ',' + std::to_string(n.worst_n) +
             ']';
        s += ",\"first_violation\":";
        if (n.first_violation)
            s += '[' + std::to_string(n.first_violation->first) + ',' +
                 std::to_string(n.first_violation->second) + ']';
        else
            s += "null";
        s += ",\"first_violation_residual\":";
        append_double(s, n.first_violation_residual);
        s += '}';
    } else {
        s += "null";
    }
    s += ",\"relations\":";
    if (rep.relations) {
        s += "{\"norm_balance\":";
        append_double(s, rep.relations->norm_balance);
        s += ",\"diagonal_shift\":";
        append_double(s, rep.relations->diagonal_shift);
        s += ",\"offdiagonal_ratio\":";
        append_double(s, rep.relations->offdiagonal_ratio);
        s += '}';
    } else {
        s += "null";
    }
    s += ",\"decomposable\":";
    s += rep.decomposable() ? "true" : "false";
    s += ",\"form\":";
    if (rep.form)
        append_form_body(s, *rep.form);
    else
        s += "null";
    s += ",\"failure\":";
    if (rep.failure)
        append_failure_body(s, *rep.failure);
    else
        s += "null";
    s += '}';
    return s;
}

inline std::string to_json(const DiscreteMeasure& mu) {
    using namespace jsonfmt;
    std::string s = "{\"schema_version\":1,\"kind\":\"measure\"";
    s += ",\"line_a\":";
    append_complex(s, mu.line_a);
    s += ",\"line_b\":";
    append_complex(s, mu.line_b);
    s += ",\"size\":" + std::to_string(mu.size());
    s += ",\"nodes\":[";
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (k > 0)
            s += ',';
        append_complex(s, mu.nodes[k]);
    }
    s += "],\"weights\":[";
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (k > 0)
            s += ',';
        append_double(s, mu.weights[k]);
    }
    s += "]}";
    return s;
}

inline std::string to_json(const DeterminacyReport& rep) {
    using namespace jsonfmt;
    std::string s = "{\"schema_version\":1,\"kind\":\"determinacy\"";
    s += ",\"test_point\":";
    append_complex(s, rep.test_point);
    s += ",\"off_line_distance\":";
    append_double(s, rep.off_line_distance);
    s += ",\"verdict\":";
    append_string(s, verdict_name(rep.verdict));
    s += ",\"reason\":";
    append_string(s, rep.reason);
    s += ",\"note\":";
    append_string(s, DeterminacyReport::note);
    s += ",\"growth_rate\":";
    if (rep.growth_rate)
        append_double(s, *rep.growth_rate);
    else
        s += "null";
    s += ",\"samples\":[";
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
        if (i > 0)
            s += ',';
        s += "{\"count\":" + std::to_string(rep.samples[i].count);
        s += ",\"mass\":";
        append_double(s, rep.samples[i].mass); // null past double range
        s += ",\"log_mass\":";
        append_double(s, rep.samples[i].log_mass);
        s += '}';
    }
    s += "],\"ratios\":[";
    for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
        if (i > 0)
            s += ',';
        append_double(s, rep.ratios[i]);
    }
    s += "]}";
    return s;
}

// Summary of a Gram-matrix orthonormality check.
inline std::string gram_check_json(std::size_t points, std::size_t gram_size, double residual,
                                   double tolerance) {
    using namespace jsonfmt;
    std::string s = "{\"schema_version\":1,\"kind\":\"gram-check\"";
    s += ",\"points\":" + std::to_string(points);
    s += ",\"gram_size\":" + std::to_string(gram_size);
    s += ",\"residual\":";
    append_double(s, residual);
    s += ",\"tolerance\":";
    append_double(s, tolerance);
    s += ",\"orthonormal\":";
    s += residual <= tolerance ? "true" : "false";
    s += '}';
    return s;
}

// ---------------------------------------------------------------------------
// CSV emission.

namespace csvfmt {

inline void append_double(std::string& s, double x) {
    if (std::isnan(x)) {
        s += "nan";
    } else if (std::isinf(x)) {
        s += x > 0 ? "inf" : "-inf";
    } else {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        if (buf[0] == '-' && x == 0.0)
            s += buf + 1;
        else
            s += buf;
    }
}

} // namespace csvfmt

inline std::string to_csv(const DiscreteMeasure& mu) {
    std::string s = "index,node_re,node_im,weight\n";
    for (std::size_t k = 0; k < mu.size(); ++k) {
        s += std::to_string(k);
        s += ',';
        csvfmt::append_double(s, mu.nodes[k].real());
        s += ',';
        csvfmt::append_double(s, mu.nodes[k].imag());
        s += ',';
        csvfmt::append_double(s, mu.weights[k]);
        s += '\n';
    }
    return s;
}

inline std::string to_csv(const DeterminacyReport& rep) {
    std::string s = "count,mass,log_mass\n";
    for (const DeterminacySample& smp : rep.samples) {
        s += std::to_string(smp.count);
        s += ',';
        csvfmt::append_double(s, smp.mass);
        s += ',';
        csvfmt::append_double(s, smp.log_mass);
        s += '\n';
    }
    return s;
}

// ---------------------------------------------------------------------------
// Parsing.

namespace iodetail {

inline cplx read_complex(const nlohmann::json& v, const std::string& where) {
    if (v.is_number())
        return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw table_error(where + ": expected a number or a [re, im] pair");
}

inline FamilySpec read_family(const nlohmann::json& j) {
    FamilySpec spec;
    if (!j["family"].is_string())
        throw table_error("'family' must be a string (a built-in family name)");
    spec.name = j["family"].get<std::string>();
    if (!j.contains("rows") || !j["rows"].is_number_integer() || j["rows"].get<long long>() < 1)
        throw table_error("family documents need 'rows' (positive integer)");
    spec.rows = j["rows"].get<std::size_t>();
    if (j.contains("params")) {
        const nlohmann::json& jp = j["params"];
        if (!jp.is_object())
            throw table_error("'params' must be an object");
        if (jp.contains("a_arg")) {
            if (!jp["a_arg"].is_number())
                throw table_error("params: 'a_arg' must be a number");
            spec.a_arg = jp["a_arg"].get<double>();
        }
        if (jp.contains("b"))
            spec.b = read_complex(jp["b"], "params: 'b'");
        if (jp.contains("ratio")) {
            if (!jp["ratio"].is_number())
                throw table_error("params: 'ratio' must be a number");
            spec.ratio = jp["ratio"].get<double>();
        }
    }
    return spec;
}

} // namespace iodetail

inline RecurrenceTable parse_recurrence_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw table_error(std::string("input is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw table_error("top-level JSON value must be an object");
    if (j.contains("schema_version") &&
        (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != schema_version))
        throw table_error("unsupported schema_version (this build reads version 1)");
    if (j.contains("kind") && j["kind"] != "recurrence")
        throw table_error("expected kind 'recurrence'");

    if (j.contains("family"))
        return make_family(iodetail::read_family(j));

    if (!j.contains("rows") || !j["rows"].is_array() || j["rows"].empty())
        throw table_error("either 'rows' (nonempty array) or 'family' is required");
    const nlohmann::json& jr = j["rows"];
    std::vector<RecurrenceRow> rows;
    rows.reserve(jr.size());
    for (std::size_t i = 0; i < jr.size(); ++i) {
        const std::string where = "row " + std::to_string(i);
        const nlohmann::json& r = jr[i];
        if (!r.is_object())
            throw table_error(where + ": expected an object");
        if (r.contains("n")) {
            if (!r["n"].is_number_integer() || r["n"].get<long long>() != static_cast<long long>(i))
                throw table_error(where + ": field 'n' must equal the row position");
        }
        if (!r.contains("first") || !r["first"].is_number_integer() || r["first"].get<long long>() < 0)
            throw table_error(where + ": 'first' (non-negative integer) is required");
        if (!r.contains("coeffs") || !r["coeffs"].is_array() || r["coeffs"].empty())
            throw table_error(where + ": 'coeffs' (nonempty array) is required");
        RecurrenceRow row;
        row.first = r["first"].get<int>();
        for (std::size_t k = 0; k < r["coeffs"].size(); ++k)
            row.coeffs.push_back(iodetail::read_complex(
                r["coeffs"][k], where + ", coefficient " + std::to_string(k)));
        if (row.coeffs.size() > 1 && row.coeffs.front() == cplx(0.0, 0.0))
            throw table_error(where +
                              ": leading stored coefficient is zero; rows must be normalized");
        rows.push_back(std::move(row));
    }
    return RecurrenceTable(std::move(rows)); // re-validates shape with row-indexed messages
}

// ---------------------------------------------------------------------------
// Files.

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in.good() && !in.eof())
        throw std::runtime_error("error while reading '" + path + "'");
    return std::move(ss).str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out.good())
        throw std::runtime_error("error while writing '" + path + "'");
}

inline RecurrenceTable load_table(const std::string& path) {
    return parse_recurrence_json(read_file(path));
}

} // namespace polyrec
