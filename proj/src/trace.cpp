#include "catsim/trace.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "catsim/errors.hpp"
#include "catsim/textio.hpp"

namespace catsim {

namespace {

constexpr double kTickS = 1.0;
constexpr double kTickTolerance = 0.01; // 1% of the 1 s tick

bool finite(double v) { return std::isfinite(v); }

} // namespace

std::string to_string(Scenario s) { return s == Scenario::Suburban ? "suburban" : "highway"; }
std::string to_string(Direction d) { return d == Direction::Uplink ? "uplink" : "downlink"; }

Scenario scenario_from_string(const std::string& s) {
    if (s == "suburban") return Scenario::Suburban;
    if (s == "highway") return Scenario::Highway;
    throw ValidationError("unknown scenario label: " + s);
}

Direction direction_from_string(const std::string& s) {
    if (s == "uplink") return Direction::Uplink;
    if (s == "downlink") return Direction::Downlink;
    throw ValidationError("unknown direction label: " + s);
}

std::vector<std::string> validate_trace(const Trace& trace) {
    std::vector<std::string> violations;
    if (trace.samples.empty()) {
        violations.push_back("trace has no samples");
        return violations;
    }
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const ContextSample& s = trace.samples[i];
        const std::string at = "sample " + std::to_string(i) + ": ";
        if (!finite(s.t) || !finite(s.pos.x) || !finite(s.pos.y) || !finite(s.velocity) ||
            !finite(s.rsrp) || !finite(s.rsrq) || !finite(s.sinr) || !finite(s.carrier_freq)) {
            violations.push_back(at + "non-finite field value");
        }
        if (s.velocity < 0.0) {
            violations.push_back(at + "velocity " + format_double(s.velocity) + " is negative");
        }
        if (s.cqi < 0 || s.cqi > 15) {
            violations.push_back(at + "cqi " + std::to_string(s.cqi) + " outside [0,15]");
        }
        if (s.ta < 0) {
            violations.push_back(at + "ta " + std::to_string(s.ta) + " is negative");
        }
        if (s.carrier_freq <= 0.0) {
            violations.push_back(at + "carrier_freq must be > 0");
        }
        if (i > 0) {
            const double dt = s.t - trace.samples[i - 1].t;
            if (dt <= 0.0) {
                violations.push_back(at + "t " + format_double(s.t) + " not strictly increasing");
            } else if (std::abs(dt - kTickS) > kTickTolerance) {
                violations.push_back(at + "tick spacing " + format_double(dt) +
                                     " deviates more than 1% from 1 s");
            }
        }
    }
    return violations;
}

namespace {

void throw_on_violations(const Trace& trace) {
    const auto violations = validate_trace(trace);
    if (!violations.empty()) throw ValidationError(violations.front());
}

double parse_field_double(std::string_view text, const char* name, std::size_t line_no) {
    double v;
    if (!parse_double(text, v)) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed number in field '" +
                         name + "': '" + std::string(text) + "'");
    }
    return v;
}

std::int64_t parse_field_i64(std::string_view text, const char* name, std::size_t line_no) {
    std::int64_t v;
    if (!parse_i64(text, v)) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed integer in field '" +
                         name + "': '" + std::string(text) + "'");
    }
    return v;
}

} // namespace

Trace parse_trace(std::istream& in) {
    Trace trace;
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError("empty input");
    ++line_no;

    // Optional label comment ahead of the header.
    if (!line.empty() && line[0] == '#') {
        std::istringstream meta(line.substr(1));
        std::string kv;
        while (meta >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = kv.substr(0, eq);
            const std::string val = kv.substr(eq + 1);
            if (key == "scenario") trace.scenario = scenario_from_string(val);
            else if (key == "mno") trace.mno = val;
            else if (key == "direction") trace.direction = direction_from_string(val);
        }
        if (!std::getline(in, line)) throw ParseError("missing header row");
        ++line_no;
    }

    if (line != kTraceCsvHeader) {
        throw ParseError("line " + std::to_string(line_no) + ": expected header '" +
                         kTraceCsvHeader + "', got '" + line + "'");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != 11) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 11 fields, got " +
                             std::to_string(fields.size()));
        }
        ContextSample s;
        s.t = parse_field_double(fields[0], "t", line_no);
        s.pos.x = parse_field_double(fields[1], "x", line_no);
        s.pos.y = parse_field_double(fields[2], "y", line_no);
        s.velocity = parse_field_double(fields[3], "velocity", line_no);
        s.rsrp = parse_field_double(fields[4], "rsrp", line_no);
        s.rsrq = parse_field_double(fields[5], "rsrq", line_no);
        s.sinr = parse_field_double(fields[6], "sinr", line_no);
        const auto cqi = parse_field_i64(fields[7], "cqi", line_no);
        if (cqi < 0 || cqi > 15) {
            throw ValidationError("line " + std::to_string(line_no) + ": field 'cqi' value " +
                                  std::to_string(cqi) + " outside [0,15]");
        }
        s.cqi = static_cast<int>(cqi);
        const auto ta = parse_field_i64(fields[8], "ta", line_no);
        if (ta < 0) {
            throw ValidationError("line " + std::to_string(line_no) + ": field 'ta' value " +
                                  std::to_string(ta) + " is negative");
        }
        s.ta = static_cast<int>(ta);
        s.carrier_freq = parse_field_double(fields[9], "freq", line_no);
        s.cell_id = parse_field_i64(fields[10], "cell_id", line_no);
        trace.samples.push_back(s);
    }

    throw_on_violations(trace);
    return trace;
}

Trace parse_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trace file: " + path);
    return parse_trace(in);
}

void write_trace(const Trace& trace, std::ostream& out) {
    if (trace.samples.empty()) throw ValidationError("cannot write an empty trace");
    out << "# scenario=" << to_string(trace.scenario) << " mno=" << trace.mno
        << " direction=" << to_string(trace.direction) << "\n";
    out << kTraceCsvHeader << "\n";
    for (const ContextSample& s : trace.samples) {
        out << format_double(s.t) << ',' << format_double(s.pos.x) << ','
            << format_double(s.pos.y) << ',' << format_double(s.velocity) << ','
            << format_double(s.rsrp) << ',' << format_double(s.rsrq) << ','
            << format_double(s.sinr) << ',' << s.cqi << ',' << s.ta << ','
            << format_double(s.carrier_freq) << ',' << s.cell_id << "\n";
    }
}

std::string write_trace(const Trace& trace) {
    std::ostringstream out;
    write_trace(trace, out);
    return out.str();
}

void write_trace_file(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    write_trace(trace, out);
}

} // namespace catsim
