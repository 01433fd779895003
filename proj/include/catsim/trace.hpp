#ifndef CATSIM_TRACE_HPP
#define CATSIM_TRACE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "catsim/geo.hpp"

namespace catsim {

enum class Scenario { Suburban, Highway };
enum class Direction { Uplink, Downlink };

std::string to_string(Scenario s);
std::string to_string(Direction d);
Scenario scenario_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);

// One timestamped row of passively measured network and mobility context.
struct ContextSample {
    double t = 0.0;            // seconds since trace start
    GeoPosition pos;           // local planar meters
    double velocity = 0.0;     // m/s
    double rsrp = 0.0;         // dBm
    double rsrq = 0.0;         // dB
    double sinr = 0.0;         // dB
    int cqi = 0;               // 0..15
    int ta = 0;                // timing advance steps, >= 0
    double carrier_freq = 0.0; // MHz
    std::int64_t cell_id = 0;  // serving cell

    bool operator==(const ContextSample&) const = default;
};

// Time series of context samples at a fixed 1 s tick.
struct Trace {
    std::vector<ContextSample> samples;
    Scenario scenario = Scenario::Suburban;
    std::string mno = "A";
    Direction direction = Direction::Uplink;

    bool operator==(const Trace&) const = default;

    double tick() const { return 1.0; }
    double start_time() const { return samples.front().t; }
    double end_time() const { return samples.back().t; }
};

// Outcome of one completed buffer transmission.
struct TransmissionRecord {
    double t_start = 0.0;       // seconds
    double payload = 0.0;       // bytes
    double measured_rate = 0.0; // Mbit/s
    double aoi = 0.0;           // age of oldest buffered packet at t_start, s
    GeoPosition pos;
    double duration = 0.0; // payload * 8 / 1e6 / measured_rate, s

    bool operator==(const TransmissionRecord&) const = default;
};

inline double transfer_duration_s(double payload_bytes, double rate_mbps) {
    return payload_bytes * 8.0 / 1e6 / rate_mbps;
}

// CSV header used by write_trace / parse_trace. A leading "# key=value"
// comment carries the scenario/mno/direction labels that have no column.
inline constexpr const char* kTraceCsvHeader = "t,x,y,velocity,rsrp,rsrq,sinr,cqi,ta,freq,cell_id";

// Throws ParseError on malformed numbers (with line number) and
// ValidationError on invariant violations (non-monotone t, cqi out of
// range, ...), so a trace that parses cleanly always validates cleanly.
Trace parse_trace(std::istream& in);
Trace parse_trace_file(const std::string& path);

// Round-trip identity: parse_trace(write_trace(x)) == x, field for field.
// Throws ValidationError for an empty trace.
void write_trace(const Trace& trace, std::ostream& out);
std::string write_trace(const Trace& trace);
void write_trace_file(const Trace& trace, const std::string& path);

// Every invariant violation with its sample index; empty means valid.
std::vector<std::string> validate_trace(const Trace& trace);

} // namespace catsim

#endif
