#ifndef CATSIM_CHANNEL_HPP
#define CATSIM_CHANNEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "catsim/rng.hpp"
#include "catsim/trace.hpp"

namespace catsim {

// Per-operator, per-direction targets and predictor error statistics.
struct MnoProfile {
    std::string name = "A";
    Direction direction = Direction::Uplink;
    double target_rate = 30.0; // S*, Mbit/s
    double max_rate = 40.0;    // S_max, Mbit/s
    double pred_mae = 2.984;   // Mbit/s
    double pred_rmse = 4.061;  // Mbit/s
    double rate_range = 39.782; // observed data rate span, Mbit/s

    void validate() const; // throws ValidationError
};

// Synthetic drive scenario. Suburban vehicles hop between nodes of a
// street lattice spanned over the eNB field; highway vehicles drive a
// straight line through the eNB chain.
struct ScenarioConfig {
    Scenario scenario = Scenario::Suburban;
    double duration = 600.0; // seconds; one sample per second
    std::vector<GeoPosition> enb_positions;
    double speed_mean = 13.9;          // m/s
    double speed_jitter = 1.5;         // m/s, std of per-tick speed noise
    double shadowing_std = 6.0;        // dB
    double shadowing_corr_dist = 120.0; // meters, Gauss-Markov correlation
    std::uint64_t seed = 1;

    void validate() const;
};

// Ground-truth end-to-end rate model: logistic shape in SINR multiplied by
// a payload ramp that mimics slow-start underutilization on short
// transfers. Invented plumbing; only the two monotonicities matter.
struct RateModel {
    double sinr_mid = 10.0;            // dB at which half of max_rate is reached
    double sinr_scale = 3.5;           // dB, logistic slope
    double half_rate_payload = 250e3;  // bytes; ramp(H) = 0.5
    double rate_floor = 0.1;           // Mbit/s, lower clamp
};

double sigmoid_sinr(double sinr_db, const RateModel& model = {});
double payload_ramp(double payload_bytes, const RateModel& model = {});

// rate = max_rate * sigmoid_sinr(sinr) * ramp(payload), clamped to
// [rate_floor, max_rate]. Deterministic. Throws ValidationError for
// payload <= 0.
double true_data_rate(double sinr_db, double payload_bytes, const MnoProfile& profile,
                      const RateModel& model = {});
double true_data_rate(const ContextSample& sample, double payload_bytes,
                      const MnoProfile& profile, const RateModel& model = {});

// Deterministic synthetic context trace for (cfg.seed, profile).
Trace generate_trace(const ScenarioConfig& cfg, const MnoProfile& profile);

// One episode's channel state: the replayed trace plus an exclusively
// owned noise stream for measured-rate sampling.
struct EnvState {
    EnvState(const Trace& trace, const MnoProfile& profile, std::uint64_t noise_seed);
    EnvState(const Trace& trace, const MnoProfile& profile, std::uint64_t noise_seed,
             double sigma_env);

    const Trace* trace;
    MnoProfile profile;
    Rng rng;
    double sigma_env; // std of the measured-rate noise, Mbit/s
    RateModel rate_model;

    const ContextSample& sample_at(double t) const; // throws on out-of-range t
};

// Performs the transmission of `payload` bytes at time t:
// measured_rate = max(rate_floor, true_rate + N(0, sigma_env)).
// AoI is the caller's buffer age at decision time; position comes from the
// trace sample at t.
TransmissionRecord transmit(EnvState& env, double t, double payload_bytes, double aoi_s);

} // namespace catsim

#endif
