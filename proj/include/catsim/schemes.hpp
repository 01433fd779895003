#ifndef CATSIM_SCHEMES_HPP
#define CATSIM_SCHEMES_HPP

#include <string>

#include "catsim/qlearn.hpp"
#include "catsim/rng.hpp"

namespace catsim {

enum class SchemeKind { Periodic, Cat, MlCat, RlCat, RlPcat };

std::string to_string(SchemeKind k);
SchemeKind scheme_from_string(const std::string& s);

// Local sensor data buffer. The whole buffer is sent on TX, so one size
// plus the generation time of the oldest packet fully describes it.
struct BufferState {
    double size = 0.0;            // bytes
    double oldest_packet_t = 0.0; // seconds; meaningful only when size > 0
    double last_tx_t = 0.0;       // seconds; dt = now - last_tx_t

    bool empty() const { return size <= 0.0; }
};

// Advances the buffer by one tick of sensor data generation.
BufferState buffer_step(BufferState b, double now, double gen_rate_bytes_per_s,
                        double tick_s = 1.0);

// Age of the oldest buffered packet. Throws ValidationError on an empty
// buffer (AoI is undefined without data).
double aoi(const BufferState& b, double now);

// Parameters of the probabilistic transmission probability curve. phi is
// SINR in dB for CAT and predicted rate in Mbit/s for ML-CAT.
struct ProbSchemeParams {
    double phi_min = 0.0;
    double phi_max = 30.0;
    double dt_min = 10.0;  // seconds
    double dt_max = 120.0; // seconds
    double alpha_exp = 2.0;

    void validate() const;
};

// 0 below dt_min, 1 above dt_max, otherwise the normalized metric raised
// to alpha_exp (base clamped to [0,1] first).
double p_tx(double phi, double dt, const ProbSchemeParams& p);

Action decide_periodic(double dt, double interval_s);

// One Bernoulli draw per decision tick with probability p_tx(...).
Action decide_probabilistic(double phi, double dt, const ProbSchemeParams& p, Rng& rng);

// Greedy argmax over the (lazily initialized) action values; exact ties
// keep buffering.
Action decide_rl(const QKey& key, QTable& table);

} // namespace catsim

#endif
