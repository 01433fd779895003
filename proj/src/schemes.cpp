#include "catsim/schemes.hpp"

#include <algorithm>
#include <cmath>

#include "catsim/errors.hpp"

namespace catsim {

std::string to_string(SchemeKind k) {
    switch (k) {
        case SchemeKind::Periodic: return "periodic";
        case SchemeKind::Cat: return "cat";
        case SchemeKind::MlCat: return "ml_cat";
        case SchemeKind::RlCat: return "rl_cat";
        case SchemeKind::RlPcat: return "rl_pcat";
    }
    return "?";
}

SchemeKind scheme_from_string(const std::string& s) {
    if (s == "periodic") return SchemeKind::Periodic;
    if (s == "cat") return SchemeKind::Cat;
    if (s == "ml_cat") return SchemeKind::MlCat;
    if (s == "rl_cat") return SchemeKind::RlCat;
    if (s == "rl_pcat") return SchemeKind::RlPcat;
    throw ValidationError("unknown scheme: " + s);
}

BufferState buffer_step(BufferState b, double now, double gen_rate_bytes_per_s, double tick_s) {
    if (b.empty()) b.oldest_packet_t = now;
    b.size += gen_rate_bytes_per_s * tick_s;
    return b;
}

double aoi(const BufferState& b, double now) {
    if (b.empty()) throw ValidationError("AoI is undefined for an empty buffer");
    return now - b.oldest_packet_t;
}

void ProbSchemeParams::validate() const {
    if (!(phi_max > phi_min)) throw ValidationError("requires phi_max > phi_min");
    if (!(0.0 <= dt_min && dt_min < dt_max)) throw ValidationError("requires 0 <= dt_min < dt_max");
    if (alpha_exp <= 0.0) throw ValidationError("alpha_exp must be > 0");
}

double p_tx(double phi, double dt, const ProbSchemeParams& p) {
    if (dt < p.dt_min) return 0.0;
    if (dt > p.dt_max) return 1.0;
    const double base = std::clamp((phi - p.phi_min) / (p.phi_max - p.phi_min), 0.0, 1.0);
    return std::pow(base, p.alpha_exp);
}

Action decide_periodic(double dt, double interval_s) {
    if (interval_s <= 0.0) throw ValidationError("periodic interval must be > 0");
    return dt >= interval_s ? Action::Tx : Action::Idle;
}

Action decide_probabilistic(double phi, double dt, const ProbSchemeParams& p, Rng& rng) {
    const double prob = p_tx(phi, dt, p);
    return rng.uniform() < prob ? Action::Tx : Action::Idle;
}

Action decide_rl(const QKey& key, QTable& table) {
    const double q_idle = table.get(key, Action::Idle);
    const double q_tx = table.get(key, Action::Tx);
    return q_tx > q_idle ? Action::Tx : Action::Idle;
}

} // namespace catsim
