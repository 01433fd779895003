#include "catsim/channel.hpp"

#include <algorithm>
#include <cmath>

#include "catsim/errors.hpp"
#include "catsim/textio.hpp"

namespace catsim {

namespace {

// Invented channel plumbing: log-distance path loss referenced at 10 m.
constexpr double kRsrpAtRefDbm = -45.0;
constexpr double kRefDistM = 10.0;
constexpr double kNoiseFloorDbm = -102.0;
constexpr double kSinrMinDb = -10.0;
constexpr double kSinrMaxDb = 40.0;
constexpr double kLatticePitchM = 250.0; // suburban street grid
constexpr double kBboxMarginM = 300.0;
constexpr double kTaUnitM = 78.12; // one LTE timing-advance step

double path_loss_exponent(Scenario s) { return s == Scenario::Suburban ? 3.0 : 2.8; }

double carrier_for_cell(std::int64_t cell_id) {
    static const double freqs[3] = {800.0, 1800.0, 2600.0};
    return freqs[static_cast<std::size_t>(cell_id % 3)];
}

std::size_t nearest_enb(const std::vector<GeoPosition>& enbs, const GeoPosition& p) {
    std::size_t best = 0;
    double best_d = distance(enbs[0], p);
    for (std::size_t i = 1; i < enbs.size(); ++i) {
        const double d = distance(enbs[i], p);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

struct Box {
    double min_x, min_y, max_x, max_y;
};

Box expanded_bbox(const std::vector<GeoPosition>& enbs) {
    Box b{enbs[0].x, enbs[0].y, enbs[0].x, enbs[0].y};
    for (const auto& p : enbs) {
        b.min_x = std::min(b.min_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_x = std::max(b.max_x, p.x);
        b.max_y = std::max(b.max_y, p.y);
    }
    b.min_x -= kBboxMarginM;
    b.min_y -= kBboxMarginM;
    b.max_x += kBboxMarginM;
    b.max_y += kBboxMarginM;
    return b;
}

// Drives the vehicle one tick; returns the distance moved.
class PathModel {
public:
    PathModel(const ScenarioConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng), box_(expanded_bbox(cfg.enb_positions)) {
        if (cfg.scenario == Scenario::Highway) {
            pos_ = cfg.enb_positions.front();
            const GeoPosition& last = cfg.enb_positions.back();
            const double len = distance(pos_, last);
            if (len < 1.0) {
                dir_ = {1.0, 0.0};
            } else {
                dir_ = {(last.x - pos_.x) / len, (last.y - pos_.y) / len};
            }
        } else {
            // Snap the start to the street lattice node nearest the eNB centroid.
            GeoPosition c{0.0, 0.0};
            for (const auto& p : cfg.enb_positions) {
                c.x += p.x;
                c.y += p.y;
            }
            c.x /= static_cast<double>(cfg.enb_positions.size());
            c.y /= static_cast<double>(cfg.enb_positions.size());
            node_i_ = clamp_i(std::llround(c.x / kLatticePitchM));
            node_j_ = clamp_j(std::llround(c.y / kLatticePitchM));
            pos_ = node_pos(node_i_, node_j_);
            pick_next_leg();
        }
    }

    GeoPosition position() const { return pos_; }

    double step(double speed) {
        if (cfg_.scenario == Scenario::Highway) {
            pos_.x += dir_.x * speed;
            pos_.y += dir_.y * speed;
            return speed;
        }
        double remaining = speed;
        while (remaining > 0.0) {
            const GeoPosition target = node_pos(target_i_, target_j_);
            const double d = distance(pos_, target);
            if (d > remaining) {
                pos_.x += (target.x - pos_.x) / d * remaining;
                pos_.y += (target.y - pos_.y) / d * remaining;
                remaining = 0.0;
            } else {
                pos_ = target;
                remaining -= d;
                node_i_ = target_i_;
                node_j_ = target_j_;
                pick_next_leg();
            }
        }
        return speed;
    }

private:
    std::int64_t clamp_i(std::int64_t i) const {
        const auto lo = static_cast<std::int64_t>(std::ceil(box_.min_x / kLatticePitchM));
        const auto hi = static_cast<std::int64_t>(std::floor(box_.max_x / kLatticePitchM));
        return std::clamp(i, lo, std::max(lo, hi));
    }
    std::int64_t clamp_j(std::int64_t j) const {
        const auto lo = static_cast<std::int64_t>(std::ceil(box_.min_y / kLatticePitchM));
        const auto hi = static_cast<std::int64_t>(std::floor(box_.max_y / kLatticePitchM));
        return std::clamp(j, lo, std::max(lo, hi));
    }
    GeoPosition node_pos(std::int64_t i, std::int64_t j) const {
        return {static_cast<double>(i) * kLatticePitchM, static_cast<double>(j) * kLatticePitchM};
    }

    void pick_next_leg() {
        static constexpr int dx[4] = {1, -1, 0, 0};
        static constexpr int dy[4] = {0, 0, 1, -1};
        int candidates[4];
        int n = 0;
        for (int k = 0; k < 4; ++k) {
            const std::int64_t ni = node_i_ + dx[k];
            const std::int64_t nj = node_j_ + dy[k];
            if (ni != clamp_i(ni) || nj != clamp_j(nj)) continue; // off the lattice
            if (ni == prev_i_ && nj == prev_j_) continue;         // no immediate U-turn
            candidates[n++] = k;
        }
        int pick;
        if (n == 0) {
            // Dead end (1x1 lattice or forced reversal): go back.
            target_i_ = prev_i_;
            target_j_ = prev_j_;
            if (target_i_ == node_i_ && target_j_ == node_j_) return; // degenerate lattice
            prev_i_ = node_i_;
            prev_j_ = node_j_;
            return;
        }
        pick = candidates[rng_.uniform_int(0, n - 1)];
        prev_i_ = node_i_;
        prev_j_ = node_j_;
        target_i_ = node_i_ + dx[pick];
        target_j_ = node_j_ + dy[pick];
    }

    const ScenarioConfig& cfg_;
    Rng& rng_;
    Box box_;
    GeoPosition pos_{};
    GeoPosition dir_{1.0, 0.0};
    std::int64_t node_i_ = 0, node_j_ = 0;
    std::int64_t prev_i_ = 0, prev_j_ = 0;
    std::int64_t target_i_ = 0, target_j_ = 0;
};

} // namespace

void MnoProfile::validate() const {
    if (!(target_rate > 0.0 && target_rate < max_rate)) {
        throw ValidationError("MnoProfile " + name + ": requires 0 < target_rate < max_rate");
    }
    if (pred_mae > pred_rmse) {
        throw ValidationError("MnoProfile " + name + ": pred_mae must be <= pred_rmse");
    }
    if (rate_range <= 0.0) {
        throw ValidationError("MnoProfile " + name + ": rate_range must be > 0");
    }
}

void ScenarioConfig::validate() const {
    if (duration < 1.0) throw ValidationError("scenario duration must be >= 1 s");
    if (enb_positions.empty()) throw ValidationError("scenario needs at least one eNB position");
    if (shadowing_corr_dist <= 0.0) throw ValidationError("shadowing_corr_dist must be > 0");
    if (speed_mean < 0.0 || speed_jitter < 0.0) {
        throw ValidationError("speed parameters must be non-negative");
    }
    if (shadowing_std < 0.0) throw ValidationError("shadowing_std must be >= 0");
}

double sigmoid_sinr(double sinr_db, const RateModel& model) {
    return 1.0 / (1.0 + std::exp(-(sinr_db - model.sinr_mid) / model.sinr_scale));
}

double payload_ramp(double payload_bytes, const RateModel& model) {
    return payload_bytes / (payload_bytes + model.half_rate_payload);
}

double true_data_rate(double sinr_db, double payload_bytes, const MnoProfile& profile,
                      const RateModel& model) {
    if (payload_bytes <= 0.0) throw ValidationError("payload must be > 0 bytes");
    const double rate = profile.max_rate * sigmoid_sinr(sinr_db, model) * payload_ramp(payload_bytes, model);
    return std::clamp(rate, model.rate_floor, profile.max_rate);
}

double true_data_rate(const ContextSample& sample, double payload_bytes,
                      const MnoProfile& profile, const RateModel& model) {
    return true_data_rate(sample.sinr, payload_bytes, profile, model);
}

Trace generate_trace(const ScenarioConfig& cfg, const MnoProfile& profile) {
    cfg.validate();
    profile.validate();

    Rng rng(cfg.seed);
    PathModel path(cfg, rng);
    const double n_exp = path_loss_exponent(cfg.scenario);
    const auto n_samples = static_cast<std::size_t>(std::llround(cfg.duration));

    Trace trace;
    trace.scenario = cfg.scenario;
    trace.mno = profile.name;
    trace.direction = profile.direction;
    trace.samples.reserve(n_samples);

    double shadow = rng.normal(0.0, cfg.shadowing_std);
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double speed = std::max(0.0, rng.normal(cfg.speed_mean, cfg.speed_jitter));
        double moved = 0.0;
        if (k > 0) moved = path.step(speed);

        const GeoPosition pos = path.position();
        const std::size_t serving = nearest_enb(cfg.enb_positions, pos);
        const double d = std::max(distance(cfg.enb_positions[serving], pos), kRefDistM);

        // Gauss-Markov shadowing: correlation decays with driven distance.
        if (k > 0 && cfg.shadowing_std > 0.0) {
            const double rho = std::exp(-moved / cfg.shadowing_corr_dist);
            shadow = rho * shadow + std::sqrt(1.0 - rho * rho) * rng.normal(0.0, cfg.shadowing_std);
        }

        ContextSample s;
        s.t = static_cast<double>(k);
        s.pos = pos;
        s.velocity = speed;
        s.rsrp = kRsrpAtRefDbm - 10.0 * n_exp * std::log10(d / kRefDistM) + shadow;
        s.sinr = std::clamp(s.rsrp - kNoiseFloorDbm, kSinrMinDb, kSinrMaxDb);
        s.rsrq = std::clamp(-19.5 + 0.55 * (s.sinr + 10.0), -19.5, -3.0) + rng.uniform(-0.25, 0.25);
        s.cqi = static_cast<int>(std::clamp<std::int64_t>(
            std::llround((s.sinr + 7.0) / 2.3) + rng.uniform_int(-1, 1), 0, 15));
        s.ta = static_cast<int>(std::max<std::int64_t>(
            0, std::llround(d / kTaUnitM + rng.uniform(-0.5, 0.5))));
        s.carrier_freq = carrier_for_cell(static_cast<std::int64_t>(serving));
        s.cell_id = static_cast<std::int64_t>(serving);
        trace.samples.push_back(s);
    }
    return trace;
}

EnvState::EnvState(const Trace& trace_, const MnoProfile& profile_, std::uint64_t noise_seed)
    : EnvState(trace_, profile_, noise_seed, profile_.pred_rmse / 2.0) {}

EnvState::EnvState(const Trace& trace_, const MnoProfile& profile_, std::uint64_t noise_seed,
                   double sigma)
    : trace(&trace_), profile(profile_), rng(noise_seed), sigma_env(sigma) {
    profile.validate();
    if (trace_.samples.empty()) throw ValidationError("EnvState needs a non-empty trace");
    if (sigma_env < 0.0) throw ValidationError("sigma_env must be >= 0");
}

const ContextSample& EnvState::sample_at(double t) const {
    const auto& samples = trace->samples;
    const double offset = t - samples.front().t;
    const auto idx = static_cast<std::int64_t>(std::llround(offset));
    if (idx < 0 || idx >= static_cast<std::int64_t>(samples.size())) {
        throw ValidationError("time " + format_double(t) + " outside trace range");
    }
    return samples[static_cast<std::size_t>(idx)];
}

TransmissionRecord transmit(EnvState& env, double t, double payload_bytes, double aoi_s) {
    if (payload_bytes <= 0.0) throw ValidationError("payload must be > 0 bytes");
    const ContextSample& s = env.sample_at(t);
    const double rate = true_data_rate(s, payload_bytes, env.profile, env.rate_model);
    const double noise = env.sigma_env > 0.0 ? env.rng.normal(0.0, env.sigma_env) : 0.0;
    TransmissionRecord rec;
    rec.t_start = t;
    rec.payload = payload_bytes;
    rec.measured_rate = std::max(env.rate_model.rate_floor, rate + noise);
    rec.aoi = aoi_s;
    rec.pos = s.pos;
    rec.duration = transfer_duration_s(payload_bytes, rec.measured_rate);
    return rec;
}

} // namespace catsim
