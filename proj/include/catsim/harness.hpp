#ifndef CATSIM_HARNESS_HPP
#define CATSIM_HARNESS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "catsim/config.hpp"
#include "catsim/predictor.hpp"
#include "catsim/schemes.hpp"

namespace catsim {

struct EpisodeResult {
    std::string scheme;
    std::vector<TransmissionRecord> transmissions;
    double mean_rate = 0.0; // arithmetic mean of measured_rate; 0 without transmissions
    double mean_aoi = 0.0;
    int deadline_violations = 0; // transmissions with aoi > deadline

    // Byte accounting across the episode.
    double generated_bytes = 0.0;
    double transmitted_bytes = 0.0;
    double final_buffer_bytes = 0.0;
};

struct EpisodeConfig {
    SchemeKind scheme = SchemeKind::Periodic;
    double periodic_interval = 10.0;
    ProbSchemeParams prob;   // CAT / ML-CAT
    RlParams rl;             // RL-CAT / RL-pCAT
    double aoi_deadline = 120.0;
    double gen_rate = 50e3;  // bytes per second

    bool training = false;             // apply Q updates
    bool deferred_idle_updates = false; // apply pCAT IDLE updates in a second pass
    bool eval_counterfactual_probe = false; // compute-and-discard counterfactuals (tests)
    double epsilon = 0.0;              // exploration probability while training
    double pos_noise_std = 0.0;

    std::uint64_t decision_seed = 0;
    std::uint64_t counterfactual_seed = 0;
};

// Replays one trace tick by tick: generate sensor data, predict, decide,
// transmit. The environment's noise stream is owned by `env`; RL schemes
// read (and in training mode update) `table`. Throws ValidationError on
// inconsistent wiring before stepping.
EpisodeResult run_episode(const EpisodeConfig& cfg, const Trace& trace, EnvState& env,
                          RatePredictor* predictor, QTable* table, const ConnectivityMap* map);

struct TrainSeeds {
    std::uint64_t shuffle = 0;
    std::uint64_t table = 0;
    std::uint64_t env = 0;
    std::uint64_t predictor = 0;
    std::uint64_t decision = 0;
    std::uint64_t counterfactual = 0;
};

// Replay source of one training epoch, kept for paired baseline runs.
struct EpochPlanEntry {
    std::size_t trace_index = 0;
    std::uint64_t env_seed = 0;
    std::uint64_t predictor_seed = 0;
    std::uint64_t decision_seed = 0;
    std::uint64_t counterfactual_seed = 0;
};

struct TrainOptions {
    double gen_rate = 50e3;
    std::optional<double> sigma_env;
    double map_cell_width = 25.0;
    double epsilon0 = 0.0; // linearly decayed to 0 over the epochs
    double pos_noise_std = 0.0;
    bool deferred_idle_updates = false;
};

struct TrainResult {
    QTable table;
    std::vector<double> convergence; // per-epoch mean data rate, Mbit/s
    std::vector<EpochPlanEntry> plan;
    ConnectivityMap map;             // empty for RL-CAT
};

// Virtual exploration: every epoch replays one trace drawn by seeded
// shuffle (cycling the shuffled order) and applies Q updates per action.
TrainResult train(SchemeKind scheme, const std::vector<Trace>& traces, int epochs,
                  const TrainSeeds& seeds, const MnoProfile& profile, const RlParams& rl,
                  const TrainOptions& opts = {});

// One evaluation episode with a frozen policy (or none for the baselines).
EpisodeResult evaluate_episode(SchemeKind scheme, const Trace& trace, const MnoProfile& profile,
                               const EpochPlanEntry& entry, QTable* table,
                               const ConnectivityMap* map, const ExperimentConfig& cfg);

double efficiency_s(double mean_rate, double s_star);
double efficiency_aoi(double mean_aoi, double dt_max);

// Pooled aggregates over a set of episodes (means over all transmissions).
struct RunSummary {
    std::string scheme;
    std::size_t n_transmissions = 0;
    double mean_rate = 0.0;
    double mean_aoi = 0.0;
    int deadline_violations = 0;
    double e_s = 0.0;
    double e_aoi = 0.0;
};

RunSummary summarize(const std::string& scheme, std::span<const EpisodeResult> episodes,
                     double s_star, double dt_max);

struct SweepSeedResult {
    std::uint64_t seed_index = 0;
    double e_s = 0.0;
    double e_aoi = 0.0;
    double mean_rate = 0.0;
    double mean_aoi = 0.0;
    int deadline_violations = 0;
};

struct SweepEntry {
    double w = 0.0;
    double e_s_mean = 0.0, e_s_std = 0.0;
    double e_aoi_mean = 0.0, e_aoi_std = 0.0;
    std::vector<SweepSeedResult> seeds;
};

// One (w, seed) sweep cell: fresh training plus evaluation. sweep_w is a
// plain fan-out over this.
SweepSeedResult sweep_run_once(const ExperimentConfig& cfg, double w, std::uint64_t seed_index,
                               SchemeKind scheme);

// Trains and evaluates a fresh agent per (w, seed); seeds are paired
// across w values. Runs on `workers` threads; the result order is
// independent of scheduling.
std::vector<SweepEntry> sweep_w(const std::vector<double>& w_values, const ExperimentConfig& cfg,
                                SchemeKind scheme = SchemeKind::RlCat, int workers = 0);

struct BlackspotCell {
    CellIndex cell;
    std::size_t low_rate_count = 0;
    std::size_t total_count = 0;
};

struct BlackspotReport {
    double cell_width = 0.0;
    double mean_rate = 0.0; // fleet mean over all records
    std::vector<BlackspotCell> flagged;
};

// Grid cells holding at least min_count transmissions below half the mean
// rate. Throws ValidationError on an empty record set.
BlackspotReport detect_blackspots(std::span<const TransmissionRecord> records, double cell_width,
                                  std::size_t min_count);

struct ComparisonRow {
    std::string mno;
    Direction direction = Direction::Uplink;
    RunSummary summary;
    std::vector<TransmissionRecord> transmissions;
};

// Evaluates every configured scheme for the configured MNO/direction on
// identical evaluation traces and noise seeds (trains RL schemes first).
std::vector<ComparisonRow> compare_schemes(const ExperimentConfig& cfg);

// Deterministic helpers shared by the CLI and the tests.
std::vector<Trace> generate_traces(const ExperimentConfig& cfg, std::uint64_t stream,
                                   int count);
TrainSeeds train_seeds_for(std::uint64_t master_seed);
EpochPlanEntry eval_entry_for(std::uint64_t master_seed, std::size_t trace_index);

} // namespace catsim

#endif
