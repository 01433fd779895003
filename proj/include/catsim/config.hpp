#ifndef CATSIM_CONFIG_HPP
#define CATSIM_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "catsim/channel.hpp"
#include "catsim/qlearn.hpp"
#include "catsim/schemes.hpp"

namespace catsim {

// Stream ids for deriving independent RNG seeds from the master seed.
namespace seed_stream {
inline constexpr std::uint64_t kTrainTrace = 1;
inline constexpr std::uint64_t kEvalTrace = 2;
inline constexpr std::uint64_t kTableInit = 3;
inline constexpr std::uint64_t kShuffle = 4;
inline constexpr std::uint64_t kEnvNoise = 5;
inline constexpr std::uint64_t kPredictor = 6;
inline constexpr std::uint64_t kDecision = 7;
inline constexpr std::uint64_t kCounterfactual = 8;
inline constexpr std::uint64_t kSweep = 9;
inline constexpr std::uint64_t kGenerate = 10;
} // namespace seed_stream

// Full description of one experiment run. Loaded from JSON; the reference
// preset ships the default parameterization.
struct ExperimentConfig {
    std::string mno = "A";
    Direction direction = Direction::Uplink;
    ScenarioConfig scenario;
    std::vector<MnoProfile> profiles;
    std::vector<SchemeKind> schemes = {SchemeKind::Periodic, SchemeKind::Cat, SchemeKind::MlCat,
                                       SchemeKind::RlCat, SchemeKind::RlPcat};

    double periodic_interval = 10.0;
    ProbSchemeParams cat_params;                 // phi = SINR in dB
    ProbSchemeParams ml_cat_params;              // phi = predicted rate in Mbit/s
    std::optional<double> ml_cat_phi_max;        // nullopt: use the profile's max_rate

    RlParams rl;                 // s_star / s_max are overwritten per profile
    double map_cell_width = 25.0;
    double epsilon0 = 0.0;       // optional epsilon-greedy exploration, off by default
    double pos_noise_std = 0.0;  // mobility prediction noise, meters
    bool deferred_idle_updates = false;

    int epochs = 400;
    int train_traces = 40;
    int eval_traces = 10;

    std::vector<double> sweep_w_values = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    int sweep_seeds = 10;

    double blackspot_cell_width = 25.0;
    int blackspot_min_count = 5;

    double gen_rate = 50e3;              // sensor bytes per second
    std::optional<double> sigma_env;     // nullopt: pred_rmse / 2
    std::uint64_t seed = 1;

    const MnoProfile& active_profile() const;          // throws ConfigError if missing
    const MnoProfile& profile_for(const std::string& name, Direction dir) const;
    RlParams rl_for(const MnoProfile& profile) const;  // fills s_star / s_max
    ProbSchemeParams ml_cat_for(const MnoProfile& profile) const;
    double sigma_env_for(const MnoProfile& profile) const;

    void validate() const; // throws ConfigError
};

// The reference parameterization: all six operator/direction profiles,
// the learning defaults, and the suburban scenario.
ExperimentConfig reference_preset();
ExperimentConfig preset_by_name(const std::string& name); // "reference"

// Strict loader: unknown keys and invariant violations raise ConfigError
// naming the offending key/field. Absent keys keep preset defaults.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

// Canonical JSON echo of a config; its FNV-1a hash identifies the run.
std::string config_to_json(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

inline constexpr const char* kVersion = "0.1.0";

} // namespace catsim

#endif
