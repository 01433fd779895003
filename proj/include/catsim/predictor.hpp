#ifndef CATSIM_PREDICTOR_HPP
#define CATSIM_PREDICTOR_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "catsim/channel.hpp"
#include "catsim/geo.hpp"
#include "catsim/rng.hpp"
#include "catsim/trace.hpp"

namespace catsim {

// Input of the data rate prediction model. cqi/ta are doubles so the same
// type can carry connectivity-map cell means; raw measurements hold
// integral values.
struct FeatureVector {
    double rsrp = 0.0;     // dBm
    double rsrq = 0.0;     // dB
    double sinr = 0.0;     // dB
    double cqi = 0.0;      // 0..15
    double ta = 0.0;       // >= 0
    double freq = 0.0;     // MHz
    double velocity = 0.0; // m/s
    std::int64_t cell_id = 0;
    double payload = 0.0;  // bytes; attached by the caller at prediction time

    bool operator==(const FeatureVector&) const = default;
};

// Tree feature indices, in file-format order.
enum FeatureIndex : int {
    kFeatRsrp = 0,
    kFeatRsrq = 1,
    kFeatSinr = 2,
    kFeatCqi = 3,
    kFeatTa = 4,
    kFeatFreq = 5,
    kFeatVelocity = 6,
    kFeatCellId = 7,
    kFeatPayload = 8,
};

FeatureVector features_from_sample(const ContextSample& s, double payload_bytes);

// Binary regression tree in the line-oriented text format:
//   N <id> <feature_index> <threshold> <left_id> <right_id>
//   L <id> <value_mbps>
// Root id is 0; descent goes left when feature <= threshold.
class RegressionTree {
public:
    static RegressionTree load(std::istream& in);       // throws ParseError
    static RegressionTree load_file(const std::string& path);

    double evaluate(const FeatureVector& f) const;

private:
    struct Node {
        bool leaf = false;
        int feature = 0;
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        double value = 0.0;
    };
    std::vector<Node> nodes_; // indexed by node id
};

struct PredictorSpec {
    enum class Kind { NoisyOracle, TreeFile };
    Kind kind = Kind::NoisyOracle;
    MnoProfile profile;
    std::uint64_t seed = 0;
    std::optional<std::string> tree_path;
};

// Stand-in for the trained regression model. The noisy oracle perturbs the
// environment's true rate with N(0, pred_rmse) and clamps to the profile's
// observed rate range; a loaded tree evaluates the feature vector directly.
class RatePredictor {
public:
    explicit RatePredictor(const PredictorSpec& spec); // tree load errors surface here

    // true_rate is consulted only by the noisy oracle.
    double predict(const FeatureVector& f, double true_rate);

    const MnoProfile& profile() const { return spec_.profile; }

private:
    PredictorSpec spec_;
    Rng rng_;
    std::optional<RegressionTree> tree_;
};

// Geospatial grid of per-cell feature means for future-context lookup.
// Cells store running sums, so aggregation order only affects results at
// floating-point reordering magnitude.
class ConnectivityMap {
public:
    explicit ConnectivityMap(double cell_width); // throws for cell_width <= 0

    void add_sample(const ContextSample& s);

    std::size_t cell_count() const { return cells_.size(); }
    double cell_width() const { return cell_width_; }

    // Per-field arithmetic mean; cell_id by majority vote with lowest-id
    // tie break; payload is left at 0 for the caller to fill in.
    std::optional<FeatureVector> cell_aggregate(const CellIndex& idx) const;
    std::optional<std::size_t> cell_sample_count(const CellIndex& idx) const;

    // Aggregate of the cell containing pos, or `fallback` unchanged if that
    // cell holds no samples.
    FeatureVector lookup_or(const GeoPosition& pos, const FeatureVector& fallback) const;

private:
    struct Accum {
        double rsrp = 0, rsrq = 0, sinr = 0, cqi = 0, ta = 0, freq = 0, velocity = 0;
        std::size_t count = 0;
        std::map<std::int64_t, std::size_t> cell_votes;
    };
    double cell_width_;
    std::unordered_map<CellIndex, Accum, CellIndexHash> cells_;
};

ConnectivityMap build_connectivity_map(std::span<const Trace> traces, double cell_width);

// Future position at t + tau: exact trace lookup (linear interpolation
// between ticks) while inside the trace, linear extrapolation from the
// last two samples beyond its end. Throws ValidationError when
// extrapolation is needed with fewer than two samples.
GeoPosition predict_position(const Trace& trace, double t, double tau);

// Same, with optional Gaussian position noise for sensitivity experiments.
GeoPosition predict_position(const Trace& trace, double t, double tau, double pos_noise_std,
                             Rng& rng);

} // namespace catsim

#endif
