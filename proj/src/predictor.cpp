#include "catsim/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "catsim/errors.hpp"
#include "catsim/textio.hpp"

namespace catsim {

FeatureVector features_from_sample(const ContextSample& s, double payload_bytes) {
    FeatureVector f;
    f.rsrp = s.rsrp;
    f.rsrq = s.rsrq;
    f.sinr = s.sinr;
    f.cqi = static_cast<double>(s.cqi);
    f.ta = static_cast<double>(s.ta);
    f.freq = s.carrier_freq;
    f.velocity = s.velocity;
    f.cell_id = s.cell_id;
    f.payload = payload_bytes;
    return f;
}

namespace {

double feature_at(const FeatureVector& f, int index) {
    switch (index) {
        case kFeatRsrp: return f.rsrp;
        case kFeatRsrq: return f.rsrq;
        case kFeatSinr: return f.sinr;
        case kFeatCqi: return f.cqi;
        case kFeatTa: return f.ta;
        case kFeatFreq: return f.freq;
        case kFeatVelocity: return f.velocity;
        case kFeatCellId: return static_cast<double>(f.cell_id);
        case kFeatPayload: return f.payload;
        default: throw ValidationError("tree references unknown feature index " + std::to_string(index));
    }
}

} // namespace

RegressionTree RegressionTree::load(std::istream& in) {
    RegressionTree tree;
    std::string line;
    std::size_t line_no = 0;
    std::size_t max_id = 0;
    struct Raw {
        std::size_t id;
        Node node;
    };
    std::vector<Raw> raw;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        Raw r{};
        if (tag == "N") {
            std::int64_t left, right;
            if (!(ls >> r.id >> r.node.feature >> r.node.threshold >> left >> right)) {
                throw ParseError("tree line " + std::to_string(line_no) + ": malformed internal node");
            }
            if (r.node.feature < 0 || r.node.feature > kFeatPayload) {
                throw ParseError("tree line " + std::to_string(line_no) + ": feature index " +
                                 std::to_string(r.node.feature) + " out of range");
            }
            r.node.left = static_cast<std::int32_t>(left);
            r.node.right = static_cast<std::int32_t>(right);
        } else if (tag == "L") {
            if (!(ls >> r.id >> r.node.value)) {
                throw ParseError("tree line " + std::to_string(line_no) + ": malformed leaf");
            }
            r.node.leaf = true;
        } else {
            throw ParseError("tree line " + std::to_string(line_no) + ": unknown tag '" + tag + "'");
        }
        max_id = std::max(max_id, r.id);
        raw.push_back(r);
    }
    if (raw.empty()) throw ParseError("tree file contains no nodes");
    tree.nodes_.assign(max_id + 1, Node{});
    std::vector<bool> present(max_id + 1, false);
    for (const Raw& r : raw) {
        if (present[r.id]) throw ParseError("tree defines node id " + std::to_string(r.id) + " twice");
        present[r.id] = true;
        tree.nodes_[r.id] = r.node;
    }
    if (!present[0]) throw ParseError("tree has no root node (id 0)");
    for (std::size_t id = 0; id <= max_id; ++id) {
        if (!present[id]) continue;
        const Node& n = tree.nodes_[id];
        if (n.leaf) continue;
        for (std::int32_t child : {n.left, n.right}) {
            if (child < 0 || static_cast<std::size_t>(child) > max_id ||
                !present[static_cast<std::size_t>(child)]) {
                throw ParseError("tree node " + std::to_string(id) + " references missing child " +
                                 std::to_string(child));
            }
        }
    }
    return tree;
}

RegressionTree RegressionTree::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open tree file: " + path);
    return load(in);
}

double RegressionTree::evaluate(const FeatureVector& f) const {
    std::size_t id = 0;
    for (std::size_t hops = 0; hops <= nodes_.size(); ++hops) {
        const Node& n = nodes_[id];
        if (n.leaf) return n.value;
        id = static_cast<std::size_t>(feature_at(f, n.feature) <= n.threshold ? n.left : n.right);
    }
    throw ValidationError("tree descent did not reach a leaf (cycle in node links)");
}

RatePredictor::RatePredictor(const PredictorSpec& spec) : spec_(spec), rng_(spec.seed) {
    spec_.profile.validate();
    if (spec_.kind == PredictorSpec::Kind::TreeFile) {
        if (!spec_.tree_path) throw ValidationError("tree_file predictor requires tree_path");
        tree_ = RegressionTree::load_file(*spec_.tree_path);
    } else if (spec_.tree_path) {
        throw ValidationError("tree_path given but predictor kind is not tree_file");
    }
}

double RatePredictor::predict(const FeatureVector& f, double true_rate) {
    if (spec_.kind == PredictorSpec::Kind::TreeFile) return tree_->evaluate(f);
    const double noisy = true_rate + (spec_.profile.pred_rmse > 0.0
                                          ? rng_.normal(0.0, spec_.profile.pred_rmse)
                                          : 0.0);
    return std::clamp(noisy, 0.0, spec_.profile.rate_range);
}

ConnectivityMap::ConnectivityMap(double cell_width) : cell_width_(cell_width) {
    if (cell_width <= 0.0) throw ValidationError("connectivity map cell width must be > 0");
}

void ConnectivityMap::add_sample(const ContextSample& s) {
    Accum& a = cells_[cell_index_of(s.pos, cell_width_)];
    a.rsrp += s.rsrp;
    a.rsrq += s.rsrq;
    a.sinr += s.sinr;
    a.cqi += static_cast<double>(s.cqi);
    a.ta += static_cast<double>(s.ta);
    a.freq += s.carrier_freq;
    a.velocity += s.velocity;
    a.count += 1;
    a.cell_votes[s.cell_id] += 1;
}

std::optional<FeatureVector> ConnectivityMap::cell_aggregate(const CellIndex& idx) const {
    const auto it = cells_.find(idx);
    if (it == cells_.end()) return std::nullopt;
    const Accum& a = it->second;
    const auto n = static_cast<double>(a.count);
    FeatureVector f;
    f.rsrp = a.rsrp / n;
    f.rsrq = a.rsrq / n;
    f.sinr = a.sinr / n;
    f.cqi = a.cqi / n;
    f.ta = a.ta / n;
    f.freq = a.freq / n;
    f.velocity = a.velocity / n;
    // Majority vote; the map is id-ordered, so the first maximum is the lowest id.
    std::size_t best = 0;
    for (const auto& [id, votes] : a.cell_votes) {
        if (votes > best) {
            best = votes;
            f.cell_id = id;
        }
    }
    f.payload = 0.0;
    return f;
}

std::optional<std::size_t> ConnectivityMap::cell_sample_count(const CellIndex& idx) const {
    const auto it = cells_.find(idx);
    if (it == cells_.end()) return std::nullopt;
    return it->second.count;
}

FeatureVector ConnectivityMap::lookup_or(const GeoPosition& pos, const FeatureVector& fallback) const {
    const auto agg = cell_aggregate(cell_index_of(pos, cell_width_));
    return agg ? *agg : fallback;
}

ConnectivityMap build_connectivity_map(std::span<const Trace> traces, double cell_width) {
    if (traces.empty()) throw ValidationError("connectivity map needs at least one trace");
    ConnectivityMap map(cell_width);
    for (const Trace& trace : traces) {
        for (const ContextSample& s : trace.samples) map.add_sample(s);
    }
    return map;
}

GeoPosition predict_position(const Trace& trace, double t, double tau) {
    const auto& samples = trace.samples;
    if (samples.empty()) throw ValidationError("predict_position on empty trace");
    const double target = t + tau;
    if (target <= samples.back().t) {
        if (target <= samples.front().t) return samples.front().pos;
        // Inside the trace: locate the bracketing samples.
        const auto upper = std::lower_bound(
            samples.begin(), samples.end(), target,
            [](const ContextSample& s, double value) { return s.t < value; });
        const auto hi = static_cast<std::size_t>(upper - samples.begin());
        if (samples[hi].t == target) return samples[hi].pos;
        const ContextSample& a = samples[hi - 1];
        const ContextSample& b = samples[hi];
        const double u = (target - a.t) / (b.t - a.t);
        return {a.pos.x + u * (b.pos.x - a.pos.x), a.pos.y + u * (b.pos.y - a.pos.y)};
    }
    if (samples.size() < 2) {
        throw ValidationError("position extrapolation needs at least two samples");
    }
    const ContextSample& prev = samples[samples.size() - 2];
    const ContextSample& last = samples.back();
    const double dt = last.t - prev.t;
    const double overshoot = target - last.t;
    return {last.pos.x + overshoot * (last.pos.x - prev.pos.x) / dt,
            last.pos.y + overshoot * (last.pos.y - prev.pos.y) / dt};
}

GeoPosition predict_position(const Trace& trace, double t, double tau, double pos_noise_std,
                             Rng& rng) {
    GeoPosition p = predict_position(trace, t, tau);
    if (pos_noise_std > 0.0) {
        p.x += rng.normal(0.0, pos_noise_std);
        p.y += rng.normal(0.0, pos_noise_std);
    }
    return p;
}

} // namespace catsim
