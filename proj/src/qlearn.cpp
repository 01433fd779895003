#include "catsim/qlearn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "catsim/errors.hpp"
#include "catsim/textio.hpp"

namespace catsim {

std::string to_string(Action a) { return a == Action::Idle ? "IDLE" : "TX"; }

void RlParams::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must be in (0,1]");
    if (w < 0.0 || w > 1.0) throw ValidationError("w must be in [0,1]");
    if (omega >= 0.0) throw ValidationError("omega must be negative");
    if (!(s_star > 0.0 && s_star < s_max)) throw ValidationError("requires 0 < s_star < s_max");
    if (dt_max <= 0.0) throw ValidationError("dt_max must be > 0");
    if (tau <= 0.0) throw ValidationError("tau must be > 0");
    if (lambda < 0.0 || lambda >= 1.0) throw ValidationError("lambda must be in [0,1)");
}

QKey make_key(double s_pred, double dt, std::optional<double> s_pred_future, double rate_range,
              double dt_max) {
    const auto discretize_rate = [rate_range](double s) {
        const double clamped = std::clamp(s, 0.0, rate_range);
        return static_cast<int>(std::floor(clamped + 0.5)); // half rounds up
    };
    QKey key;
    key.s_now = discretize_rate(s_pred);
    if (s_pred_future) key.s_future = discretize_rate(*s_pred_future);
    key.dt_bin = static_cast<int>(std::floor(std::clamp(dt, 0.0, dt_max)));
    return key;
}

double reward_tx(double measured_rate, double dt, const RlParams& p) {
    return p.w * (measured_rate - p.s_star) / p.s_max + dt * (1.0 - p.w) / p.dt_max;
}

double reward_idle(double dt, const RlParams& p) {
    return dt >= p.dt_max ? p.omega : 0.0;
}

double reward_idle_pcat(double s_future, double dt, const RlParams& p) {
    if (dt >= p.dt_max) return p.omega;
    return (1.0 / p.tau) * reward_tx(s_future, dt + p.tau, p);
}

double q_update(double q_old, double r, double alpha) {
    return (1.0 - alpha) * q_old + alpha * r;
}

double q_update_discounted(double q_old, double r, double alpha, double lambda,
                           double max_q_next) {
    return (1.0 - alpha) * q_old + alpha * (r + lambda * max_q_next);
}

QTable::QTable(std::uint64_t seed) : init_rng_(seed), seed_(seed) {}

double QTable::get(const QKey& key, Action a) {
    const auto it = entries_.find({key, a});
    if (it != entries_.end()) return it->second;
    const double value = init_rng_.normal();
    entries_.emplace(std::make_pair(key, a), value);
    return value;
}

void QTable::set(const QKey& key, Action a, double value) { entries_[{key, a}] = value; }

void QTable::update(const QKey& key, Action a, double reward, double alpha) {
    set(key, a, q_update(get(key, a), reward, alpha));
}

std::uint64_t rl_params_fingerprint(const RlParams& p, double rate_range) {
    std::string canon;
    for (double v : {p.alpha, p.w, p.s_star, p.s_max, p.dt_max, p.omega, p.tau, p.lambda, rate_range}) {
        canon += format_double(v);
        canon += ';';
    }
    return fnv1a(canon);
}

void QTable::save(std::ostream& out, const RlParams& params, double rate_range) const {
    out << "# catsim qtable v1\n";
    out << "# seed " << seed_ << "\n";
    out << "# params " << hex64(rl_params_fingerprint(params, rate_range)) << "\n";
    for (const auto& [key_action, value] : entries_) {
        const auto& [key, action] = key_action;
        out << key.s_now << ' ';
        if (key.s_future) out << *key.s_future << ' ';
        out << key.dt_bin << ' ' << to_string(action) << ' ' << format_double(value) << "\n";
    }
}

QTable QTable::load(std::istream& in, const RlParams& expected_params,
                    double expected_rate_range) {
    std::string line;
    if (!std::getline(in, line) || line != "# catsim qtable v1") {
        throw ParseError("not a catsim qtable file (bad magic line)");
    }
    std::uint64_t seed = 0;
    std::string params_hex;
    for (int i = 0; i < 2; ++i) {
        if (!std::getline(in, line)) throw ParseError("truncated qtable header");
        std::istringstream ls(line);
        std::string hash, tag;
        ls >> hash >> tag;
        if (hash != "#") throw ParseError("malformed qtable header line: " + line);
        if (tag == "seed") {
            if (!(ls >> seed)) throw ParseError("malformed qtable seed line");
        } else if (tag == "params") {
            if (!(ls >> params_hex)) throw ParseError("malformed qtable params line");
        } else {
            throw ParseError("unexpected qtable header tag: " + tag);
        }
    }
    const std::string expected_hex = hex64(rl_params_fingerprint(expected_params, expected_rate_range));
    if (params_hex != expected_hex) {
        throw ValidationError("qtable parameter fingerprint mismatch: file " + params_hex +
                              ", expected " + expected_hex);
    }

    QTable table(seed);
    std::size_t line_no = 3;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line, ' ');
        if (fields.size() != 4 && fields.size() != 5) {
            throw ParseError("qtable line " + std::to_string(line_no) + ": expected 4 or 5 fields");
        }
        QKey key;
        std::size_t at = 0;
        std::int64_t v;
        if (!parse_i64(fields[at++], v)) throw ParseError("qtable line " + std::to_string(line_no) + ": bad s_now");
        key.s_now = static_cast<int>(v);
        if (fields.size() == 5) {
            if (!parse_i64(fields[at++], v)) throw ParseError("qtable line " + std::to_string(line_no) + ": bad s_future");
            key.s_future = static_cast<int>(v);
        }
        if (!parse_i64(fields[at++], v)) throw ParseError("qtable line " + std::to_string(line_no) + ": bad dt_bin");
        key.dt_bin = static_cast<int>(v);
        Action action;
        if (fields[at] == "IDLE") action = Action::Idle;
        else if (fields[at] == "TX") action = Action::Tx;
        else throw ParseError("qtable line " + std::to_string(line_no) + ": bad action '" + std::string(fields[at]) + "'");
        ++at;
        double value;
        if (!parse_double(fields[at], value)) {
            throw ParseError("qtable line " + std::to_string(line_no) + ": bad value");
        }
        table.set(key, action, value);
    }
    return table;
}

void QTable::save_file(const std::string& path, const RlParams& params, double rate_range) const {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open file for writing: " + path);
    save(out, params, rate_range);
}

QTable QTable::load_file(const std::string& path, const RlParams& expected_params,
                         double expected_rate_range) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open qtable file: " + path);
    return load(in, expected_params, expected_rate_range);
}

} // namespace catsim
