#ifndef CATSIM_QLEARN_HPP
#define CATSIM_QLEARN_HPP

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "catsim/rng.hpp"

namespace catsim {

enum class Action { Idle, Tx };

std::string to_string(Action a);

// Discretized decision context: predicted rate(s) in whole Mbit/s and the
// buffering time in whole seconds. s_future is present only for the
// context-predictive scheme.
struct QKey {
    int s_now = 0;
    std::optional<int> s_future;
    int dt_bin = 0;

    auto operator<=>(const QKey&) const = default;
};

// Learning parameters. lambda is retained so the generic update rule stays
// expressible, but the environment is treated as action-independent and
// the effective rule uses lambda = 0.
struct RlParams {
    double alpha = 0.1;    // learning rate, (0,1]
    double w = 0.8;        // rate-vs-AoI trade-off, [0,1]
    double s_star = 30.0;  // target rate, Mbit/s
    double s_max = 40.0;   // maximum rate, Mbit/s
    double dt_max = 120.0; // AoI deadline, seconds
    double omega = -10.0;  // deadline violation punishment, < 0
    double tau = 10.0;     // context look-ahead, seconds
    double lambda = 0.0;   // discount, fixed 0

    void validate() const;
};

// s_now = nearest integer (half away from zero) of the prediction clamped
// to [0, rate_range]; dt_bin = floor of dt clamped to [0, dt_max].
QKey make_key(double s_pred, double dt, std::optional<double> s_pred_future, double rate_range,
              double dt_max);

// w * (S - S*) / S_max + dt * (1 - w) / dt_max
double reward_tx(double measured_rate, double dt, const RlParams& p);

// omega once the deadline is reached, otherwise 0.
double reward_idle(double dt, const RlParams& p);

// omega at the deadline; otherwise the TX reward the postponed transfer
// would earn at t + tau, scaled by 1/tau.
double reward_idle_pcat(double s_future, double dt, const RlParams& p);

// (1 - alpha) * q_old + alpha * r
double q_update(double q_old, double r, double alpha);

// Generic rule (1 - alpha) * q_old + alpha * (r + lambda * max_q_next);
// with lambda = 0 it reduces exactly to q_update.
double q_update_discounted(double q_old, double r, double alpha, double lambda,
                           double max_q_next);

// Sparse action-value table. Entries materialize on first access with
// draws from a seeded N(0,1) stream, which is equivalent to randomizing
// the full table up to the set of keys ever touched.
class QTable {
public:
    explicit QTable(std::uint64_t seed);

    double get(const QKey& key, Action a); // lazily initializes
    void set(const QKey& key, Action a, double value);
    void update(const QKey& key, Action a, double reward, double alpha);

    std::size_t size() const { return entries_.size(); }
    std::uint64_t seed() const { return seed_; }

    // Text persistence with a header carrying the init seed and a
    // fingerprint of the learning parameters; load rejects a mismatch.
    void save(std::ostream& out, const RlParams& params, double rate_range) const;
    static QTable load(std::istream& in, const RlParams& expected_params,
                       double expected_rate_range);
    void save_file(const std::string& path, const RlParams& params, double rate_range) const;
    static QTable load_file(const std::string& path, const RlParams& expected_params,
                            double expected_rate_range);

private:
    std::map<std::pair<QKey, Action>, double> entries_;
    Rng init_rng_;
    std::uint64_t seed_;
};

std::uint64_t rl_params_fingerprint(const RlParams& params, double rate_range);

} // namespace catsim

#endif
