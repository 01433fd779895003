#include "catsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "catsim/errors.hpp"

namespace catsim {

namespace {

bool is_rl(SchemeKind k) { return k == SchemeKind::RlCat || k == SchemeKind::RlPcat; }
bool needs_predictor(SchemeKind k) { return k == SchemeKind::MlCat || is_rl(k); }

void check_wiring(const EpisodeConfig& cfg, const Trace& trace, const EnvState& env,
                  const RatePredictor* predictor, const QTable* table,
                  const ConnectivityMap* map) {
    if (env.trace != &trace) throw ValidationError("env is bound to a different trace");
    if (trace.mno != env.profile.name || trace.direction != env.profile.direction) {
        throw ValidationError("trace labels (" + trace.mno + ", " + to_string(trace.direction) +
                              ") do not match the env profile (" + env.profile.name + ", " +
                              to_string(env.profile.direction) + ")");
    }
    if (needs_predictor(cfg.scheme)) {
        if (!predictor) throw ValidationError(to_string(cfg.scheme) + " requires a predictor");
        if (predictor->profile().name != env.profile.name ||
            predictor->profile().direction != env.profile.direction) {
            throw ValidationError("predictor profile does not match env profile");
        }
    }
    if (is_rl(cfg.scheme)) {
        if (!table) throw ValidationError(to_string(cfg.scheme) + " requires a Q-table");
        cfg.rl.validate();
        if (cfg.rl.s_star != env.profile.target_rate || cfg.rl.s_max != env.profile.max_rate) {
            throw ValidationError("RL params s_star/s_max do not match the MNO profile");
        }
    }
    if (cfg.scheme == SchemeKind::RlPcat && !map) {
        throw ValidationError("rl_pcat requires a connectivity map");
    }
    if (cfg.scheme == SchemeKind::Cat || cfg.scheme == SchemeKind::MlCat) cfg.prob.validate();
}

// Hypothetical transmission outcome at t, mirroring transmit() but drawing
// from a dedicated stream so episode state stays untouched. A look-ahead
// past the trace end clamps to the final context.
double counterfactual_rate(const EnvState& env, double t, double payload_bytes, Rng& cf_rng) {
    const auto& samples = env.trace->samples;
    const auto last = static_cast<std::int64_t>(samples.size()) - 1;
    const auto idx = std::clamp<std::int64_t>(std::llround(t - samples.front().t), 0, last);
    const ContextSample& s = samples[static_cast<std::size_t>(idx)];
    const double rate = true_data_rate(s, payload_bytes, env.profile, env.rate_model);
    const double noise = env.sigma_env > 0.0 ? cf_rng.normal(0.0, env.sigma_env) : 0.0;
    return std::max(env.rate_model.rate_floor, rate + noise);
}

} // namespace

EpisodeResult run_episode(const EpisodeConfig& cfg, const Trace& trace, EnvState& env,
                          RatePredictor* predictor, QTable* table, const ConnectivityMap* map) {
    check_wiring(cfg, trace, env, predictor, table, map);

    Rng decision_rng(cfg.decision_seed);
    Rng cf_rng(cfg.counterfactual_seed);

    EpisodeResult result;
    result.scheme = to_string(cfg.scheme);

    BufferState buf;
    buf.last_tx_t = trace.start_time();
    double busy_until = -std::numeric_limits<double>::infinity();

    struct PendingIdle {
        QKey key;
        double t, dt, buffered;
    };
    std::vector<PendingIdle> pending;

    const bool pcat_counterfactuals =
        cfg.scheme == SchemeKind::RlPcat && (cfg.training || cfg.eval_counterfactual_probe);

    for (const ContextSample& s : trace.samples) {
        const double now = s.t;
        buf = buffer_step(buf, now, cfg.gen_rate, trace.tick());
        result.generated_bytes += cfg.gen_rate * trace.tick();
        if (now < busy_until) continue; // channel occupied by the previous transfer

        const double dt = now - buf.last_tx_t;
        Action action = Action::Idle;
        QKey key;

        switch (cfg.scheme) {
            case SchemeKind::Periodic:
                action = decide_periodic(dt, cfg.periodic_interval);
                break;
            case SchemeKind::Cat:
                action = decide_probabilistic(s.sinr, dt, cfg.prob, decision_rng);
                break;
            case SchemeKind::MlCat: {
                const double truth = true_data_rate(s, buf.size, env.profile, env.rate_model);
                const double predicted = predictor->predict(features_from_sample(s, buf.size), truth);
                action = decide_probabilistic(predicted, dt, cfg.prob, decision_rng);
                break;
            }
            case SchemeKind::RlCat:
            case SchemeKind::RlPcat: {
                const double truth = true_data_rate(s, buf.size, env.profile, env.rate_model);
                const double predicted = predictor->predict(features_from_sample(s, buf.size), truth);
                std::optional<double> predicted_future;
                if (cfg.scheme == SchemeKind::RlPcat) {
                    const GeoPosition future_pos =
                        predict_position(trace, now, cfg.rl.tau, cfg.pos_noise_std, decision_rng);
                    FeatureVector future_f = map->lookup_or(future_pos, features_from_sample(s, 0.0));
                    future_f.payload = buf.size + cfg.rl.tau * cfg.gen_rate;
                    const double future_truth =
                        true_data_rate(future_f.sinr, future_f.payload, env.profile, env.rate_model);
                    predicted_future = predictor->predict(future_f, future_truth);
                }
                key = make_key(predicted, dt, predicted_future, env.profile.rate_range, cfg.rl.dt_max);
                action = decide_rl(key, *table);
                if (cfg.training && cfg.epsilon > 0.0 && decision_rng.uniform() < cfg.epsilon) {
                    action = decision_rng.uniform() < 0.5 ? Action::Idle : Action::Tx;
                }
                break;
            }
        }

        if (action == Action::Tx) {
            const double payload = buf.size;
            TransmissionRecord rec = transmit(env, now, payload, aoi(buf, now));
            if (cfg.training && is_rl(cfg.scheme)) {
                table->update(key, Action::Tx, reward_tx(rec.measured_rate, dt, cfg.rl), cfg.rl.alpha);
            }
            if (rec.aoi > cfg.aoi_deadline) ++result.deadline_violations;
            result.transmitted_bytes += payload;
            result.transmissions.push_back(std::move(rec));
            buf.size = 0.0;
            buf.last_tx_t = now;
            busy_until = now + result.transmissions.back().duration;
        } else if (cfg.training && cfg.scheme == SchemeKind::RlCat) {
            table->update(key, Action::Idle, reward_idle(dt, cfg.rl), cfg.rl.alpha);
        } else if (pcat_counterfactuals) {
            if (cfg.deferred_idle_updates) {
                pending.push_back({key, now, dt, buf.size});
            } else {
                const double s_cf = counterfactual_rate(env, now + cfg.rl.tau,
                                                        buf.size + cfg.rl.tau * cfg.gen_rate, cf_rng);
                const double r = reward_idle_pcat(s_cf, dt, cfg.rl);
                if (cfg.training) table->update(key, Action::Idle, r, cfg.rl.alpha);
            }
        }
    }

    // Deferred-update replay: same counterfactual values, applied after the
    // episode instead of inline.
    for (const PendingIdle& p : pending) {
        const double s_cf =
            counterfactual_rate(env, p.t + cfg.rl.tau, p.buffered + cfg.rl.tau * cfg.gen_rate, cf_rng);
        const double r = reward_idle_pcat(s_cf, p.dt, cfg.rl);
        if (cfg.training) table->update(p.key, Action::Idle, r, cfg.rl.alpha);
    }

    result.final_buffer_bytes = buf.size;
    if (!result.transmissions.empty()) {
        double rate_sum = 0.0, aoi_sum = 0.0;
        for (const TransmissionRecord& r : result.transmissions) {
            rate_sum += r.measured_rate;
            aoi_sum += r.aoi;
        }
        result.mean_rate = rate_sum / static_cast<double>(result.transmissions.size());
        result.mean_aoi = aoi_sum / static_cast<double>(result.transmissions.size());
    }
    return result;
}

TrainResult train(SchemeKind scheme, const std::vector<Trace>& traces, int epochs,
                  const TrainSeeds& seeds, const MnoProfile& profile, const RlParams& rl,
                  const TrainOptions& opts) {
    if (epochs < 1) throw ValidationError("training requires epochs >= 1");
    if (traces.empty()) throw ValidationError("training requires at least one trace");
    if (!is_rl(scheme)) throw ValidationError("train expects rl_cat or rl_pcat");
    rl.validate();

    std::vector<std::size_t> order(traces.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(seeds.shuffle);
    shuffle_rng.shuffle(order);

    TrainResult result{QTable(seeds.table), {}, {}, ConnectivityMap(opts.map_cell_width)};
    if (scheme == SchemeKind::RlPcat) {
        result.map = build_connectivity_map(traces, opts.map_cell_width);
    }
    result.convergence.reserve(static_cast<std::size_t>(epochs));
    result.plan.reserve(static_cast<std::size_t>(epochs));

    const double sigma = opts.sigma_env.value_or(profile.pred_rmse / 2.0);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const auto e = static_cast<std::uint64_t>(epoch);
        EpochPlanEntry entry;
        entry.trace_index = order[static_cast<std::size_t>(epoch) % order.size()];
        entry.env_seed = mix_seed(seeds.env, e);
        entry.predictor_seed = mix_seed(seeds.predictor, e);
        entry.decision_seed = mix_seed(seeds.decision, e);
        entry.counterfactual_seed = mix_seed(seeds.counterfactual, e);

        const Trace& trace = traces[entry.trace_index];
        EnvState env(trace, profile, entry.env_seed, sigma);
        RatePredictor predictor(
            {PredictorSpec::Kind::NoisyOracle, profile, entry.predictor_seed, std::nullopt});

        EpisodeConfig ecfg;
        ecfg.scheme = scheme;
        ecfg.rl = rl;
        ecfg.aoi_deadline = rl.dt_max;
        ecfg.gen_rate = opts.gen_rate;
        ecfg.training = true;
        ecfg.deferred_idle_updates = opts.deferred_idle_updates;
        ecfg.epsilon = opts.epsilon0 > 0.0
                           ? opts.epsilon0 * (1.0 - static_cast<double>(epoch) / epochs)
                           : 0.0;
        ecfg.pos_noise_std = opts.pos_noise_std;
        ecfg.decision_seed = entry.decision_seed;
        ecfg.counterfactual_seed = entry.counterfactual_seed;

        const EpisodeResult res =
            run_episode(ecfg, trace, env, &predictor, &result.table,
                        scheme == SchemeKind::RlPcat ? &result.map : nullptr);
        result.convergence.push_back(res.mean_rate);
        result.plan.push_back(entry);
    }
    return result;
}

EpisodeResult evaluate_episode(SchemeKind scheme, const Trace& trace, const MnoProfile& profile,
                               const EpochPlanEntry& entry, QTable* table,
                               const ConnectivityMap* map, const ExperimentConfig& cfg) {
    EnvState env(trace, profile, entry.env_seed, cfg.sigma_env_for(profile));
    RatePredictor predictor(
        {PredictorSpec::Kind::NoisyOracle, profile, entry.predictor_seed, std::nullopt});

    EpisodeConfig ecfg;
    ecfg.scheme = scheme;
    ecfg.periodic_interval = cfg.periodic_interval;
    if (scheme == SchemeKind::Cat) ecfg.prob = cfg.cat_params;
    if (scheme == SchemeKind::MlCat) ecfg.prob = cfg.ml_cat_for(profile);
    if (is_rl(scheme)) ecfg.rl = cfg.rl_for(profile);
    ecfg.aoi_deadline = cfg.rl.dt_max;
    ecfg.gen_rate = cfg.gen_rate;
    ecfg.training = false;
    ecfg.pos_noise_std = cfg.pos_noise_std;
    ecfg.decision_seed = entry.decision_seed;
    ecfg.counterfactual_seed = entry.counterfactual_seed;

    return run_episode(ecfg, trace, env, needs_predictor(scheme) ? &predictor : nullptr, table, map);
}

double efficiency_s(double mean_rate, double s_star) {
    if (s_star <= 0.0) throw ValidationError("s_star must be > 0");
    return mean_rate / s_star;
}

double efficiency_aoi(double mean_aoi, double dt_max) {
    if (dt_max <= 0.0) throw ValidationError("dt_max must be > 0");
    return 1.0 - mean_aoi / dt_max;
}

RunSummary summarize(const std::string& scheme, std::span<const EpisodeResult> episodes,
                     double s_star, double dt_max) {
    RunSummary sum;
    sum.scheme = scheme;
    double rate_sum = 0.0, aoi_sum = 0.0;
    for (const EpisodeResult& ep : episodes) {
        sum.n_transmissions += ep.transmissions.size();
        sum.deadline_violations += ep.deadline_violations;
        for (const TransmissionRecord& r : ep.transmissions) {
            rate_sum += r.measured_rate;
            aoi_sum += r.aoi;
        }
    }
    if (sum.n_transmissions > 0) {
        sum.mean_rate = rate_sum / static_cast<double>(sum.n_transmissions);
        sum.mean_aoi = aoi_sum / static_cast<double>(sum.n_transmissions);
    }
    sum.e_s = efficiency_s(sum.mean_rate, s_star);
    sum.e_aoi = efficiency_aoi(sum.mean_aoi, dt_max);
    return sum;
}

std::vector<Trace> generate_traces(const ExperimentConfig& cfg, std::uint64_t stream, int count) {
    const MnoProfile& profile = cfg.active_profile();
    std::vector<Trace> traces;
    traces.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        ScenarioConfig sc = cfg.scenario;
        sc.seed = mix_seed(mix_seed(cfg.seed, stream), static_cast<std::uint64_t>(i));
        traces.push_back(generate_trace(sc, profile));
    }
    return traces;
}

TrainSeeds train_seeds_for(std::uint64_t master_seed) {
    TrainSeeds s;
    s.shuffle = mix_seed(master_seed, seed_stream::kShuffle);
    s.table = mix_seed(master_seed, seed_stream::kTableInit);
    s.env = mix_seed(master_seed, seed_stream::kEnvNoise);
    s.predictor = mix_seed(master_seed, seed_stream::kPredictor);
    s.decision = mix_seed(master_seed, seed_stream::kDecision);
    s.counterfactual = mix_seed(master_seed, seed_stream::kCounterfactual);
    return s;
}

EpochPlanEntry eval_entry_for(std::uint64_t master_seed, std::size_t trace_index) {
    // 0x10000 offsets the evaluation streams away from the training epochs.
    const std::uint64_t k = 0x10000 + static_cast<std::uint64_t>(trace_index);
    EpochPlanEntry entry;
    entry.trace_index = trace_index;
    entry.env_seed = mix_seed(mix_seed(master_seed, seed_stream::kEnvNoise), k);
    entry.predictor_seed = mix_seed(mix_seed(master_seed, seed_stream::kPredictor), k);
    entry.decision_seed = mix_seed(mix_seed(master_seed, seed_stream::kDecision), k);
    entry.counterfactual_seed = mix_seed(mix_seed(master_seed, seed_stream::kCounterfactual), k);
    return entry;
}

namespace {

TrainOptions train_options_from(const ExperimentConfig& cfg, const MnoProfile& profile) {
    TrainOptions opts;
    opts.gen_rate = cfg.gen_rate;
    opts.sigma_env = cfg.sigma_env_for(profile);
    opts.map_cell_width = cfg.map_cell_width;
    opts.epsilon0 = cfg.epsilon0;
    opts.pos_noise_std = cfg.pos_noise_std;
    opts.deferred_idle_updates = cfg.deferred_idle_updates;
    return opts;
}

struct SchemeEval {
    std::vector<EpisodeResult> episodes;
};

SchemeEval evaluate_scheme(SchemeKind scheme, const std::vector<Trace>& eval_traces,
                           const MnoProfile& profile, std::uint64_t master, QTable* table,
                           const ConnectivityMap* map, const ExperimentConfig& cfg) {
    SchemeEval out;
    out.episodes.reserve(eval_traces.size());
    for (std::size_t i = 0; i < eval_traces.size(); ++i) {
        out.episodes.push_back(evaluate_episode(scheme, eval_traces[i], profile,
                                                eval_entry_for(master, i), table, map, cfg));
    }
    return out;
}

} // namespace

std::vector<ComparisonRow> compare_schemes(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<ComparisonRow> rows;

    for (const MnoProfile& profile : cfg.profiles) {
        ExperimentConfig active = cfg;
        active.mno = profile.name;
        active.direction = profile.direction;

        const std::vector<Trace> train_traces =
            generate_traces(active, seed_stream::kTrainTrace, cfg.train_traces);
        const std::vector<Trace> eval_traces =
            generate_traces(active, seed_stream::kEvalTrace, cfg.eval_traces);
        const TrainOptions opts = train_options_from(cfg, profile);

        for (SchemeKind scheme : cfg.schemes) {
            std::optional<TrainResult> trained;
            if (is_rl(scheme)) {
                trained = train(scheme, train_traces, cfg.epochs, train_seeds_for(cfg.seed),
                                profile, cfg.rl_for(profile), opts);
            }
            SchemeEval ev = evaluate_scheme(scheme, eval_traces, profile, cfg.seed,
                                            trained ? &trained->table : nullptr,
                                            trained && scheme == SchemeKind::RlPcat
                                                ? &trained->map
                                                : nullptr,
                                            active);
            ComparisonRow row;
            row.mno = profile.name;
            row.direction = profile.direction;
            row.summary = summarize(to_string(scheme), ev.episodes, profile.target_rate,
                                    cfg.rl.dt_max);
            for (const EpisodeResult& ep : ev.episodes) {
                row.transmissions.insert(row.transmissions.end(), ep.transmissions.begin(),
                                         ep.transmissions.end());
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

SweepSeedResult sweep_run_once(const ExperimentConfig& cfg, double w, std::uint64_t seed_index,
                               SchemeKind scheme) {
    ExperimentConfig run_cfg = cfg;
    run_cfg.rl.w = w;
    run_cfg.seed = mix_seed(mix_seed(cfg.seed, seed_stream::kSweep), seed_index);

    const MnoProfile& profile = run_cfg.active_profile();
    const std::vector<Trace> train_traces =
        generate_traces(run_cfg, seed_stream::kTrainTrace, run_cfg.train_traces);
    const std::vector<Trace> eval_traces =
        generate_traces(run_cfg, seed_stream::kEvalTrace, run_cfg.eval_traces);

    TrainResult trained = train(scheme, train_traces, run_cfg.epochs,
                                train_seeds_for(run_cfg.seed), profile, run_cfg.rl_for(profile),
                                train_options_from(run_cfg, profile));
    SchemeEval ev = evaluate_scheme(scheme, eval_traces, profile, run_cfg.seed, &trained.table,
                                    scheme == SchemeKind::RlPcat ? &trained.map : nullptr,
                                    run_cfg);
    const RunSummary sum =
        summarize(to_string(scheme), ev.episodes, profile.target_rate, run_cfg.rl.dt_max);

    SweepSeedResult r;
    r.seed_index = seed_index;
    r.e_s = sum.e_s;
    r.e_aoi = sum.e_aoi;
    r.mean_rate = sum.mean_rate;
    r.mean_aoi = sum.mean_aoi;
    r.deadline_violations = sum.deadline_violations;
    return r;
}

std::vector<SweepEntry> sweep_w(const std::vector<double>& w_values, const ExperimentConfig& cfg,
                                SchemeKind scheme, int workers) {
    cfg.validate();
    for (double w : w_values) {
        if (w < 0.0 || w > 1.0) throw ValidationError("sweep w values must be in [0,1]");
    }
    if (!is_rl(scheme)) throw ValidationError("sweep_w expects an RL scheme");

    struct Task {
        std::size_t w_index;
        std::uint64_t seed_index;
    };
    std::vector<Task> tasks;
    for (std::size_t wi = 0; wi < w_values.size(); ++wi) {
        for (int si = 0; si < cfg.sweep_seeds; ++si) {
            tasks.push_back({wi, static_cast<std::uint64_t>(si)});
        }
    }

    std::vector<std::vector<SweepSeedResult>> results(w_values.size());
    for (auto& per_w : results) per_w.resize(static_cast<std::size_t>(cfg.sweep_seeds));

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_workers =
        std::min(tasks.size(), static_cast<std::size_t>(workers > 0 ? workers : hw));

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    const auto body = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                const Task& t = tasks[i];
                results[t.w_index][t.seed_index] =
                    sweep_run_once(cfg, w_values[t.w_index], t.seed_index, scheme);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (n_workers <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::vector<SweepEntry> entries;
    entries.reserve(w_values.size());
    for (std::size_t wi = 0; wi < w_values.size(); ++wi) {
        SweepEntry e;
        e.w = w_values[wi];
        e.seeds = results[wi];
        const auto n = static_cast<double>(e.seeds.size());
        for (const SweepSeedResult& r : e.seeds) {
            e.e_s_mean += r.e_s;
            e.e_aoi_mean += r.e_aoi;
        }
        e.e_s_mean /= n;
        e.e_aoi_mean /= n;
        if (e.seeds.size() > 1) {
            double vs = 0.0, va = 0.0;
            for (const SweepSeedResult& r : e.seeds) {
                vs += (r.e_s - e.e_s_mean) * (r.e_s - e.e_s_mean);
                va += (r.e_aoi - e.e_aoi_mean) * (r.e_aoi - e.e_aoi_mean);
            }
            e.e_s_std = std::sqrt(vs / (n - 1.0));
            e.e_aoi_std = std::sqrt(va / (n - 1.0));
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

BlackspotReport detect_blackspots(std::span<const TransmissionRecord> records, double cell_width,
                                  std::size_t min_count) {
    if (records.empty()) throw ValidationError("blackspot detection needs at least one record");
    if (cell_width <= 0.0) throw ValidationError("blackspot cell width must be > 0");
    if (min_count < 1) throw ValidationError("blackspot min_count must be >= 1");

    double rate_sum = 0.0;
    for (const TransmissionRecord& r : records) rate_sum += r.measured_rate;
    const double mean_rate = rate_sum / static_cast<double>(records.size());
    const double threshold = mean_rate / 2.0;

    std::map<CellIndex, BlackspotCell> cells;
    for (const TransmissionRecord& r : records) {
        const CellIndex idx = cell_index_of(r.pos, cell_width);
        BlackspotCell& c = cells[idx];
        c.cell = idx;
        c.total_count += 1;
        if (r.measured_rate < threshold) c.low_rate_count += 1;
    }

    BlackspotReport report;
    report.cell_width = cell_width;
    report.mean_rate = mean_rate;
    for (const auto& [idx, cell] : cells) {
        if (cell.low_rate_count >= min_count) report.flagged.push_back(cell);
    }
    return report;
}

} // namespace catsim
