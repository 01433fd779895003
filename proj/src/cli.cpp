#include "catsim/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "catsim/errors.hpp"
#include "catsim/harness.hpp"
#include "catsim/textio.hpp"

namespace catsim {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct CommonArgs {
    std::string config_path;
    std::string preset = "reference";
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config JSON file");
    cmd->add_option("--preset", args.preset, "built-in preset name (default: reference)");
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--seed", args.seed_override, "override the config's master seed");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
    ExperimentConfig cfg =
        args.config_path.empty() ? preset_by_name(args.preset) : load_config(args.config_path);
    if (args.seed_override) cfg.seed = *args.seed_override;
    cfg.validate();
    return cfg;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path.string());
    out << content;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const ExperimentConfig& cfg) {
    json m;
    m["tool"] = "catsim";
    m["version"] = kVersion;
    m["command"] = command;
    m["seed"] = cfg.seed;
    m["config_hash"] = hex64(config_hash(cfg));
    m["config"] = json::parse(config_to_json(cfg));
    write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

std::string transmissions_csv(const std::vector<ComparisonRow>& rows) {
    std::string csv = "mno,direction,scheme,t_start,payload,measured_rate,aoi,x,y,duration\n";
    for (const ComparisonRow& row : rows) {
        for (const TransmissionRecord& r : row.transmissions) {
            csv += row.mno + ',' + to_string(row.direction) + ',' + row.summary.scheme + ',';
            csv += format_double(r.t_start) + ',' + format_double(r.payload) + ',';
            csv += format_double(r.measured_rate) + ',' + format_double(r.aoi) + ',';
            csv += format_double(r.pos.x) + ',' + format_double(r.pos.y) + ',';
            csv += format_double(r.duration) + '\n';
        }
    }
    return csv;
}

json summary_json(const std::vector<ComparisonRow>& rows) {
    json out = json::array();
    for (const ComparisonRow& row : rows) {
        json r;
        r["mno"] = row.mno;
        r["direction"] = to_string(row.direction);
        r["scheme"] = row.summary.scheme;
        r["transmissions"] = row.summary.n_transmissions;
        r["mean_rate_mbps"] = row.summary.mean_rate;
        r["mean_aoi_s"] = row.summary.mean_aoi;
        r["deadline_violations"] = row.summary.deadline_violations;
        r["e_s"] = row.summary.e_s;
        r["e_aoi"] = row.summary.e_aoi;
        out.push_back(r);
    }
    return out;
}

ComparisonRow evaluate_single_scheme(const ExperimentConfig& cfg, SchemeKind scheme,
                                     const std::string& qtable_path) {
    const MnoProfile& profile = cfg.active_profile();
    const bool rl = scheme == SchemeKind::RlCat || scheme == SchemeKind::RlPcat;

    std::optional<QTable> table;
    std::optional<ConnectivityMap> map;
    if (rl) {
        if (qtable_path.empty()) {
            throw ConfigError("evaluating " + to_string(scheme) + " requires --qtable");
        }
        table = QTable::load_file(qtable_path, cfg.rl_for(profile), profile.rate_range);
        if (scheme == SchemeKind::RlPcat) {
            // The connectivity map is rebuilt from the (deterministic)
            // training trace set of this config.
            const auto train_traces = generate_traces(cfg, seed_stream::kTrainTrace, cfg.train_traces);
            map = build_connectivity_map(train_traces, cfg.map_cell_width);
        }
    }

    const auto eval_traces = generate_traces(cfg, seed_stream::kEvalTrace, cfg.eval_traces);
    std::vector<EpisodeResult> episodes;
    episodes.reserve(eval_traces.size());
    for (std::size_t i = 0; i < eval_traces.size(); ++i) {
        episodes.push_back(evaluate_episode(scheme, eval_traces[i], profile,
                                            eval_entry_for(cfg.seed, i),
                                            table ? &*table : nullptr, map ? &*map : nullptr,
                                            cfg));
    }

    ComparisonRow row;
    row.mno = profile.name;
    row.direction = profile.direction;
    row.summary = summarize(to_string(scheme), episodes, profile.target_rate, cfg.rl.dt_max);
    for (const EpisodeResult& ep : episodes) {
        row.transmissions.insert(row.transmissions.end(), ep.transmissions.begin(),
                                 ep.transmissions.end());
    }
    return row;
}

int cmd_generate(const CommonArgs& common, int count) {
    const ExperimentConfig cfg = resolve_config(common);
    const fs::path dir(common.out_dir);
    fs::create_directories(dir / "traces");

    const auto traces = generate_traces(cfg, seed_stream::kGenerate, count);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "trace_%03zu.csv", i);
        write_text_file(dir / "traces" / name, write_trace(traces[i]));
    }
    write_manifest(dir, "generate", cfg);
    std::cout << "wrote " << traces.size() << " trace(s) of "
              << traces.front().samples.size() << " samples to " << (dir / "traces").string()
              << "\n";
    return 0;
}

int cmd_train(const CommonArgs& common, const std::string& scheme_name) {
    const ExperimentConfig cfg = resolve_config(common);
    const SchemeKind scheme = scheme_from_string(scheme_name);
    const MnoProfile& profile = cfg.active_profile();

    const auto train_traces = generate_traces(cfg, seed_stream::kTrainTrace, cfg.train_traces);
    TrainOptions opts;
    opts.gen_rate = cfg.gen_rate;
    opts.sigma_env = cfg.sigma_env_for(profile);
    opts.map_cell_width = cfg.map_cell_width;
    opts.epsilon0 = cfg.epsilon0;
    opts.pos_noise_std = cfg.pos_noise_std;
    opts.deferred_idle_updates = cfg.deferred_idle_updates;

    const TrainResult result = train(scheme, train_traces, cfg.epochs,
                                     train_seeds_for(cfg.seed), profile, cfg.rl_for(profile), opts);

    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    result.table.save_file((dir / "qtable.txt").string(), cfg.rl_for(profile), profile.rate_range);

    std::string curve = "epoch,mean_rate_mbps\n";
    for (std::size_t e = 0; e < result.convergence.size(); ++e) {
        curve += std::to_string(e) + ',' + format_double(result.convergence[e]) + '\n';
    }
    write_text_file(dir / "convergence.csv", curve);
    write_manifest(dir, "train", cfg);

    double tail = 0.0;
    const std::size_t tail_n = std::min<std::size_t>(50, result.convergence.size());
    for (std::size_t e = result.convergence.size() - tail_n; e < result.convergence.size(); ++e) {
        tail += result.convergence[e];
    }
    std::cout << "trained " << to_string(scheme) << " for " << cfg.epochs << " epochs; "
              << "trailing-" << tail_n << "-epoch mean rate "
              << format_double(tail / static_cast<double>(tail_n)) << " Mbit/s; table size "
              << result.table.size() << "\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& common, const std::string& scheme_name,
                 const std::string& qtable_path) {
    const ExperimentConfig cfg = resolve_config(common);
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);

    std::vector<ComparisonRow> rows;
    if (scheme_name.empty()) {
        rows = compare_schemes(cfg); // trains RL schemes in-process
    } else {
        rows.push_back(evaluate_single_scheme(cfg, scheme_from_string(scheme_name), qtable_path));
    }

    write_text_file(dir / "transmissions.csv", transmissions_csv(rows));
    write_text_file(dir / "summary.json", summary_json(rows).dump(2) + "\n");
    write_manifest(dir, "evaluate", cfg);
    for (const ComparisonRow& row : rows) {
        std::cout << row.mno << ' ' << to_string(row.direction) << ' ' << row.summary.scheme
                  << ": mean rate " << format_double(row.summary.mean_rate) << " Mbit/s, mean AoI "
                  << format_double(row.summary.mean_aoi) << " s, " << row.summary.n_transmissions
                  << " transmissions\n";
    }
    return 0;
}

int cmd_sweep(const CommonArgs& common, const std::string& scheme_name, int workers) {
    const ExperimentConfig cfg = resolve_config(common);
    const SchemeKind scheme = scheme_from_string(scheme_name);
    const auto entries = sweep_w(cfg.sweep_w_values, cfg, scheme, workers);

    json out = json::array();
    for (const SweepEntry& e : entries) {
        json je;
        je["w"] = e.w;
        je["e_s_mean"] = e.e_s_mean;
        je["e_s_std"] = e.e_s_std;
        je["e_aoi_mean"] = e.e_aoi_mean;
        je["e_aoi_std"] = e.e_aoi_std;
        json seeds = json::array();
        for (const SweepSeedResult& r : e.seeds) {
            json jr;
            jr["seed"] = r.seed_index;
            jr["e_s"] = r.e_s;
            jr["e_aoi"] = r.e_aoi;
            jr["mean_rate_mbps"] = r.mean_rate;
            jr["mean_aoi_s"] = r.mean_aoi;
            jr["deadline_violations"] = r.deadline_violations;
            seeds.push_back(jr);
        }
        je["seeds"] = seeds;
        out.push_back(je);
    }

    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    write_text_file(dir / "sweep.json", out.dump(2) + "\n");
    write_manifest(dir, "sweep", cfg);
    std::cout << "swept " << entries.size() << " w values x " << cfg.sweep_seeds << " seeds ("
              << to_string(scheme) << ")\n";
    return 0;
}

int cmd_blackspots(const CommonArgs& common, const std::string& scheme_name,
                   const std::string& qtable_path) {
    const ExperimentConfig cfg = resolve_config(common);
    const ComparisonRow row =
        evaluate_single_scheme(cfg, scheme_from_string(scheme_name), qtable_path);
    const BlackspotReport report = detect_blackspots(
        row.transmissions, cfg.blackspot_cell_width,
        static_cast<std::size_t>(cfg.blackspot_min_count));

    json out;
    out["cell_width_m"] = report.cell_width;
    out["mean_rate_mbps"] = report.mean_rate;
    json cells = json::array();
    for (const BlackspotCell& c : report.flagged) {
        json jc;
        jc["i"] = c.cell.i;
        jc["j"] = c.cell.j;
        jc["low_rate_count"] = c.low_rate_count;
        jc["total_count"] = c.total_count;
        cells.push_back(jc);
    }
    out["flagged_cells"] = cells;

    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    write_text_file(dir / "blackspots.json", out.dump(2) + "\n");
    write_text_file(dir / "transmissions.csv", transmissions_csv({row}));
    write_manifest(dir, "blackspots", cfg);
    std::cout << "flagged " << report.flagged.size() << " blackspot cell(s) from "
              << row.transmissions.size() << " transmissions\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Opportunistic vehicle-to-cloud transmission scheme simulator"};
    app.require_subcommand(1);

    CommonArgs generate_args, train_args, eval_args, sweep_args, blackspot_args;
    int generate_count = 1;
    std::string train_scheme = "rl_cat";
    std::string eval_scheme, eval_qtable;
    std::string sweep_scheme = "rl_cat";
    int sweep_workers = 0;
    std::string bs_scheme = "ml_cat", bs_qtable;

    CLI::App* generate = app.add_subcommand("generate", "synthesize context traces");
    add_common(generate, generate_args);
    generate->add_option("--count", generate_count, "number of traces to generate")
        ->check(CLI::PositiveNumber);

    CLI::App* train_cmd = app.add_subcommand("train", "run the virtual exploration training");
    add_common(train_cmd, train_args);
    train_cmd->add_option("--scheme", train_scheme, "rl_cat or rl_pcat");

    CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate transmission schemes");
    add_common(evaluate, eval_args);
    evaluate->add_option("--scheme", eval_scheme,
                         "single scheme to evaluate (default: all configured schemes)");
    evaluate->add_option("--qtable", eval_qtable, "persisted Q-table for RL schemes");

    CLI::App* sweep = app.add_subcommand("sweep", "trade-off sweep over the w parameter");
    add_common(sweep, sweep_args);
    sweep->add_option("--scheme", sweep_scheme, "rl_cat or rl_pcat");
    sweep->add_option("--workers", sweep_workers, "parallel workers (0 = hardware)");

    CLI::App* blackspots = app.add_subcommand("blackspots", "detect low-rate clusters");
    add_common(blackspots, blackspot_args);
    blackspots->add_option("--scheme", bs_scheme, "scheme whose transmissions are analyzed");
    blackspots->add_option("--qtable", bs_qtable, "persisted Q-table for RL schemes");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed); // CLI11 consumes tokens back to front
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (generate->parsed()) return cmd_generate(generate_args, generate_count);
        if (train_cmd->parsed()) return cmd_train(train_args, train_scheme);
        if (evaluate->parsed()) return cmd_evaluate(eval_args, eval_scheme, eval_qtable);
        if (sweep->parsed()) return cmd_sweep(sweep_args, sweep_scheme, sweep_workers);
        if (blackspots->parsed()) return cmd_blackspots(blackspot_args, bs_scheme, bs_qtable);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace catsim
