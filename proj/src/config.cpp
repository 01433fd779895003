#include "catsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "catsim/errors.hpp"
#include "catsim/textio.hpp"

namespace catsim {

using json = nlohmann::ordered_json;

const MnoProfile& ExperimentConfig::profile_for(const std::string& name, Direction dir) const {
    for (const MnoProfile& p : profiles) {
        if (p.name == name && p.direction == dir) return p;
    }
    throw ConfigError("no profile defined for MNO '" + name + "' " + to_string(dir));
}

const MnoProfile& ExperimentConfig::active_profile() const { return profile_for(mno, direction); }

RlParams ExperimentConfig::rl_for(const MnoProfile& profile) const {
    RlParams p = rl;
    p.s_star = profile.target_rate;
    p.s_max = profile.max_rate;
    p.validate();
    return p;
}

ProbSchemeParams ExperimentConfig::ml_cat_for(const MnoProfile& profile) const {
    ProbSchemeParams p = ml_cat_params;
    p.phi_max = ml_cat_phi_max.value_or(profile.max_rate);
    p.validate();
    return p;
}

double ExperimentConfig::sigma_env_for(const MnoProfile& profile) const {
    return sigma_env.value_or(profile.pred_rmse / 2.0);
}

void ExperimentConfig::validate() const {
    scenario.validate();
    if (profiles.empty()) throw ConfigError("config defines no MNO profiles");
    for (const MnoProfile& p : profiles) {
        try {
            p.validate();
        } catch (const ValidationError& e) {
            throw ConfigError(std::string("profile invalid: ") + e.what());
        }
    }
    active_profile(); // referenced profile must exist
    if (schemes.empty()) throw ConfigError("scheme list is empty");
    if (periodic_interval <= 0.0) throw ConfigError("periodic_interval_s must be > 0");
    try {
        cat_params.validate();
        if (!ml_cat_phi_max) {
            ml_cat_for(active_profile());
        } else {
            ProbSchemeParams p = ml_cat_params;
            p.phi_max = *ml_cat_phi_max;
            p.validate();
        }
        rl_for(active_profile());
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    if (map_cell_width <= 0.0) throw ConfigError("rl.map_cell_width_m must be > 0");
    if (epsilon0 < 0.0 || epsilon0 > 1.0) throw ConfigError("rl.epsilon0 must be in [0,1]");
    if (pos_noise_std < 0.0) throw ConfigError("rl.pos_noise_std_m must be >= 0");
    if (epochs < 1) throw ConfigError("training.epochs must be >= 1");
    if (train_traces < 1) throw ConfigError("training.n_traces must be >= 1");
    if (eval_traces < 1) throw ConfigError("evaluation.n_traces must be >= 1");
    for (double w : sweep_w_values) {
        if (w < 0.0 || w > 1.0) throw ConfigError("sweep.w_values entries must be in [0,1]");
    }
    if (sweep_seeds < 1) throw ConfigError("sweep.n_seeds must be >= 1");
    if (blackspot_cell_width <= 0.0) throw ConfigError("blackspots.cell_width_m must be > 0");
    if (blackspot_min_count < 1) throw ConfigError("blackspots.min_count must be >= 1");
    if (gen_rate <= 0.0) throw ConfigError("gen_rate_bytes_per_s must be > 0");
    if (sigma_env && *sigma_env < 0.0) throw ConfigError("sigma_env_mbps must be >= 0");
}

namespace {

MnoProfile make_profile(const char* name, Direction dir, double s_star, double s_max, double mae,
                        double rmse, double range) {
    MnoProfile p;
    p.name = name;
    p.direction = dir;
    p.target_rate = s_star;
    p.max_rate = s_max;
    p.pred_mae = mae;
    p.pred_rmse = rmse;
    p.rate_range = range;
    return p;
}

} // namespace

ExperimentConfig reference_preset() {
    ExperimentConfig cfg;
    cfg.mno = "A";
    cfg.direction = Direction::Uplink;

    cfg.scenario.scenario = Scenario::Suburban;
    cfg.scenario.duration = 600.0;
    cfg.scenario.enb_positions = {{150.0, 100.0}, {1000.0, 350.0}, {350.0, 1000.0}, {1150.0, 1150.0}};
    cfg.scenario.speed_mean = 13.9;
    cfg.scenario.speed_jitter = 1.5;
    cfg.scenario.shadowing_std = 6.0;
    cfg.scenario.shadowing_corr_dist = 150.0;
    cfg.scenario.seed = 1;

    cfg.profiles = {
        make_profile("A", Direction::Uplink, 30.0, 40.0, 2.984, 4.061, 39.782),
        make_profile("A", Direction::Downlink, 20.0, 30.0, 3.302, 4.743, 42.94),
        make_profile("B", Direction::Uplink, 20.0, 30.0, 2.603, 3.619, 38.208),
        make_profile("B", Direction::Downlink, 30.0, 40.0, 7.01, 10.177, 159.982),
        make_profile("C", Direction::Uplink, 50.0, 60.0, 2.537, 3.424, 35.676),
        make_profile("C", Direction::Downlink, 15.0, 25.0, 3.136, 4.276, 33.842),
    };

    cfg.periodic_interval = 10.0;

    cfg.cat_params.phi_min = 0.0;
    cfg.cat_params.phi_max = 30.0;
    cfg.cat_params.dt_min = 10.0;
    cfg.cat_params.dt_max = 120.0;
    cfg.cat_params.alpha_exp = 2.0;

    cfg.ml_cat_params = cfg.cat_params;
    cfg.ml_cat_phi_max = std::nullopt; // resolves to the profile's max_rate

    cfg.rl.alpha = 0.1;
    cfg.rl.w = 0.8;
    cfg.rl.tau = 10.0;
    cfg.rl.dt_max = 120.0;
    cfg.rl.omega = -10.0;
    cfg.rl.lambda = 0.0;
    cfg.map_cell_width = 25.0;

    cfg.epochs = 400;
    cfg.train_traces = 40;
    cfg.eval_traces = 10;
    cfg.sweep_w_values = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    cfg.sweep_seeds = 10;
    cfg.blackspot_cell_width = 25.0;
    cfg.blackspot_min_count = 5;
    cfg.gen_rate = 50e3;
    cfg.seed = 1;
    return cfg;
}

ExperimentConfig preset_by_name(const std::string& name) {
    if (name == "reference") return reference_preset();
    throw ConfigError("unknown preset: " + name + " (available: reference)");
}

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
        }
    }
}

double require_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError("config key '" + where + "' must be a number");
    return v.get<double>();
}

void load_scenario(const json& j, ScenarioConfig& sc) {
    check_keys(j, "scenario",
               {"kind", "duration_s", "enb_positions", "speed_mean_mps", "speed_jitter_mps",
                "shadowing_std_db", "shadowing_corr_dist_m", "seed"});
    if (j.contains("kind")) sc.scenario = scenario_from_string(j["kind"].get<std::string>());
    if (j.contains("duration_s")) sc.duration = require_number(j["duration_s"], "scenario.duration_s");
    if (j.contains("enb_positions")) {
        sc.enb_positions.clear();
        for (const auto& p : j["enb_positions"]) {
            if (!p.is_array() || p.size() != 2) {
                throw ConfigError("scenario.enb_positions entries must be [x, y] pairs");
            }
            sc.enb_positions.push_back({p[0].get<double>(), p[1].get<double>()});
        }
    }
    if (j.contains("speed_mean_mps")) sc.speed_mean = require_number(j["speed_mean_mps"], "scenario.speed_mean_mps");
    if (j.contains("speed_jitter_mps")) sc.speed_jitter = require_number(j["speed_jitter_mps"], "scenario.speed_jitter_mps");
    if (j.contains("shadowing_std_db")) sc.shadowing_std = require_number(j["shadowing_std_db"], "scenario.shadowing_std_db");
    if (j.contains("shadowing_corr_dist_m")) sc.shadowing_corr_dist = require_number(j["shadowing_corr_dist_m"], "scenario.shadowing_corr_dist_m");
    if (j.contains("seed")) sc.seed = j["seed"].get<std::uint64_t>();
}

void load_prob_params(const json& j, const std::string& where, ProbSchemeParams& p,
                      std::optional<double>* phi_max_opt) {
    check_keys(j, where, {"phi_min", "phi_max", "dt_min_s", "dt_max_s", "alpha_exp"});
    if (j.contains("phi_min")) p.phi_min = require_number(j["phi_min"], where + ".phi_min");
    if (j.contains("phi_max")) {
        if (phi_max_opt && j["phi_max"].is_null()) {
            *phi_max_opt = std::nullopt;
        } else {
            const double v = require_number(j["phi_max"], where + ".phi_max");
            if (phi_max_opt) *phi_max_opt = v;
            p.phi_max = v;
        }
    }
    if (j.contains("dt_min_s")) p.dt_min = require_number(j["dt_min_s"], where + ".dt_min_s");
    if (j.contains("dt_max_s")) p.dt_max = require_number(j["dt_max_s"], where + ".dt_max_s");
    if (j.contains("alpha_exp")) p.alpha_exp = require_number(j["alpha_exp"], where + ".alpha_exp");
}

void load_profiles(const json& j, std::vector<MnoProfile>& out) {
    out.clear();
    for (const auto& [name, dirs] : j.items()) {
        check_keys(dirs, "profiles." + name, {"uplink", "downlink"});
        for (const auto& [dir_name, body] : dirs.items()) {
            const std::string where = "profiles." + name + "." + dir_name;
            check_keys(body, where,
                       {"target_rate_mbps", "max_rate_mbps", "pred_mae_mbps", "pred_rmse_mbps",
                        "rate_range_mbps"});
            MnoProfile p;
            p.name = name;
            p.direction = direction_from_string(dir_name);
            p.target_rate = require_number(body.at("target_rate_mbps"), where + ".target_rate_mbps");
            p.max_rate = require_number(body.at("max_rate_mbps"), where + ".max_rate_mbps");
            p.pred_mae = require_number(body.at("pred_mae_mbps"), where + ".pred_mae_mbps");
            p.pred_rmse = require_number(body.at("pred_rmse_mbps"), where + ".pred_rmse_mbps");
            p.rate_range = require_number(body.at("rate_range_mbps"), where + ".rate_range_mbps");
            out.push_back(p);
        }
    }
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    ExperimentConfig cfg = reference_preset();

    check_keys(j, "",
               {"mno", "direction", "scenario", "profiles", "schemes", "periodic_interval_s",
                "cat", "ml_cat", "rl", "training", "evaluation", "sweep", "blackspots",
                "gen_rate_bytes_per_s", "sigma_env_mbps", "seed"});

    if (j.contains("mno")) cfg.mno = j["mno"].get<std::string>();
    if (j.contains("direction")) cfg.direction = direction_from_string(j["direction"].get<std::string>());
    if (j.contains("scenario")) load_scenario(j["scenario"], cfg.scenario);
    if (j.contains("profiles")) load_profiles(j["profiles"], cfg.profiles);
    if (j.contains("schemes")) {
        cfg.schemes.clear();
        for (const auto& s : j["schemes"]) cfg.schemes.push_back(scheme_from_string(s.get<std::string>()));
    }
    if (j.contains("periodic_interval_s")) {
        cfg.periodic_interval = require_number(j["periodic_interval_s"], "periodic_interval_s");
    }
    if (j.contains("cat")) load_prob_params(j["cat"], "cat", cfg.cat_params, nullptr);
    if (j.contains("ml_cat")) load_prob_params(j["ml_cat"], "ml_cat", cfg.ml_cat_params, &cfg.ml_cat_phi_max);
    if (j.contains("rl")) {
        const json& r = j["rl"];
        check_keys(r, "rl",
                   {"alpha", "w", "tau_s", "dt_max_s", "omega", "map_cell_width_m", "epsilon0",
                    "pos_noise_std_m", "deferred_idle_updates"});
        if (r.contains("alpha")) cfg.rl.alpha = require_number(r["alpha"], "rl.alpha");
        if (r.contains("w")) cfg.rl.w = require_number(r["w"], "rl.w");
        if (r.contains("tau_s")) cfg.rl.tau = require_number(r["tau_s"], "rl.tau_s");
        if (r.contains("dt_max_s")) cfg.rl.dt_max = require_number(r["dt_max_s"], "rl.dt_max_s");
        if (r.contains("omega")) cfg.rl.omega = require_number(r["omega"], "rl.omega");
        if (r.contains("map_cell_width_m")) cfg.map_cell_width = require_number(r["map_cell_width_m"], "rl.map_cell_width_m");
        if (r.contains("epsilon0")) cfg.epsilon0 = require_number(r["epsilon0"], "rl.epsilon0");
        if (r.contains("pos_noise_std_m")) cfg.pos_noise_std = require_number(r["pos_noise_std_m"], "rl.pos_noise_std_m");
        if (r.contains("deferred_idle_updates")) cfg.deferred_idle_updates = r["deferred_idle_updates"].get<bool>();
    }
    if (j.contains("training")) {
        const json& t = j["training"];
        check_keys(t, "training", {"epochs", "n_traces"});
        if (t.contains("epochs")) cfg.epochs = t["epochs"].get<int>();
        if (t.contains("n_traces")) cfg.train_traces = t["n_traces"].get<int>();
    }
    if (j.contains("evaluation")) {
        const json& e = j["evaluation"];
        check_keys(e, "evaluation", {"n_traces"});
        if (e.contains("n_traces")) cfg.eval_traces = e["n_traces"].get<int>();
    }
    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        check_keys(s, "sweep", {"w_values", "n_seeds"});
        if (s.contains("w_values")) {
            cfg.sweep_w_values.clear();
            for (const auto& w : s["w_values"]) cfg.sweep_w_values.push_back(w.get<double>());
        }
        if (s.contains("n_seeds")) cfg.sweep_seeds = s["n_seeds"].get<int>();
    }
    if (j.contains("blackspots")) {
        const json& b = j["blackspots"];
        check_keys(b, "blackspots", {"cell_width_m", "min_count"});
        if (b.contains("cell_width_m")) cfg.blackspot_cell_width = require_number(b["cell_width_m"], "blackspots.cell_width_m");
        if (b.contains("min_count")) cfg.blackspot_min_count = b["min_count"].get<int>();
    }
    if (j.contains("gen_rate_bytes_per_s")) cfg.gen_rate = require_number(j["gen_rate_bytes_per_s"], "gen_rate_bytes_per_s");
    if (j.contains("sigma_env_mbps")) {
        if (j["sigma_env_mbps"].is_null()) cfg.sigma_env = std::nullopt;
        else cfg.sigma_env = require_number(j["sigma_env_mbps"], "sigma_env_mbps");
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["mno"] = cfg.mno;
    j["direction"] = to_string(cfg.direction);

    json sc;
    sc["kind"] = to_string(cfg.scenario.scenario);
    sc["duration_s"] = cfg.scenario.duration;
    json enbs = json::array();
    for (const auto& p : cfg.scenario.enb_positions) enbs.push_back({p.x, p.y});
    sc["enb_positions"] = enbs;
    sc["speed_mean_mps"] = cfg.scenario.speed_mean;
    sc["speed_jitter_mps"] = cfg.scenario.speed_jitter;
    sc["shadowing_std_db"] = cfg.scenario.shadowing_std;
    sc["shadowing_corr_dist_m"] = cfg.scenario.shadowing_corr_dist;
    sc["seed"] = cfg.scenario.seed;
    j["scenario"] = sc;

    json profiles;
    for (const MnoProfile& p : cfg.profiles) {
        json body;
        body["target_rate_mbps"] = p.target_rate;
        body["max_rate_mbps"] = p.max_rate;
        body["pred_mae_mbps"] = p.pred_mae;
        body["pred_rmse_mbps"] = p.pred_rmse;
        body["rate_range_mbps"] = p.rate_range;
        profiles[p.name][to_string(p.direction)] = body;
    }
    j["profiles"] = profiles;

    json schemes = json::array();
    for (SchemeKind k : cfg.schemes) schemes.push_back(to_string(k));
    j["schemes"] = schemes;
    j["periodic_interval_s"] = cfg.periodic_interval;

    const auto prob_json = [](const ProbSchemeParams& p) {
        json o;
        o["phi_min"] = p.phi_min;
        o["phi_max"] = p.phi_max;
        o["dt_min_s"] = p.dt_min;
        o["dt_max_s"] = p.dt_max;
        o["alpha_exp"] = p.alpha_exp;
        return o;
    };
    j["cat"] = prob_json(cfg.cat_params);
    json ml = prob_json(cfg.ml_cat_params);
    if (cfg.ml_cat_phi_max) ml["phi_max"] = *cfg.ml_cat_phi_max;
    else ml["phi_max"] = nullptr;
    j["ml_cat"] = ml;

    json rl;
    rl["alpha"] = cfg.rl.alpha;
    rl["w"] = cfg.rl.w;
    rl["tau_s"] = cfg.rl.tau;
    rl["dt_max_s"] = cfg.rl.dt_max;
    rl["omega"] = cfg.rl.omega;
    rl["map_cell_width_m"] = cfg.map_cell_width;
    rl["epsilon0"] = cfg.epsilon0;
    rl["pos_noise_std_m"] = cfg.pos_noise_std;
    rl["deferred_idle_updates"] = cfg.deferred_idle_updates;
    j["rl"] = rl;

    j["training"] = {{"epochs", cfg.epochs}, {"n_traces", cfg.train_traces}};
    j["evaluation"] = {{"n_traces", cfg.eval_traces}};
    j["sweep"] = {{"w_values", cfg.sweep_w_values}, {"n_seeds", cfg.sweep_seeds}};
    j["blackspots"] = {{"cell_width_m", cfg.blackspot_cell_width}, {"min_count", cfg.blackspot_min_count}};
    j["gen_rate_bytes_per_s"] = cfg.gen_rate;
    if (cfg.sigma_env) j["sigma_env_mbps"] = *cfg.sigma_env;
    else j["sigma_env_mbps"] = nullptr;
    j["seed"] = cfg.seed;
    return j.dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a(config_to_json(cfg)); }

} // namespace catsim
