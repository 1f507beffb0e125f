#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifir/interp_core.hpp"
#include "ifir/signal_model.hpp"
#include "ifir/types.hpp"

namespace ifir {

struct ScenarioConfig {
    // system
    int degree = 5;  // Gold code degree, N = 2^degree - 1
    int users = 8;
    std::string channel = "random3";  // "random3" or "paths"
    std::vector<int> path_delays{0};
    std::vector<double> path_gains_db{0.0};
    int Lp = 6;
    double fdT = 0.0;
    double ebn0_db = 12.0;
    double interferer_db = 0.0;
    double lognormal_sigma_db = 0.0;

    // receiver
    std::string receiver = "int";      // int | full | fixed-int | pd | rake
    std::string algorithm = "nlms";    // nlms | rls | cmv-sg | cmv-rls
    std::string mode = "decision-directed";  // training | decision-directed | blind
    int L = 2;
    int N_I = 3;
    int D_pd = 12;
    std::vector<double> interpolator_init;  // empty -> impulse
    double mu = 0.05;
    double eta = 0.005;
    std::string step_rule = "normalized";  // normalized | fixed
    double alpha = 0.998;
    double delta = 100.0;
    std::string channel_estimate = "auto";  // auto | known | sg | rls
    double tracker_mu = 0.05;

    // run control
    int symbols = 1000;
    int training = 200;
    int runs = 10;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 -> hardware concurrency
    double sinr_window = 0.98;

    int N() const { return (1 << degree) - 1; }
    bool blind() const { return mode == "blind"; }
};

inline void validate(const ScenarioConfig& c) {
    auto one_of = [](const std::string& v, std::initializer_list<const char*> opts, const char* what) {
        for (const char* o : opts)
            if (v == o) return;
        throw Error(std::string("invalid ") + what + ": " + v);
    };
    require(c.degree == 5 || c.degree == 6, "degree must be 5 or 6");
    require(c.users >= 1 && c.users <= c.N() + 2, "users must lie in 1..N+2");
    one_of(c.channel, {"random3", "paths"}, "channel");
    require(c.Lp >= 1 && c.Lp <= 2 * c.N(), "L_p must lie in 1..2N");
    if (c.channel == "random3") require(c.Lp >= 6, "random3 channel needs L_p >= 6");
    if (c.channel == "paths") {
        require(!c.path_delays.empty() && c.path_delays.size() == c.path_gains_db.size(),
                "path_delays and path_gains_db must be non-empty and paired");
        for (int d : c.path_delays) require(d >= 0 && d < c.Lp, "path delay outside 0..L_p-1");
    }
    require(c.fdT >= 0.0 && c.fdT < 0.5, "fdT must lie in [0, 0.5)");
    require(c.lognormal_sigma_db >= 0.0, "lognormal_sigma_db must be non-negative");
    one_of(c.receiver, {"int", "full", "fixed-int", "pd", "rake"}, "receiver");
    one_of(c.algorithm, {"nlms", "rls", "cmv-sg", "cmv-rls"}, "algorithm");
    one_of(c.mode, {"training", "decision-directed", "blind"}, "mode");
    one_of(c.step_rule, {"normalized", "fixed"}, "step_rule");
    one_of(c.channel_estimate, {"auto", "known", "sg", "rls"}, "channel_estimate");
    const bool blind_alg = c.algorithm == "cmv-sg" || c.algorithm == "cmv-rls";
    if (c.receiver != "rake") {
        require(blind_alg == c.blind(), "blind mode requires a cmv-* algorithm and vice versa");
        if (c.receiver == "pd") require(!blind_alg, "pd baseline supports nlms and rls only");
    }
    require(c.L >= 1 && c.N_I >= 1, "L and N_I must be positive");
    const int M = observation_length(c.N(), c.Lp);
    require(c.L <= M, "L must not exceed the observation length");
    if (c.receiver == "int" || c.receiver == "fixed-int")
        require(c.N_I <= make_decimation(M, c.L).M_red, "N_I must not exceed M_red");
    require(c.D_pd >= 1 && c.D_pd <= M, "D_pd must lie in 1..M");
    require(c.mu > 0.0 && c.eta >= 0.0, "step sizes must be positive");
    require(c.alpha > 0.0 && c.alpha <= 1.0, "alpha must lie in (0, 1]");
    require(c.delta > 0.0 && c.tracker_mu > 0.0, "delta and tracker_mu must be positive");
    require(c.symbols >= 1 && c.runs >= 1, "symbols and runs must be positive");
    require(c.training >= 0, "training must be non-negative");
    require(c.sinr_window > 0.0 && c.sinr_window < 1.0, "sinr_window must lie in (0, 1)");
    require(c.threads >= 0, "threads must be non-negative");
}

inline void to_json(nlohmann::json& j, const ScenarioConfig& c) {
    j = nlohmann::json{
        {"degree", c.degree}, {"users", c.users}, {"channel", c.channel}, {"path_delays", c.path_delays},
        {"path_gains_db", c.path_gains_db}, {"Lp", c.Lp}, {"fdT", c.fdT}, {"ebn0_db", c.ebn0_db},
        {"interferer_db", c.interferer_db}, {"lognormal_sigma_db", c.lognormal_sigma_db}, {"receiver", c.receiver},
        {"algorithm", c.algorithm}, {"mode", c.mode}, {"L", c.L}, {"N_I", c.N_I}, {"D_pd", c.D_pd},
        {"interpolator_init", c.interpolator_init}, {"mu", c.mu}, {"eta", c.eta}, {"step_rule", c.step_rule},
        {"alpha", c.alpha}, {"delta", c.delta}, {"channel_estimate", c.channel_estimate},
        {"tracker_mu", c.tracker_mu}, {"symbols", c.symbols}, {"training", c.training}, {"runs", c.runs},
        {"seed", c.seed}, {"threads", c.threads}, {"sinr_window", c.sinr_window},
    };
}

// unknown keys are rejected so typos do not silently fall back to defaults
inline void from_json(const nlohmann::json& j, ScenarioConfig& c) {
    require(j.is_object(), "scenario config must be a JSON object");
    nlohmann::json ref;
    to_json(ref, ScenarioConfig{});
    for (const auto& [k, _] : j.items())
        if (!ref.contains(k) && k != "sweep") throw Error("unknown config key: " + k);
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("degree", c.degree);
    get("users", c.users);
    get("channel", c.channel);
    get("path_delays", c.path_delays);
    get("path_gains_db", c.path_gains_db);
    get("Lp", c.Lp);
    get("fdT", c.fdT);
    get("ebn0_db", c.ebn0_db);
    get("interferer_db", c.interferer_db);
    get("lognormal_sigma_db", c.lognormal_sigma_db);
    get("receiver", c.receiver);
    get("algorithm", c.algorithm);
    get("mode", c.mode);
    get("L", c.L);
    get("N_I", c.N_I);
    get("D_pd", c.D_pd);
    get("interpolator_init", c.interpolator_init);
    get("mu", c.mu);
    get("eta", c.eta);
    get("step_rule", c.step_rule);
    get("alpha", c.alpha);
    get("delta", c.delta);
    get("channel_estimate", c.channel_estimate);
    get("tracker_mu", c.tracker_mu);
    get("symbols", c.symbols);
    get("training", c.training);
    get("runs", c.runs);
    get("seed", c.seed);
    get("threads", c.threads);
    get("sinr_window", c.sinr_window);
}

struct SweepSpec {
    std::string parameter;  // ebn0_db | users
    std::vector<double> values;
};

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed config " + path + ": " + e.what());
    }
}

inline ScenarioConfig config_from_json(const nlohmann::json& j) {
    ScenarioConfig c;
    try {
        from_json(j, c);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("bad config value: ") + e.what());
    }
    validate(c);
    return c;
}

inline std::optional<SweepSpec> sweep_from_json(const nlohmann::json& j) {
    if (!j.contains("sweep")) return std::nullopt;
    const auto& s = j.at("sweep");
    SweepSpec sp;
    try {
        sp.parameter = s.at("parameter").get<std::string>();
        sp.values = s.at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("bad sweep block: ") + e.what());
    }
    require(sp.parameter == "ebn0_db" || sp.parameter == "users", "sweep parameter must be ebn0_db or users");
    require(!sp.values.empty(), "sweep needs at least one value");
    return sp;
}

}  // namespace ifir
