#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ifir/ifir.hpp"

namespace {

void print_summary(const std::string& label, const ifir::CampaignSummary& s) {
    std::printf("%-16s runs=%d  SINR=%.3f dB (se %.3f)  BER=%.3e  MSE=%.4e\n", label.c_str(), s.runs,
                s.sinr_db_mean, s.sinr_db_stderr, s.ber_mean, s.mse_mean);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte-Carlo simulator for adaptive interpolated FIR receivers in DS-CDMA"};
    std::string config_path, out_path, format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<int> runs, threads;
    bool dump_defaults = false;
    app.add_option("--config", config_path, "scenario JSON file");
    app.add_option("--out", out_path, "output file for the mean curves or the sweep table");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", seed, "master seed (overrides the file)");
    app.add_option("--runs", runs, "number of independent runs (overrides the file)");
    app.add_option("--threads", threads, "worker threads, 0 = all cores");
    app.add_flag("--print-default-config", dump_defaults, "print the default scenario and exit");
    CLI11_PARSE(app, argc, argv);

    try {
        if (dump_defaults) {
            std::cout << nlohmann::json(ifir::ScenarioConfig{}).dump(2) << '\n';
            return 0;
        }
        nlohmann::json j = config_path.empty() ? nlohmann::json::object() : ifir::load_json_file(config_path);
        if (seed) j["seed"] = *seed;
        if (runs) j["runs"] = *runs;
        if (threads) j["threads"] = *threads;
        const ifir::ScenarioConfig cfg = ifir::config_from_json(j);
        const auto sweep = ifir::sweep_from_json(j);
        const auto fmt = ifir::parse_format(format);
        const auto meta = ifir::series_meta(cfg);

        if (sweep) {
            const auto pts = ifir::run_sweep(cfg, *sweep);
            for (const auto& p : pts) print_summary(sweep->parameter + "=" + std::to_string(p.value), p.summary);
            if (!out_path.empty()) ifir::export_sweep(pts, sweep->parameter, meta, out_path, fmt);
        } else {
            const auto res = ifir::run_campaign(cfg);
            print_summary(meta.algorithm, res.summary);
            nlohmann::json cj = cfg;
            if (!out_path.empty()) ifir::export_series(res.mean, meta, out_path, fmt, cj);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
