#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifir/harness/config.hpp"
#include "ifir/harness/simulation.hpp"

namespace ifir {

enum class ExportFormat { csv, json };

inline ExportFormat parse_format(const std::string& s) {
    if (s == "csv") return ExportFormat::csv;
    if (s == "json") return ExportFormat::json;
    throw Error("unknown output format: " + s);
}

struct SeriesMeta {
    std::string algorithm;
    int L = 1;
    int N_I = 1;
    std::uint64_t seed = 0;
};

inline SeriesMeta series_meta(const ScenarioConfig& c) {
    const bool reduced = c.receiver == "int" || c.receiver == "fixed-int";
    return {receiver_label(c), reduced ? c.L : 1, reduced ? c.N_I : 1, c.seed};
}

inline const char* kSeriesHeader = "iteration,mse,sinr_db,ber,algorithm,L,N_I,seed";

namespace detail {

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write output file: " + path);
    out << std::setprecision(17);
    return out;
}

inline void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw Error("write failed: " + path);
}

}  // namespace detail

inline nlohmann::json series_to_json(const MetricSeries& s, const SeriesMeta& m, const nlohmann::json& config) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < s.size(); ++i)
        rows.push_back({{"iteration", i + 1}, {"mse", s.mse[i]}, {"sinr_db", s.sinr_db[i]}, {"ber", s.ber[i]}});
    return {{"metadata", {{"algorithm", m.algorithm}, {"L", m.L}, {"N_I", m.N_I}, {"seed", m.seed}, {"config", config}}},
            {"series", rows}};
}

inline void export_series(const MetricSeries& s, const SeriesMeta& m, const std::string& path, ExportFormat f,
                          const nlohmann::json& config = nlohmann::json::object()) {
    auto out = detail::open_for_write(path);
    if (f == ExportFormat::csv) {
        out << kSeriesHeader << '\n';
        for (std::size_t i = 0; i < s.size(); ++i)
            out << i + 1 << ',' << s.mse[i] << ',' << s.sinr_db[i] << ',' << s.ber[i] << ',' << m.algorithm << ','
                << m.L << ',' << m.N_I << ',' << m.seed << '\n';
    } else {
        out << series_to_json(s, m, config).dump(2) << '\n';
    }
    detail::finish(out, path);
}

struct LoadedSeries {
    MetricSeries series;
    SeriesMeta meta;
};

inline LoadedSeries import_series(const std::string& path, ExportFormat f) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open series file: " + path);
    LoadedSeries ls;
    if (f == ExportFormat::json) {
        const auto j = nlohmann::json::parse(in);
        const auto& md = j.at("metadata");
        ls.meta = {md.at("algorithm").get<std::string>(), md.at("L").get<int>(), md.at("N_I").get<int>(),
                   md.at("seed").get<std::uint64_t>()};
        for (const auto& row : j.at("series")) {
            ls.series.mse.push_back(row.at("mse").get<double>());
            ls.series.sinr_db.push_back(row.at("sinr_db").get<double>());
            ls.series.ber.push_back(row.at("ber").get<double>());
        }
        return ls;
    }
    std::string line;
    std::getline(in, line);
    require(line == kSeriesHeader, "unexpected CSV header in " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        require(cells.size() == 8, "malformed CSV row in " + path);
        ls.series.mse.push_back(std::stod(cells[1]));
        ls.series.sinr_db.push_back(std::stod(cells[2]));
        ls.series.ber.push_back(std::stod(cells[3]));
        ls.meta = {cells[4], std::stoi(cells[5]), std::stoi(cells[6]), std::stoull(cells[7])};
    }
    return ls;
}

inline void export_sweep(const std::vector<SweepPoint>& pts, const std::string& parameter, const SeriesMeta& m,
                         const std::string& path, ExportFormat f) {
    auto out = detail::open_for_write(path);
    if (f == ExportFormat::csv) {
        out << "parameter,value,ber,sinr_db,sinr_db_stderr,mse,algorithm,L,N_I,seed\n";
        for (const auto& p : pts)
            out << parameter << ',' << p.value << ',' << p.summary.ber_mean << ',' << p.summary.sinr_db_mean << ','
                << p.summary.sinr_db_stderr << ',' << p.summary.mse_mean << ',' << m.algorithm << ',' << m.L << ','
                << m.N_I << ',' << m.seed << '\n';
    } else {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& p : pts)
            rows.push_back({{"value", p.value},
                            {"ber", p.summary.ber_mean},
                            {"sinr_db", p.summary.sinr_db_mean},
                            {"sinr_db_stderr", p.summary.sinr_db_stderr},
                            {"mse", p.summary.mse_mean}});
        out << nlohmann::json{{"metadata", {{"algorithm", m.algorithm}, {"L", m.L}, {"N_I", m.N_I}, {"seed", m.seed},
                                            {"parameter", parameter}}},
                              {"sweep", rows}}
                   .dump(2)
            << '\n';
    }
    detail::finish(out, path);
}

}  // namespace ifir
