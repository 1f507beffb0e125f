#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <initializer_list>
#include <filesystem>

#include "ifir/ifir.hpp"

using namespace ifir;

namespace {

ScenarioConfig quick_config() {
    ScenarioConfig c;
    c.users = 4;
    c.symbols = 300;
    c.training = 100;
    c.runs = 4;
    c.ebn0_db = 10.0;
    c.seed = 77;
    c.threads = 1;
    return c;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("ifir_test_" + name)).string();
}

bool same_series(const MetricSeries& a, const MetricSeries& b) {
    return a.mse == b.mse && a.sinr_db == b.sinr_db && a.ber == b.ber;
}

// three interferers 7 dB above the desired user, paths 1/0.5/0.3 two chips apart
ScenarioConfig strong_interferer_config() {
    ScenarioConfig c;
    c.users = 4;
    c.channel = "paths";
    c.path_delays = {0, 2, 4};
    c.path_gains_db = {0.0, 20.0 * std::log10(0.5), 20.0 * std::log10(0.3)};
    c.ebn0_db = 8.0;
    c.interferer_db = 7.0;
    c.algorithm = "nlms";
    c.mode = "decision-directed";
    c.training = 200;
    c.symbols = 500;
    c.runs = 40;
    c.seed = 6;
    return c;
}

}  // namespace

TEST(Config, JsonRoundTrip) {
    ScenarioConfig c = quick_config();
    c.receiver = "pd";
    c.D_pd = 9;
    c.interpolator_init = {1.0, 0.5, 0.25};
    c.path_delays = {0, 3};
    c.path_gains_db = {0.0, -3.0};
    nlohmann::json j = c;
    const ScenarioConfig back = j.get<ScenarioConfig>();
    nlohmann::json j2 = back;
    EXPECT_EQ(j, j2);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(config_from_json(nlohmann::json{{"algoritm", "nlms"}}), Error);
    EXPECT_THROW(config_from_json(nlohmann::json{{"L", 0}}), Error);
    EXPECT_THROW(config_from_json(nlohmann::json{{"users", "eight"}}), Error);
    EXPECT_THROW(config_from_json(nlohmann::json{{"N_I", 30}}), Error);
    EXPECT_THROW(config_from_json(nlohmann::json{{"mode", "semi-blind"}}), Error);
    EXPECT_THROW(config_from_json(nlohmann::json{{"algorithm", "cmv-sg"}, {"mode", "training"}}), Error);
    EXPECT_NO_THROW(config_from_json(nlohmann::json{{"algorithm", "cmv-rls"}, {"mode", "blind"}}));
    EXPECT_THROW(config_from_json(nlohmann::json::array()), Error);
}

TEST(Config, SweepBlock) {
    const nlohmann::json j = {{"users", 4}, {"sweep", {{"parameter", "ebn0_db"}, {"values", {4, 8}}}}};
    const auto sp = sweep_from_json(j);
    ASSERT_TRUE(sp.has_value());
    EXPECT_EQ(sp->parameter, "ebn0_db");
    EXPECT_EQ(sp->values, (std::vector<double>{4, 8}));
    EXPECT_FALSE(sweep_from_json(nlohmann::json{{"users", 4}}).has_value());
    EXPECT_THROW(sweep_from_json(nlohmann::json{{"sweep", {{"parameter", "L"}, {"values", {1}}}}}), Error);
}

TEST(Trial, DeterministicForFixedSeed) {
    const ScenarioConfig c = quick_config();
    const TrialResult a = run_trial(c, 3), b = run_trial(c, 3);
    EXPECT_TRUE(same_series(a.series, b.series));
    EXPECT_FALSE(same_series(a.series, run_trial(c, 4).series));
}

TEST(Trial, MetricSanity) {
    for (const char* alg : {"nlms", "rls"}) {
        ScenarioConfig c = quick_config();
        c.algorithm = alg;
        const TrialResult t = run_trial(c, 0);
        ASSERT_EQ(t.series.size(), static_cast<std::size_t>(c.symbols));
        ASSERT_EQ(t.series.sinr_db.size(), t.series.size());
        ASSERT_EQ(t.series.ber.size(), t.series.size());
        for (std::size_t i = 0; i < t.series.size(); ++i) {
            EXPECT_TRUE(std::isfinite(t.series.sinr_db[i]));
            EXPECT_GE(t.series.ber[i], 0.0);
            EXPECT_LE(t.series.ber[i], 1.0);
        }
    }
}

TEST(Trial, NoiselessSingleUserRlsMakesNoErrors) {
    ScenarioConfig c;
    c.users = 1;
    c.ebn0_db = 200.0;
    c.receiver = "full";
    c.algorithm = "rls";
    c.mode = "training";
    c.training = 60;
    c.symbols = 400;
    c.seed = 5;
    const TrialResult t = run_trial(c, 0);
    EXPECT_EQ(t.ber, 0.0);
    for (std::size_t i = static_cast<std::size_t>(c.training) + 1; i < t.series.size(); ++i)
        EXPECT_LE(t.series.ber[i], t.series.ber[i - 1]);
}

TEST(Campaign, SingleRunEqualsTrial) {
    ScenarioConfig c = quick_config();
    c.runs = 1;
    EXPECT_TRUE(same_series(run_campaign(c).mean, run_trial(c, 0).series));
}

TEST(Campaign, IndependentOfThreadCount) {
    ScenarioConfig c = quick_config();
    c.runs = 6;
    c.threads = 1;
    const CampaignResult a = run_campaign(c);
    c.threads = 4;
    const CampaignResult b = run_campaign(c);
    EXPECT_TRUE(same_series(a.mean, b.mean));
    EXPECT_EQ(a.summary.sinr_db_mean, b.summary.sinr_db_mean);
    EXPECT_EQ(a.summary.sinr_db_stderr, b.summary.sinr_db_stderr);
    EXPECT_EQ(a.summary.ber_mean, b.summary.ber_mean);
}

TEST(Campaign, StandardErrorShrinksWithRuns) {
    ScenarioConfig c = quick_config();
    c.symbols = 150;
    c.training = 150;
    c.runs = 50;
    const double se1 = run_campaign(c).summary.sinr_db_stderr;
    c.runs = 200;
    c.seed += 1;
    const double se4 = run_campaign(c).summary.sinr_db_stderr;
    // four times the runs halves the standard error
    EXPECT_NEAR(se1 / se4, 2.0, 0.6) << se1 << " vs " << se4;
}

TEST(Baselines, FixedTrivialInterpolatorEqualsFullRank) {
    for (const char* alg : {"nlms", "rls"}) {
        ScenarioConfig c = quick_config();
        c.algorithm = alg;
        c.receiver = "full";
        const TrialResult full = run_trial(c, 1);
        c.receiver = "fixed-int";
        c.L = 1;
        c.N_I = 1;
        EXPECT_TRUE(same_series(full.series, run_trial(c, 1).series)) << alg;
    }
}

TEST(Baselines, PdWithFullDimensionMatchesFullRank) {
    ScenarioConfig c = quick_config();
    c.algorithm = "rls";
    c.symbols = 1500;
    c.runs = 10;
    c.receiver = "full";
    const CampaignResult full = run_campaign(c);
    c.receiver = "pd";
    c.D_pd = observation_length(31, c.Lp);
    const CampaignResult pd = run_campaign(c);
    EXPECT_NEAR(pd.summary.mse_mean, full.summary.mse_mean, 0.05 * full.summary.mse_mean);
    EXPECT_NEAR(pd.summary.sinr_db_mean, full.summary.sinr_db_mean, 0.5);
}

TEST(Baselines, PdProjectionStructure) {
    const SpreadingSet s = gold_sequences(5, 1);
    const CMat P1 = pd_baseline(s.codes[0], 36, 1);
    for (int m = 0; m < 36; ++m) EXPECT_EQ(P1(m, 0), s.codes[0][m % 31]);
    const CMat P = pd_baseline(s.codes[0], 36, 9);
    const CMat G = P.adjoint() * P;
    EXPECT_LT((G - CMat(G.diagonal().asDiagonal())).norm(), 1e-15);
    for (int m = 0; m < 36; ++m) EXPECT_EQ((P.row(m).array() != cplx(0.0)).count(), 1);
    EXPECT_THROW(pd_baseline(s.codes[0], 36, 37), Error);
}

TEST(Baselines, RakeSingleTapIsMatchedFilter) {
    Rng rng(500);
    const SpreadingSet s = gold_sequences(5, 1);
    const CVec r = complex_gaussian_vector(rng, 31);
    EXPECT_LT(std::abs(rake_baseline(r, CVec::Ones(1), s.codes[0]) - s.codes[0].dot(r)), 1e-14);
}

TEST(Baselines, RakeNoiselessSingleUserIsCorrect) {
    Rng rng(501);
    const SpreadingSet s = gold_sequences(5, 1);
    ChannelRealization ch = make_channel(random_three_path_profile(rng), 0.0, rng);
    DownlinkSimulator link(s, RVec::Ones(1), ch, 0.0, rng);
    for (int i = 0; i < 200; ++i) {
        const ReceivedVector rv = link.step(rng);
        EXPECT_EQ(detect(rake_baseline(rv.samples, link.channel().gains, s.codes[0])), rv.symbol);
    }
}

TEST(Export, CsvAndJsonRoundTrip) {
    const ScenarioConfig c = quick_config();
    const TrialResult t = run_trial(c, 0);
    const SeriesMeta m = series_meta(c);
    for (ExportFormat f : {ExportFormat::csv, ExportFormat::json}) {
        const std::string path = temp_path(f == ExportFormat::csv ? "series.csv" : "series.json");
        export_series(t.series, m, path, f, nlohmann::json(c));
        const LoadedSeries back = import_series(path, f);
        EXPECT_TRUE(same_series(back.series, t.series));
        EXPECT_EQ(back.meta.algorithm, m.algorithm);
        EXPECT_EQ(back.meta.L, m.L);
        EXPECT_EQ(back.meta.N_I, m.N_I);
        EXPECT_EQ(back.meta.seed, m.seed);
        std::remove(path.c_str());
    }
}

TEST(Export, CsvHeaderAndEmptySeries) {
    const std::string path = temp_path("empty.csv");
    export_series(MetricSeries{}, SeriesMeta{"NLMS-INT", 2, 3, 1}, path, ExportFormat::csv);
    std::ifstream in(path);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(all, "iteration,mse,sinr_db,ber,algorithm,L,N_I,seed\n");
    std::remove(path.c_str());
}

TEST(Export, UnwritablePathThrows) {
    EXPECT_THROW(export_series(MetricSeries{}, SeriesMeta{}, "/nonexistent-dir/x/out.csv", ExportFormat::csv), Error);
    EXPECT_THROW(parse_format("xml"), Error);
}

namespace {

// best final SINR over a small step-size grid; eta is ignored by receivers without an interpolator
double tuned_sinr(ScenarioConfig c, std::initializer_list<double> mus, std::initializer_list<double> etas) {
    double best = -1e300;
    for (double mu : mus)
        for (double eta : etas) {
            c.mu = mu;
            c.eta = eta;
            best = std::max(best, run_campaign(c).summary.sinr_db_mean);
        }
    return best;
}

}  // namespace

TEST(SinrOrdering, IntL2BeatsFullRankNlmsAt500Symbols) {
    ScenarioConfig c = strong_interferer_config();
    c.receiver = "int";
    c.L = 2;
    const double intl2 = tuned_sinr(c, {0.05, 0.1, 0.2}, {0.005, 0.01, 0.02});
    c.receiver = "full";
    const double full = tuned_sinr(c, {0.05, 0.1, 0.2}, {0.0});
    EXPECT_GE(intl2, full) << "INT L=2 " << intl2 << " dB, full-rank " << full << " dB";
}

TEST(SinrOrdering, IntL3BeatsPartialDespreading) {
    ScenarioConfig c = strong_interferer_config();
    c.receiver = "int";
    c.L = 3;
    const double intl3 = tuned_sinr(c, {0.05, 0.1, 0.2}, {0.005, 0.01, 0.02});
    c.receiver = "pd";
    c.D_pd = 12;
    const double pd = tuned_sinr(c, {0.05, 0.1, 0.2}, {0.0});
    EXPECT_GE(intl3, pd) << "INT L=3 " << intl3 << " dB, PD " << pd << " dB";
}
