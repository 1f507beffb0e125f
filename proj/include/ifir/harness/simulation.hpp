#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ifir/adaptive.hpp"
#include "ifir/cmv_design.hpp"
#include "ifir/harness/baselines.hpp"
#include "ifir/harness/config.hpp"
#include "ifir/signal_model.hpp"

namespace ifir {

struct MetricSeries {
    std::vector<double> mse;
    std::vector<double> sinr_db;
    std::vector<double> ber;

    std::size_t size() const { return mse.size(); }
};

struct TrialResult {
    MetricSeries series;
    double final_sinr_db = 0.0;
    double steady_mse = 0.0;
    double ber = 0.0;
    int resets = 0;
};

struct CampaignSummary {
    int runs = 0;
    double sinr_db_mean = 0.0;
    double sinr_db_stderr = 0.0;
    double ber_mean = 0.0;
    double mse_mean = 0.0;
};

struct CampaignResult {
    MetricSeries mean;
    std::vector<TrialResult> trials;
    CampaignSummary summary;
};

inline std::string receiver_label(const ScenarioConfig& c) {
    if (c.receiver == "rake") return "RAKE";
    std::string a = c.algorithm;
    std::transform(a.begin(), a.end(), a.begin(), [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
    if (c.receiver == "full") return a + "-FULL";
    if (c.receiver == "pd") return a + "-PD";
    if (c.receiver == "fixed-int") return a + "-FIXED-INT";
    return a + "-INT";
}

namespace detail {

// common face of every receiver the harness can run
class Receiver {
public:
    virtual ~Receiver() = default;
    // output the current (pre-update) filter would give for input r
    virtual cplx output_of(const CVec& r) const = 0;
    virtual StepResult step(const CVec& r, std::optional<double> training, const CVec& g_true) = 0;
    virtual int resets() const { return 0; }
};

inline CVec phase_referenced(CVec g, const CVec& g_true) {
    if (std::abs(g_true[0]) > 0.0) g *= g_true[0] / std::abs(g_true[0]);
    return g;
}

// channel estimate provider for the blind receivers and the RAKE
class ChannelEstimator {
public:
    ChannelEstimator(std::string kind, const CMat& C, const ScenarioConfig& cfg) : kind_(std::move(kind)), C_(C) {
        if (kind_ == "sg") sg_ = make_sg_channel_tracker(C, cfg.tracker_mu);
        if (kind_ == "rls") rls_ = make_rls_channel_tracker(C, cfg.alpha, cfg.delta);
        if (kind_ == "correlator") {
            p_ = CVec::Zero(C.rows());
            CtC_inv_ = hermitian_inverse(C.adjoint() * C);
            forget_ = cfg.alpha;
        }
        estimate_ = CVec::Zero(C.cols());
        if (kind_ != "correlator") estimate_[0] = 1.0;
    }

    const CVec& current() const { return estimate_; }

    // called with the observation before the receiver update
    void observe(const CVec& r, const CVec& g_true) {
        if (kind_ == "known") estimate_ = g_true;
        if (kind_ == "sg") estimate_ = phase_referenced(sg_channel_track(sg_, r), g_true);
        if (kind_ == "rls") estimate_ = phase_referenced(rls_channel_track(rls_, r), g_true);
    }

    // correlator update once the reference symbol is known
    void correlate(const CVec& r, double b) {
        if (kind_ != "correlator") return;
        p_ = forget_ * p_ + (1.0 - forget_) * b * r;
        const double w = 1.0 - std::pow(forget_, ++count_);
        estimate_ = CtC_inv_ * (C_.adjoint() * p_) / w;
    }

private:
    std::string kind_;
    CMat C_;
    SgChannelTracker sg_;
    RlsChannelTracker rls_;
    CVec p_;
    CMat CtC_inv_;
    double forget_ = 0.998;
    int count_ = 0;
    CVec estimate_;
};

// trained INT (also full-rank and fixed-interpolator variants) with NLMS or RLS
class TrainedInt final : public Receiver {
public:
    TrainedInt(const ScenarioConfig& cfg, int M, CMat transform = {}) : transform_(std::move(transform)) {
        int L = cfg.L, N_I = cfg.N_I;
        bool adapt = cfg.receiver == "int";
        int len = M;
        if (cfg.receiver == "full" || cfg.receiver == "pd") L = 1, N_I = 1, adapt = false;
        if (cfg.receiver == "pd") len = static_cast<int>(transform_.cols());
        const Decimation d = make_decimation(len, L);
        CVec v0;
        if (!cfg.interpolator_init.empty() && cfg.receiver != "full" && cfg.receiver != "pd") {
            require(static_cast<int>(cfg.interpolator_init.size()) == N_I, "interpolator_init must have N_I entries");
            v0 = Eigen::Map<const RVec>(cfg.interpolator_init.data(), N_I).cast<cplx>();
        }
        const StepRule rule = cfg.step_rule == "fixed" ? StepRule::fixed : StepRule::normalized;
        if (cfg.algorithm == "rls")
            rls_ = make_rls(d, N_I, cfg.alpha, cfg.delta, adapt, v0);
        else
            lms_ = make_lms(d, N_I, cfg.mu, cfg.eta, rule, adapt, v0);
    }

    cplx output_of(const CVec& r) const override {
        const ReceiverState& s = rls_ ? rls_->rx : lms_->rx;
        const CVec z = front(r);
        return s.w.dot(interpolate_then_decimate(s.v, z, s.dec));
    }

    StepResult step(const CVec& r, std::optional<double> training, const CVec&) override {
        const CVec z = front(r);
        return rls_ ? rls_step(*rls_, z, training) : lms_step(*lms_, z, training);
    }

    int resets() const override { return rls_ ? rls_->resets : 0; }

private:
    CVec front(const CVec& r) const { return transform_.size() ? CVec(transform_.adjoint() * r) : r; }

    CMat transform_;
    std::optional<LmsState> lms_;
    std::optional<RlsState> rls_;
};

class BlindInt final : public Receiver {
public:
    BlindInt(const ScenarioConfig& cfg, const CVec& code, int M, const std::string& est)
        : est_(est, constraint_matrix(code, cfg.Lp), cfg) {
        int L = cfg.L, N_I = cfg.N_I;
        bool adapt = cfg.receiver == "int";
        if (cfg.receiver == "full") L = 1, N_I = 1, adapt = false;
        const Decimation d = make_decimation(M, L);
        const ConstraintSet cs = make_constraints(code, cfg.Lp, d);
        CVec v0;
        if (!cfg.interpolator_init.empty() && cfg.receiver != "full") {
            require(static_cast<int>(cfg.interpolator_init.size()) == N_I, "interpolator_init must have N_I entries");
            v0 = Eigen::Map<const RVec>(cfg.interpolator_init.data(), N_I).cast<cplx>();
        }
        const StepRule rule = cfg.step_rule == "fixed" ? StepRule::fixed : StepRule::normalized;
        const CVec g0 = est_.current();
        if (cfg.algorithm == "cmv-rls")
            rls_ = make_blind_rls(cs, N_I, cfg.alpha, cfg.delta, g0, adapt, v0);
        else
            sg_ = make_blind_sg(cs, N_I, cfg.mu, cfg.eta, g0, rule, adapt, v0);
    }

    cplx output_of(const CVec& r) const override {
        const ReceiverState& s = rls_ ? rls_->rx : sg_->rx;
        return s.w.dot(interpolate_then_decimate(s.v, r, s.dec));
    }

    StepResult step(const CVec& r, std::optional<double>, const CVec& g_true) override {
        est_.observe(r, g_true);
        return rls_ ? cmv_rls_step(*rls_, r, est_.current()) : cmv_sg_step(*sg_, r, est_.current());
    }

    int resets() const override { return rls_ ? rls_->resets : 0; }

private:
    ChannelEstimator est_;
    std::optional<BlindSgState> sg_;
    std::optional<BlindRlsState> rls_;
};

class Rake final : public Receiver {
public:
    Rake(const ScenarioConfig& cfg, const CVec& code, const std::string& est)
        : code_(code), est_(est, constraint_matrix(code, cfg.Lp), cfg) {}

    cplx output_of(const CVec& r) const override { return rake_baseline(r, est_.current(), code_); }

    StepResult step(const CVec& r, std::optional<double> training, const CVec& g_true) override {
        StepResult out;
        est_.observe(r, g_true);
        out.x = output_of(r);
        out.reference = training ? *training : detect(out.x);
        out.error = out.reference - out.x;
        est_.correlate(r, out.reference);
        return out;
    }

private:
    CVec code_;
    ChannelEstimator est_;
};

inline std::unique_ptr<Receiver> make_receiver_for(const ScenarioConfig& cfg, const CVec& code, int M) {
    std::string est = cfg.channel_estimate;
    if (cfg.receiver == "rake") {
        if (est == "auto") est = cfg.blind() ? "rls" : "correlator";
        return std::make_unique<Rake>(cfg, code, est);
    }
    if (cfg.blind()) {
        if (est == "auto") est = cfg.algorithm == "cmv-sg" ? "sg" : "rls";
        return std::make_unique<BlindInt>(cfg, code, M, est);
    }
    if (cfg.receiver == "pd") return std::make_unique<TrainedInt>(cfg, M, pd_baseline(code, M, cfg.D_pd));
    return std::make_unique<TrainedInt>(cfg, M);
}

template <typename F>
void parallel_for(int n, int threads, F&& body) {
    int t = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    t = std::min(t, n);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    if (t <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int k = 0; k < t; ++k) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

inline std::uint64_t run_seed(std::uint64_t seed, int run) {
    return mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(run) + 0x5851f42d4c957f2dULL));
}

inline TrialResult run_trial(const ScenarioConfig& cfg, int run) {
    validate(cfg);
    Rng rng(run_seed(cfg.seed, run));
    const SpreadingSet codes = gold_sequences(cfg.degree, cfg.users);
    const RVec profile = cfg.channel == "random3" ? random_three_path_profile(rng, cfg.Lp)
                                                  : profile_from_paths(cfg.path_delays, cfg.path_gains_db, cfg.Lp);
    ChannelRealization ch = make_channel(profile, cfg.fdT, rng);
    const RVec A = user_amplitudes(cfg.users, cfg.interferer_db, cfg.lognormal_sigma_db, rng);
    DownlinkSimulator link(codes, A, std::move(ch), noise_variance_from_ebn0(cfg.ebn0_db), rng);
    auto rx = detail::make_receiver_for(cfg, codes.codes[0], link.M());

    const bool count_all = cfg.blind() || cfg.training >= cfg.symbols;
    const int first_counted = count_all ? 0 : cfg.training;
    TrialResult tr;
    auto& s = tr.series;
    s.mse.reserve(static_cast<std::size_t>(cfg.symbols));
    double num = 0.0, den = 0.0;
    long errors = 0, counted = 0;
    for (int i = 0; i < cfg.symbols; ++i) {
        const ReceivedVector rv = link.step(rng);
        std::optional<double> train;
        if (cfg.mode == "training" || (cfg.mode == "decision-directed" && i < cfg.training)) train = rv.symbol;
        const cplx xd = rx->output_of(rv.desired);
        const StepResult out = rx->step(rv.samples, train, link.channel().gains);
        num = cfg.sinr_window * num + std::norm(xd);
        den = cfg.sinr_window * den + std::norm(out.x - xd);
        s.mse.push_back(std::norm(rv.symbol - out.x));
        s.sinr_db.push_back(10.0 * std::log10(std::max(num, 1e-300) / std::max(den, 1e-300)));
        if (i >= first_counted) {
            ++counted;
            if (detect(out.x) != rv.symbol) ++errors;
        }
        s.ber.push_back(counted ? static_cast<double>(errors) / static_cast<double>(counted) : 0.0);
    }
    const std::size_t tail = std::max<std::size_t>(1, s.size() / 10);
    double acc = 0.0;
    for (std::size_t i = s.size() - tail; i < s.size(); ++i) acc += s.mse[i];
    tr.steady_mse = acc / static_cast<double>(tail);
    tr.final_sinr_db = s.sinr_db.back();
    tr.ber = s.ber.back();
    tr.resets = rx->resets();
    return tr;
}

// runs are independent; the reduction is ordered by run index so the result
// does not depend on the number of worker threads
inline CampaignResult run_campaign(const ScenarioConfig& cfg) {
    validate(cfg);
    CampaignResult res;
    res.trials.resize(static_cast<std::size_t>(cfg.runs));
    detail::parallel_for(cfg.runs, cfg.threads,
                         [&](int r) { res.trials[static_cast<std::size_t>(r)] = run_trial(cfg, r); });

    const std::size_t n = static_cast<std::size_t>(cfg.symbols);
    res.mean.mse.assign(n, 0.0);
    res.mean.sinr_db.assign(n, 0.0);
    res.mean.ber.assign(n, 0.0);
    double s1 = 0.0, s2 = 0.0, ber = 0.0, mse = 0.0;
    for (const auto& t : res.trials) {
        for (std::size_t i = 0; i < n; ++i) {
            res.mean.mse[i] += t.series.mse[i];
            res.mean.sinr_db[i] += t.series.sinr_db[i];
            res.mean.ber[i] += t.series.ber[i];
        }
        s1 += t.final_sinr_db;
        s2 += t.final_sinr_db * t.final_sinr_db;
        ber += t.ber;
        mse += t.steady_mse;
    }
    const double R = static_cast<double>(cfg.runs);
    for (std::size_t i = 0; i < n; ++i) {
        res.mean.mse[i] /= R;
        res.mean.sinr_db[i] /= R;
        res.mean.ber[i] /= R;
    }
    auto& sm = res.summary;
    sm.runs = cfg.runs;
    sm.sinr_db_mean = s1 / R;
    const double var = cfg.runs > 1 ? std::max(0.0, (s2 - R * sm.sinr_db_mean * sm.sinr_db_mean) / (R - 1.0)) : 0.0;
    sm.sinr_db_stderr = std::sqrt(var / R);
    sm.ber_mean = ber / R;
    sm.mse_mean = mse / R;
    return res;
}

struct SweepPoint {
    double value = 0.0;
    CampaignSummary summary;
};

inline std::vector<SweepPoint> run_sweep(const ScenarioConfig& base, const SweepSpec& sweep) {
    std::vector<SweepPoint> out;
    for (double v : sweep.values) {
        ScenarioConfig c = base;
        if (sweep.parameter == "ebn0_db")
            c.ebn0_db = v;
        else if (sweep.parameter == "users")
            c.users = static_cast<int>(std::lround(v));
        else
            throw Error("unsupported sweep parameter: " + sweep.parameter);
        out.push_back({v, run_campaign(c).summary});
    }
    return out;
}

}  // namespace ifir
