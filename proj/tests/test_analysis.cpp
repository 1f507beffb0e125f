#include <gtest/gtest.h>

#include "experiments.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ifir;
using namespace ifir::testing;

namespace {

// excess of the blind recursion built by applying the covariance map to each
// basis matrix, without Kronecker products
double blind_excess_oracle(double mu, const CMat& R, const CMat& Pi, const CVec& w, const std::vector<CVec>& xs) {
    const Eigen::Index n = R.rows();
    auto fourth = [&](const CMat& K) {
        CMat acc = CMat::Zero(n, n);
        for (const auto& x : xs) acc += x.dot(K * x) * (x * x.adjoint());
        return CMat(acc / static_cast<double>(xs.size()));
    };
    auto op = [&](const CMat& K) -> CMat { return Pi * R * K + K * R * Pi - mu * Pi * fourth(K) * Pi; };
    // unknown restricted to range(Pi): basis matrices q_i q_j^H, images read back in the same basis
    Eigen::JacobiSVD<CMat> svd(Pi, Eigen::ComputeFullU);
    Eigen::Index r = 0;
    while (r < n && svd.singularValues()[r] > 0.5) ++r;
    const CMat Q = svd.matrixU().leftCols(r);
    CMat T(r * r, r * r);
    for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index i = 0; i < r; ++i) {
            const CMat img = Q.adjoint() * op(Q.col(i) * Q.col(j).adjoint()) * Q;
            T.col(j * r + i) = Eigen::Map<const CVec>(img.data(), r * r);
        }
    const CMat rhs = Q.adjoint() * Pi * fourth(w * w.adjoint()) * Pi * Q;
    const CVec y = T.fullPivLu().solve(Eigen::Map<const CVec>(rhs.data(), r * r));
    const CMat X = Q * Eigen::Map<const CMat>(y.data(), r, r) * Q.adjoint();
    return mu * (R.adjoint() * X).trace().real();
}

}  // namespace

TEST(StabilityBound, Examples) {
    CMat D = CMat::Zero(2, 2);
    D(0, 0) = 2.0;
    D(1, 1) = 1.0;
    EXPECT_NEAR(stability_bound(D).mu_max, 1.0, 1e-14);
    EXPECT_NEAR(stability_bound(D).mu_max_trace, 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(stability_bound(CMat::Identity(5, 5) * 4.0).mu_max, 0.5, 1e-14);
    Rng rng(400);
    for (int k = 0; k < 20; ++k) {
        const CMat R = random_psd(rng, 6, 0.1);
        const StabilityBound b = stability_bound(R);
        const double lmax = Eigen::JacobiSVD<CMat>(R).singularValues()[0];
        EXPECT_NEAR(b.lambda_max, lmax, 1e-10 * lmax);
        EXPECT_LE(b.mu_max_trace, b.mu_max);
        EXPECT_LE(b.mu_max, 2.0 / (R.trace().real() / 6.0) + 1e-12);
    }
}

TEST(ExcessTrained, Examples) {
    const CMat R = CMat::Identity(4, 4);
    EXPECT_NEAR(excess_mse_trained(0.25, R, 0.3), 0.3, 1e-15);    // mu tr = 1
    EXPECT_NEAR(excess_mse_trained(0.125, R, 0.3), 0.1, 1e-15);   // mu tr = 1/2
    EXPECT_EQ(excess_mse_trained(0.0, R, 0.3), 0.0);
    EXPECT_LT(excess_mse_trained(1e-9, R, 0.3), 1e-9);
    EXPECT_THROW(excess_mse_trained(0.5, R, 0.3), Error);
}

TEST(ExcessBlind, ZeroOptimumGivesZero) {
    Rng rng(401);
    BlindExcessInputs in;
    in.R_bar = random_psd(rng, 3, 0.1);
    in.Pi = CMat::Identity(3, 3);
    in.w_opt = CVec::Zero(3);
    for (int k = 0; k < 50; ++k) in.rbar_samples.push_back(complex_gaussian_vector(rng, 3));
    EXPECT_EQ(excess_mse_blind(0.01, in), 0.0);
}

TEST(ExcessBlind, ScalarHandComputation) {
    Rng rng(402);
    BlindExcessInputs in;
    in.R_bar = CMat::Constant(1, 1, 0.8);
    in.Pi = CMat::Identity(1, 1);
    in.w_opt = CVec::Constant(1, cplx(0.3, -0.4));
    double m4 = 0.0;
    for (int k = 0; k < 100; ++k) {
        const CVec x = complex_gaussian_vector(rng, 1);
        in.rbar_samples.push_back(x);
        m4 += std::pow(std::norm(x[0]), 2) / 100.0;
    }
    const double mu = 0.05;
    const double ref = mu * 0.8 * m4 * 0.25 / (2.0 * 0.8 - mu * m4);
    EXPECT_NEAR(excess_mse_blind(mu, in), ref, 1e-12 * ref);
}

TEST(ExcessBlind, MatchesMatrixOperatorOracle) {
    Rng rng(403);
    const SpreadingSet codes = gold_sequences(5, 1);
    const ConstraintSet cs = make_constraints(codes.codes[0], 2, make_decimation(32, 4));
    BlindExcessInputs in;
    in.Pi = cs.Pi;
    in.w_opt = complex_gaussian_vector(rng, 8);
    in.R_bar = CMat::Zero(8, 8);
    for (int k = 0; k < 300; ++k) {
        const CVec x = complex_gaussian_vector(rng, 8);
        in.rbar_samples.push_back(x);
        in.R_bar += x * x.adjoint() / 300.0;
    }
    const double mu = 0.01;
    const double ref = blind_excess_oracle(mu, in.R_bar, in.Pi, in.w_opt, in.rbar_samples);
    EXPECT_NEAR(excess_mse_blind(mu, in), ref, 1e-9 * std::abs(ref));
    EXPECT_THROW(excess_mse_blind(mu, in, 4), Error);
}

TEST(Transient, SteadyStateEqualsTraceFormula) {
    Rng rng(404);
    for (int k = 0; k < 20; ++k) {
        const CMat R = random_psd(rng, 7, 0.05);
        const double mu = 0.5 / R.trace().real();
        const double eps = 0.2;
        const TransientModel tm = sg_transient(R, mu, eps, RVec::Ones(7));
        const double ref = excess_mse_trained(mu, R, eps);
        EXPECT_NEAR(tm.steady, ref, 1e-10 * ref);
        EXPECT_NEAR(tm.excess(0), tm.lambda.dot(RVec::Ones(7)), 1e-10);
        // tail decays monotonically towards the steady state
        double prev = std::abs(tm.excess(200) - tm.steady);
        for (int i = 201; i < 400; ++i) {
            const double cur = std::abs(tm.excess(i) - tm.steady);
            EXPECT_LE(cur, prev + 1e-15);
            prev = cur;
        }
        EXPECT_LT(tm.modes.cwiseAbs().maxCoeff(), 1.0);
    }
}

TEST(Transient, EqualEigenvaluesGiveOneMode) {
    const CMat R = 2.0 * CMat::Identity(5, 5);
    const TransientModel tm = sg_transient(R, 0.02, 0.1, RVec::Constant(5, 0.7));
    int active = 0;
    for (Eigen::Index n = 0; n < tm.gamma.size(); ++n)
        if (std::abs(tm.gamma[n]) > 1e-12 * tm.gamma.cwiseAbs().maxCoeff()) ++active;
    EXPECT_EQ(active, 1);
}

TEST(Transient, InitialStateIsEnergyPerMode) {
    Rng rng(405);
    const CMat R = random_psd(rng, 4, 0.1);
    const CVec e = complex_gaussian_vector(rng, 4);
    const RVec x0 = transient_initial_state(R, e);
    EXPECT_NEAR(x0.sum(), e.squaredNorm(), 1e-12);
    EXPECT_NEAR(hermitian_eigenvalues(R).dot(x0), e.dot(R * e).real(), 1e-12);
}

TEST(RlsLearningCurve, Examples) {
    EXPECT_NEAR(rls_learning_curve(0.1, 18, 37), 0.1, 1e-15);
    EXPECT_LT(rls_learning_curve(0.1, 18, 100000000), 1e-7);
    EXPECT_THROW(rls_learning_curve(0.1, 18, 19), Error);
}

TEST(Complexity, TableValues) {
    struct Row {
        const char* name;
        ComplexityQuery q;
        OpCount expected;
    };
    // values re-derived by hand from the table rows
    const Row rows[] = {
        {"lms-full", {36, 1, 1, 1, 1}, {72, 73}},
        {"lms-full", {64, 1, 1, 1, 1}, {128, 129}},
        {"lms-int", {36, 2, 3, 1, 1}, {206, 114}},
        {"lms-int", {36, 3, 4, 1, 1}, {226, 92}},
        {"lms-pd", {36, 1, 1, 1, 12}, {146, 170}},
        {"rls-full", {36, 1, 1, 1, 1}, {5043, 7850}},
        {"rls-int", {36, 2, 3, 1, 1}, {1413, 2111}},
        {"rls-int", {69, 3, 3, 1, 1}, {2327, 3371}},
        {"rls-pd", {36, 1, 1, 1, 8}, {276, 466}},
        {"cmv-sg-full", {36, 1, 1, 6, 1}, {1585, 1620}},
        {"cmv-sg-int", {36, 2, 3, 6, 1}, {635, 561}},
        {"cmv-rls-full", {36, 1, 1, 6, 1}, {6534, 9370}},
        {"cmv-rls-int", {36, 4, 3, 6, 1}, {709, 722}},
    };
    for (const Row& r : rows) {
        const OpCount c = complexity(scheme_from_name(r.name), r.q);
        EXPECT_EQ(c.additions, r.expected.additions) << r.name << " M=" << r.q.M;
        EXPECT_EQ(c.multiplications, r.expected.multiplications) << r.name << " M=" << r.q.M;
    }
    EXPECT_THROW(scheme_from_name("mwf-sg"), Error);
}

TEST(MeanTrajectory, FixedPointIsConstant) {
    Rng rng(406);
    const Scenario sc = make_scenario(rng, 4, 12.0);
    const Samples s = draw(sc, rng, 500);
    const Decimation d = make_decimation(sc.M(), 3);
    const ConstraintSet cs = make_constraints(sc.codes.codes[0], 6, d);
    TrajectoryInputs in;
    in.samples = s.r;
    in.dec = d;
    in.N_I = 3;
    in.v_opt = impulse(3);
    in.w_opt = quiescent_receiver(cs, sc.g());
    in.mu = 0.01;
    in.eta = 0.001;
    in.ew0 = CVec::Zero(d.M_red);
    in.ev0 = CVec::Zero(3);
    in.steps = 1;
    const MeanTrajectory probe = mean_trajectory_blind(in, cs);
    ASSERT_TRUE(probe.stable);
    // fixed point with e_w inside range(Pi)
    const CMat Qw = projector_range(cs.Pi);
    CMat Q = CMat::Zero(d.M_red + 3, Qw.cols() + 3);
    Q.topLeftCorner(d.M_red, Qw.cols()) = Qw;
    Q.bottomRightCorner(3, 3) = CMat::Identity(3, 3);
    const Eigen::Index n = Q.cols();
    const CVec fp = Q * (CMat::Identity(n, n) - Q.adjoint() * probe.A * Q).fullPivLu().solve(Q.adjoint() * probe.B);
    in.ew0 = fp.head(d.M_red);
    in.ev0 = fp.tail(3);
    in.steps = 50;
    const MeanTrajectory t = mean_trajectory_blind(in, cs);
    for (std::size_t i = 0; i < t.ew_norm.size(); ++i) {
        EXPECT_NEAR(t.ew_norm[i], fp.head(d.M_red).norm(), 1e-9);
        EXPECT_NEAR(t.ev_norm[i], fp.tail(3).norm(), 1e-9);
    }
    // any other start converges to the same point
    in.ew0 = cs.Pi * CVec::Ones(d.M_red);
    in.steps = 20000;
    const MeanTrajectory t2 = mean_trajectory_blind(in, cs);
    // the w part of fp is ~0 here and e(0) - fp = [ew0; 0], so ||e_w(n)|| <= rho^n ||ew0||
    const double e0 = in.ew0.norm();
    const double bound = std::pow(std::sqrt(t2.deflated_norm_sq), in.steps) * e0;
    EXPECT_LT(fp.head(d.M_red).norm(), 1e-10);
    EXPECT_LE(t2.ew_norm.back(), bound * (1.0 + 1e-9) + 1e-12);
    EXPECT_LT(t2.ew_norm.back(), 1e-3 * e0);
}

TEST(MeanTrajectory, VerdictAgreesWithSimulation) {
    Rng rng(407);
    std::uniform_real_distribution<double> small(0.05, 0.3), large(1.5, 3.0);
    std::bernoulli_distribution coin(0.5);
    const int trials = 20;
    int agree = 0;
    for (int t = 0; t < trials; ++t) {
        const Scenario sc = make_scenario(rng, 4, 12.0);
        const Samples s = draw(sc, rng, 2000);
        const Decimation d = make_decimation(sc.M(), 2);
        const MmseResult design = alternate_mmse(s.r, s.b, d, 3);
        const SecondOrderStats st = sample_statistics(s.r, s.b);
        const ReducedStats rb = receiver_statistics(st, design.v, d);
        const ReducedStats ru = interpolator_statistics(st, design.w, d, 3);
        const double c = coin(rng) ? small(rng) : large(rng);
        TrajectoryInputs in;
        in.samples = s.r;
        in.symbols = s.b;
        in.dec = d;
        in.N_I = 3;
        in.w_opt = design.w;
        in.v_opt = design.v;
        in.mu = c * stability_bound(rb.R).mu_max;
        in.eta = 0.1 * stability_bound(ru.R).mu_max;
        in.ew0 = CVec::Zero(d.M_red);
        in.ev0 = CVec::Zero(3);
        in.steps = 1;
        const bool predicted = mean_trajectory_trained(in).stable;

        const SecondOrderStats exact = sc.stats();
        LmsState lms = make_lms(d, 3, in.mu, in.eta, StepRule::fixed, true, design.v);
        lms.rx.w = design.w + 0.01 * complex_gaussian_vector(rng, d.M_red);
        DownlinkSimulator link(sc.codes, sc.amplitudes, sc.channel, sc.sigma2, rng);
        bool diverged = false;
        for (int i = 0; i < 3000 && !diverged; ++i) {
            const ReceivedVector rv = link.step(rng);
            lms_step(lms, rv.samples, rv.symbol);
            const double m = mse_of(exact, lms.rx.v, lms.rx.w, d);
            diverged = !std::isfinite(m) || m > 10.0;
        }
        if (predicted == !diverged) ++agree;
    }
    EXPECT_GE(agree, 18) << agree << " of " << trials;
}

TEST(MeanTrajectory, DecayRateMatchesEnsemble) {
    Rng rng(408);
    const Scenario sc = make_scenario(rng, 4, 12.0);
    const SecondOrderStats exact = sc.stats();
    const Samples s = draw(sc, rng, 2000);
    const Decimation d = make_decimation(sc.M(), 2);
    const MmseResult design = alternate_mmse(s.r, s.b, d, 3);
    const SecondOrderStats st = sample_statistics(s.r, s.b);
    const double mu = 0.1 * stability_bound(receiver_statistics(st, design.v, d).R).mu_max;
    const double eta = 0.05 * stability_bound(interpolator_statistics(st, design.w, d, 3).R).mu_max;
    const int steps = 1500, runs = 50;

    TrajectoryInputs in;
    in.samples = s.r;
    in.symbols = s.b;
    in.dec = d;
    in.N_I = 3;
    in.w_opt = design.w;
    in.v_opt = design.v;
    in.mu = mu;
    in.eta = eta;
    in.ew0 = -design.w;
    in.ev0 = CVec::Zero(3);
    in.steps = steps;
    const MeanTrajectory model = mean_trajectory_trained(in);

    std::vector<CVec> mean_ew(static_cast<std::size_t>(steps) + 1, CVec::Zero(d.M_red));
    for (int run = 0; run < runs; ++run) {
        LmsState lms = make_lms(d, 3, mu, eta, StepRule::fixed, true, design.v);
        DownlinkSimulator link(sc.codes, sc.amplitudes, sc.channel, sc.sigma2, rng);
        mean_ew[0] += (lms.rx.w - design.w) / runs;
        for (int i = 1; i <= steps; ++i) {
            const ReceivedVector rv = link.step(rng);
            lms_step(lms, rv.samples, rv.symbol);
            mean_ew[static_cast<std::size_t>(i)] += (lms.rx.w - design.w) / runs;
        }
    }
    std::vector<double> sim;
    for (const auto& e : mean_ew) sim.push_back(e.norm());

    auto half_time = [](const std::vector<double>& c) {
        const double floor = c.back();
        for (std::size_t i = 0; i < c.size(); ++i)
            if (c[i] - floor <= 0.5 * (c[0] - floor)) return static_cast<double>(i);
        return static_cast<double>(c.size());
    };
    const double tp = half_time(model.ew_norm), ts = half_time(sim);
    EXPECT_GT(tp, 0.0);
    EXPECT_LE(std::max(tp / ts, ts / tp), 2.0) << "model " << tp << " simulation " << ts;
    (void)exact;
}

TEST(EigenSpread, ReducedCovarianceIsBetterConditioned) {
    const experiments::SpreadCount c = experiments::eigen_spread_study(409, 100);
    EXPECT_GE(c.reduced_not_larger, 95) << c.reduced_not_larger << " of " << c.total;
}

TEST(Stability, BoundSeparatesDivergenceFromConvergence) {
    const experiments::StabilityRun bad = experiments::stability_run(410, 2.5);
    const experiments::StabilityRun good = experiments::stability_run(410, 0.5);
    EXPECT_TRUE(!std::isfinite(bad.peak_mse) || bad.peak_mse > 10.0 * bad.initial_mse);
    EXPECT_TRUE(std::isfinite(good.final_mse));
    EXPECT_LT(good.final_mse, good.initial_mse);
    EXPECT_LE(good.peak_mse, 10.0 * good.initial_mse);
}
