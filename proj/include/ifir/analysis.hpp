#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ifir/cmv_design.hpp"
#include "ifir/interp_core.hpp"
#include "ifir/linalg.hpp"

namespace ifir {

// ---------------------------------------------------------------- step bounds

struct StabilityBound {
    double lambda_max = 0.0;
    double mu_max = 0.0;        // 2 / lambda_max
    double mu_max_trace = 0.0;  // 2 / tr(R), never larger than mu_max
};

inline StabilityBound stability_bound(const CMat& R) {
    const RVec ev = hermitian_eigenvalues(R);
    const double lmax = ev[ev.size() - 1];
    require(lmax > 0.0, "covariance has no positive eigenvalue");
    return {lmax, 2.0 / lmax, 2.0 / R.trace().real()};
}

// ---------------------------------------------------------------- steady state

// ((mu/2) tr R) / (1 - (mu/2) tr R) * eps_min
inline double excess_mse_trained(double mu, const CMat& R, double eps_min) {
    require(mu >= 0.0, "step size must be non-negative");
    const double s = 0.5 * mu * R.trace().real();
    require(s < 1.0, "step size too large for the steady-state formula");
    return s / (1.0 - s) * eps_min;
}

namespace detail {

inline CMat kron(const CMat& A, const CMat& B) {
    CMat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

inline CVec vec(const CMat& X) { return Eigen::Map<const CVec>(X.data(), X.size()); }

}  // namespace detail

struct BlindExcessInputs {
    CMat R_bar;
    CMat Pi;
    CVec w_opt;
    std::vector<CVec> rbar_samples;  // used for the fourth-order moment
};

// mu vec(R)^H T^-1 a with the fourth-order moment accumulated in chunks.
// The error covariance of the constrained w lives in range(Pi); on the
// constraint directions T is singular, so the system is solved in an
// orthonormal basis Q of range(Pi) (Q = I when Pi = I).
inline double excess_mse_blind(double mu, const BlindExcessInputs& in, int max_dim = 20) {
    const Eigen::Index n = in.R_bar.rows();
    require(n <= max_dim, "fourth-order blind analysis limited to small reduced dimension");
    require(!in.rbar_samples.empty(), "blind analysis needs regressor samples");

    const CMat Q = projector_range(in.Pi);
    const Eigen::Index r = Q.cols(), r2 = r * r;

    // F = E[vec(y y^H) vec(y y^H)^H], d = E[|w^H x|^2 vec(y y^H)], y = Q^H x
    CMat F = CMat::Zero(r2, r2);
    CVec a = CVec::Zero(r2);
    constexpr std::size_t chunk = 256;
    for (std::size_t j0 = 0; j0 < in.rbar_samples.size(); j0 += chunk) {
        const std::size_t j1 = std::min(in.rbar_samples.size(), j0 + chunk);
        CMat Z(r2, static_cast<Eigen::Index>(j1 - j0));
        for (std::size_t j = j0; j < j1; ++j) {
            const CVec& x = in.rbar_samples[j];
            const CVec y = Q.adjoint() * x;
            const CMat yy = y * y.adjoint();
            Z.col(static_cast<Eigen::Index>(j - j0)) = detail::vec(yy);
            a += std::norm(in.w_opt.dot(x)) * detail::vec(yy);
        }
        F.noalias() += Z * Z.adjoint();
    }
    F /= static_cast<double>(in.rbar_samples.size());
    a /= static_cast<double>(in.rbar_samples.size());

    const CMat Rq = Q.adjoint() * in.R_bar * Q;
    const CMat I = CMat::Identity(r, r);
    const CMat T = detail::kron(Rq.transpose(), I) + detail::kron(I, Rq) - mu * F;
    const Eigen::FullPivLU<CMat> lu(T);
    require(lu.isInvertible(), "blind excess-MSE system is singular");
    const CVec y = lu.solve(a);
    return mu * detail::vec(Rq).dot(y).real();
}

// ---------------------------------------------------------------- mean trajectory

struct MeanTrajectory {
    CMat A;
    CVec B;
    double norm_sq = 0.0;           // largest eigenvalue of A^H A
    double deflated_norm_sq = 0.0;  // same, with the neutral scale direction removed (trained only)
    bool stable = false;
    std::vector<double> ew_norm;  // ||E e_w(i)||
    std::vector<double> ev_norm;  // ||E e_v(i)||
};

struct TrajectoryInputs {
    std::vector<CVec> samples;   // full-length received vectors
    std::vector<double> symbols; // desired symbols, trained model only
    Decimation dec;
    int N_I = 1;
    CVec w_opt;
    CVec v_opt;
    double mu = 0.0;
    double eta = 0.0;
    CVec ew0;
    CVec ev0;
    int steps = 1000;
};

namespace detail {

inline double largest_eig(const CMat& A) {
    const RVec ev = hermitian_eigenvalues(A.adjoint() * A);
    return ev[ev.size() - 1];
}

inline void iterate_trajectory(MeanTrajectory& t, const TrajectoryInputs& in, Eigen::Index m) {
    CVec e(t.A.rows());
    e << in.ew0, in.ev0;
    for (int i = 0; i <= in.steps; ++i) {
        t.ew_norm.push_back(e.head(m).norm());
        t.ev_norm.push_back(e.tail(e.size() - m).norm());
        e = t.A * e + t.B;
    }
}

struct Moments {
    CMat Rb, Ru, Rbu;
    CVec pb, pu, rx, ux;  // E[b rbar], E[b u], E[rbar x*], E[u x*]
};

inline Moments sample_moments(const TrajectoryInputs& in, bool with_symbols) {
    const Eigen::Index m = in.dec.M_red;
    const Eigen::Index k = in.N_I;
    Moments s{CMat::Zero(m, m), CMat::Zero(k, k), CMat::Zero(m, k), CVec::Zero(m), CVec::Zero(k), CVec::Zero(m),
              CVec::Zero(k)};
    for (std::size_t j = 0; j < in.samples.size(); ++j) {
        const CMat Re = observation_matrix(in.samples[j], in.dec, in.N_I);
        const CVec rb = Re.transpose() * in.v_opt.conjugate();
        const CVec u = Re * in.w_opt.conjugate();
        const cplx xc = std::conj(in.w_opt.dot(rb));
        s.Rb += rb * rb.adjoint();
        s.Ru += u * u.adjoint();
        s.Rbu += rb * u.adjoint();
        s.rx += rb * xc;
        s.ux += u * xc;
        if (with_symbols) {
            s.pb += in.symbols[j] * rb;
            s.pu += in.symbols[j] * u;
        }
    }
    const double n = static_cast<double>(in.samples.size());
    s.Rb /= n; s.Ru /= n; s.Rbu /= n; s.rx /= n; s.ux /= n; s.pb /= n; s.pu /= n;
    return s;
}

}  // namespace detail

// trained joint model [e_w; e_v] <- A [e_w; e_v] + B, fixed step sizes
inline MeanTrajectory mean_trajectory_trained(const TrajectoryInputs& in) {
    require(!in.samples.empty() && in.samples.size() == in.symbols.size(), "need paired samples and symbols");
    const auto s = detail::sample_moments(in, true);
    const Eigen::Index m = in.dec.M_red;
    const Eigen::Index k = in.N_I;
    MeanTrajectory t;
    t.A = CMat::Identity(m + k, m + k);
    t.A.topLeftCorner(m, m) -= in.mu * s.Rb;
    t.A.topRightCorner(m, k) = -in.mu * s.Rbu;
    t.A.bottomLeftCorner(k, m) = -in.eta * s.Rbu.adjoint();
    t.A.bottomRightCorner(k, k) -= in.eta * s.Ru;
    t.B.resize(m + k);
    t.B << in.mu * (s.pb - s.rx), in.eta * (s.pu - s.ux);

    t.norm_sq = detail::largest_eig(t.A);
    // (v, w) -> (c v, w / c) leaves the output unchanged: A d = d for d = [-w; v]
    CVec d(m + k);
    d << -in.w_opt, in.v_opt;
    d.normalize();
    const CMat Qp = Eigen::HouseholderQR<CMat>(d).householderQ() * CMat::Identity(m + k, m + k);
    const CMat Q = Qp.rightCols(m + k - 1);
    t.deflated_norm_sq = detail::largest_eig(Q.adjoint() * t.A * Q);
    t.stable = t.deflated_norm_sq < 1.0;
    detail::iterate_trajectory(t, in, m);
    return t;
}

// blind constrained model; v normalisation is not part of the linear model
inline MeanTrajectory mean_trajectory_blind(const TrajectoryInputs& in, const ConstraintSet& cs) {
    require(!in.samples.empty(), "need samples");
    const auto s = detail::sample_moments(in, false);
    const Eigen::Index m = in.dec.M_red;
    const Eigen::Index k = in.N_I;
    MeanTrajectory t;
    t.A = CMat::Identity(m + k, m + k);
    t.A.topLeftCorner(m, m) -= in.mu * cs.Pi * s.Rb;
    t.A.topRightCorner(m, k) = -in.mu * cs.Pi * s.Rbu;
    t.A.bottomLeftCorner(k, m) = -in.eta * s.Rbu.adjoint();
    t.A.bottomRightCorner(k, k) -= in.eta * s.Ru;
    t.B.resize(m + k);
    t.B << -in.mu * (cs.Pi * s.rx), -in.eta * s.ux;
    t.norm_sq = detail::largest_eig(t.A);
    // e_w keeps the constraint, so only range(Pi) x C^N_I matters; the
    // constraint directions are invariant with eigenvalue one
    const CMat Qw = projector_range(cs.Pi);
    CMat Q = CMat::Zero(m + k, Qw.cols() + k);
    Q.topLeftCorner(m, Qw.cols()) = Qw;
    Q.bottomRightCorner(k, k) = CMat::Identity(k, k);
    t.deflated_norm_sq = detail::largest_eig(Q.adjoint() * t.A * Q);
    t.stable = t.deflated_norm_sq < 1.0;
    detail::iterate_trajectory(t, in, m);
    return t;
}

// ---------------------------------------------------------------- transient

// x(i+1) = T x(i) + mu^2 eps_min lambda with T_nn = (1 - mu l_n)^2, T_nj = mu^2 l_n l_j
struct TransientModel {
    RVec lambda;   // eigenvalues of R
    RVec modes;    // eigenvalues c_n of T
    RVec gamma;    // weights of each mode in the excess MSE
    RVec x_inf;    // fixed point
    double steady = 0.0;  // lambda^T x_inf

    double excess(int i) const {
        double s = steady;
        for (Eigen::Index n = 0; n < modes.size(); ++n) s += gamma[n] * std::pow(modes[n], i);
        return s;
    }
};

// x_n(0) = |q_n^H e_w(0)|^2 in the eigenbasis of R
inline RVec transient_initial_state(const CMat& R, const CVec& ew0) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(R));
    return (es.eigenvectors().adjoint() * ew0).cwiseAbs2();
}

inline TransientModel sg_transient(const CMat& R, double mu, double eps_min, const RVec& x0) {
    TransientModel tm;
    tm.lambda = hermitian_eigenvalues(R);
    const Eigen::Index n = tm.lambda.size();
    require(x0.size() == n, "initial state must have one entry per eigenvalue");
    RMat T = mu * mu * tm.lambda * tm.lambda.transpose();
    for (Eigen::Index j = 0; j < n; ++j) T(j, j) = (1.0 - mu * tm.lambda[j]) * (1.0 - mu * tm.lambda[j]);
    const RVec drive = mu * mu * eps_min * tm.lambda;
    tm.x_inf = (RMat::Identity(n, n) - T).partialPivLu().solve(drive);
    tm.steady = tm.lambda.dot(tm.x_inf);
    Eigen::SelfAdjointEigenSolver<RMat> es(T);
    tm.modes = es.eigenvalues();
    const RMat& G = es.eigenvectors();
    tm.gamma = (G.transpose() * tm.lambda).cwiseProduct(G.transpose() * (x0 - tm.x_inf));
    return tm;
}

// a priori excess MSE of exact least squares, i > M_red + 1
inline double rls_learning_curve(double sigma2, int M_red, int i) {
    require(i > M_red + 1, "learning curve defined only for i > M_red + 1");
    return sigma2 * M_red / static_cast<double>(i - M_red - 1);
}

// ---------------------------------------------------------------- complexity

enum class Scheme {
    lms_full, lms_int, lms_pd,
    rls_full, rls_int, rls_pd,
    cmv_sg_full, cmv_sg_int,
    cmv_rls_full, cmv_rls_int,
};

struct OpCount {
    std::int64_t additions = 0;
    std::int64_t multiplications = 0;
    bool operator==(const OpCount&) const = default;
};

struct ComplexityQuery {
    int M = 0;
    int L = 1;
    int N_I = 1;
    int Lp = 1;
    int D = 1;
};

// M/L stands for the rounded reduced length
inline OpCount complexity(Scheme s, const ComplexityQuery& q) {
    using i64 = std::int64_t;
    const i64 M = q.M;
    const i64 N = q.N_I;
    const i64 P = q.Lp;
    const i64 D = q.D;
    const i64 R = (s == Scheme::lms_int || s == Scheme::rls_int || s == Scheme::cmv_sg_int || s == Scheme::cmv_rls_int)
                      ? make_decimation(q.M, q.L).M_red
                      : M;
    auto sq = [](i64 x) { return x * x; };
    switch (s) {
        case Scheme::lms_full: return {2 * M, 2 * M + 1};
        case Scheme::lms_int: return {2 * R + 2 * N + N * M + R * N + 2, 3 * R + 2 * N + R * N};
        case Scheme::lms_pd: return {sq(D - 1) + 2 * D + 1, sq(D) + 2 * D + 2};
        case Scheme::rls_full: return {3 * sq(M - 1) + sq(M) + 2 * M, 6 * sq(M) + 2 * M + 2};
        case Scheme::rls_int:
            return {3 * sq(R - 1) + 3 * sq(N - 1) + (R - 1) * N + N * M + sq(R) + sq(N) + 2 * R + 2 * N,
                    6 * sq(R) + 6 * sq(N) + R * N + 3 * R + N + 2};
        case Scheme::rls_pd: return {4 * sq(D - 1) + sq(D) + 2 * D, 7 * sq(D) + 2 * D + 2};
        case Scheme::cmv_sg_full: return {sq(M) + M * P + 2 * M + 1, sq(M) + M * P + 3 * M};
        case Scheme::cmv_sg_int:
            return {sq(R) + R * P + N * M + R * N + 2 * R + N + 2, sq(R) + R * P + R * N + 4 * R + N};
        case Scheme::cmv_rls_full:
            return {4 * sq(M - 1) + sq(M) + 3 * sq(P - 1) - 1 + sq(P) + 2 * P + M * P,
                    7 * sq(M) + M + sq(P) + M * P + P + 4};
        case Scheme::cmv_rls_int:
            return {4 * sq(R - 1) + sq(R) + sq(P) + 3 * sq(P - 1) + 2 * R * P + N * M + 3 * P - 1 + (R - 1) * N +
                        sq(N - 1),
                    7 * sq(R) + 2 * R + sq(P) + R * P + P + 2 + sq(N) + R * N + N};
    }
    throw Error("unknown scheme");
}

inline Scheme scheme_from_name(const std::string& name) {
    static const std::pair<const char*, Scheme> table[] = {
        {"lms-full", Scheme::lms_full},         {"lms-int", Scheme::lms_int},       {"lms-pd", Scheme::lms_pd},
        {"rls-full", Scheme::rls_full},         {"rls-int", Scheme::rls_int},       {"rls-pd", Scheme::rls_pd},
        {"cmv-sg-full", Scheme::cmv_sg_full},   {"cmv-sg-int", Scheme::cmv_sg_int},
        {"cmv-rls-full", Scheme::cmv_rls_full}, {"cmv-rls-int", Scheme::cmv_rls_int},
    };
    for (const auto& [n, s] : table)
        if (name == n) return s;
    throw Error("unknown complexity scheme: " + name);
}

}  // namespace ifir
