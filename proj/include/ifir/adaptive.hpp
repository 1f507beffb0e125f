#pragma once

#include <cmath>
#include <optional>

#include "ifir/cmv_design.hpp"
#include "ifir/interp_core.hpp"
#include "ifir/linalg.hpp"

namespace ifir {

enum class StepRule { normalized, fixed };

// receiver w (M_red) and interpolator v (N_I) with the decimation geometry
struct ReceiverState {
    Decimation dec;
    int N_I = 1;
    CVec v;
    CVec w;
    bool adapt_interpolator = true;
    CVec rbar;  // last decimated regressor
    CVec u;     // last interpolator regressor
};

inline ReceiverState make_receiver(const Decimation& d, int N_I, bool adapt_interpolator = true, CVec v0 = {}) {
    require(N_I >= 1 && N_I <= d.M_red, "need 1 <= N_I <= M_red");
    ReceiverState s;
    s.dec = d;
    s.N_I = N_I;
    s.v = v0.size() == 0 ? impulse(N_I) : std::move(v0);
    require(s.v.size() == N_I, "initial interpolator has wrong length");
    s.w = CVec::Zero(d.M_red);
    s.adapt_interpolator = adapt_interpolator;
    return s;
}

struct StepResult {
    cplx x{};        // output before the update
    cplx error{};    // reference minus output (trained) or output itself (blind)
    double reference = 0.0;
    bool w_updated = false;
    bool v_updated = false;
    bool reset = false;
};

namespace detail {

// forms Re, rbar = Re^T v*, u = Re w* and returns x = w^H rbar
inline cplx front_end(ReceiverState& s, const CVec& r) {
    const CMat Re = observation_matrix(r, s.dec, s.N_I);
    s.rbar = Re.transpose() * s.v.conjugate();
    s.u = Re * s.w.conjugate();
    return s.w.dot(s.rbar);
}

inline double reference_symbol(cplx x, std::optional<double> training) {
    return training ? *training : detect(x);
}

}  // namespace detail

// ---------------------------------------------------------------- NLMS

struct LmsState {
    ReceiverState rx;
    double mu = 0.05;
    double eta = 0.005;
    StepRule rule = StepRule::normalized;
};

inline LmsState make_lms(const Decimation& d, int N_I, double mu, double eta, StepRule rule = StepRule::normalized,
                         bool adapt_interpolator = true, CVec v0 = {}) {
    require(mu > 0.0, "receiver step size must be positive");
    require(eta >= 0.0, "interpolator step size must be non-negative");
    return {make_receiver(d, N_I, adapt_interpolator, std::move(v0)), mu, eta, rule};
}

// Both filters update from the pre-update value of the other one.
inline StepResult lms_step(LmsState& st, const CVec& r, std::optional<double> training = std::nullopt) {
    ReceiverState& s = st.rx;
    StepResult out;
    out.x = detail::front_end(s, r);
    out.reference = detail::reference_symbol(out.x, training);
    out.error = out.reference - out.x;
    const cplx ec = std::conj(out.error);

    if (s.adapt_interpolator && st.eta > 0.0) {
        const double nu = s.u.squaredNorm();
        if (nu > 0.0) {
            const double step = st.rule == StepRule::normalized ? st.eta / nu : st.eta;
            s.v += step * ec * s.u;
            out.v_updated = true;
        }
    }
    const double nr = s.rbar.squaredNorm();
    if (nr > 0.0) {
        const double step = st.rule == StepRule::normalized ? st.mu / nr : st.mu;
        s.w += step * ec * s.rbar;
        out.w_updated = true;
    }
    return out;
}

// ---------------------------------------------------------------- RLS

struct RlsState {
    ReceiverState rx;
    CMat P;    // inverse of the weighted receiver covariance
    CMat P_u;  // same for the interpolator
    double alpha = 0.998;
    double delta = 100.0;
    int resets = 0;
};

inline RlsState make_rls(const Decimation& d, int N_I, double alpha, double delta, bool adapt_interpolator = true,
                         CVec v0 = {}) {
    require(alpha > 0.0 && alpha <= 1.0, "forgetting factor must lie in (0, 1]");
    require(delta > 0.0, "P(0) scale must be positive");
    RlsState st;
    st.rx = make_receiver(d, N_I, adapt_interpolator, std::move(v0));
    st.P = delta * CMat::Identity(d.M_red, d.M_red);
    st.P_u = delta * CMat::Identity(N_I, N_I);
    st.alpha = alpha;
    st.delta = delta;
    return st;
}

namespace detail {

// one exponentially weighted RLS recursion; false if the denominator is not positive
inline bool rls_update(CMat& P, CVec& f, const CVec& x, cplx xi, double alpha) {
    const CVec k = (1.0 / alpha) * (P * x);
    const double den = 1.0 + x.dot(k).real();
    if (!(den > 0.0) || !std::isfinite(den)) return false;
    const CVec G = k / den;
    P = P / alpha - G * k.adjoint();
    P = hermitian_part(P);
    f += G * std::conj(xi);
    return true;
}

}  // namespace detail

inline StepResult rls_step(RlsState& st, const CVec& r, std::optional<double> training = std::nullopt) {
    ReceiverState& s = st.rx;
    StepResult out;
    out.x = detail::front_end(s, r);
    out.reference = detail::reference_symbol(out.x, training);
    out.error = out.reference - out.x;  // a priori error

    if (s.adapt_interpolator) {
        if (s.u.squaredNorm() > 0.0) {
            if (detail::rls_update(st.P_u, s.v, s.u, out.error, st.alpha)) {
                out.v_updated = true;
            } else {
                st.P_u = st.delta * CMat::Identity(s.N_I, s.N_I);
                out.reset = true;
            }
        }
    }
    if (detail::rls_update(st.P, s.w, s.rbar, out.error, st.alpha)) {
        out.w_updated = true;
    } else {
        st.P = st.delta * CMat::Identity(s.dec.M_red, s.dec.M_red);
        out.reset = true;
    }
    if (out.reset) ++st.resets;
    return out;
}

// ---------------------------------------------------------------- blind SG

struct BlindSgState {
    ReceiverState rx;
    ConstraintSet cs;
    double mu = 1e-3;
    double eta = 1e-3;
    StepRule rule = StepRule::normalized;
};

inline BlindSgState make_blind_sg(const ConstraintSet& cs, int N_I, double mu, double eta, const CVec& g0,
                                  StepRule rule = StepRule::normalized, bool adapt_interpolator = true,
                                  CVec v0 = {}) {
    require(mu >= 0.0 && eta >= 0.0, "step sizes must be non-negative");
    BlindSgState st{make_receiver(cs.dec, N_I, adapt_interpolator, std::move(v0)), cs, mu, eta, rule};
    st.rx.v.normalize();
    st.rx.w = quiescent_receiver(cs, g0);
    return st;
}

// x = w^H rbar; v <- v - eta x* u (normalised); w <- Pi (w - mu x* rbar) + quiescent(g)
inline StepResult cmv_sg_step(BlindSgState& st, const CVec& r, const CVec& g) {
    ReceiverState& s = st.rx;
    StepResult out;
    out.x = detail::front_end(s, r);
    out.error = out.x;
    const cplx xc = std::conj(out.x);

    if (s.adapt_interpolator && st.eta > 0.0) {
        const double nu = s.u.squaredNorm();
        if (nu > 0.0) {
            const double step = st.rule == StepRule::normalized ? st.eta / nu : st.eta;
            CVec v = s.v - step * xc * s.u;
            const double n = v.norm();
            if (n > 0.0) {
                s.v = v / n;
                out.v_updated = true;
            }
        }
    }

    double step = st.mu;
    if (st.rule == StepRule::normalized) {
        const double den = s.rbar.dot(st.cs.Pi * s.rbar).real();
        step = den > 1e-300 ? st.mu / den : 0.0;
    }
    s.w = st.cs.Pi * (s.w - step * xc * s.rbar) + quiescent_receiver(st.cs, g);
    out.w_updated = step > 0.0;
    return out;
}

// ---------------------------------------------------------------- blind RLS

struct BlindRlsState {
    ReceiverState rx;
    ConstraintSet cs;
    CMat P;          // inverse of the weighted reduced covariance
    CMat Gamma_inv;  // (DC^H P DC)^-1
    CMat R_u;        // weighted interpolator covariance
    double alpha = 0.998;
    double delta = 100.0;
    int resets = 0;
};

namespace detail {

inline void reset_blind_rls(BlindRlsState& st) {
    const int n = st.rx.dec.M_red;
    st.P = st.delta * CMat::Identity(n, n);
    st.Gamma_inv = hermitian_inverse(st.cs.DC.adjoint() * st.cs.DC) / st.delta;
}

}  // namespace detail

inline BlindRlsState make_blind_rls(const ConstraintSet& cs, int N_I, double alpha, double delta, const CVec& g0,
                                    bool adapt_interpolator = true, CVec v0 = {}) {
    require(alpha > 0.0 && alpha <= 1.0, "forgetting factor must lie in (0, 1]");
    require(delta > 0.0, "P(0) scale must be positive");
    BlindRlsState st;
    st.rx = make_receiver(cs.dec, N_I, adapt_interpolator, std::move(v0));
    st.rx.v.normalize();
    st.cs = cs;
    st.alpha = alpha;
    st.delta = delta;
    st.R_u = CMat::Zero(N_I, N_I);
    detail::reset_blind_rls(st);
    st.rx.w = st.P * st.cs.DC * (st.Gamma_inv * g0);
    return st;
}

// Gamma^-1 follows the rank-one downdate of DC^H P DC exactly, so
// w = P DC Gamma^-1 g stays equal to the batch constrained solution on the
// accumulated covariance.
inline StepResult cmv_rls_step(BlindRlsState& st, const CVec& r, const CVec& g) {
    ReceiverState& s = st.rx;
    StepResult out;
    out.x = detail::front_end(s, r);
    out.error = out.x;

    if (s.adapt_interpolator) {
        st.R_u = st.alpha * st.R_u + s.u * s.u.adjoint();
        const double tr = st.R_u.trace().real();
        if (tr > 0.0) {
            CVec v = s.v - (st.R_u * s.v) / tr;
            const double n = v.norm();
            if (n > 0.0) {
                s.v = v / n;
                out.v_updated = true;
            }
        }
    }

    const CVec k = st.P * s.rbar;
    const double c = st.alpha + s.rbar.dot(k).real();
    const CVec a = st.cs.DC.adjoint() * k;
    const CVec Ga = st.Gamma_inv * a;
    const double dd = c - a.dot(Ga).real();
    if (!(c > 0.0) || !(dd > 0.0) || !std::isfinite(dd)) {
        detail::reset_blind_rls(st);
        out.reset = true;
        ++st.resets;
    } else {
        st.P = hermitian_part((st.P - k * k.adjoint() / c) / st.alpha);
        st.Gamma_inv = hermitian_part(st.alpha * (st.Gamma_inv + Ga * Ga.adjoint() / dd));
    }
    s.w = st.P * (st.cs.DC * (st.Gamma_inv * g));
    out.w_updated = true;
    return out;
}

// ---------------------------------------------------------------- channel trackers

// Tracks Q ~ R^-1 C by stochastic gradient and keeps Phi = C^H Q alongside;
// each step applies one shift-iteration step to g with Phi.
struct SgChannelTracker {
    CMat C;
    CMat CtC;
    CMat Q;
    CMat Phi;
    CVec g;
    double mu = 0.05;
};

inline SgChannelTracker make_sg_channel_tracker(const CMat& C, double mu) {
    require(mu > 0.0, "tracker step must be positive");
    SgChannelTracker t;
    t.C = C;
    t.CtC = C.adjoint() * C;
    t.Q = C;
    t.Phi = t.CtC;
    t.g = CVec::Ones(C.cols()) / std::sqrt(static_cast<double>(C.cols()));
    t.mu = mu;
    return t;
}

namespace detail {

inline void shift_step_channel(CVec& g, const CMat& Phi) {
    const CMat Ph = hermitian_part(Phi);
    const double tr = Ph.trace().real();
    if (!(tr > 0.0)) return;
    CVec n = g - (Ph * g) / tr;
    const double nn = n.norm();
    if (!(nn > 0.0)) return;
    g = n / nn;
    fix_phase_first(g);
}

}  // namespace detail

inline const CVec& sg_channel_track(SgChannelTracker& t, const CVec& r) {
    const double e = r.squaredNorm();
    if (e > 0.0) {
        const double step = t.mu / e;
        const CVec y = t.C.adjoint() * r;
        const CVec z = t.Q.adjoint() * r;  // (r^H Q)^H
        t.Q += step * (t.C - r * z.adjoint());
        t.Phi += step * (t.CtC - y * z.adjoint());
    }
    detail::shift_step_channel(t.g, t.Phi);
    return t.g;
}

// Full-rank RLS estimate P of R^-1; Phi = C^H P C feeds the shift iteration.
struct RlsChannelTracker {
    CMat C;
    CMat P;
    CMat Phi;
    CVec g;
    double alpha = 0.998;
};

inline RlsChannelTracker make_rls_channel_tracker(const CMat& C, double alpha, double delta) {
    require(alpha > 0.0 && alpha <= 1.0 && delta > 0.0, "invalid tracker parameters");
    RlsChannelTracker t;
    t.C = C;
    t.P = delta * CMat::Identity(C.rows(), C.rows());
    t.Phi = delta * (C.adjoint() * C);
    t.g = CVec::Ones(C.cols()) / std::sqrt(static_cast<double>(C.cols()));
    t.alpha = alpha;
    return t;
}

inline const CVec& rls_channel_track(RlsChannelTracker& t, const CVec& r) {
    const CVec k = t.P * r;
    const double c = t.alpha + r.dot(k).real();
    if (c > 0.0 && std::isfinite(c)) {
        t.P = hermitian_part((t.P - k * k.adjoint() / c) / t.alpha);
        // recomputed rather than downdated: a separate downdate of Phi
        // amplifies rounding by 1/alpha per step
        t.Phi = hermitian_part(t.C.adjoint() * (t.P * t.C));
    }
    detail::shift_step_channel(t.g, t.Phi);
    return t.g;
}

}  // namespace ifir
