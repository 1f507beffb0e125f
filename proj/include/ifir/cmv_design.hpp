#pragma once

#include <cmath>
#include <vector>

#include "ifir/interp_core.hpp"
#include "ifir/linalg.hpp"
#include "ifir/mmse_design.hpp"
#include "ifir/signal_model.hpp"

namespace ifir {

// M x Lp; column j is the code delayed by j chips
inline CMat constraint_matrix(const CVec& code, int Lp) {
    require(Lp >= 1, "L_p must be positive");
    const Eigen::Index N = code.size();
    CMat C = CMat::Zero(N + Lp - 1, Lp);
    for (int j = 0; j < Lp; ++j) C.block(j, j, N, 1) = code;
    return C;
}

struct ConstraintSet {
    Decimation dec;
    int Lp = 0;
    CMat C;         // M x Lp
    CMat DC;        // M_red x Lp
    CMat Pi;        // I - DC (DC^H DC)^-1 DC^H
    CMat quiescent; // DC (DC^H DC)^-1, maps g to the minimum-norm feasible w
};

namespace detail {

inline void bind_constraints(ConstraintSet& cs, const CMat& T) {
    cs.DC = T * cs.C;
    const CMat G = cs.DC.adjoint() * cs.DC;
    Eigen::LLT<CMat> llt(G);
    require(llt.info() == Eigen::Success && llt.rcond() > 1e-10,
            "decimated constraint matrix is rank deficient");
    cs.quiescent = cs.DC * llt.solve(CMat::Identity(cs.Lp, cs.Lp));
    cs.Pi = CMat::Identity(cs.dec.M_red, cs.dec.M_red) - cs.quiescent * cs.DC.adjoint();
}

}  // namespace detail

inline ConstraintSet make_constraints(const CVec& code, int Lp, const Decimation& d) {
    ConstraintSet cs;
    cs.dec = d;
    cs.Lp = Lp;
    cs.C = constraint_matrix(code, Lp);
    require(cs.C.rows() == d.M, "constraint matrix does not match observation length");
    detail::bind_constraints(cs, decimation_matrix(d));
    return cs;
}

inline CVec quiescent_receiver(const ConstraintSet& cs, const CVec& g) {
    require(g.size() == cs.Lp, "channel vector length must equal L_p");
    return cs.quiescent * g;
}

struct CmvSolution {
    CVec w;
    double variance = 0.0;  // g^H (C^H D^H Rbar^-1 D C)^-1 g
};

inline CmvSolution cmv_solution(const CMat& R_bar, const ConstraintSet& cs, const CVec& g) {
    require(R_bar.rows() == cs.dec.M_red, "reduced covariance has wrong size");
    require(g.size() == cs.Lp, "channel vector length must equal L_p");
    const HermitianSolver Rs(R_bar);
    const CMat X = Rs.solve(cs.DC);
    const CMat Gam = hermitian_part(cs.DC.adjoint() * X);
    const HermitianSolver Gs(Gam);
    const CVec y = Gs.solve(g);
    return {X * y, g.dot(y).real()};
}

inline CVec cmv_receiver(const CMat& R_bar, const ConstraintSet& cs, const CVec& g) {
    return cmv_solution(R_bar, cs, g).w;
}

inline double min_variance(const CMat& R_bar, const ConstraintSet& cs, const CVec& g) {
    return cmv_solution(R_bar, cs, g).variance;
}

// unit-norm minimum eigenvector, largest entry real positive
inline CVec cmv_interpolator(const CMat& R_u) { return min_eigenpair(R_u).vector; }

// v <- (I - R / tr R) v, normalised, repeated iters times
inline CVec shift_iteration(const CMat& R, CVec v, int iters = 1) {
    require(R.rows() == v.size(), "dimension mismatch in shift iteration");
    const double tr = R.trace().real();
    require(tr > 0.0, "shift iteration needs a matrix with positive trace");
    const double nu = 1.0 / tr;
    for (int k = 0; k < iters; ++k) {
        v -= nu * (R * v);
        const double n = v.norm();
        require(n > 0.0, "shift iteration collapsed to zero");
        v /= n;
    }
    return v;
}

// minimum eigenvector of C^H R^-m C, unit norm, entry 0 real positive
inline CVec blind_channel_estimate(const CMat& R, const CMat& C, int m = 1) {
    require(m >= 1, "power m must be >= 1");
    require(R.rows() == C.rows(), "covariance and constraint sizes differ");
    const HermitianSolver Rs(R);
    CMat X = C;
    for (int k = 0; k < m; ++k) X = Rs.solve(X);
    CVec g = min_eigenpair(C.adjoint() * X).vector;
    fix_phase_first(g);
    return g;
}

struct CmvDesign {
    CVec w;
    CVec v;
    double variance = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;
};

// batch alternation between the constrained receiver and the minimum-eigenvector interpolator
inline CmvDesign alternate_cmv(const SecondOrderStats& st, const ConstraintSet& cs, const CVec& g, int N_I,
                               const AlternatingOptions& opt = {}) {
    const Decimation& d = cs.dec;
    require(N_I >= 1 && N_I <= d.M_red, "need 1 <= N_I <= M_red");
    CmvDesign res;
    res.v = opt.v0.size() == 0 ? impulse(N_I) : opt.v0;
    res.v.normalize();
    double prev = 0.0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        const ReducedStats rs = receiver_statistics(st, res.v, d);
        const CmvSolution sol = cmv_solution(rs.R, cs, g);
        res.w = sol.w;
        res.history.push_back(sol.variance);
        const ReducedStats is = interpolator_statistics(st, res.w, d, N_I);
        res.v = cmv_interpolator(is.R);
        const double var = res.v.dot(is.R * res.v).real();
        res.history.push_back(var);
        res.variance = var;
        res.iterations = it;
        if (it > 1 && std::abs(prev - var) <= opt.tol * std::max(std::abs(var), 1e-12)) {
            res.converged = true;
            break;
        }
        prev = var;
    }
    return res;
}

}  // namespace ifir
