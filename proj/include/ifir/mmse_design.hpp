#pragma once

#include <cmath>
#include <vector>

#include "ifir/interp_core.hpp"
#include "ifir/linalg.hpp"
#include "ifir/signal_model.hpp"

namespace ifir {

// reduced statistics seen by the receiver for a fixed interpolator
struct ReducedStats {
    CMat R;
    CVec p;
};

inline ReducedStats receiver_statistics(const SecondOrderStats& st, const CVec& v, const Decimation& d) {
    const CMat T = interpolation_operator(v, d);
    return {T * st.R * T.adjoint(), T * st.p};
}

inline ReducedStats interpolator_statistics(const SecondOrderStats& st, const CVec& w, const Decimation& d, int N_I) {
    const CMat U = regressor_operator(w, d, N_I);
    return {U * st.R * U.adjoint(), U * st.p};
}

inline CVec mmse_receiver(const CMat& R_bar, const CVec& p_bar) { return solve_hermitian(R_bar, p_bar); }
inline CVec mmse_interpolator(const CMat& R_u, const CVec& p_u) { return solve_hermitian(R_u, p_u); }

// sigma_b^2 - p^H R^-1 p
inline double mmse_cost(double sigma_b2, const CMat& R, const CVec& p) {
    return sigma_b2 - p.dot(solve_hermitian(R, p)).real();
}

// E|b - f^H r|^2 for an arbitrary full-length filter f
inline double mse_of_filter(const SecondOrderStats& st, const CVec& f) {
    return st.sigma_b2 - 2.0 * f.dot(st.p).real() + f.dot(st.R * f).real();
}

inline double mse_of(const SecondOrderStats& st, const CVec& v, const CVec& w, const Decimation& d) {
    return mse_of_filter(st, effective_filter(v, w, d));
}

// sample second-order statistics of (r, b)
inline SecondOrderStats sample_statistics(const std::vector<CVec>& r, const std::vector<double>& b) {
    require(!r.empty() && r.size() == b.size(), "need matching, non-empty sample and symbol sets");
    const Eigen::Index M = r.front().size();
    SecondOrderStats st;
    st.R = CMat::Zero(M, M);
    st.p = CVec::Zero(M);
    st.sigma_b2 = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
        st.R.noalias() += r[j] * r[j].adjoint();
        st.p += b[j] * r[j];
        st.sigma_b2 += b[j] * b[j];
    }
    const double n = static_cast<double>(r.size());
    st.R /= n;
    st.p /= n;
    st.sigma_b2 /= n;
    return st;
}

struct AlternatingOptions {
    CVec v0;  // empty -> impulse
    double tol = 1e-8;
    int max_iter = 200;
};

struct MmseResult {
    CVec w;
    CVec v;
    double J = 0.0;
    double J_receiver = 0.0;  // sigma_b^2 - pbar^H Rbar^-1 pbar at the final v
    double J_interp = 0.0;    // sigma_b^2 - p_u^H R_u^-1 p_u at the final w
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;  // cost after every half-step
};

// Alternating minimisation over w and v. v is renormalised every sweep with
// w rescaled so the output is unchanged.
inline MmseResult alternate_mmse(const SecondOrderStats& st, const Decimation& d, int N_I,
                                 const AlternatingOptions& opt = {}) {
    require(N_I >= 1 && N_I <= d.M_red, "need 1 <= N_I <= M_red");
    MmseResult res;
    res.v = opt.v0.size() == 0 ? impulse(N_I) : opt.v0;
    require(res.v.size() == N_I, "initial interpolator has wrong length");
    require(res.v.norm() > 0.0, "initial interpolator must be nonzero");
    res.v.normalize();

    double prev = 0.0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        const ReducedStats rs = receiver_statistics(st, res.v, d);
        res.w = mmse_receiver(rs.R, rs.p);
        res.history.push_back(mse_of(st, res.v, res.w, d));

        const ReducedStats is = interpolator_statistics(st, res.w, d, N_I);
        res.v = mmse_interpolator(is.R, is.p);
        const double J = mse_of(st, res.v, res.w, d);
        res.history.push_back(J);

        const double c = res.v.norm();
        require(c > 0.0, "interpolator collapsed to zero");
        res.v /= c;
        res.w *= c;

        res.iterations = it;
        res.J = J;
        if (it > 1 && std::abs(prev - J) <= opt.tol * std::max(std::abs(J), 1e-12)) {
            res.converged = true;
            break;
        }
        prev = J;
    }
    const ReducedStats rs = receiver_statistics(st, res.v, d);
    res.J_receiver = mmse_cost(st.sigma_b2, rs.R, rs.p);
    const ReducedStats is = interpolator_statistics(st, res.w, d, N_I);
    res.J_interp = mmse_cost(st.sigma_b2, is.R, is.p);
    return res;
}

inline MmseResult alternate_mmse(const std::vector<CVec>& r, const std::vector<double>& b, const Decimation& d,
                                 int N_I, const AlternatingOptions& opt = {}) {
    return alternate_mmse(sample_statistics(r, b), d, N_I, opt);
}

}  // namespace ifir
