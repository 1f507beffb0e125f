#pragma once

#include <cmath>

#include "ifir/types.hpp"

namespace ifir {

struct Decimation {
    int M = 0;
    int L = 1;
    int M_red = 0;
};

// row m of D selects sample m*L
inline Decimation make_decimation(int M, int L) {
    require(M >= 1, "observation length must be positive");
    require(L >= 1, "decimation factor must be >= 1");
    require(L <= M, "decimation factor exceeds observation length");
    int m = static_cast<int>(std::lround(static_cast<double>(M) / L));
    m = std::max(m, 1);
    while ((m - 1) * L >= M) --m;
    return {M, L, m};
}

inline CMat decimation_matrix(const Decimation& d) {
    CMat D = CMat::Zero(d.M_red, d.M);
    for (int m = 0; m < d.M_red; ++m) D(m, m * d.L) = 1.0;
    return D;
}

// N_I x M_red; column s holds r[sL .. sL+N_I-1], zero past the end
inline CMat observation_matrix(const CVec& r, const Decimation& d, int N_I) {
    require(r.size() == d.M, "received vector length does not match decimation");
    require(N_I >= 1, "interpolator length must be >= 1");
    CMat Rm = CMat::Zero(N_I, d.M_red);
    for (int s = 0; s < d.M_red; ++s)
        for (int n = 0; n < N_I; ++n) {
            const int idx = s * d.L + n;
            if (idx < d.M) Rm(n, s) = r[idx];
        }
    return Rm;
}

// rbar = Re^T v*  (interpolate, then decimate)
inline CVec interpolate_then_decimate(const CVec& v, const CMat& Re) {
    require(v.size() == Re.rows(), "interpolator length mismatch");
    return Re.transpose() * v.conjugate();
}

inline CVec interpolate_then_decimate(const CVec& v, const CVec& r, const Decimation& d) {
    return interpolate_then_decimate(v, observation_matrix(r, d, static_cast<int>(v.size())));
}

// u = Re w*  (regressor seen by the interpolator)
inline CVec interpolator_regressor(const CVec& w, const CMat& Re) {
    require(w.size() == Re.cols(), "receiver length mismatch");
    return Re * w.conjugate();
}

// x = v^H Re w*
inline cplx receiver_output(const CVec& v, const CVec& w, const CMat& Re) {
    return v.dot(interpolator_regressor(w, Re));
}

inline cplx receiver_output(const CVec& v, const CVec& w, const CVec& r, const Decimation& d) {
    return receiver_output(v, w, observation_matrix(r, d, static_cast<int>(v.size())));
}

inline double detect(cplx x) { return x.real() >= 0.0 ? 1.0 : -1.0; }

// T_v (M_red x M) with rbar = T_v r
inline CMat interpolation_operator(const CVec& v, const Decimation& d) {
    CMat T = CMat::Zero(d.M_red, d.M);
    for (int s = 0; s < d.M_red; ++s)
        for (Eigen::Index n = 0; n < v.size(); ++n) {
            const Eigen::Index idx = s * d.L + n;
            if (idx < d.M) T(s, idx) += std::conj(v[n]);
        }
    return T;
}

// U_w (N_I x M) with u = U_w r
inline CMat regressor_operator(const CVec& w, const Decimation& d, int N_I) {
    CMat U = CMat::Zero(N_I, d.M);
    for (int s = 0; s < d.M_red; ++s)
        for (int n = 0; n < N_I; ++n) {
            const int idx = s * d.L + n;
            if (idx < d.M) U(n, idx) += std::conj(w[s]);
        }
    return U;
}

// f such that x = f^H r
inline CVec effective_filter(const CVec& v, const CVec& w, const Decimation& d) {
    return interpolation_operator(v, d).adjoint() * w;
}

inline CVec impulse(int n) {
    CVec e = CVec::Zero(n);
    e[0] = 1.0;
    return e;
}

}  // namespace ifir
