#pragma once

#include "ifir/cmv_design.hpp"
#include "ifir/types.hpp"

namespace ifir {

// matched filter to the code convolved with the channel estimate: x = (C g)^H r
inline cplx rake_baseline(const CVec& r, const CVec& g_hat, const CVec& code) {
    const CMat C = constraint_matrix(code, static_cast<int>(g_hat.size()));
    require(C.rows() == r.size(), "received vector length does not match code and channel");
    return (C * g_hat).dot(r);
}

// M x D projection; column d carries the code chips of segment d. The code is
// extended cyclically over the M samples so that D = M is an invertible
// diagonal map.
inline CMat pd_baseline(const CVec& code, int M, int D) {
    require(D >= 1 && D <= M, "need 1 <= D_pd <= M");
    const Eigen::Index N = code.size();
    CMat P = CMat::Zero(M, D);
    for (int d = 0; d < D; ++d) {
        const int lo = static_cast<int>(static_cast<long long>(d) * M / D);
        const int hi = static_cast<int>(static_cast<long long>(d + 1) * M / D);
        for (int m = lo; m < hi; ++m) P(m, d) = code[m % N];
    }
    return P;
}

}  // namespace ifir
