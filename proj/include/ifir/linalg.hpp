#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "ifir/types.hpp"

namespace ifir {

inline CMat hermitian_part(const CMat& A) { return (A + A.adjoint()) / 2.0; }

// orthonormal basis of the range of an orthogonal projector (I itself when P = I)
inline CMat projector_range(const CMat& P) {
    const Eigen::Index n = P.rows();
    if ((P - CMat::Identity(n, n)).norm() == 0.0) return CMat::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(P));
    Eigen::Index k = 0;
    while (k < n && es.eigenvalues()[k] <= 0.5) ++k;  // ascending: zeros first
    require(k < n, "projection has empty range");
    return es.eigenvectors().rightCols(n - k);
}

// ridge used when a covariance is singular or numerically so
inline double ridge_for(const CMat& R) {
    const double tr = R.trace().real();
    return 1e-8 * tr / static_cast<double>(R.rows());
}

inline constexpr double kRcondFloor = 1e-13;

// Cholesky of a Hermitian PSD matrix, falling back to R + ridge*I
class HermitianSolver {
public:
    explicit HermitianSolver(const CMat& R) {
        require(R.rows() == R.cols() && R.rows() > 0, "covariance must be square and non-empty");
        llt_.compute(R);
        if (llt_.info() == Eigen::Success && llt_.rcond() > kRcondFloor) return;
        const double d = ridge_for(R);
        require(std::isfinite(d) && d > 0.0, "covariance is singular (zero trace)");
        CMat Rr = R;
        Rr.diagonal().array() += d;
        llt_.compute(Rr);
        require(llt_.info() == Eigen::Success, "covariance is singular even after ridge");
        regularized_ = true;
    }

    template <typename Rhs>
    auto solve(const Rhs& b) const {
        return llt_.solve(b);
    }

    CMat inverse() const {
        const auto n = llt_.matrixLLT().rows();
        return llt_.solve(CMat::Identity(n, n));
    }

    bool regularized() const { return regularized_; }

private:
    Eigen::LLT<CMat> llt_;
    bool regularized_ = false;
};

inline CVec solve_hermitian(const CMat& R, const CVec& b) { return HermitianSolver(R).solve(b); }
inline CMat hermitian_inverse(const CMat& R) { return HermitianSolver(R).inverse(); }

// rotate so the largest-magnitude entry is real and positive
inline void fix_phase_largest(CVec& v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    if (std::abs(v[k]) > 0.0) v *= std::conj(v[k]) / std::abs(v[k]);
}

// rotate so entry 0 is real and positive; falls back to the largest entry
inline void fix_phase_first(CVec& v) {
    if (std::abs(v[0]) > 1e-12 * v.norm()) {
        v *= std::conj(v[0]) / std::abs(v[0]);
    } else {
        fix_phase_largest(v);
    }
}

struct EigenPair {
    double value = 0.0;
    CVec vector;
};

inline EigenPair min_eigenpair(const CMat& R) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(R));
    require(es.info() == Eigen::Success, "eigendecomposition failed");
    EigenPair p{es.eigenvalues()[0], es.eigenvectors().col(0)};
    fix_phase_largest(p.vector);
    return p;
}

inline RVec hermitian_eigenvalues(const CMat& R) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(R), Eigen::EigenvaluesOnly);
    require(es.info() == Eigen::Success, "eigendecomposition failed");
    return es.eigenvalues();
}

inline double eigen_spread(const CMat& R) {
    const RVec ev = hermitian_eigenvalues(R);
    const double lo = std::max(ev[0], 1e-300);
    return ev[ev.size() - 1] / lo;
}

// principal angle between span{a} and span{b}
inline double principal_angle(const CVec& a, const CVec& b) {
    const CVec ah = a.normalized();
    const CVec bh = b.normalized();
    const double s = (bh - ah * ah.dot(bh)).norm();
    const double c = std::abs(ah.dot(bh));
    return std::atan2(s, c);
}

inline double relative_error(const CMat& a, const CMat& ref) {
    const double d = ref.norm();
    return (a - ref).norm() / (d > 0.0 ? d : 1.0);
}

}  // namespace ifir
