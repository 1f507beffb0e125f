#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ifir {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw Error(msg);
}

// unit-variance circular complex Gaussian scaled to E|z|^2 = var
inline cplx complex_gaussian(Rng& rng, double var = 1.0) {
    std::normal_distribution<double> n(0.0, std::sqrt(var / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline CVec complex_gaussian_vector(Rng& rng, Eigen::Index n, double var = 1.0) {
    CVec z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = complex_gaussian(rng, var);
    return z;
}

inline double random_bpsk(Rng& rng) {
    return std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
}

// splitmix64 finaliser, used to derive per-run seeds
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace ifir
