#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "ifir/types.hpp"

namespace ifir {

// ---------------------------------------------------------------- codes

struct SpreadingSet {
    int N = 0;
    std::vector<CVec> codes;  // each length N, entries +-1/sqrt(N)
};

namespace detail {

// Fibonacci LFSR: a[t+n] = sum_{j in taps} a[t+j] mod 2, seeded with 0..01
inline std::vector<int> m_sequence(int n, const std::vector<int>& taps) {
    const int len = (1 << n) - 1;
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    a.back() = 1;
    while (static_cast<int>(a.size()) < len) {
        const std::size_t t = a.size() - static_cast<std::size_t>(n);
        int s = 0;
        for (int j : taps) s ^= a[t + static_cast<std::size_t>(j)];
        a.push_back(s);
    }
    return a;
}

// preferred pairs; the exponent list omits x^n
inline std::array<std::vector<int>, 2> gold_taps(int degree) {
    if (degree == 5) return {std::vector<int>{0, 2}, std::vector<int>{0, 2, 3, 4}};
    if (degree == 6) return {std::vector<int>{0, 1}, std::vector<int>{0, 1, 2, 5}};
    throw Error("gold_sequences: degree must be 5 or 6");
}

}  // namespace detail

// full family as 0/1 sequences: u, v, then u xor shift_k(v) for k = 0..N-1
inline std::vector<std::vector<int>> gold_family_bits(int degree) {
    const auto taps = detail::gold_taps(degree);
    const auto u = detail::m_sequence(degree, taps[0]);
    const auto v = detail::m_sequence(degree, taps[1]);
    const std::size_t N = u.size();
    std::vector<std::vector<int>> fam{u, v};
    for (std::size_t k = 0; k < N; ++k) {
        std::vector<int> s(N);
        for (std::size_t t = 0; t < N; ++t) s[t] = u[t] ^ v[(t + k) % N];
        fam.push_back(std::move(s));
    }
    return fam;
}

inline SpreadingSet spreading_from_chips(const std::vector<std::vector<double>>& chips) {
    require(!chips.empty(), "spreading set must not be empty");
    SpreadingSet set;
    set.N = static_cast<int>(chips.front().size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(set.N));
    for (const auto& c : chips) {
        require(static_cast<int>(c.size()) == set.N, "all codes must share the same length");
        CVec s(set.N);
        for (int t = 0; t < set.N; ++t) s[t] = c[static_cast<std::size_t>(t)] * scale;
        set.codes.push_back(std::move(s));
    }
    return set;
}

inline SpreadingSet gold_sequences(int degree, int count) {
    const auto fam = gold_family_bits(degree);
    require(count >= 1 && count <= static_cast<int>(fam.size()),
            "gold_sequences: count exceeds family size N+2");
    std::vector<std::vector<double>> chips;
    for (int k = 0; k < count; ++k) {
        std::vector<double> c;
        for (int b : fam[static_cast<std::size_t>(k)]) c.push_back(b ? -1.0 : 1.0);
        chips.push_back(std::move(c));
    }
    return spreading_from_chips(chips);
}

// ---------------------------------------------------------------- geometry

inline int isi_span(int N, int Lp) {
    require(N >= 1 && Lp >= 1, "N and L_p must be positive");
    require(Lp <= 2 * N, "L_p > 2N is outside the model");
    if (Lp == 1) return 1;
    return Lp <= N ? 2 : 3;
}

inline int observation_length(int N, int Lp) { return N + Lp - 1; }

// S_k: ((2Ls-1)N) x (2Ls-1), code on the block diagonal
inline CMat spreading_block(const CVec& code, int Ls) {
    const Eigen::Index N = code.size();
    const int B = 2 * Ls - 1;
    CMat S = CMat::Zero(B * N, B);
    for (int q = 0; q < B; ++q) S.block(q * N, q, N, 1) = code;
    return S;
}

// H: M x ((2Ls-1)N). Block q of the chip vector carries symbol i+(Ls-1-q),
// i.e. the first block is the latest symbol. Column for chip t of block q
// sits at time t + (Ls-1-q)N relative to the start of symbol i.
inline CMat channel_matrix(const CVec& gains, int N, int Ls) {
    const int Lp = static_cast<int>(gains.size());
    const int M = observation_length(N, Lp);
    const int B = 2 * Ls - 1;
    CMat H = CMat::Zero(M, B * N);
    for (int q = 0; q < B; ++q) {
        for (int t = 0; t < N; ++t) {
            const int tau = t + (Ls - 1 - q) * N;
            for (int l = 0; l < Lp; ++l) {
                const int m = tau + l;
                if (m >= 0 && m < M) H(m, q * N + t) += gains[l];
            }
        }
    }
    return H;
}

// ---------------------------------------------------------------- fading

// Complex Gaussian process with the classical Doppler spectrum, produced by
// overlap-save filtering of white noise. Unit average power.
class DopplerProcess {
public:
    DopplerProcess() = default;

    DopplerProcess(double fdT, Rng& rng) : fdT_(fdT) {
        require(fdT > 0.0 && fdT < 0.5, "normalised Doppler must lie in (0, 0.5)");
        std::size_t n = 256;
        while (static_cast<double>(n) * fdT < 32.0 && n < (1u << 17)) n <<= 1;
        taps_ = n;

        const double edge = 1.0 - 0.5 / (static_cast<double>(n) * fdT);
        const double cap = 1.0 / std::sqrt(std::max(1.0 - edge * edge, 1e-12));
        std::vector<cplx> amp(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double f = (k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n)) /
                             static_cast<double>(n);
            const double x = std::abs(f) / fdT;
            double s = 0.0;
            if (x < 1.0) s = std::min(1.0 / std::sqrt(1.0 - x * x), cap);
            amp[k] = std::sqrt(s);
        }
        std::vector<cplx> h;
        fft_.inv(h, amp);
        std::rotate(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(n / 2), h.end());
        double energy = 0.0;
        for (const auto& c : h) energy += std::norm(c);
        for (auto& c : h) c /= std::sqrt(energy);

        std::vector<cplx> hp(2 * n, cplx{});
        std::copy(h.begin(), h.end(), hp.begin());
        fft_.fwd(response_, hp);

        history_.resize(n);
        for (auto& c : history_) c = complex_gaussian(rng);
        pos_ = n;  // forces a block on first draw
    }

    cplx next(Rng& rng) {
        if (pos_ >= taps_) refill(rng);
        return out_[pos_++];
    }

    double normalized_doppler() const { return fdT_; }

private:
    void refill(Rng& rng) {
        const std::size_t n = taps_;
        std::vector<cplx> in(2 * n);
        std::copy(history_.begin(), history_.end(), in.begin());
        for (std::size_t k = 0; k < n; ++k) {
            in[n + k] = complex_gaussian(rng);
            history_[k] = in[n + k];
        }
        std::vector<cplx> spec;
        fft_.fwd(spec, in);
        for (std::size_t k = 0; k < 2 * n; ++k) spec[k] *= response_[k];
        std::vector<cplx> y;
        fft_.inv(y, spec);
        out_.assign(y.begin() + static_cast<std::ptrdiff_t>(n), y.end());
        pos_ = 0;
    }

    double fdT_ = 0.0;
    std::size_t taps_ = 0;
    std::size_t pos_ = 0;
    Eigen::FFT<double> fft_;
    std::vector<cplx> response_;
    std::vector<cplx> history_;
    std::vector<cplx> out_;
};

struct ChannelRealization {
    RVec powers;  // p_l, sum p_l^2 = 1
    CVec gains;   // current h_l
    double fdT = 0.0;
    std::vector<DopplerProcess> paths;

    int length() const { return static_cast<int>(powers.size()); }
};

inline ChannelRealization make_channel(const RVec& path_amplitudes, double fdT, Rng& rng) {
    require(path_amplitudes.size() >= 1, "channel needs at least one path");
    require(fdT >= 0.0, "normalised Doppler must be non-negative");
    const double e = path_amplitudes.squaredNorm();
    require(e > 0.0, "channel profile has zero power");
    ChannelRealization ch;
    ch.powers = path_amplitudes / std::sqrt(e);
    ch.fdT = fdT;
    ch.gains = ch.powers.cast<cplx>();
    if (fdT > 0.0) {
        for (Eigen::Index l = 0; l < ch.powers.size(); ++l) ch.paths.emplace_back(fdT, rng);
        for (Eigen::Index l = 0; l < ch.powers.size(); ++l)
            ch.gains[l] = ch.powers[l] * ch.paths[static_cast<std::size_t>(l)].next(rng);
    }
    return ch;
}

inline void fading_step(ChannelRealization& ch, Rng& rng) {
    if (ch.fdT <= 0.0) return;
    for (Eigen::Index l = 0; l < ch.powers.size(); ++l)
        ch.gains[l] = ch.powers[l] * ch.paths[static_cast<std::size_t>(l)].next(rng);
}

// amplitudes at path delays, zero elsewhere; delays in chips
inline RVec profile_from_paths(const std::vector<int>& delays, const std::vector<double>& gains_db, int Lp) {
    require(delays.size() == gains_db.size(), "delays and gains must pair up");
    RVec p = RVec::Zero(Lp);
    for (std::size_t j = 0; j < delays.size(); ++j) {
        require(delays[j] >= 0 && delays[j] < Lp, "path delay outside channel length");
        p[delays[j]] += std::pow(10.0, gains_db[j] / 20.0);
    }
    return p;
}

// three paths at 0/-6/-10 dB; second delay in 1..4, third 1..(5-tau2) chips after it
inline RVec random_three_path_profile(Rng& rng, int Lp = 6) {
    require(Lp >= 6, "random three-path profile needs L_p >= 6");
    const int t2 = std::uniform_int_distribution<int>(1, 4)(rng);
    const int t3 = t2 + std::uniform_int_distribution<int>(1, 5 - t2)(rng);
    return profile_from_paths({0, t2, t3}, {0.0, -6.0, -10.0}, Lp);
}

// ---------------------------------------------------------------- powers

inline double noise_variance_from_ebn0(double ebn0_db) { return std::pow(10.0, -ebn0_db / 10.0); }

// A_1 = 1; interferers offset_db above the desired user, optionally log-normal
inline RVec user_amplitudes(int K, double offset_db, double lognormal_sigma_db, Rng& rng) {
    require(K >= 1, "need at least one user");
    RVec A(K);
    A[0] = 1.0;
    std::normal_distribution<double> g(0.0, 1.0);
    for (int k = 1; k < K; ++k) {
        double db = offset_db;
        if (lognormal_sigma_db > 0.0) db += lognormal_sigma_db * g(rng);
        A[k] = std::pow(10.0, db / 20.0);
    }
    return A;
}

// ---------------------------------------------------------------- synthesis

struct ReceivedVector {
    CVec samples;       // r(i), length M
    CVec desired;       // A_1 b_1(i) times the desired effective signature
    double symbol = 0;  // b_1(i)
    double noise_variance = 0.0;
};

// symbols: (2Ls-1) x K, column k ordered [b(i+Ls-1) ... b(i) ... b(i-Ls+1)]
inline ReceivedVector synthesize(const SpreadingSet& set, const CVec& gains, const RVec& amplitudes,
                                 const RMat& symbols, double sigma2, Rng& rng) {
    const int K = static_cast<int>(set.codes.size());
    const int Lp = static_cast<int>(gains.size());
    const int Ls = isi_span(set.N, Lp);
    require(amplitudes.size() == K && symbols.cols() == K, "amplitude/symbol count must match users");
    require(symbols.rows() == 2 * Ls - 1, "symbol frame must hold 2*Ls-1 symbols");
    require(sigma2 >= 0.0, "noise variance must be non-negative");

    const CMat H = channel_matrix(gains, set.N, Ls);
    CVec chips = CVec::Zero(H.cols());
    for (int k = 0; k < K; ++k)
        chips += amplitudes[k] * (spreading_block(set.codes[static_cast<std::size_t>(k)], Ls) *
                                  symbols.col(k).cast<cplx>());

    ReceivedVector out;
    out.samples = H * chips;
    const CVec centre = H.middleCols((Ls - 1) * set.N, set.N) * set.codes[0];
    out.symbol = symbols(Ls - 1, 0);
    out.desired = amplitudes[0] * out.symbol * centre;
    out.noise_variance = sigma2;
    if (sigma2 > 0.0) out.samples += complex_gaussian_vector(rng, out.samples.size(), sigma2);
    return out;
}

// desired user's signature for its current symbol: code convolved with the channel
inline CVec effective_signature(const CVec& code, const CVec& gains) {
    const int N = static_cast<int>(code.size());
    const int Lp = static_cast<int>(gains.size());
    CVec s = CVec::Zero(observation_length(N, Lp));
    for (int t = 0; t < N; ++t)
        for (int l = 0; l < Lp; ++l) s[t + l] += code[t] * gains[l];
    return s;
}

// ensemble statistics for user 0 with i.i.d. BPSK symbols
struct SecondOrderStats {
    CMat R;
    CVec p;
    double sigma_b2 = 1.0;
};

inline SecondOrderStats exact_statistics(const SpreadingSet& set, const CVec& gains, const RVec& amplitudes,
                                         double sigma2) {
    const int Lp = static_cast<int>(gains.size());
    const int Ls = isi_span(set.N, Lp);
    const CMat H = channel_matrix(gains, set.N, Ls);
    SecondOrderStats st;
    st.R = sigma2 * CMat::Identity(H.rows(), H.rows());
    for (std::size_t k = 0; k < set.codes.size(); ++k) {
        const CMat G = H * spreading_block(set.codes[k], Ls);
        st.R += amplitudes[static_cast<Eigen::Index>(k)] * amplitudes[static_cast<Eigen::Index>(k)] * G * G.adjoint();
    }
    st.p = amplitudes[0] * (H.middleCols((Ls - 1) * set.N, set.N) * set.codes[0]);
    st.sigma_b2 = 1.0;
    return st;
}

// Stateful downlink: keeps per-user symbol histories so ISI is consistent
// across consecutive observation windows.
class DownlinkSimulator {
public:
    DownlinkSimulator(SpreadingSet set, RVec amplitudes, ChannelRealization channel, double sigma2, Rng& rng)
        : set_(std::move(set)), amplitudes_(std::move(amplitudes)), channel_(std::move(channel)), sigma2_(sigma2) {
        require(amplitudes_.size() == static_cast<Eigen::Index>(set_.codes.size()),
                "one amplitude per user required");
        Ls_ = isi_span(set_.N, channel_.length());
        frame_.resize(2 * Ls_ - 1, static_cast<Eigen::Index>(set_.codes.size()));
        for (Eigen::Index k = 0; k < frame_.cols(); ++k)
            for (Eigen::Index q = 0; q < frame_.rows(); ++q) frame_(q, k) = random_bpsk(rng);
        primed_ = false;
    }

    ReceivedVector step(Rng& rng) {
        if (primed_) {
            fading_step(channel_, rng);
            for (Eigen::Index k = 0; k < frame_.cols(); ++k) {
                for (Eigen::Index q = frame_.rows() - 1; q > 0; --q) frame_(q, k) = frame_(q - 1, k);
                frame_(0, k) = random_bpsk(rng);
            }
        }
        primed_ = true;
        return synthesize(set_, channel_.gains, amplitudes_, frame_, sigma2_, rng);
    }

    SecondOrderStats statistics() const { return exact_statistics(set_, channel_.gains, amplitudes_, sigma2_); }

    const SpreadingSet& spreading() const { return set_; }
    const ChannelRealization& channel() const { return channel_; }
    const RVec& amplitudes() const { return amplitudes_; }
    double noise_variance() const { return sigma2_; }
    int M() const { return observation_length(set_.N, channel_.length()); }
    int isi() const { return Ls_; }

private:
    SpreadingSet set_;
    RVec amplitudes_;
    ChannelRealization channel_;
    double sigma2_;
    int Ls_ = 1;
    RMat frame_;
    bool primed_ = false;
};

}  // namespace ifir
