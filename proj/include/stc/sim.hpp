#pragma once

// Monte Carlo simulation of the slow-fading MIMO channel Y = sqrt(ρ)·H·X + N with exhaustive
// ML decoding, for single users and for K users decoded jointly.

#include "stc/lattice.hpp"
#include "stc/rng.hpp"

#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace stc {

struct ChannelConfig {
    int n_t = 2;
    int n_r = 2;
    int T = 2;
    std::vector<double> snr_grid_db;
    double r = 0.0;
    /// Trials per grid point; with target_errors > 0 this is the minimum.
    std::uint64_t trials_per_snr = 0;
    std::uint64_t master_seed = 0;
    /// Use sqrt(ρ) instead of sqrt(ρ/n_t).
    bool drop_nt_normalization = true;
    unsigned workers = 1;
    /// Keep adding trials until this many errors (0 disables).
    std::uint64_t target_errors = 0;
    /// Upper limit on trials per grid point when target_errors > 0 (0 means trials_per_snr).
    std::uint64_t max_trials_per_snr = 0;
    std::size_t code_size_cap = kDefaultCodeSizeCap;
};

/// Throws PreconditionError describing the first invalid field.
void validate(const ChannelConfig& config);

/// Trials per work unit; stopping decisions are taken only at chunk boundaries.
inline constexpr std::uint64_t kTrialChunk = 4096;

struct ErrorRateEntry {
    double rho_db = 0.0;
    std::size_t code_size = 0;
    std::uint64_t errors = 0;
    std::uint64_t trials = 0;
    double p_e = 0.0;
    /// A one-codeword code: nothing to decode, no trials run.
    bool degenerate = false;
};

struct ErrorRateCurve {
    std::vector<ErrorRateEntry> entries;
};

struct SlopeEstimate {
    double slope = 0.0; ///< fitted slope of log p_e against log ρ
    double d_hat = 0.0; ///< -slope
    double lo_db = 0.0;
    double hi_db = 0.0;
    double stderr_ = 0.0;
};

/// How a finite code is carved out of a lattice at a given SNR and multiplexing gain.
struct CodeScheme {
    enum class Kind { alamouti_box, spherical };
    Kind kind = Kind::alamouti_box;
    std::optional<MatrixLattice> lattice; ///< spherical only
    double base_radius = 1.0;
    std::string label;

    static CodeScheme alamouti_box();
    static CodeScheme spherical(MatrixLattice lattice, double base_radius, std::string label);

    /// Finite code at SNR ρ for rate r·log ρ over T channel uses.
    FiniteCode build(double rho, double r, int T, std::size_t cap) const;
};

/// n_r×n_t matrix of unit-variance circular complex Gaussians, filled column by column.
template <typename Stream>
ComplexMatrix sample_channel(int n_r, int n_t, Stream& stream) {
    ComplexMatrix h(n_r, n_t);
    for (int j = 0; j < n_t; ++j)
        for (int i = 0; i < n_r; ++i) h(i, j) = stream.complex_normal();
    return h;
}

/// Y = gain·H·X + N with N drawn from the stream; gain = sqrt(ρ) or sqrt(ρ/n_t).
template <typename Stream>
ComplexMatrix transmit(const ComplexMatrix& x, const ComplexMatrix& h, double rho, Stream& stream,
                       bool drop_nt_normalization = true) {
    if (h.cols() != x.rows()) throw PreconditionError("transmit: H has " + std::to_string(h.cols()) +
                                                      " columns but X has " + std::to_string(x.rows()) + " rows");
    const double gain = std::sqrt(drop_nt_normalization ? rho : rho / double(h.cols()));
    ComplexMatrix y = gain * (h * x);
    for (Eigen::Index j = 0; j < y.cols(); ++j)
        for (Eigen::Index i = 0; i < y.rows(); ++i) y(i, j) += stream.complex_normal();
    return y;
}

/// argmin_j ||Y - sqrt(ρ)·H·X_j||_F, smallest index on ties.
std::size_t ml_decode(const FiniteCode& code, const ComplexMatrix& h, const ComplexMatrix& y, double rho);

/// Error-rate curve of a scheme over the SNR grid; bitwise reproducible for any worker count.
ErrorRateCurve estimate_error_rate(const CodeScheme& scheme, const ChannelConfig& config);

/// Probability that X' beats X at the decoder when X is sent, over config's grid and stopping rule.
ErrorRateCurve estimate_pairwise_error(const ComplexMatrix& x, const ComplexMatrix& xp, const ChannelConfig& config);
ErrorRateCurve estimate_pairwise_error(const ComplexMatrix& x, const ComplexMatrix& xp, int n_r,
                                       const std::vector<double>& rho_grid_db, std::uint64_t trials,
                                       std::uint64_t master_seed);

/// Vertical stacks of the users' codewords; index = mixed radix with user 1 most significant.
FiniteCode stack_codes(const std::vector<FiniteCode>& codes, std::size_t cap = kDefaultCodeSizeCap);

struct MacResult {
    ErrorRateCurve joint;
    std::vector<ErrorRateCurve> per_user;
};

/// K users with independent codewords and channels, decoded jointly. Each user's code is
/// built at rate r/K. Requires n_r ≥ K; config.n_t is the per-user antenna count.
MacResult mac_simulate(const std::vector<CodeScheme>& schemes, const ChannelConfig& config);

/// OLS of log10 p_e on log10 ρ over grid points with lo_db ≤ ρ_dB ≤ hi_db; every such point
/// needs at least `min_errors` errors and there must be at least 3 of them.
SlopeEstimate dmt_slope(const ErrorRateCurve& curve, double lo_db, double hi_db, std::uint64_t min_errors = 20);

/// Widest window starting at the first grid point whose points all meet the error floor.
std::optional<std::pair<double, double>> auto_window(const ErrorRateCurve& curve, std::uint64_t min_errors = 20);

namespace detail {

/// Runs `work(c)` for chunks c in [first, first + count) on up to `workers` threads.
template <typename Work>
void run_chunks(std::uint64_t first, std::uint64_t count, unsigned workers, Work& work) {
    const unsigned threads = unsigned(std::min<std::uint64_t>(std::max(1u, workers), count));
    if (threads <= 1) {
        for (std::uint64_t c = first; c < first + count; ++c) work(c);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_lock;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::uint64_t c = first + t; c < first + count; c += threads) work(c);
            } catch (...) {
                std::lock_guard lock(failure_lock);
                if (!failure) failure = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace detail

} // namespace stc
