#include "stc/sim.hpp"

#include <limits>
#include <sstream>

namespace stc {

namespace {

double channel_gain(const ChannelConfig& cfg, double rho) {
    return std::sqrt(cfg.drop_nt_normalization ? rho : rho / double(cfg.n_t));
}

/// Codewords side by side, so one product H·C gives every H·X_j.
ComplexMatrix concatenate(const FiniteCode& code) {
    const Eigen::Index rows = code.rows(), cols = code.cols();
    ComplexMatrix c(rows, cols * Eigen::Index(code.size()));
    for (std::size_t j = 0; j < code.size(); ++j) c.middleCols(Eigen::Index(j) * cols, cols) = code.codewords[j];
    return c;
}

/// Exhaustive ML decoder for one user: ||Y - g·H·X_j||² from a single product H·C.
class Decoder {
public:
    Decoder(const FiniteCode& code, int n_r)
        : size_(code.size()), cols_(code.cols()), all_(concatenate(code)), images_(n_r, all_.cols()) {}

    void prepare(const ComplexMatrix& h) { images_.noalias() = h * all_; }
    const ComplexMatrix& images() const { return images_; }

    std::size_t decode(const ComplexMatrix& y, double gain) const {
        std::size_t best = 0;
        double best_metric = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < size_; ++j) {
            const double m = (y - gain * images_.middleCols(Eigen::Index(j) * cols_, cols_)).squaredNorm();
            if (m < best_metric) {
                best_metric = m;
                best = j;
            }
        }
        return best;
    }

private:
    std::size_t size_;
    Eigen::Index cols_;
    ComplexMatrix all_;
    ComplexMatrix images_;
};

/// Counters per grid point: index 0 is the block (or joint) error, then per-user errors.
struct PointTally {
    std::uint64_t trials = 0;
    std::vector<std::uint64_t> errors;
};

/// Runs trials for one grid point under the chunked stopping rule. `kernel_factory()` returns a
/// callable `bool trial(TrialStream&, std::uint64_t* user_errors)`-style object per chunk.
template <typename Factory>
PointTally run_point(const ChannelConfig& cfg, std::uint32_t stream_id, std::size_t counters, Factory&& factory) {
    const std::uint64_t min_trials = cfg.trials_per_snr;
    const std::uint64_t cap =
        cfg.target_errors > 0 ? std::max(min_trials, cfg.max_trials_per_snr ? cfg.max_trials_per_snr : min_trials)
                              : min_trials;
    const std::uint64_t total_chunks = (cap + kTrialChunk - 1) / kTrialChunk;
    const std::uint64_t min_chunks = (min_trials + kTrialChunk - 1) / kTrialChunk;

    PointTally tally;
    tally.errors.assign(counters, 0);
    std::uint64_t next = 0;
    while (next < total_chunks) {
        std::uint64_t batch = total_chunks - next;
        if (cfg.target_errors > 0) batch = std::min(batch, std::max<std::uint64_t>({cfg.workers, min_chunks - std::min(min_chunks, next), 1}));
        std::vector<PointTally> results(batch);
        auto work = [&](std::uint64_t c) {
            auto kernel = factory();
            PointTally& out = results[c - next];
            out.errors.assign(counters, 0);
            const std::uint64_t lo = c * kTrialChunk, hi = std::min(cap, lo + kTrialChunk);
            for (std::uint64_t t = lo; t < hi; ++t) {
                TrialStream stream(cfg.master_seed, stream_id, t);
                kernel(stream, out.errors.data());
            }
            out.trials = hi - lo;
        };
        detail::run_chunks(next, batch, cfg.workers, work);
        for (const auto& r : results) {
            tally.trials += r.trials;
            for (std::size_t k = 0; k < counters; ++k) tally.errors[k] += r.errors[k];
            ++next;
            if (tally.trials >= min_trials && tally.errors[0] >= cfg.target_errors) return tally;
        }
    }
    return tally;
}

ErrorRateEntry make_entry(double rho_db, std::size_t code_size, std::uint64_t errors, std::uint64_t trials) {
    ErrorRateEntry e;
    e.rho_db = rho_db;
    e.code_size = code_size;
    e.errors = errors;
    e.trials = trials;
    e.p_e = trials ? double(errors) / double(trials) : 0.0;
    return e;
}

ErrorRateEntry degenerate_entry(double rho_db) {
    ErrorRateEntry e = make_entry(rho_db, 1, 0, 0);
    e.degenerate = true;
    return e;
}

/// Per trial: codeword index, then H, then N.
class SingleUserKernel {
public:
    SingleUserKernel(const FiniteCode& code, int n_r, double gain)
        : code_(code), decoder_(code, n_r), gain_(gain), h_(n_r, code.rows()), y_(n_r, code.cols()) {}

    void operator()(TrialStream& s, std::uint64_t* errors) {
        const std::size_t sent = s.index(code_.size());
        for (Eigen::Index j = 0; j < h_.cols(); ++j)
            for (Eigen::Index i = 0; i < h_.rows(); ++i) h_(i, j) = s.complex_normal();
        y_.noalias() = gain_ * (h_ * code_.codewords[sent]);
        for (Eigen::Index j = 0; j < y_.cols(); ++j)
            for (Eigen::Index i = 0; i < y_.rows(); ++i) y_(i, j) += s.complex_normal();
        decoder_.prepare(h_);
        if (decoder_.decode(y_, gain_) != sent) ++errors[0];
    }

private:
    const FiniteCode& code_;
    Decoder decoder_;
    double gain_;
    ComplexMatrix h_, y_;
};

/// Joint ML over K ≥ 2 users. For every prefix (i_1..i_{K-1}) with residual Z = Y - g·Σ H_k X_{i_k},
/// ||Z - g·H_K X_j||² = ||Z||² + g²||H_K X_j||² - 2g·Re⟨Z, H_K X_j⟩, and the cross terms of all
/// (prefix, j) pairs come from one real matrix product.
class MacKernel {
public:
    MacKernel(const std::vector<FiniteCode>& codes, int n_r, double gain)
        : codes_(codes), gain_(gain), n_r_(n_r), rows_(codes.front().rows()), cols_(codes.front().cols()) {
        for (const auto& c : codes) decoders_.emplace_back(c, n_r);
        prefixes_ = 1;
        for (std::size_t k = 0; k + 1 < codes.size(); ++k) prefixes_ *= codes[k].size();
        len_ = 2 * Eigen::Index(n_r) * cols_;
        z_.resize(Eigen::Index(prefixes_), len_);
        last_.resize(Eigen::Index(codes.back().size()), len_);
        h_.assign(codes.size(), ComplexMatrix(n_r, rows_));
        y_.resize(n_r, cols_);
        sent_.resize(codes.size());
        decoded_.resize(codes.size());
    }

    void operator()(TrialStream& s, std::uint64_t* errors) {
        const std::size_t k_users = codes_.size();
        y_.setZero();
        for (std::size_t k = 0; k < k_users; ++k) {
            sent_[k] = s.index(codes_[k].size());
            ComplexMatrix& h = h_[k];
            for (Eigen::Index j = 0; j < h.cols(); ++j)
                for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, j) = s.complex_normal();
            y_.noalias() += gain_ * (h * codes_[k].codewords[sent_[k]]);
        }
        for (Eigen::Index j = 0; j < y_.cols(); ++j)
            for (Eigen::Index i = 0; i < y_.rows(); ++i) y_(i, j) += s.complex_normal();
        for (std::size_t k = 0; k < k_users; ++k) decoders_[k].prepare(h_[k]);

        decode();
        bool any = false;
        for (std::size_t k = 0; k < k_users; ++k) {
            const bool wrong = decoded_[k] != sent_[k];
            any = any || wrong;
            if (wrong) ++errors[1 + k];
        }
        if (any) ++errors[0];
    }

private:
    // Column-major realification of an n_r×T block into a row of `dst`.
    void realify(const ComplexMatrix& images, std::size_t j, double g, RealMatrix& dst, Eigen::Index row) const {
        Eigen::Index p = 0;
        for (Eigen::Index c = 0; c < cols_; ++c)
            for (Eigen::Index i = 0; i < n_r_; ++i) {
                const std::complex<double> v = g * images(i, Eigen::Index(j) * cols_ + c);
                dst(row, p++) = v.real();
                dst(row, p++) = v.imag();
            }
    }

    void decode() {
        const std::size_t k_users = codes_.size();
        const std::size_t m_last = codes_.back().size();
        for (std::size_t j = 0; j < m_last; ++j) realify(decoders_.back().images(), j, gain_, last_, Eigen::Index(j));
        const Eigen::VectorXd last_norm = last_.rowwise().squaredNorm();

        // Residuals of every prefix, user 1 most significant.
        std::vector<std::size_t> digit(k_users - 1, 0);
        ComplexMatrix residual(n_r_, cols_);
        for (std::size_t p = 0; p < prefixes_; ++p) {
            residual = y_;
            for (std::size_t k = 0; k + 1 < k_users; ++k)
                residual -= gain_ * decoders_[k].images().middleCols(Eigen::Index(digit[k]) * cols_, cols_);
            Eigen::Index q = 0;
            for (Eigen::Index c = 0; c < cols_; ++c)
                for (Eigen::Index i = 0; i < n_r_; ++i) {
                    z_(Eigen::Index(p), q++) = residual(i, c).real();
                    z_(Eigen::Index(p), q++) = residual(i, c).imag();
                }
            for (std::size_t k = k_users - 1; k-- > 0;) {
                if (++digit[k] < codes_[k].size()) break;
                digit[k] = 0;
            }
        }
        const Eigen::VectorXd z_norm = z_.rowwise().squaredNorm();
        cross_.noalias() = z_ * last_.transpose();

        double best = std::numeric_limits<double>::infinity();
        std::size_t best_p = 0, best_j = 0;
        for (std::size_t p = 0; p < prefixes_; ++p)
            for (std::size_t j = 0; j < m_last; ++j) {
                const double m = z_norm(Eigen::Index(p)) + last_norm(Eigen::Index(j)) -
                                 2.0 * cross_(Eigen::Index(p), Eigen::Index(j));
                if (m < best) {
                    best = m;
                    best_p = p;
                    best_j = j;
                }
            }
        decoded_.back() = best_j;
        for (std::size_t k = k_users - 1; k-- > 0;) {
            decoded_[k] = best_p % codes_[k].size();
            best_p /= codes_[k].size();
        }
    }

    const std::vector<FiniteCode>& codes_;
    std::vector<Decoder> decoders_;
    double gain_;
    Eigen::Index n_r_, rows_, cols_, len_ = 0;
    std::size_t prefixes_ = 1;
    RealMatrix z_, last_, cross_;
    std::vector<ComplexMatrix> h_;
    ComplexMatrix y_;
    std::vector<std::size_t> sent_, decoded_;
};

/// Pairwise error: X sent, error iff ||Y - g·H·X'||² < ||Y - g·H·X||² = ||N||².
class PairwiseKernel {
public:
    PairwiseKernel(const ComplexMatrix& x, const ComplexMatrix& xp, int n_r, double gain)
        : x_(x), diff_(xp - x), gain_(gain), h_(n_r, x.rows()), noise_(n_r, x.cols()), hd_(n_r, x.cols()) {}

    void operator()(TrialStream& s, std::uint64_t* errors) {
        for (Eigen::Index j = 0; j < h_.cols(); ++j)
            for (Eigen::Index i = 0; i < h_.rows(); ++i) h_(i, j) = s.complex_normal();
        for (Eigen::Index j = 0; j < noise_.cols(); ++j)
            for (Eigen::Index i = 0; i < noise_.rows(); ++i) noise_(i, j) = s.complex_normal();
        hd_.noalias() = gain_ * (h_ * diff_);
        if ((noise_ - hd_).squaredNorm() < noise_.squaredNorm()) ++errors[0];
    }

private:
    ComplexMatrix x_, diff_;
    double gain_;
    ComplexMatrix h_, noise_, hd_;
};

} // namespace

void validate(const ChannelConfig& cfg) {
    auto fail = [](const std::string& m) { throw PreconditionError("invalid channel config: " + m); };
    if (cfg.n_t < 1 || cfg.n_r < 1 || cfg.T < 1) fail("n_t, n_r and T must be positive");
    if (cfg.snr_grid_db.empty()) fail("snr grid is empty");
    for (std::size_t i = 1; i < cfg.snr_grid_db.size(); ++i)
        if (!(cfg.snr_grid_db[i] > cfg.snr_grid_db[i - 1])) fail("snr grid must be strictly increasing");
    for (double db : cfg.snr_grid_db)
        if (!std::isfinite(db)) fail("snr grid values must be finite");
    if (!(cfg.r >= 0) || !std::isfinite(cfg.r)) fail("r must be nonnegative");
    if (cfg.trials_per_snr < 1) fail("trials per SNR point must be at least 1");
    if (cfg.workers < 1) fail("workers must be at least 1");
    if (cfg.target_errors > 0 && cfg.max_trials_per_snr != 0 && cfg.max_trials_per_snr < cfg.trials_per_snr)
        fail("max trials per SNR point is below the minimum");
    if (cfg.snr_grid_db.size() > std::numeric_limits<std::uint32_t>::max()) fail("snr grid too long");
}

CodeScheme CodeScheme::alamouti_box() {
    CodeScheme s;
    s.kind = Kind::alamouti_box;
    s.label = "alamouti-box";
    return s;
}

CodeScheme CodeScheme::spherical(MatrixLattice lattice, double base_radius, std::string label) {
    if (!(base_radius > 0)) throw PreconditionError("spherical scheme: base radius must be positive");
    CodeScheme s;
    s.kind = Kind::spherical;
    s.lattice.emplace(std::move(lattice));
    s.base_radius = base_radius;
    s.label = std::move(label);
    return s;
}

FiniteCode CodeScheme::build(double rho, double r, int T, std::size_t cap) const {
    if (kind == Kind::alamouti_box) {
        if (T != 2) throw PreconditionError("Alamouti codewords span T = 2 channel uses");
        return box_code_alamouti(rho, r, cap);
    }
    return spherical_code(*lattice, rho, r, T, int(lattice->rank()), base_radius, cap);
}

std::size_t ml_decode(const FiniteCode& code, const ComplexMatrix& h, const ComplexMatrix& y, double rho) {
    if (code.size() == 0) throw PreconditionError("ml_decode: empty code");
    if (h.cols() != code.rows() || y.rows() != h.rows() || y.cols() != code.cols())
        throw PreconditionError("ml_decode: shape mismatch between code, H and Y");
    Decoder d(code, int(h.rows()));
    d.prepare(h);
    return d.decode(y, std::sqrt(rho));
}

ErrorRateCurve estimate_error_rate(const CodeScheme& scheme, const ChannelConfig& cfg) {
    validate(cfg);
    ErrorRateCurve curve;
    for (std::size_t s = 0; s < cfg.snr_grid_db.size(); ++s) {
        const double db = cfg.snr_grid_db[s];
        const double rho = db_to_linear(db);
        const FiniteCode code = scheme.build(rho, cfg.r, cfg.T, cfg.code_size_cap);
        if (code.rows() != cfg.n_t || code.cols() != cfg.T)
            throw PreconditionError("code shape does not match n_t × T of the channel config");
        if (code.size() < 2) {
            curve.entries.push_back(degenerate_entry(db));
            continue;
        }
        const double gain = channel_gain(cfg, rho);
        const PointTally t =
            run_point(cfg, std::uint32_t(s), 1, [&] { return SingleUserKernel(code, cfg.n_r, gain); });
        curve.entries.push_back(make_entry(db, code.size(), t.errors[0], t.trials));
    }
    return curve;
}

ErrorRateCurve estimate_pairwise_error(const ComplexMatrix& x, const ComplexMatrix& xp, const ChannelConfig& cfg) {
    validate(cfg);
    if (x.rows() != xp.rows() || x.cols() != xp.cols()) throw PreconditionError("pairwise error: shape mismatch");
    if (x.rows() != cfg.n_t) throw PreconditionError("pairwise error: X must have n_t rows");
    if ((x - xp).norm() == 0.0) throw PreconditionError("pairwise error: X and X' are identical");
    ErrorRateCurve curve;
    for (std::size_t s = 0; s < cfg.snr_grid_db.size(); ++s) {
        const double db = cfg.snr_grid_db[s];
        const double gain = channel_gain(cfg, db_to_linear(db));
        const PointTally t = run_point(cfg, std::uint32_t(s), 1, [&] { return PairwiseKernel(x, xp, cfg.n_r, gain); });
        curve.entries.push_back(make_entry(db, 2, t.errors[0], t.trials));
    }
    return curve;
}

ErrorRateCurve estimate_pairwise_error(const ComplexMatrix& x, const ComplexMatrix& xp, int n_r,
                                       const std::vector<double>& rho_grid_db, std::uint64_t trials,
                                       std::uint64_t master_seed) {
    ChannelConfig cfg;
    cfg.n_t = int(x.rows());
    cfg.T = int(x.cols());
    cfg.n_r = n_r;
    cfg.snr_grid_db = rho_grid_db;
    cfg.trials_per_snr = trials;
    cfg.master_seed = master_seed;
    return estimate_pairwise_error(x, xp, cfg);
}

FiniteCode stack_codes(const std::vector<FiniteCode>& codes, std::size_t cap) {
    if (codes.empty()) throw PreconditionError("stack_codes: no codes");
    double total = 1;
    for (const auto& c : codes) {
        if (c.size() == 0) throw PreconditionError("stack_codes: empty code");
        if (c.rows() != codes.front().rows() || c.cols() != codes.front().cols())
            throw PreconditionError("stack_codes: all codes must share n and T");
        total *= double(c.size());
    }
    if (total > double(cap)) {
        std::ostringstream msg;
        msg << "stacked code size " << total << " exceeds cap " << cap;
        throw BudgetExceeded(msg.str());
    }
    if (codes.size() == 1) return codes.front();

    const Eigen::Index n = codes.front().rows(), cols = codes.front().cols();
    const auto k_users = Eigen::Index(codes.size());
    FiniteCode out = codes.front();
    out.codewords.clear();
    out.coords.clear();
    std::vector<std::size_t> digit(codes.size(), 0);
    for (std::size_t idx = 0; idx < std::size_t(total); ++idx) {
        ComplexMatrix w(n * k_users, cols);
        IntVector coords;
        for (std::size_t k = 0; k < codes.size(); ++k) {
            w.middleRows(Eigen::Index(k) * n, n) = codes[k].codewords[digit[k]];
            const auto& ck = codes[k].coords[digit[k]];
            coords.insert(coords.end(), ck.begin(), ck.end());
        }
        out.codewords.push_back(std::move(w));
        out.coords.push_back(std::move(coords));
        for (std::size_t k = codes.size(); k-- > 0;) {
            if (++digit[k] < codes[k].size()) break;
            digit[k] = 0;
        }
    }
    return out;
}

MacResult mac_simulate(const std::vector<CodeScheme>& schemes, const ChannelConfig& cfg) {
    validate(cfg);
    const std::size_t k_users = schemes.size();
    if (k_users == 0) throw PreconditionError("mac_simulate: no users");
    if (std::size_t(cfg.n_r) < k_users)
        throw PreconditionError("joint decoding needs at least as many receive antennas as users (n_r >= K)");

    MacResult result;
    result.per_user.resize(k_users);
    const double user_r = cfg.r / double(k_users);
    for (std::size_t s = 0; s < cfg.snr_grid_db.size(); ++s) {
        const double db = cfg.snr_grid_db[s];
        const double rho = db_to_linear(db);
        std::vector<FiniteCode> codes;
        double joint_size = 1;
        for (const auto& scheme : schemes) {
            codes.push_back(scheme.build(rho, user_r, cfg.T, cfg.code_size_cap));
            if (codes.back().rows() != cfg.n_t || codes.back().cols() != cfg.T)
                throw PreconditionError("code shape does not match n_t × T of the channel config");
            joint_size *= double(codes.back().size());
        }
        if (joint_size > double(cfg.code_size_cap)) {
            std::ostringstream msg;
            msg << "joint code size " << joint_size << " exceeds cap " << cfg.code_size_cap << " at " << db << " dB";
            throw BudgetExceeded(msg.str());
        }
        if (joint_size < 2) {
            result.joint.entries.push_back(degenerate_entry(db));
            for (auto& c : result.per_user) c.entries.push_back(degenerate_entry(db));
            continue;
        }
        const double gain = channel_gain(cfg, rho);
        PointTally t;
        if (k_users == 1) {
            t = run_point(cfg, std::uint32_t(s), 1, [&] { return SingleUserKernel(codes[0], cfg.n_r, gain); });
            t.errors.push_back(t.errors[0]);
        } else {
            t = run_point(cfg, std::uint32_t(s), 1 + k_users, [&] { return MacKernel(codes, cfg.n_r, gain); });
        }
        result.joint.entries.push_back(make_entry(db, std::size_t(joint_size), t.errors[0], t.trials));
        for (std::size_t k = 0; k < k_users; ++k)
            result.per_user[k].entries.push_back(make_entry(db, codes[k].size(), t.errors[1 + k], t.trials));
    }
    return result;
}

std::optional<std::pair<double, double>> auto_window(const ErrorRateCurve& curve, std::uint64_t min_errors) {
    std::size_t n = 0;
    while (n < curve.entries.size() && !curve.entries[n].degenerate && curve.entries[n].errors >= min_errors) ++n;
    if (n < 3) return std::nullopt;
    return std::pair{curve.entries.front().rho_db, curve.entries[n - 1].rho_db};
}

SlopeEstimate dmt_slope(const ErrorRateCurve& curve, double lo_db, double hi_db, std::uint64_t min_errors) {
    std::vector<double> x, y;
    std::ostringstream failing;
    for (const auto& e : curve.entries) {
        if (e.rho_db < lo_db - 1e-9 || e.rho_db > hi_db + 1e-9) continue;
        if (e.degenerate || e.errors < min_errors) {
            failing << (failing.tellp() > 0 ? ", " : "") << e.rho_db << " dB (" << e.errors << " errors)";
            continue;
        }
        x.push_back(e.rho_db / 10.0);
        y.push_back(std::log10(e.p_e));
    }
    if (failing.tellp() > 0)
        throw PreconditionError("statistical floor not met (" + std::to_string(min_errors) +
                                " errors per point): " + failing.str());
    if (x.size() < 3) throw PreconditionError("statistical floor not met: fewer than 3 grid points in the window");
    const LinearFit line = fit_line(x, y);
    SlopeEstimate s;
    s.slope = line.slope;
    s.d_hat = -line.slope;
    s.lo_db = lo_db;
    s.hi_db = hi_db;
    s.stderr_ = line.slope_stderr;
    return s;
}

} // namespace stc
