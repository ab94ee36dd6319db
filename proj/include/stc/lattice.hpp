#pragma once

// Matrix lattices inside M_{n×T}(C): Gram matrices, ball enumeration and the
// SNR-indexed finite codes built from them.

#include "stc/common.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace stc {

template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real frobenius_norm(const Eigen::MatrixBase<Derived>& m) {
    return m.norm();
}

/// Real part of the Frobenius inner product, Re tr(A·B†).
template <typename DerivedA, typename DerivedB>
typename Eigen::NumTraits<typename DerivedA::Scalar>::Real frobenius_inner(const Eigen::MatrixBase<DerivedA>& a,
                                                                            const Eigen::MatrixBase<DerivedB>& b) {
    return (a.array() * b.array().conjugate()).sum().real();
}

/// Gram matrix of a list of equally shaped complex matrices viewed as real vectors.
/// Throws PreconditionError("degenerate lattice ...") if the list is not real-linearly independent,
/// judged by smallest/largest Gram eigenvalue against `tolerance`.
template <typename Real>
Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> gram_matrix(std::span<const BasicComplexMatrix<Real>> basis,
                                                                Real tolerance = Real(1e-12)) {
    const auto k = static_cast<Eigen::Index>(basis.size());
    if (k == 0) throw PreconditionError("degenerate lattice: empty basis");
    for (const auto& b : basis) {
        if (b.rows() != basis[0].rows() || b.cols() != basis[0].cols())
            throw PreconditionError("lattice basis matrices must share one shape");
    }
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> gram(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i; j < k; ++j) gram(i, j) = gram(j, i) = frobenius_inner(basis[i], basis[j]);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>> eig(gram, Eigen::EigenvaluesOnly);
    const Real largest = eig.eigenvalues().maxCoeff();
    if (!(largest > 0) || eig.eigenvalues().minCoeff() <= tolerance * largest)
        throw PreconditionError("degenerate lattice: basis is not linearly independent over the reals");
    return gram;
}

/// A rank-k additive group of complex n×T matrices, given by k real-independent generators.
template <typename Real>
class BasicMatrixLattice {
public:
    using Matrix = BasicComplexMatrix<Real>;
    using RealMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

    explicit BasicMatrixLattice(std::vector<Matrix> basis, Real degeneracy_tolerance = Real(1e-12))
        : basis_(std::move(basis)), gram_(gram_matrix<Real>(basis_, degeneracy_tolerance)) {
        Eigen::LLT<RealMat> llt(gram_);
        if (llt.info() != Eigen::Success) throw PreconditionError("degenerate lattice: Cholesky factorization failed");
        upper_ = llt.matrixU();
    }

    std::size_t rank() const { return basis_.size(); }
    Eigen::Index rows() const { return basis_.front().rows(); }
    Eigen::Index cols() const { return basis_.front().cols(); }
    const std::vector<Matrix>& basis() const { return basis_; }
    const RealMat& gram() const { return gram_; }
    /// Upper-triangular U with gram = Uᵀ·U.
    const RealMat& cholesky_upper() const { return upper_; }

    Matrix point(std::span<const std::int64_t> coords) const {
        Matrix p = Matrix::Zero(rows(), cols());
        for (std::size_t i = 0; i < basis_.size(); ++i)
            if (coords[i] != 0) p += static_cast<Real>(coords[i]) * basis_[i];
        return p;
    }

    /// ||point(coords)||_F² through the Gram matrix.
    Real squared_norm(std::span<const std::int64_t> coords) const {
        Real s = 0;
        const auto k = static_cast<Eigen::Index>(rank());
        for (Eigen::Index i = 0; i < k; ++i) {
            if (coords[i] == 0) continue;
            Real row = 0;
            for (Eigen::Index j = 0; j < k; ++j) row += gram_(i, j) * static_cast<Real>(coords[j]);
            s += static_cast<Real>(coords[i]) * row;
        }
        return s;
    }

    /// sqrt(det gram): volume of a fundamental cell.
    Real covolume() const { return upper_.diagonal().prod(); }

private:
    std::vector<Matrix> basis_;
    RealMat gram_;
    RealMat upper_;
};

using MatrixLattice = BasicMatrixLattice<double>;

/// Absolute slack on the radius; points this close to the sphere count as inside.
inline constexpr double kBoundarySlack = 1e-9;

namespace detail {

template <typename Real, typename Visitor>
class BallWalker {
public:
    BallWalker(const BasicMatrixLattice<Real>& lattice, Real radius, std::size_t budget, Visitor& visit)
        : lattice_(lattice), upper_(lattice.cholesky_upper()), visit_(visit), budget_(budget), radius_(radius),
          k_(static_cast<int>(lattice.rank())), coords_(lattice.rank(), 0), partial_(lattice.rank() + 1, 0) {
        const Real outer = radius + Real(kBoundarySlack);
        accept_ = outer * outer;
        prune_ = accept_ * (1 + Real(1e-10)) + Real(1e-12);
    }

    std::size_t run() {
        descend(k_ - 1);
        return count_;
    }

private:
    void descend(int level) {
        Real center = 0;
        for (int j = level + 1; j < k_; ++j) center -= upper_(level, j) / upper_(level, level) * Real(coords_[j]);
        const Real remaining = prune_ - partial_[level + 1];
        if (remaining < 0) return;
        const Real half = std::sqrt(remaining) / upper_(level, level);
        const auto lo = static_cast<std::int64_t>(std::ceil(center - half));
        const auto hi = static_cast<std::int64_t>(std::floor(center + half));
        const Real diag2 = upper_(level, level) * upper_(level, level);
        for (std::int64_t c = lo; c <= hi; ++c) {
            coords_[level] = c;
            const Real d = Real(c) - center;
            partial_[level] = partial_[level + 1] + diag2 * d * d;
            if (partial_[level] > prune_) continue;
            if (level > 0) {
                descend(level - 1);
            } else {
                const Real sq = lattice_.squared_norm(coords_);
                if (sq <= accept_) {
                    if (++count_ > budget_) {
                        std::ostringstream msg;
                        msg << "enumeration budget exceeded: more than " << budget_ << " lattice points within radius "
                            << radius_;
                        throw BudgetExceeded(msg.str());
                    }
                    visit_(std::span<const std::int64_t>(coords_), sq);
                }
            }
        }
        coords_[level] = 0;
    }

    const BasicMatrixLattice<Real>& lattice_;
    const typename BasicMatrixLattice<Real>::RealMat& upper_;
    Visitor& visit_;
    std::size_t budget_;
    Real radius_;
    int k_;
    IntVector coords_;
    std::vector<Real> partial_;
    Real accept_ = 0;
    Real prune_ = 0;
    std::size_t count_ = 0;
};

} // namespace detail

/// Calls visit(coords, squared_norm) for every lattice point with ||P||_F ≤ R (+ boundary slack),
/// in unspecified order. Returns the number of points visited.
template <typename Real, typename Visitor>
std::size_t for_each_in_ball(const BasicMatrixLattice<Real>& lattice, Real radius, Visitor&& visit,
                             std::size_t budget = kDefaultEnumerationBudget) {
    if (!(radius >= 0)) throw PreconditionError("ball radius must be nonnegative");
    detail::BallWalker<Real, std::remove_reference_t<Visitor>> walker(lattice, radius, budget, visit);
    return walker.run();
}

template <typename Real>
std::size_t count_ball(const BasicMatrixLattice<Real>& lattice, Real radius,
                       std::size_t budget = kDefaultEnumerationBudget) {
    return for_each_in_ball(lattice, radius, [](std::span<const std::int64_t>, Real) {}, budget);
}

template <typename Real>
struct BasicLatticePoint {
    IntVector coords;
    BasicComplexMatrix<Real> point;
};

using LatticePoint = BasicLatticePoint<double>;

/// All lattice points of L(R) = {P : ||P||_F ≤ R}, ordered lexicographically by coordinates.
template <typename Real>
std::vector<BasicLatticePoint<Real>> enumerate_ball(const BasicMatrixLattice<Real>& lattice, Real radius,
                                                    std::size_t budget = kDefaultEnumerationBudget) {
    std::vector<IntVector> found;
    for_each_in_ball(
        lattice, radius,
        [&](std::span<const std::int64_t> c, Real) { found.emplace_back(c.begin(), c.end()); }, budget);
    std::sort(found.begin(), found.end());
    std::vector<BasicLatticePoint<Real>> out;
    out.reserve(found.size());
    for (auto& c : found) {
        auto p = lattice.point(c);
        out.push_back({std::move(c), std::move(p)});
    }
    return out;
}

struct ScalingFit {
    double c_hat = 0.0;
    double k_hat = 0.0;
    std::vector<double> radii;
    std::vector<std::size_t> counts;
};

/// Fits |L(R)| ≈ c·R^k by least squares in log-log coordinates.
template <typename Real>
ScalingFit count_scaling_fit(const BasicMatrixLattice<Real>& lattice, std::span<const double> radii,
                             std::size_t budget = kDefaultEnumerationBudget) {
    if (radii.size() < 4) throw PreconditionError("count_scaling_fit needs at least 4 radii");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1])) throw PreconditionError("count_scaling_fit radii must be increasing");
    ScalingFit fit;
    std::vector<double> lx, ly;
    for (double r : radii) {
        const std::size_t n = count_ball(lattice, static_cast<Real>(r), budget);
        if (n < 2) {
            std::ostringstream msg;
            msg << "radius too small for fit: |L(" << r << ")| = " << n;
            throw PreconditionError(msg.str());
        }
        fit.radii.push_back(r);
        fit.counts.push_back(n);
        lx.push_back(std::log(r));
        ly.push_back(std::log(static_cast<double>(n)));
    }
    const LinearFit line = fit_line(lx, ly);
    fit.k_hat = line.slope;
    fit.c_hat = std::exp(line.intercept);
    return fit;
}

template <typename Real>
struct BasicMinimalElement {
    IntVector coords;
    BasicComplexMatrix<Real> point;
    Real norm = 0;
};

using MinimalElement = BasicMinimalElement<double>;

/// A nonzero lattice point of least Frobenius norm. Among ties the lexicographically
/// greatest coordinate vector wins, so the result has a positive leading coordinate.
template <typename Real>
BasicMinimalElement<Real> min_frobenius_element(const BasicMatrixLattice<Real>& lattice,
                                                std::size_t budget = kDefaultEnumerationBudget) {
    // The shortest generator bounds the minimum from above, so this ball is never empty.
    const Real search = std::sqrt(lattice.gram().diagonal().minCoeff());
    Real best = std::numeric_limits<Real>::infinity();
    IntVector best_coords;
    for_each_in_ball(
        lattice, search,
        [&](std::span<const std::int64_t> c, Real sq) {
            if (std::all_of(c.begin(), c.end(), [](std::int64_t v) { return v == 0; })) return;
            if (best_coords.empty()) {
                best = sq;
                best_coords.assign(c.begin(), c.end());
                return;
            }
            const Real tol = Real(1e-9) * std::max(Real(1), best);
            if (sq < best - tol) {
                best = sq;
                best_coords.assign(c.begin(), c.end());
            } else if (std::abs(sq - best) <= tol && lex_less(best_coords, c)) {
                best_coords.assign(c.begin(), c.end());
            }
        },
        budget);
    return {best_coords, lattice.point(best_coords), std::sqrt(best)};
}

/// A(x1,x2,x3,x4) = [[x1 + x2·i, -(x3 + x4·i)*], [x3 + x4·i, (x1 + x2·i)*]].
template <typename Real = double>
BasicComplexMatrix<Real> alamouti(Real x1, Real x2, Real x3, Real x4) {
    using C = std::complex<Real>;
    const C a(x1, x2), b(x3, x4);
    BasicComplexMatrix<Real> m(2, 2);
    m << a, -std::conj(b), b, std::conj(a);
    return m;
}

/// Z·A(1,0,0,0) + Z·A(0,1,0,0) + Z·A(0,0,1,0) + Z·A(0,0,0,1).
template <typename Real = double>
BasicMatrixLattice<Real> alamouti_lattice() {
    std::vector<BasicComplexMatrix<Real>> basis;
    for (int i = 0; i < 4; ++i) {
        Real x[4] = {0, 0, 0, 0};
        x[i] = 1;
        basis.push_back(alamouti<Real>(x[0], x[1], x[2], x[3]));
    }
    return BasicMatrixLattice<Real>(std::move(basis));
}

enum class Shaping { spherical, box };

/// One SNR level's finite code: scaled lattice points plus the parameters that produced them.
template <typename Real>
struct BasicFiniteCode {
    std::vector<BasicComplexMatrix<Real>> codewords;
    std::vector<IntVector> coords;
    Real scale = 1;
    Real source_radius = 1;
    Shaping scheme = Shaping::spherical;
    Real rho = 1;
    Real r = 0;

    std::size_t size() const { return codewords.size(); }
    Eigen::Index rows() const { return codewords.front().rows(); }
    Eigen::Index cols() const { return codewords.front().cols(); }
};

using FiniteCode = BasicFiniteCode<double>;

/// C_L(R) = R⁻¹·L(R) with R = base_radius·ρ^{rT/k}; scale stays ρ^{-rT/k}.
template <typename Real>
BasicFiniteCode<Real> spherical_code(const BasicMatrixLattice<Real>& lattice, Real rho, Real r, int T, int k,
                                     Real base_radius = 1, std::size_t cap = kDefaultEnumerationBudget) {
    if (!(rho > 0)) throw PreconditionError("spherical_code: rho must be positive");
    if (!(r >= 0)) throw PreconditionError("spherical_code: r must be nonnegative");
    if (static_cast<std::size_t>(k) != lattice.rank())
        throw PreconditionError("spherical_code: k must equal the lattice rank");
    if (T != lattice.cols()) throw PreconditionError("spherical_code: T must equal the codeword column count");
    const Real exponent = r * Real(T) / Real(k);
    BasicFiniteCode<Real> code;
    code.scheme = Shaping::spherical;
    code.rho = rho;
    code.r = r;
    code.scale = std::pow(rho, -exponent);
    code.source_radius = base_radius * std::pow(rho, exponent);
    for (auto& p : enumerate_ball(lattice, code.source_radius, cap)) {
        code.codewords.push_back(code.scale * p.point);
        code.coords.push_back(std::move(p.coords));
    }
    return code;
}

/// C₁(ρ^{r/2}): every A(x) with integer |x_i| ≤ ρ^{r/2}, scaled by ρ^{-r/2}.
template <typename Real = double>
BasicFiniteCode<Real> box_code_alamouti(Real rho, Real r, std::size_t cap = kDefaultEnumerationBudget) {
    if (!(rho > 0)) throw PreconditionError("box_code_alamouti: rho must be positive");
    if (!(r >= 0)) throw PreconditionError("box_code_alamouti: r must be nonnegative");
    const Real half_width = std::pow(rho, r / 2);
    const auto bound = static_cast<std::int64_t>(std::floor(half_width + Real(kBoundarySlack)));
    const double side = 2.0 * double(bound) + 1.0;
    if (side * side * side * side > double(cap)) {
        std::ostringstream msg;
        msg << "box code population " << side * side * side * side << " exceeds budget " << cap << " at box bound "
            << bound;
        throw BudgetExceeded(msg.str());
    }
    BasicFiniteCode<Real> code;
    code.scheme = Shaping::box;
    code.rho = rho;
    code.r = r;
    code.scale = Real(1) / half_width;
    code.source_radius = half_width;
    for (std::int64_t a = -bound; a <= bound; ++a)
        for (std::int64_t b = -bound; b <= bound; ++b)
            for (std::int64_t c = -bound; c <= bound; ++c)
                for (std::int64_t d = -bound; d <= bound; ++d) {
                    code.codewords.push_back(code.scale * alamouti<Real>(Real(a), Real(b), Real(c), Real(d)));
                    code.coords.push_back({a, b, c, d});
                }
    return code;
}

struct PowerCheck {
    bool ok = false;
    double avg_energy = 0.0;
};

/// Average energy (1/|C|)·Σ||X||_F² against the budget T·n_t.
template <typename Real>
PowerCheck verify_power_constraint(const BasicFiniteCode<Real>& code, int n_t, int T) {
    if (code.codewords.empty()) throw PreconditionError("verify_power_constraint: empty code");
    double total = 0;
    for (const auto& x : code.codewords) total += double(x.squaredNorm());
    const double avg = total / double(code.codewords.size());
    return {avg <= double(T) * double(n_t) + 1e-9, avg};
}

} // namespace stc
