#pragma once

// Closed-form DMT curves, pairwise-error and union-bound sums, restricted zeta sums
// over O_K and the small matrix inequalities used for the multiple-access channel.

#include "stc/numfield.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace stc {

/// Piecewise-linear diversity curve d(r), points sorted by r.
struct DmtCurve {
    std::vector<std::pair<double, double>> points;
    std::string label;

    /// Linear interpolation; 0 beyond the last point.
    double diversity_at(double r) const;
};

/// (0, n·n_r) to (1, 0).
DmtCurve dmt_upper_bound_curve(int n, int n_r);
/// (0, 2n_r) to (1, 0).
DmtCurve alamouti_dmt_curve(int n_r);

struct MacCurves {
    DmtCurve joint;    ///< (0, n·n_r) to (K, 0)
    DmtCurve per_user; ///< (0, n·n_r) to (1, 0)
};

/// Requires n_r ≥ K.
MacCurves mac_dmt_curves(int n, int n_r, int K);

/// ρ^{-n·n_r}·|det|^{-2n_r}: exponent-order form of the pairwise-error lower bound with the
/// code-dependent constant set to 1.
double pep_lower_bound_exponent(int n, int n_r, double det_abs, double rho);

struct SumReport {
    double radius = 0.0;
    double value = 0.0;
    std::size_t term_count = 0;
    double bound_value = 0.0;
    std::string bound_kind;
};

/// Σ 1/|det P|^{2n_r} over nonzero square matrices. With `dotted`, a point of Alamouti form
/// A(x1..x4) contributes Π_i 1/|ẋ_i|^{n_r} instead, where ẋ = 1 for x = 0 and |x| otherwise.
SumReport union_bound_sum(std::span<const ComplexMatrix> points, int n_r, bool dotted);

/// (Σ_{|x| ≤ bound, x ∈ Z} 1/|ẋ|^{n_r})^4, the factored majorant of the Alamouti sum.
double alamouti_factored_majorant(std::int64_t bound, int n_r);

/// Union bound on the Alamouti box-code block error rate at SNR ρ:
/// min(1, Σ_{D} (4/(ρ·s²·|x|²))^{2n_r}) over difference coordinates x ∈ [-2b, 2b]^4 \ {0},
/// with b = ⌊ρ^{r/2}⌋ and s = ρ^{-r/2}. Each term is the Chernoff bound
/// E exp(-ρ||HD||²/4) ≤ (4/(ρ·λ))^{n·n_r} for D†D = λ·I.
double alamouti_union_bound(double rho, double r, int n_r);

/// Census of an R-ball in O_K together with per-norm element counts gathered element by element.
struct NormCensus {
    ClassCensus classes;
    std::map<std::int64_t, std::size_t> norm_counts;
};

NormCensus norm_census(const NumberFieldSpec& field, double radius, std::size_t budget = kDefaultEnumerationBudget);

/// Σ over associate classes in the ball of 1/|N(x_i)|^s, against (Σ_{1 ≤ i < R^n} i^{-s})^{2n}.
/// Requires the declared PID flag.
SumReport restricted_zeta_sum(const NumberFieldSpec& field, const NormCensus& census, double s);
SumReport restricted_zeta_sum(const NumberFieldSpec& field, double radius, double s,
                              std::size_t budget = kDefaultEnumerationBudget);

struct FullSumReport : SumReport {
    /// Σ_i A_i/|N(x_i)|^{n_r} over classes.
    double decomposition = 0.0;
    /// Per norm, the class sizes add up to the number of elements of that norm.
    bool identity_exact = false;
    std::size_t max_class_size = 0;
    std::size_t class_count = 0;
};

/// Σ over all nonzero x in the ball of 1/|N(x)|^{n_r}. The bound is left empty here;
/// full_element_sum_series fills it with a fitted M·log(R)^{3n-1}.
FullSumReport full_element_sum(const NumberFieldSpec& field, const NormCensus& census, int n_r);
FullSumReport full_element_sum(const NumberFieldSpec& field, double radius, int n_r,
                               std::size_t budget = kDefaultEnumerationBudget);

/// One report per radius; bound_value = M·log(R)^{3n-1} with M the smallest constant
/// dominating every radius of the grid.
std::vector<FullSumReport> full_element_sum_series(const NumberFieldSpec& field, std::span<const double> radii, int n_r,
                                                   std::size_t budget = kDefaultEnumerationBudget);

struct DetSumCheck {
    double lhs = 0.0; ///< det(X†X) for X the vertical stack of the blocks
    double rhs = 0.0; ///< Σ_i det(X_i X_i†)
    bool ok = false;
};

DetSumCheck det_sum_inequality_check(std::span<const ComplexMatrix> blocks);

/// Nonzero spectra of AA† and A†A agree within 1e-8 relative.
bool singular_value_match(const ComplexMatrix& a);

struct AmGmReport {
    std::size_t elements = 0;
    std::size_t violations = 0;
    double max_relative_error = 0.0; ///< between exact |N(x)| and |det ψ(x)|²
};

/// |det ψ(x)|² = |N(x)| ≤ (||ψ(x)||_F²/n)^n ≤ ||ψ(x)||_F^{2n} on every nonzero x in the ball.
AmGmReport am_gm_chain(const NumberFieldSpec& field, double radius, std::size_t budget = kDefaultEnumerationBudget);

struct PolylogFit {
    double m_hat = 0.0;
    double residual = 0.0; ///< max relative residual
    bool flagged = false;  ///< residual above 0.5
};

/// Least squares for values ≈ M·log(R)^power.
PolylogFit polylog_fit(std::span<const double> values, std::span<const double> radii, double power);

struct PowerFit {
    double c_hat = 0.0;
    double exponent = 0.0;
    double residual = 0.0;
};

/// values ≈ c·R^exponent by least squares in log-log coordinates.
PowerFit power_law_fit(std::span<const double> values, std::span<const double> radii);

} // namespace stc
