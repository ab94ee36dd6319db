#include "stc/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

namespace stc {

namespace {

DmtCurve segment(double d0, double r_max, std::string label) {
    return DmtCurve{{{0.0, d0}, {r_max, 0.0}}, std::move(label)};
}

void require_positive(int v, const char* name) {
    if (v < 1) throw PreconditionError(std::string(name) + " must be a positive integer");
}

double det_abs(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw PreconditionError("determinant of a non-square matrix");
    if (m.rows() == 2) return std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
    return std::abs(m.determinant());
}

std::optional<std::array<double, 4>> alamouti_coords(const ComplexMatrix& p) {
    if (p.rows() != 2 || p.cols() != 2) return std::nullopt;
    const std::array<double, 4> x{p(0, 0).real(), p(0, 0).imag(), p(1, 0).real(), p(1, 0).imag()};
    if ((alamouti(x[0], x[1], x[2], x[3]) - p).norm() > 1e-12 * std::max(1.0, p.norm())) return std::nullopt;
    return x;
}

void require_pid(const NumberFieldSpec& field) {
    if (!field.pid) throw PreconditionError("ideal-class correspondence unavailable: field '" + field.id + "' is not declared PID");
}

// Deterministic pairwise reduction.
double tree_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return tree_sum(v.first(half)) + tree_sum(v.subspan(half));
}

} // namespace

double DmtCurve::diversity_at(double r) const {
    if (points.empty()) return 0.0;
    if (r <= points.front().first) return points.front().second;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto [r0, d0] = points[i - 1];
        const auto [r1, d1] = points[i];
        if (r <= r1) return d0 + (d1 - d0) * (r - r0) / (r1 - r0);
    }
    return 0.0;
}

DmtCurve dmt_upper_bound_curve(int n, int n_r) {
    require_positive(n, "n");
    require_positive(n_r, "n_r");
    return segment(double(n) * n_r, 1.0, "upper bound n=" + std::to_string(n) + " n_r=" + std::to_string(n_r));
}

DmtCurve alamouti_dmt_curve(int n_r) {
    require_positive(n_r, "n_r");
    return segment(2.0 * n_r, 1.0, "Alamouti n_r=" + std::to_string(n_r));
}

MacCurves mac_dmt_curves(int n, int n_r, int K) {
    require_positive(n, "n");
    require_positive(n_r, "n_r");
    require_positive(K, "K");
    if (n_r < K)
        throw PreconditionError("multiple-access curves need at least as many receive antennas as users (n_r >= K), got n_r=" +
                                std::to_string(n_r) + " K=" + std::to_string(K));
    return {segment(double(n) * n_r, double(K), "joint K=" + std::to_string(K)), segment(double(n) * n_r, 1.0, "per-user")};
}

double pep_lower_bound_exponent(int n, int n_r, double det, double rho) {
    require_positive(n, "n");
    require_positive(n_r, "n_r");
    if (!(det > 0)) throw PreconditionError("bound inapplicable: singular difference");
    if (!(rho > 0)) throw PreconditionError("rho must be positive");
    return std::pow(rho, -double(n) * n_r) * std::pow(det, -2.0 * n_r);
}

SumReport union_bound_sum(std::span<const ComplexMatrix> points, int n_r, bool dotted) {
    require_positive(n_r, "n_r");
    SumReport rep;
    std::vector<double> terms;
    terms.reserve(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        const ComplexMatrix& p = points[k];
        rep.radius = std::max(rep.radius, p.norm());
        if (p.norm() == 0.0) throw PreconditionError("union_bound_sum: point " + std::to_string(k) + " is zero");
        if (dotted) {
            if (const auto x = alamouti_coords(p)) {
                double t = 1.0;
                for (double xi : *x)
                    if (std::abs(xi) > 1e-12) t /= std::pow(std::abs(xi), n_r);
                terms.push_back(t);
                continue;
            }
        }
        const double d = det_abs(p);
        if (!(d > 1e-12 * std::pow(std::max(1.0, p.norm()), double(p.rows())))) {
            std::ostringstream msg;
            msg << "singular term: point " << k << " = " << p.format(Eigen::IOFormat(Eigen::FullPrecision, Eigen::DontAlignCols, ", ", "; ", "", "", "[", "]"));
            throw PreconditionError(msg.str());
        }
        terms.push_back(std::pow(d, -2.0 * n_r));
    }
    rep.value = tree_sum(terms);
    rep.term_count = points.size();
    rep.bound_value = rep.value;
    rep.bound_kind = dotted ? "dotted Alamouti majorant" : "determinant sum";
    return rep;
}

double alamouti_factored_majorant(std::int64_t bound, int n_r) {
    require_positive(n_r, "n_r");
    if (bound < 0) throw PreconditionError("box bound must be nonnegative");
    double s = 1.0; // x = 0 contributes 1/|ẋ| = 1
    for (std::int64_t x = bound; x >= 1; --x) s += 2.0 / std::pow(double(x), n_r);
    return std::pow(s, 4);
}

double alamouti_union_bound(double rho, double r, int n_r) {
    require_positive(n_r, "n_r");
    if (!(rho > 0) || !(r >= 0)) throw PreconditionError("alamouti_union_bound: need rho > 0 and r >= 0");
    const double side = std::pow(rho, r / 2);
    const auto b = static_cast<std::int64_t>(std::floor(side + kBoundarySlack));
    const double scale2 = 1.0 / (side * side);
    const std::int64_t w = 2 * b;
    // Count difference vectors by squared length.
    std::map<std::int64_t, std::size_t> shells;
    for (std::int64_t a = -w; a <= w; ++a)
        for (std::int64_t c = -w; c <= w; ++c)
            for (std::int64_t d = -w; d <= w; ++d)
                for (std::int64_t e = -w; e <= w; ++e) {
                    const std::int64_t m = a * a + c * c + d * d + e * e;
                    if (m > 0) ++shells[m];
                }
    double total = 0.0;
    for (const auto& [m, count] : shells) total += double(count) * std::pow(4.0 / (rho * scale2 * double(m)), 2.0 * n_r);
    return std::min(1.0, total);
}

NormCensus norm_census(const NumberFieldSpec& field, double radius, std::size_t budget) {
    NormCensus out;
    out.classes = census_ball(field, radius, budget,
                              [&](std::span<const std::int64_t>, std::int64_t norm) { ++out.norm_counts[norm]; });
    return out;
}

SumReport restricted_zeta_sum(const NumberFieldSpec& field, const NormCensus& census, double s) {
    require_pid(field);
    if (!(s >= 1)) throw PreconditionError("zeta exponent s must be at least 1");
    std::vector<std::int64_t> norms;
    for (const auto& c : census.classes.classes) norms.push_back(c.norm);
    std::sort(norms.begin(), norms.end());
    std::vector<double> terms;
    for (auto nm : norms) terms.push_back(std::pow(double(nm), -s));

    SumReport rep;
    rep.radius = census.classes.radius;
    rep.value = tree_sum(terms);
    rep.term_count = terms.size();
    // Σ_{1 ≤ i < R^n} i^{-s}, raised to 2n.
    const double top = std::pow(rep.radius, field.n);
    std::vector<double> harmonic;
    for (std::int64_t i = 1; double(i) < top; ++i) harmonic.push_back(std::pow(double(i), -s));
    rep.bound_value = std::pow(tree_sum(harmonic), 2.0 * field.n);
    rep.bound_kind = "(sum_{i<R^n} i^-s)^(2n)";
    return rep;
}

SumReport restricted_zeta_sum(const NumberFieldSpec& field, double radius, double s, std::size_t budget) {
    require_pid(field);
    return restricted_zeta_sum(field, norm_census(field, radius, budget), s);
}

FullSumReport full_element_sum(const NumberFieldSpec& field, const NormCensus& census, int n_r) {
    require_pid(field);
    require_positive(n_r, "n_r");
    FullSumReport rep;
    rep.radius = census.classes.radius;

    std::vector<double> direct;
    for (const auto& [norm, count] : census.norm_counts) {
        direct.push_back(double(count) * std::pow(double(norm), -double(n_r)));
        rep.term_count += count;
    }
    rep.value = tree_sum(direct);

    std::vector<double> by_class;
    std::map<std::int64_t, std::size_t> class_totals;
    for (const auto& c : census.classes.classes) {
        by_class.push_back(double(c.size) * std::pow(double(c.norm), -double(n_r)));
        class_totals[c.norm] += c.size;
        rep.max_class_size = std::max(rep.max_class_size, c.size);
    }
    rep.decomposition = tree_sum(by_class);
    rep.class_count = census.classes.classes.size();
    std::map<std::int64_t, std::size_t> nonempty;
    for (const auto& [norm, count] : census.norm_counts)
        if (count > 0) nonempty[norm] = count;
    rep.identity_exact = (class_totals == nonempty);
    rep.bound_kind = "M*log(R)^(3n-1)";
    return rep;
}

FullSumReport full_element_sum(const NumberFieldSpec& field, double radius, int n_r, std::size_t budget) {
    require_pid(field);
    return full_element_sum(field, norm_census(field, radius, budget), n_r);
}

std::vector<FullSumReport> full_element_sum_series(const NumberFieldSpec& field, std::span<const double> radii, int n_r,
                                                   std::size_t budget) {
    std::vector<FullSumReport> out;
    const double power = 3.0 * field.n - 1.0;
    double m = 0.0;
    for (double r : radii) {
        if (!(r > 1)) throw PreconditionError("full_element_sum_series needs radii above 1");
        out.push_back(full_element_sum(field, r, n_r, budget));
        m = std::max(m, out.back().value / std::pow(std::log(r), power));
    }
    for (auto& rep : out) {
        rep.bound_value = m * std::pow(std::log(rep.radius), power);
        rep.bound_kind = "M*log(R)^(3n-1), M = max over grid";
    }
    return out;
}

DetSumCheck det_sum_inequality_check(std::span<const ComplexMatrix> blocks) {
    if (blocks.empty()) throw PreconditionError("det_sum_inequality_check needs at least one block");
    const Eigen::Index n = blocks.front().rows();
    ComplexMatrix gram = ComplexMatrix::Zero(n, n);
    DetSumCheck out;
    for (const auto& b : blocks) {
        if (b.rows() != n || b.cols() != n) throw PreconditionError("det_sum_inequality_check: blocks must all be n×n");
        gram += b.adjoint() * b;
        out.rhs += (b * b.adjoint()).determinant().real();
    }
    out.lhs = gram.determinant().real();
    out.ok = out.lhs >= out.rhs - 1e-9 * std::max(1.0, out.rhs);
    return out;
}

bool singular_value_match(const ComplexMatrix& a) {
    auto nonzero = [](const ComplexMatrix& h) {
        if (h.size() == 0) return std::vector<double>{};
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h, Eigen::EigenvaluesOnly);
        const Eigen::VectorXd ev = eig.eigenvalues();
        const double top = ev.cwiseAbs().maxCoeff();
        std::vector<double> out;
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (top > 0 && ev(i) > 1e-10 * top) out.push_back(ev(i));
        std::sort(out.begin(), out.end());
        return out;
    };
    const auto left = nonzero(a * a.adjoint());
    const auto right = nonzero(a.adjoint() * a);
    if (left.size() != right.size()) return false;
    for (std::size_t i = 0; i < left.size(); ++i)
        if (std::abs(left[i] - right[i]) > 1e-8 * std::max(std::abs(left[i]), std::abs(right[i]))) return false;
    return true;
}

AmGmReport am_gm_chain(const NumberFieldSpec& field, double radius, std::size_t budget) {
    AmGmReport rep;
    const int n = field.n;
    const MatrixLattice lattice = field_lattice(field);
    for_each_in_ball(
        lattice, radius,
        [&](std::span<const std::int64_t> c, double) {
            if (std::all_of(c.begin(), c.end(), [](auto v) { return v == 0; })) return;
            ++rep.elements;
            const double exact = norm_abs(field, RingElement(c)).convert_to<double>();
            const Eigen::VectorXcd diag = embed_diagonal(field, c);
            const double numeric = std::norm(diag.prod());
            const double fro2 = diag.squaredNorm();
            const double rel = std::abs(exact - numeric) / std::max(1.0, exact);
            rep.max_relative_error = std::max(rep.max_relative_error, rel);
            const double amgm = std::pow(fro2 / n, n);
            const bool ok = rel <= 1e-8 && exact <= amgm * (1 + 1e-12) && amgm <= std::pow(fro2, n) * (1 + 1e-12);
            if (!ok) ++rep.violations;
        },
        budget);
    return rep;
}

PolylogFit polylog_fit(std::span<const double> values, std::span<const double> radii, double power) {
    if (values.size() != radii.size() || values.size() < 3)
        throw PreconditionError("polylog_fit needs two equally long series of length >= 3");
    if (!(power > 0)) throw PreconditionError("polylog_fit power must be positive");
    double num = 0, den = 0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 1)) throw PreconditionError("polylog_fit needs radii above 1");
        if (!(values[i] > 0)) throw PreconditionError("polylog_fit needs positive values");
        const double l = std::pow(std::log(radii[i]), power);
        num += values[i] * l;
        den += l * l;
    }
    PolylogFit fit;
    fit.m_hat = num / den;
    for (std::size_t i = 0; i < radii.size(); ++i)
        fit.residual = std::max(fit.residual,
                                std::abs(values[i] - fit.m_hat * std::pow(std::log(radii[i]), power)) / values[i]);
    fit.flagged = fit.residual > 0.5;
    return fit;
}

PowerFit power_law_fit(std::span<const double> values, std::span<const double> radii) {
    if (values.size() != radii.size() || values.size() < 2)
        throw PreconditionError("power_law_fit needs two equally long series of length >= 2");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0) || !(values[i] > 0)) throw PreconditionError("power_law_fit needs positive data");
        lx.push_back(std::log(radii[i]));
        ly.push_back(std::log(values[i]));
    }
    const LinearFit line = fit_line(lx, ly);
    PowerFit fit{std::exp(line.intercept), line.slope, 0.0};
    for (std::size_t i = 0; i < radii.size(); ++i)
        fit.residual = std::max(fit.residual, std::abs(values[i] - fit.c_hat * std::pow(radii[i], fit.exponent)) / values[i]);
    return fit;
}

} // namespace stc
