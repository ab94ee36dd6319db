#include "stc/numfield.hpp"

#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace stc {

namespace {

using exact::Overflow;

std::string triple(int a, int b, int c) {
    std::ostringstream s;
    s << "(" << a << "," << b << "," << c << ")";
    return s.str();
}

[[noreturn]] void inconsistent(const std::string& what) { throw PreconditionError("inconsistent field spec: " + what); }

std::vector<BigInt> to_big(std::span<const std::int64_t> c) { return {c.begin(), c.end()}; }

/// |det| of multiplication-by-x, int64 first and BigInt on overflow.
BigInt norm_of(const NumberFieldSpec& field, const std::vector<BigInt>& x) {
    const int d = field.basis_size();
    bool small = true;
    for (const auto& v : x)
        if (abs(v) > BigInt(exact::kSafeLimit)) small = false;
    if (small) {
        try {
            std::vector<std::int64_t> x64(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) x64[i] = static_cast<std::int64_t>(x[i]);
            const auto m = exact::multiplication_matrix<std::int64_t>(field.mul_tensor, d, x64);
            const std::int64_t det = exact::determinant(m, d);
            return BigInt(det < 0 ? -det : det);
        } catch (const Overflow&) {
        }
    }
    const auto m = exact::multiplication_matrix<BigInt>(field.mul_tensor, d, x);
    return abs(exact::determinant(m, d));
}

std::int64_t norm_int64(const NumberFieldSpec& field, std::span<const std::int64_t> x) {
    const int d = field.basis_size();
    try {
        const std::vector<std::int64_t> x64(x.begin(), x.end());
        const auto m = exact::multiplication_matrix<std::int64_t>(field.mul_tensor, d, x64);
        const std::int64_t det = exact::determinant(m, d);
        return det < 0 ? -det : det;
    } catch (const Overflow&) {
        const BigInt big = norm_of(field, to_big(x));
        if (big > BigInt(std::numeric_limits<std::int64_t>::max()))
            throw PreconditionError("element norm exceeds the 64-bit census range; reduce the radius");
        return static_cast<std::int64_t>(big);
    }
}

/// Divisibility test y ∈ x·O_K through adj(M_x)·y ≡ 0 (mod det M_x).
class DivisorTest {
public:
    DivisorTest(const NumberFieldSpec& field, const std::vector<BigInt>& x) : dim_(field.basis_size()) {
        const auto m = exact::multiplication_matrix<BigInt>(field.mul_tensor, dim_, x);
        det_big_ = exact::determinant(m, dim_);
        if (det_big_ == 0) throw PreconditionError("division by zero element");
        adj_big_ = exact::adjugate(m, dim_);
        BigInt largest = abs(det_big_);
        for (const auto& v : adj_big_) largest = std::max(largest, BigInt(abs(v)));
        if (largest < BigInt(exact::kSafeLimit)) {
            det64_ = static_cast<std::int64_t>(det_big_);
            adj64_.reserve(adj_big_.size());
            for (const auto& v : adj_big_) adj64_.push_back(static_cast<std::int64_t>(v));
        }
    }

    bool divides(std::span<const std::int64_t> y) const {
        if (!adj64_.empty()) {
            bool small = true;
            for (auto v : y) small = small && v < (std::int64_t(1) << 31) && v > -(std::int64_t(1) << 31);
            if (small) {
                for (int i = 0; i < dim_; ++i) {
                    __int128 acc = 0;
                    for (int j = 0; j < dim_; ++j) acc += __int128(adj64_[std::size_t(i) * dim_ + j]) * y[j];
                    if (acc % det64_ != 0) return false;
                }
                return true;
            }
        }
        return divides(to_big(y));
    }

    bool divides(const std::vector<BigInt>& y) const {
        for (int i = 0; i < dim_; ++i) {
            BigInt acc = 0;
            for (int j = 0; j < dim_; ++j) acc += adj_big_[std::size_t(i) * dim_ + j] * y[std::size_t(j)];
            if (acc % det_big_ != 0) return false;
        }
        return true;
    }

    std::vector<BigInt> quotient(const std::vector<BigInt>& y) const {
        std::vector<BigInt> z(std::size_t(dim_), 0);
        for (int i = 0; i < dim_; ++i) {
            BigInt acc = 0;
            for (int j = 0; j < dim_; ++j) acc += adj_big_[std::size_t(i) * dim_ + j] * y[std::size_t(j)];
            z[std::size_t(i)] = acc / det_big_;
        }
        return z;
    }

private:
    int dim_;
    BigInt det_big_;
    std::vector<BigInt> adj_big_;
    std::int64_t det64_ = 0;
    std::vector<std::int64_t> adj64_;
};

std::vector<std::int64_t> tensor_from_products(int d, const std::function<std::vector<std::int64_t>(int, int)>& product) {
    std::vector<std::int64_t> t(std::size_t(d) * d * d, 0);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            const auto p = product(a, b);
            for (int c = 0; c < d; ++c) t[(std::size_t(a) * d + b) * d + c] = p[std::size_t(c)];
        }
    return t;
}

NumberFieldSpec make_q_zeta8() {
    NumberFieldSpec f;
    f.id = "Q(zeta8)";
    f.n = 2;
    f.pid = true;
    // Basis 1, ζ, ζ², ζ³ with ζ⁴ = −1.
    f.mul_tensor = tensor_from_products(4, [](int a, int b) {
        std::vector<std::int64_t> out(4, 0);
        const int e = a + b;
        if (e < 4)
            out[std::size_t(e)] = 1;
        else
            out[std::size_t(e - 4)] = -1;
        return out;
    });
    // σ_1 = identity, σ_2: ζ ↦ −ζ (fixes i = ζ²).
    const std::complex<double> zeta = std::polar(1.0, std::numbers::pi / 4);
    f.embeddings.resize(2, 4);
    for (int m = 0; m < 4; ++m) {
        f.embeddings(0, m) = std::pow(zeta, m);
        f.embeddings(1, m) = std::pow(-zeta, m);
    }
    f.unit_generators = {RingElement{0, 1, 0, 0}, RingElement{1, 1, 0, -1}};
    return f;
}

NumberFieldSpec make_q_i_sqrt5() {
    NumberFieldSpec f;
    f.id = "Q(i,sqrt5)";
    f.n = 2;
    f.pid = true;
    // Basis 1, θ, i, iθ with θ² = θ + 1; an element is (p + qθ) + i(r + sθ).
    struct Zt {
        std::int64_t a, b;
    };
    auto mul_zt = [](Zt x, Zt y) { return Zt{x.a * y.a + x.b * y.b, x.a * y.b + x.b * y.a + x.b * y.b}; };
    auto parts = [](int w) {
        switch (w) {
        case 0: return std::pair{Zt{1, 0}, Zt{0, 0}};
        case 1: return std::pair{Zt{0, 1}, Zt{0, 0}};
        case 2: return std::pair{Zt{0, 0}, Zt{1, 0}};
        default: return std::pair{Zt{0, 0}, Zt{0, 1}};
        }
    };
    f.mul_tensor = tensor_from_products(4, [&](int a, int b) {
        const auto [ar, ai] = parts(a);
        const auto [br, bi] = parts(b);
        const Zt rr = mul_zt(ar, br), ii = mul_zt(ai, bi), ri = mul_zt(ar, bi), ir = mul_zt(ai, br);
        return std::vector<std::int64_t>{rr.a - ii.a, rr.b - ii.b, ri.a + ir.a, ri.b + ir.b};
    });
    const double roots[2] = {(1.0 + std::sqrt(5.0)) / 2.0, (1.0 - std::sqrt(5.0)) / 2.0};
    const std::complex<double> i(0.0, 1.0);
    f.embeddings.resize(2, 4);
    for (int j = 0; j < 2; ++j) {
        f.embeddings(j, 0) = 1.0;
        f.embeddings(j, 1) = roots[j];
        f.embeddings(j, 2) = i;
        f.embeddings(j, 3) = i * roots[j];
    }
    f.unit_generators = {RingElement{0, 0, 1, 0}, RingElement{0, 1, 0, 0}};
    return f;
}

} // namespace

bool RingElement::is_zero() const {
    return std::all_of(coords_.begin(), coords_.end(), [](const BigInt& v) { return v == 0; });
}

std::optional<IntVector> RingElement::to_int64() const {
    IntVector out;
    out.reserve(coords_.size());
    for (const auto& v : coords_) {
        if (v > BigInt(std::numeric_limits<std::int64_t>::max()) || v < BigInt(std::numeric_limits<std::int64_t>::min()))
            return std::nullopt;
        out.push_back(static_cast<std::int64_t>(v));
    }
    return out;
}

std::ostream& operator<<(std::ostream& os, const RingElement& x) {
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x.coords()[i];
    return os << ")";
}

void validate(const NumberFieldSpec& f) {
    if (f.n < 1) inconsistent("relative degree n must be positive");
    const int d = f.basis_size();
    if (f.mul_tensor.size() != std::size_t(d) * d * d) inconsistent("mul_tensor must have shape 2n×2n×2n");
    if (f.embeddings.rows() != f.n || f.embeddings.cols() != d) inconsistent("embeddings must have shape n×2n");

    for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
            if (f.structure(0, b, c) != (b == c ? 1 : 0)) inconsistent("w_1 is not the identity at " + triple(0, b, c));
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                if (f.structure(a, b, c) != f.structure(b, a, c))
                    inconsistent("commutativity fails at " + triple(a, b, c));
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) {
                    std::int64_t left = 0, right = 0;
                    for (int m = 0; m < d; ++m) {
                        left += f.structure(a, b, m) * f.structure(m, c, e);
                        right += f.structure(b, c, m) * f.structure(a, m, e);
                    }
                    if (left != right) inconsistent("associativity fails at " + triple(a, b, c));
                }
    for (int j = 0; j < f.n; ++j)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                const std::complex<double> lhs = f.embeddings(j, a) * f.embeddings(j, b);
                std::complex<double> rhs = 0;
                for (int c = 0; c < d; ++c) rhs += double(f.structure(a, b, c)) * f.embeddings(j, c);
                if (std::abs(lhs - rhs) > 1e-10 * std::max(1.0, std::abs(lhs)))
                    inconsistent("embedding " + std::to_string(j) + " is not multiplicative at " + triple(a, b, j));
            }
    for (std::size_t u = 0; u < f.unit_generators.size(); ++u) {
        const auto& g = f.unit_generators[u];
        if (g.size() != std::size_t(d)) inconsistent("unit generator " + std::to_string(u) + " has wrong length");
        if (norm_of(f, g.coords()) != 1) inconsistent("unit generator " + std::to_string(u) + " has |N| != 1");
    }
    try {
        (void)field_lattice(f);
    } catch (const PreconditionError& e) {
        inconsistent(std::string("embedding lattice: ") + e.what());
    }
}

NumberFieldSpec catalog_field(const std::string& id) {
    NumberFieldSpec f;
    if (id == "Q(zeta8)")
        f = make_q_zeta8();
    else if (id == "Q(i,sqrt5)")
        f = make_q_i_sqrt5();
    else
        throw PreconditionError("unknown field id '" + id + "' (catalog: Q(zeta8), Q(i,sqrt5))");
    validate(f);
    return f;
}

std::vector<std::string> catalog_ids() { return {"Q(zeta8)", "Q(i,sqrt5)"}; }

NumberFieldSpec parse_field_spec(const nlohmann::json& doc) {
    NumberFieldSpec f;
    try {
        f.id = doc.value("id", std::string("custom"));
        f.n = doc.at("n").get<int>();
        f.pid = doc.at("pid").get<bool>();
        const int d = 2 * f.n;
        const auto& t = doc.at("mul_tensor");
        if (!t.is_array() || int(t.size()) != d) inconsistent("mul_tensor must have shape 2n×2n×2n");
        for (const auto& plane : t) {
            if (!plane.is_array() || int(plane.size()) != d) inconsistent("mul_tensor must have shape 2n×2n×2n");
            for (const auto& row : plane) {
                if (!row.is_array() || int(row.size()) != d) inconsistent("mul_tensor must have shape 2n×2n×2n");
                for (const auto& v : row) f.mul_tensor.push_back(v.get<std::int64_t>());
            }
        }
        const auto& e = doc.at("embeddings");
        if (!e.is_array() || int(e.size()) != f.n) inconsistent("embeddings must have shape n×2n");
        f.embeddings.resize(f.n, d);
        for (int j = 0; j < f.n; ++j) {
            if (!e[std::size_t(j)].is_array() || int(e[std::size_t(j)].size()) != d)
                inconsistent("embeddings must have shape n×2n");
            for (int m = 0; m < d; ++m) {
                const auto& pair = e[std::size_t(j)][std::size_t(m)];
                if (!pair.is_array() || pair.size() != 2) inconsistent("embedding entries must be [re, im] pairs");
                f.embeddings(j, m) = {pair[0].get<double>(), pair[1].get<double>()};
            }
        }
        for (const auto& u : doc.at("unit_generators")) f.unit_generators.emplace_back(u.get<std::vector<std::int64_t>>());
    } catch (const nlohmann::json::exception& ex) {
        throw PreconditionError(std::string("malformed field spec: ") + ex.what());
    }
    validate(f);
    return f;
}

nlohmann::ordered_json field_spec_to_json(const NumberFieldSpec& f) {
    const int d = f.basis_size();
    nlohmann::ordered_json doc;
    doc["id"] = f.id;
    doc["n"] = f.n;
    doc["pid"] = f.pid;
    auto tensor = nlohmann::ordered_json::array();
    for (int a = 0; a < d; ++a) {
        auto plane = nlohmann::ordered_json::array();
        for (int b = 0; b < d; ++b) {
            auto row = nlohmann::ordered_json::array();
            for (int c = 0; c < d; ++c) row.push_back(f.structure(a, b, c));
            plane.push_back(row);
        }
        tensor.push_back(plane);
    }
    doc["mul_tensor"] = tensor;
    auto emb = nlohmann::ordered_json::array();
    for (int j = 0; j < f.n; ++j) {
        auto row = nlohmann::ordered_json::array();
        for (int m = 0; m < d; ++m) row.push_back({f.embeddings(j, m).real(), f.embeddings(j, m).imag()});
        emb.push_back(row);
    }
    doc["embeddings"] = emb;
    auto units = nlohmann::ordered_json::array();
    for (const auto& u : f.unit_generators) {
        const auto c = u.to_int64();
        if (!c) throw PreconditionError("unit generator does not fit the 64-bit file format");
        units.push_back(*c);
    }
    doc["unit_generators"] = units;
    return doc;
}

NumberFieldSpec load_field_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot open field spec '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& ex) {
        throw PreconditionError("malformed field spec '" + path + "': " + ex.what());
    }
    return parse_field_spec(doc);
}

MatrixLattice field_lattice(const NumberFieldSpec& f) {
    std::vector<ComplexMatrix> basis;
    for (int m = 0; m < f.basis_size(); ++m) basis.push_back(f.embeddings.col(m).asDiagonal().toDenseMatrix());
    return MatrixLattice(std::move(basis));
}

RingElement ring_one(const NumberFieldSpec& f) {
    std::vector<BigInt> c(std::size_t(f.basis_size()), 0);
    c[0] = 1;
    return RingElement(std::move(c));
}

RingElement ring_add(const RingElement& x, const RingElement& y) {
    if (x.size() != y.size()) throw PreconditionError("ring_add: coordinate length mismatch");
    std::vector<BigInt> c(x.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = x.coords()[i] + y.coords()[i];
    return RingElement(std::move(c));
}

RingElement ring_neg(const RingElement& x) {
    std::vector<BigInt> c(x.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = -x.coords()[i];
    return RingElement(std::move(c));
}

RingElement ring_mul(const NumberFieldSpec& f, const RingElement& x, const RingElement& y) {
    const int d = f.basis_size();
    if (int(x.size()) != d || int(y.size()) != d) throw PreconditionError("ring_mul: coordinate length mismatch");
    const auto m = exact::multiplication_matrix<BigInt>(f.mul_tensor, d, x.coords());
    std::vector<BigInt> out(std::size_t(d), 0);
    for (int c = 0; c < d; ++c)
        for (int b = 0; b < d; ++b) out[std::size_t(c)] += m[std::size_t(c) * d + b] * y.coords()[std::size_t(b)];
    return RingElement(std::move(out));
}

Eigen::VectorXcd embed_diagonal(const NumberFieldSpec& f, std::span<const std::int64_t> coords) {
    Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(f.n);
    for (int m = 0; m < f.basis_size(); ++m)
        if (coords[std::size_t(m)] != 0) diag += double(coords[std::size_t(m)]) * f.embeddings.col(m);
    return diag;
}

ComplexMatrix embed(const NumberFieldSpec& f, const RingElement& x) {
    Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(f.n);
    for (int m = 0; m < f.basis_size(); ++m) diag += x.coords()[std::size_t(m)].convert_to<double>() * f.embeddings.col(m);
    return diag.asDiagonal().toDenseMatrix();
}

BigInt norm_abs(const NumberFieldSpec& f, const RingElement& x) {
    if (int(x.size()) != f.basis_size()) throw PreconditionError("norm_abs: coordinate length mismatch");
    return norm_of(f, x.coords());
}

bool is_unit(const NumberFieldSpec& f, const RingElement& x) { return norm_abs(f, x) == 1; }

std::optional<RingElement> exact_quotient(const NumberFieldSpec& f, const RingElement& y, const RingElement& x) {
    if (x.is_zero()) throw PreconditionError("exact_quotient: division by zero");
    const DivisorTest test(f, x.coords());
    if (!test.divides(y.coords())) return std::nullopt;
    return RingElement(test.quotient(y.coords()));
}

bool associates(const NumberFieldSpec& f, const RingElement& x, const RingElement& y) {
    if (x.is_zero() || y.is_zero()) throw PreconditionError("associates: elements must be nonzero");
    const auto z = exact_quotient(f, y, x);
    return z && is_unit(f, *z);
}

std::vector<RingElement> enumerate_integers_ball(const NumberFieldSpec& f, double radius, std::size_t budget) {
    std::vector<RingElement> out;
    for (const auto& p : enumerate_ball(field_lattice(f), radius, budget)) out.emplace_back(std::span(p.coords));
    return out;
}

namespace {

/// Units u with |σ_j(u)| ≤ bound[j] (up to a tiny relative slack), as coordinate vectors.
/// Units satisfy Π_j |σ_j(u)| = 1, so with a_j = ⌈log2|σ_j(u)|⌉ the exponents sum to a value
/// in [0, n-1]. Each admissible exponent vector is a cell |σ_j| ≤ 2^{a_j}, which sits inside
/// the ball Σ_j |σ_j|²/4^{a_j} ≤ n of a diagonally rescaled ψ(O_K).
std::set<IntVector> units_in_polydisc(const NumberFieldSpec& f, const std::vector<double>& bound, double report_radius,
                                      std::size_t budget) {
    const int n = f.n;
    std::vector<int> top(static_cast<std::size_t>(n)), bottom(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) top[std::size_t(j)] = int(std::ceil(std::log2(std::max(bound[std::size_t(j)], 0.5)))) + 1;
    const int top_sum = std::accumulate(top.begin(), top.end(), 0);
    for (int j = 0; j < n; ++j) bottom[std::size_t(j)] = -(top_sum - top[std::size_t(j)]) - 1;

    std::set<IntVector> found;
    const double cell_radius = 1.01 * std::sqrt(double(n));
    std::size_t visited = 0;
    std::vector<int> a = bottom;
    while (true) {
        const int sum = std::accumulate(a.begin(), a.end(), 0);
        if (sum >= -1 && sum <= n) {
            std::vector<ComplexMatrix> scaled;
            for (int m = 0; m < f.basis_size(); ++m) {
                Eigen::VectorXcd col = f.embeddings.col(m);
                for (int j = 0; j < n; ++j) col(j) *= std::ldexp(1.0, -a[std::size_t(j)]);
                scaled.push_back(col.asDiagonal().toDenseMatrix());
            }
            // A rescaled lattice basis stays independent, only its conditioning changes.
            std::optional<MatrixLattice> cell;
            try {
                cell.emplace(std::move(scaled), 0.0);
            } catch (const PreconditionError&) {
                std::ostringstream msg;
                msg << "unit search at radius " << report_radius << " exceeds double-precision range of the cell lattices";
                throw PreconditionError(msg.str());
            }
            visited += for_each_in_ball(
                *cell, cell_radius,
                [&](std::span<const std::int64_t> c, double) {
                    const Eigen::VectorXd mod = embed_diagonal(f, c).cwiseAbs();
                    for (int j = 0; j < n; ++j)
                        if (mod(j) > bound[std::size_t(j)] * (1 + 1e-9) + kBoundarySlack) return;
                    if (norm_int64(f, c) == 1) found.emplace(c.begin(), c.end());
                },
                budget);
            if (visited > budget) {
                std::ostringstream msg;
                msg << "enumeration budget exceeded while searching units within radius " << report_radius;
                throw BudgetExceeded(msg.str());
            }
        }
        int j = 0;
        while (j < n && a[std::size_t(j)] == top[std::size_t(j)]) {
            a[std::size_t(j)] = bottom[std::size_t(j)];
            ++j;
        }
        if (j == n) break;
        ++a[std::size_t(j)];
    }
    return found;
}

} // namespace

std::vector<RingElement> enumerate_units_ball(const NumberFieldSpec& f, double radius, std::size_t budget) {
    if (!(radius >= 0)) throw PreconditionError("ball radius must be nonnegative");
    const MatrixLattice lattice = field_lattice(f);
    const double accept = (radius + kBoundarySlack) * (radius + kBoundarySlack);
    std::vector<RingElement> out;
    for (const auto& c : units_in_polydisc(f, std::vector<double>(std::size_t(f.n), radius), radius, budget))
        if (lattice.squared_norm(c) <= accept) out.emplace_back(std::span(c));
    return out;
}

std::vector<std::vector<RingElement>> associate_classes(const NumberFieldSpec& f,
                                                        const std::vector<RingElement>& elements) {
    std::vector<RingElement> sorted = elements;
    std::sort(sorted.begin(), sorted.end());
    struct Pending {
        DivisorTest test;
        std::vector<RingElement> members;
    };
    std::map<BigInt, std::vector<std::size_t>> by_norm;
    std::vector<Pending> classes;
    for (const auto& x : sorted) {
        if (x.is_zero()) throw PreconditionError("associate_classes: elements must be nonzero");
        auto& bucket = by_norm[norm_abs(f, x)];
        bool placed = false;
        for (std::size_t idx : bucket) {
            // Equal norms plus y ∈ x·O_K make the quotient a unit.
            if (classes[idx].test.divides(x.coords())) {
                classes[idx].members.push_back(x);
                placed = true;
                break;
            }
        }
        if (!placed) {
            bucket.push_back(classes.size());
            classes.push_back({DivisorTest(f, x.coords()), {x}});
        }
    }
    std::vector<std::vector<RingElement>> out;
    out.reserve(classes.size());
    for (auto& c : classes) out.push_back(std::move(c.members));
    return out;
}

UnitOrbit unit_orbit_count(const NumberFieldSpec& f, const RingElement& x, double radius, std::size_t budget) {
    if (x.is_zero()) throw PreconditionError("unit_orbit_count: x must be nonzero");
    const MatrixLattice lattice = field_lattice(f);
    const auto accept = (radius + kBoundarySlack) * (radius + kBoundarySlack);
    const auto x64 = x.to_int64();
    if (!x64 || lattice.squared_norm(*x64) > accept)
        throw PreconditionError("unit_orbit_count: x must lie in the ball of radius R");

    UnitOrbit orbit;
    // ||ψ(u·x)||_F ≤ R forces |σ_j(u)| ≤ R/|σ_j(x)|, which is at most R^n.
    const Eigen::VectorXd mod = embed_diagonal(f, *x64).cwiseAbs();
    std::vector<double> bound(std::size_t(f.n));
    for (int j = 0; j < f.n; ++j) bound[std::size_t(j)] = (radius + kBoundarySlack) / mod(j);
    for (const auto& c : units_in_polydisc(f, bound, radius, budget)) {
        const auto ux = ring_mul(f, RingElement(std::span(c)), x).to_int64();
        if (ux && lattice.squared_norm(*ux) <= accept) ++orbit.count;
    }
    orbit.min_embedding = embed_diagonal(f, *x64).cwiseAbs().minCoeff();
    orbit.coordinate_floor = std::pow(radius, -(f.n - 1));
    orbit.coordinate_bound_holds = orbit.min_embedding >= orbit.coordinate_floor * (1 - 1e-12);
    return orbit;
}

ClassCensus census_ball(const NumberFieldSpec& f, double radius, std::size_t budget, const ElementCallback& on_element) {
    struct Open {
        DivisorTest test;
        CensusClass record;
    };
    std::vector<Open> classes;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> by_norm;
    ClassCensus census;
    census.radius = radius;
    for_each_in_ball(
        field_lattice(f), radius,
        [&](std::span<const std::int64_t> c, double) {
            if (std::all_of(c.begin(), c.end(), [](auto v) { return v == 0; })) return;
            const std::int64_t norm = norm_int64(f, c);
            ++census.element_count;
            if (on_element) on_element(c, norm);
            auto& bucket = by_norm[norm];
            for (std::size_t idx : bucket) {
                auto& open = classes[idx];
                if (open.test.divides(c)) {
                    ++open.record.size;
                    if (lex_less(c, open.record.representative)) open.record.representative.assign(c.begin(), c.end());
                    return;
                }
            }
            bucket.push_back(classes.size());
            classes.push_back({DivisorTest(f, to_big(c)), CensusClass{IntVector(c.begin(), c.end()), norm, 1}});
        },
        budget);
    census.classes.reserve(classes.size());
    for (auto& c : classes) census.classes.push_back(std::move(c.record));
    std::sort(census.classes.begin(), census.classes.end(),
              [](const CensusClass& a, const CensusClass& b) { return lex_less(a.representative, b.representative); });
    return census;
}

} // namespace stc
