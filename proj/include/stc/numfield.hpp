#pragma once

// Rings of integers O_K of cyclic extensions K/Q(i) with exact arithmetic, the
// relative canonical embedding ψ(x) = diag(σ_1(x), …, σ_n(x)), and unit /
// associate bookkeeping on balls ||ψ(x)||_F ≤ R.

#include "stc/exact.hpp"
#include "stc/lattice.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>

namespace stc {

/// An element of O_K as integer coordinates over the integral basis w_1, …, w_{2n}.
class RingElement {
public:
    RingElement() = default;
    explicit RingElement(std::vector<BigInt> coords) : coords_(std::move(coords)) {}
    explicit RingElement(std::span<const std::int64_t> coords) : coords_(coords.begin(), coords.end()) {}
    RingElement(std::initializer_list<std::int64_t> coords) : coords_(coords.begin(), coords.end()) {}

    const std::vector<BigInt>& coords() const { return coords_; }
    std::size_t size() const { return coords_.size(); }
    bool is_zero() const;
    /// Coordinates as int64 when every one fits.
    std::optional<IntVector> to_int64() const;

    friend bool operator==(const RingElement&, const RingElement&) = default;
    /// Signed lexicographic order on coordinates.
    friend bool operator<(const RingElement& a, const RingElement& b) {
        return std::lexicographical_compare(a.coords_.begin(), a.coords_.end(), b.coords_.begin(), b.coords_.end());
    }

private:
    std::vector<BigInt> coords_;
};

std::ostream& operator<<(std::ostream& os, const RingElement& x);

/// Exact description of a degree-n cyclic extension K/Q(i): integral basis of size 2n
/// (w_1 = 1), structure constants, embedding table and declared unit generators.
struct NumberFieldSpec {
    std::string id;
    int n = 0;
    /// w_a·w_b = Σ_c mul_tensor[(a·2n + b)·2n + c]·w_c
    std::vector<std::int64_t> mul_tensor;
    /// Entry (j, m) = σ_j(w_m), shape n × 2n.
    ComplexMatrix embeddings;
    std::vector<RingElement> unit_generators;
    bool pid = false;

    int basis_size() const { return 2 * n; }
    std::int64_t structure(int a, int b, int c) const {
        const auto d = std::size_t(basis_size());
        return mul_tensor[(std::size_t(a) * d + std::size_t(b)) * d + std::size_t(c)];
    }
};

/// Checks shape, identity element, commutativity, associativity, embedding
/// multiplicativity (1e-10) and |N(u)| = 1 for the declared units.
/// Throws PreconditionError("inconsistent field spec: ...") naming the violated triple.
void validate(const NumberFieldSpec& field);

/// "Q(zeta8)" or "Q(i,sqrt5)".
NumberFieldSpec catalog_field(const std::string& id);
std::vector<std::string> catalog_ids();

NumberFieldSpec parse_field_spec(const nlohmann::json& doc);
nlohmann::ordered_json field_spec_to_json(const NumberFieldSpec& field);
NumberFieldSpec load_field_spec(const std::string& path);

/// ψ(O_K) as a rank-2n lattice in M_n(C) with basis ψ(w_1), …, ψ(w_{2n}).
MatrixLattice field_lattice(const NumberFieldSpec& field);

RingElement ring_one(const NumberFieldSpec& field);
RingElement ring_add(const RingElement& x, const RingElement& y);
RingElement ring_neg(const RingElement& x);
RingElement ring_mul(const NumberFieldSpec& field, const RingElement& x, const RingElement& y);

ComplexMatrix embed(const NumberFieldSpec& field, const RingElement& x);
/// Diagonal of ψ(x) for int64 coordinates.
Eigen::VectorXcd embed_diagonal(const NumberFieldSpec& field, std::span<const std::int64_t> coords);

/// |N_{K/Q}(x)| as the absolute determinant of multiplication-by-x.
BigInt norm_abs(const NumberFieldSpec& field, const RingElement& x);
bool is_unit(const NumberFieldSpec& field, const RingElement& x);
/// True iff y = u·x for some unit u; x and y must be nonzero.
bool associates(const NumberFieldSpec& field, const RingElement& x, const RingElement& y);
/// y / x when it lies in O_K.
std::optional<RingElement> exact_quotient(const NumberFieldSpec& field, const RingElement& y, const RingElement& x);

/// Elements with ||ψ(x)||_F ≤ R, ordered lexicographically.
std::vector<RingElement> enumerate_integers_ball(const NumberFieldSpec& field, double radius,
                                                 std::size_t budget = kDefaultEnumerationBudget);

/// Units with ||ψ(u)||_F ≤ R, ordered lexicographically. Units satisfy Π_j |σ_j(u)| = 1, so
/// the search covers that hypersurface with dyadic cells |σ_j| ≤ 2^{a_j}, each a small ball
/// of a rescaled ψ(O_K), instead of filtering the whole R-ball.
std::vector<RingElement> enumerate_units_ball(const NumberFieldSpec& field, double radius,
                                              std::size_t budget = kDefaultEnumerationBudget);

/// Partition into associate classes; each class is sorted, and its first element
/// (the lexicographically smallest) is the representative. Classes are ordered by representative.
std::vector<std::vector<RingElement>> associate_classes(const NumberFieldSpec& field,
                                                        const std::vector<RingElement>& elements);

struct UnitOrbit {
    std::size_t count = 0;
    /// min_j |σ_j(x)| and the guaranteed floor 1/R^{n-1}.
    double min_embedding = 0.0;
    double coordinate_floor = 0.0;
    bool coordinate_bound_holds = false;
};

/// |{u ∈ U_K : ||ψ(u·x)||_F ≤ R}|. Candidates satisfy |σ_j(u)| ≤ R/|σ_j(x)| ≤ R^n, so they
/// lie in the ball of radius √n·R^n; the search uses the per-embedding bounds directly.
UnitOrbit unit_orbit_count(const NumberFieldSpec& field, const RingElement& x, double radius,
                           std::size_t budget = kDefaultEnumerationBudget);

/// One associate class met inside a ball: its representative, norm and population A_i.
struct CensusClass {
    IntVector representative;
    std::int64_t norm = 0;
    std::size_t size = 0;
};

/// Associate-class census of all nonzero elements of an R-ball, streamed without storing elements.
struct ClassCensus {
    double radius = 0.0;
    std::size_t element_count = 0;
    std::vector<CensusClass> classes; ///< ordered by representative
};

/// `on_element(coords, norm)` sees every nonzero element once.
using ElementCallback = std::function<void(std::span<const std::int64_t>, std::int64_t)>;

ClassCensus census_ball(const NumberFieldSpec& field, double radius, std::size_t budget = kDefaultEnumerationBudget,
                        const ElementCallback& on_element = {});

} // namespace stc
