#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "stc/numfield.hpp"

#include <random>
#include <set>

using namespace stc;

namespace {

const NumberFieldSpec& zeta8() {
    static const NumberFieldSpec f = catalog_field("Q(zeta8)");
    return f;
}

const NumberFieldSpec& isqrt5() {
    static const NumberFieldSpec f = catalog_field("Q(i,sqrt5)");
    return f;
}

// |det ψ(x)|² in floating point, independent of the exact regular representation.
double numeric_norm(const NumberFieldSpec& f, const RingElement& x) {
    return std::norm(embed(f, x).diagonal().prod());
}

RingElement random_element(std::mt19937_64& rng, int lo, int hi) {
    std::uniform_int_distribution<std::int64_t> d(lo, hi);
    return RingElement{d(rng), d(rng), d(rng), d(rng)};
}

RingElement zeta_power(int k) {
    const NumberFieldSpec& f = zeta8();
    RingElement out = ring_one(f);
    for (int i = 0; i < k; ++i) out = ring_mul(f, out, RingElement{0, 1, 0, 0});
    return out;
}

// Units by filtering the whole ball.
std::set<RingElement> naive_units(const NumberFieldSpec& f, double radius) {
    std::set<RingElement> out;
    for (const auto& x : enumerate_integers_ball(f, radius))
        if (!x.is_zero() && is_unit(f, x)) out.insert(x);
    return out;
}

// y ~ x by trying every unit u in the ball that ψ(y)ψ(x)^{-1} must lie in.
bool brute_associates(const NumberFieldSpec& f, const RingElement& x, const RingElement& y) {
    const Eigen::VectorXcd ratio = embed(f, y).diagonal().cwiseQuotient(embed(f, x).diagonal());
    for (const auto& u : naive_units(f, ratio.norm() + 1e-6))
        if (ring_mul(f, u, x) == y) return true;
    return false;
}

} // namespace

TEST_CASE("catalog fields") {
    SUBCASE("Q(zeta8): the Galois conjugate fixes i = zeta^2") {
        const RingElement z2{0, 0, 1, 0};
        CHECK(zeta_power(2) == z2);
        const ComplexMatrix e = embed(zeta8(), z2);
        CHECK(std::abs(e(0, 0) - std::complex<double>(0, 1)) < 1e-12);
        CHECK(std::abs(e(1, 1) - std::complex<double>(0, 1)) < 1e-12);
    }
    SUBCASE("Q(i,sqrt5): theta^2 = theta + 1") {
        const RingElement theta{0, 1, 0, 0};
        CHECK(ring_mul(isqrt5(), theta, theta) == RingElement{1, 1, 0, 0});
    }
    SUBCASE("unknown id") { CHECK_THROWS_AS(catalog_field("Q(sqrt2)"), PreconditionError); }
    SUBCASE("declared data") {
        CHECK(catalog_ids().size() == 2);
        for (const auto& id : catalog_ids()) {
            const auto f = catalog_field(id);
            CHECK(f.n == 2);
            CHECK(f.pid);
            for (const auto& u : f.unit_generators) CHECK(is_unit(f, u));
        }
    }
}

TEST_CASE("validation names the violated triple") {
    NumberFieldSpec bad = zeta8();
    // Break commutativity at (1, 2, 3).
    bad.mul_tensor[(1 * 4 + 2) * 4 + 3] = 0;
    try {
        validate(bad);
        FAIL("expected failure");
    } catch (const PreconditionError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("inconsistent field spec") != std::string::npos);
        CHECK(msg.find("(1,2,3)") != std::string::npos);
    }

    NumberFieldSpec wrong_unit = isqrt5();
    wrong_unit.unit_generators.push_back(RingElement{1, 1, 0, 0} /* 1 + theta = theta^2 is fine */);
    CHECK_NOTHROW(validate(wrong_unit));
    wrong_unit.unit_generators.push_back(RingElement{2, 0, 0, 0});
    CHECK_THROWS_WITH_AS(validate(wrong_unit), doctest::Contains("inconsistent field spec"), PreconditionError);

    NumberFieldSpec bad_embedding = isqrt5();
    bad_embedding.embeddings(1, 1) = bad_embedding.embeddings(0, 1);
    CHECK_THROWS_WITH_AS(validate(bad_embedding), doctest::Contains("inconsistent field spec"), PreconditionError);
}

TEST_CASE("field spec json round trip") {
    for (const auto& id : catalog_ids()) {
        const auto f = catalog_field(id);
        const nlohmann::json doc = nlohmann::json::parse(field_spec_to_json(f).dump());
        const auto g = parse_field_spec(doc);
        CHECK(g.id == f.id);
        CHECK(g.n == f.n);
        CHECK(g.mul_tensor == f.mul_tensor);
        CHECK((g.embeddings - f.embeddings).norm() == 0.0);
        CHECK(g.unit_generators == f.unit_generators);
    }
    nlohmann::json broken = nlohmann::json::parse(field_spec_to_json(zeta8()).dump());
    broken["mul_tensor"][0][0][0] = 2;
    CHECK_THROWS_WITH_AS(parse_field_spec(broken), doctest::Contains("(0,0,0)"), PreconditionError);
    broken.erase("n");
    CHECK_THROWS_WITH_AS(parse_field_spec(broken), doctest::Contains("malformed"), PreconditionError);
    CHECK_THROWS_AS(load_field_spec("/nonexistent/field.json"), PreconditionError);
}

TEST_CASE("embed") {
    for (const auto& id : catalog_ids()) {
        const auto f = catalog_field(id);
        CHECK((embed(f, ring_one(f)) - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);
    }
    const std::complex<double> z = std::polar(1.0, std::numbers::pi / 4);
    const ComplexMatrix ez = embed(zeta8(), RingElement{0, 1, 0, 0});
    CHECK(std::abs(ez(0, 0) - z) < 1e-14);
    CHECK(std::abs(ez(1, 1) + z) < 1e-14);
    CHECK(std::abs(ez(0, 1)) == 0.0);
    const ComplexMatrix et = embed(isqrt5(), RingElement{0, 1, 0, 0});
    CHECK(et(0, 0).real() == doctest::Approx(1.6180339887498949));
    CHECK(et(1, 1).real() == doctest::Approx(-0.6180339887498949));
}

TEST_CASE("ring_mul") {
    std::mt19937_64 rng(11);
    for (const auto& id : catalog_ids()) {
        const auto f = catalog_field(id);
        const auto x = random_element(rng, -9, 9);
        CHECK(ring_mul(f, x, ring_one(f)) == x);
    }
    CHECK(ring_mul(zeta8(), RingElement{0, 1, 0, 0}, RingElement{0, 0, 0, 1}) == RingElement{-1, 0, 0, 0});
    CHECK(zeta_power(8) == ring_one(zeta8()));
    const RingElement theta{0, 1, 0, 0};
    CHECK(ring_mul(isqrt5(), theta, RingElement{1, -1, 0, 0}) == RingElement{-1, 0, 0, 0});
    CHECK(ring_add(theta, ring_neg(theta)).is_zero());
}

TEST_CASE("norm_abs") {
    const auto& f = zeta8();
    CHECK(norm_abs(f, RingElement{0, 0, 0, 0}) == 0);
    CHECK(norm_abs(f, ring_one(f)) == 1);
    CHECK(norm_abs(f, RingElement{2, 0, 0, 0}) == 16);
    CHECK(norm_abs(f, RingElement{1, 1, 0, -1}) == 1);
    CHECK(norm_abs(f, RingElement{1, 1, 0, 0}) == 2);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t)
        for (const auto& id : catalog_ids()) {
            const auto g = catalog_field(id);
            const auto x = random_element(rng, -20, 20);
            const double exact = norm_abs(g, x).convert_to<double>();
            CHECK(std::abs(exact - numeric_norm(g, x)) <= 1e-8 * std::max(1.0, exact));
        }
}

TEST_CASE("norm promotion beyond 64 bits") {
    const auto& f = zeta8();
    const std::int64_t big = 3'000'000'000LL;
    const RingElement x{big, big + 1, -big, 7};
    const RingElement y{-big, 5, big - 3, big};
    const BigInt nx = norm_abs(f, x), ny = norm_abs(f, y);
    CHECK(nx > BigInt(std::numeric_limits<std::int64_t>::max()));
    CHECK(norm_abs(f, ring_mul(f, x, y)) == nx * ny);
    CHECK(std::abs(nx.convert_to<double>() / numeric_norm(f, x) - 1.0) < 1e-8);
    // A scalar m has norm m^4 exactly.
    const BigInt m("123456789012345");
    CHECK(norm_abs(f, RingElement(std::vector<BigInt>{m, 0, 0, 0})) == m * m * m * m);
}

TEST_CASE("is_unit") {
    const auto& f = zeta8();
    CHECK(is_unit(f, ring_one(f)));
    CHECK(is_unit(f, RingElement{0, 1, 0, 0}));
    CHECK_FALSE(is_unit(f, RingElement{1, 1, 0, 0}));
    CHECK_FALSE(is_unit(f, RingElement{0, 0, 0, 0}));
    CHECK(is_unit(isqrt5(), RingElement{0, 1, 0, 0}));
}

TEST_CASE("associates") {
    const auto& f = zeta8();
    const RingElement a{1, 1, 0, 0};
    CHECK(associates(f, a, a));
    CHECK(associates(f, a, ring_mul(f, RingElement{0, 1, 0, 0}, a)));
    CHECK_FALSE(associates(f, a, RingElement{2, 0, 0, 0}));
    const RingElement fund{1, 1, 0, -1};
    CHECK(associates(f, a, ring_mul(f, ring_mul(f, fund, fund), a)));
    CHECK(associates(f, RingElement{2, 0, 0, 0}, ring_mul(f, ring_mul(f, a, a), ring_mul(f, a, a))));
    CHECK_THROWS_AS(associates(f, a, RingElement{0, 0, 0, 0}), PreconditionError);

    const auto q = exact_quotient(f, RingElement{2, 0, 0, 0}, a);
    REQUIRE(q.has_value());
    CHECK(ring_mul(f, *q, a) == RingElement{2, 0, 0, 0});
    CHECK_FALSE(exact_quotient(f, ring_one(f), a).has_value());
}

TEST_CASE("associates agrees with a brute-force unit search") {
    std::mt19937_64 rng(17);
    for (const auto& id : catalog_ids()) {
        const auto f = catalog_field(id);
        const auto units = naive_units(f, 6.0);
        const std::vector<RingElement> ulist(units.begin(), units.end());
        for (int t = 0; t < 40; ++t) {
            RingElement x = random_element(rng, -3, 3);
            if (x.is_zero()) continue;
            RingElement y = random_element(rng, -3, 3);
            if (t % 2 == 0) y = ring_mul(f, ulist[rng() % ulist.size()], x);
            if (y.is_zero()) continue;
            CHECK(associates(f, x, y) == brute_associates(f, x, y));
        }
    }
}

TEST_CASE("associates is an equivalence relation") {
    std::mt19937_64 rng(23);
    for (const auto& id : catalog_ids()) {
        const auto f = catalog_field(id);
        const auto units = naive_units(f, 4.0);
        const std::vector<RingElement> ulist(units.begin(), units.end());
        // A few seeds and their unit multiples so that related pairs actually occur.
        std::vector<RingElement> sample;
        while (sample.size() < 50) {
            RingElement x = random_element(rng, -2, 2);
            if (x.is_zero()) continue;
            sample.push_back(x);
            sample.push_back(ring_mul(f, ulist[rng() % ulist.size()], x));
        }
        const std::size_t m = sample.size();
        std::vector<std::vector<char>> rel(m, std::vector<char>(m));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) rel[i][j] = associates(f, sample[i], sample[j]);
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(rel[i][i]);
            for (std::size_t j = 0; j < m; ++j) {
                CHECK(rel[i][j] == rel[j][i]);
                if (rel[i][j])
                    for (std::size_t k = 0; k < m; ++k)
                        if (rel[j][k]) CHECK(rel[i][k]);
            }
        }
    }
}

TEST_CASE("homomorphism and norm multiplicativity fuzz") {
    std::mt19937_64 rng(5);
    for (const auto& id : catalog_ids()) {
        const auto f = catalog_field(id);
        int failures = 0;
        for (int t = 0; t < 1000; ++t) {
            const auto x = random_element(rng, -20, 20);
            const auto y = random_element(rng, -20, 20);
            const auto xy = ring_mul(f, x, y);
            const ComplexMatrix lhs = embed(f, xy), rhs = embed(f, x) * embed(f, y);
            if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff())) ++failures;
            if (norm_abs(f, xy) != norm_abs(f, x) * norm_abs(f, y)) ++failures;
        }
        CHECK(failures == 0);
    }
}

TEST_CASE("unit multiples keep the norm") {
    std::mt19937_64 rng(29);
    for (const auto& id : catalog_ids()) {
        const auto f = catalog_field(id);
        for (const auto& u : naive_units(f, 5.0))
            for (int t = 0; t < 5; ++t) {
                const auto x = random_element(rng, -20, 20);
                CHECK(norm_abs(f, ring_mul(f, u, x)) == norm_abs(f, x));
            }
    }
}

TEST_CASE("enumerate_integers_ball") {
    const auto& f = zeta8();
    const auto tiny = enumerate_integers_ball(f, 0.5);
    REQUIRE(tiny.size() == 1);
    CHECK(tiny[0].is_zero());

    const auto small = enumerate_integers_ball(f, std::sqrt(2.0) + 0.01);
    std::set<RingElement> expected{RingElement{0, 0, 0, 0}};
    for (int k = 0; k < 8; ++k) expected.insert(zeta_power(k));
    CHECK(std::set<RingElement>(small.begin(), small.end()) == expected);
    CHECK(std::is_sorted(small.begin(), small.end()));

    const double ratio = double(enumerate_integers_ball(f, 20).size()) / double(enumerate_integers_ball(f, 10).size());
    CHECK(ratio == doctest::Approx(16).epsilon(0.15));

    const auto fit = count_scaling_fit(field_lattice(f), std::vector<double>{4, 8, 12, 16, 20, 24});
    CHECK(fit.k_hat == doctest::Approx(4).epsilon(0.05));
}

TEST_CASE("minimum determinant and embedding floor at R = 10") {
    for (const auto& id : catalog_ids()) {
        const auto f = catalog_field(id);
        std::size_t units = 0;
        for (const auto& x : enumerate_integers_ball(f, 10)) {
            if (x.is_zero()) continue;
            const BigInt nx = norm_abs(f, x);
            CHECK(nx >= 1);
            if (nx == 1) ++units;
            CHECK((nx == 1) == is_unit(f, x));
            // |det ψ(x)| ≥ 1 and AM-GM give ||ψ(x)||_F ≥ √n.
            CHECK(embed(f, x).norm() >= std::sqrt(2.0) - 1e-12);
            // Every embedding coordinate is at least 1/R^{n-1}.
            CHECK(embed(f, x).diagonal().cwiseAbs().minCoeff() >= 0.1 * (1 - 1e-12));
        }
        CHECK(units == naive_units(f, 10).size());
    }
}

TEST_CASE("enumerate_units_ball") {
    for (const auto& id : catalog_ids()) {
        const auto f = catalog_field(id);
        CHECK(enumerate_units_ball(f, 1.4).empty());
        CHECK(enumerate_units_ball(f, 0.0).empty());
        for (double r : {std::sqrt(2.0), 3.0, 7.5, 20.0, 30.0}) {
            const auto units = enumerate_units_ball(f, r);
            CHECK(std::set<RingElement>(units.begin(), units.end()) == naive_units(f, r));
            CHECK(std::is_sorted(units.begin(), units.end()));
            for (const auto& u : units) CHECK(norm_abs(f, u) == 1);
        }
    }
    CHECK(enumerate_units_ball(zeta8(), std::sqrt(2.0)).size() == 8);
    CHECK(enumerate_units_ball(isqrt5(), std::sqrt(2.0)).size() == 4);
    CHECK_THROWS_AS(enumerate_units_ball(zeta8(), -1.0), PreconditionError);
}

TEST_CASE("unit counts grow like log R") {
    const auto& f = zeta8();
    std::vector<double> lr, counts;
    for (double r = 4; r <= 256; r *= 2) {
        lr.push_back(std::log(r));
        counts.push_back(double(enumerate_units_ball(f, r).size()));
    }
    const LinearFit line = fit_line(lr, counts);
    double worst = 0;
    for (std::size_t i = 0; i < lr.size(); ++i)
        worst = std::max(worst, std::abs(counts[i] - line.intercept - line.slope * lr[i]) / counts[i]);
    CHECK(line.slope > 0);
    CHECK(worst < 0.2);
}

TEST_CASE("associate_classes") {
    const auto& f = zeta8();
    std::vector<RingElement> torsion;
    for (int k = 0; k < 8; ++k) torsion.push_back(zeta_power(k));
    const auto one = associate_classes(f, torsion);
    REQUIRE(one.size() == 1);
    CHECK(one[0].front() == RingElement{-1, 0, 0, 0});

    const auto two = associate_classes(f, {RingElement{1, 1, 0, 0}, RingElement{2, 0, 0, 0}});
    CHECK(two.size() == 2);
    CHECK(associate_classes(f, {RingElement{3, 1, 0, 2}}).size() == 1);
    CHECK_THROWS_AS(associate_classes(f, {RingElement{0, 0, 0, 0}}), PreconditionError);

    // Partition matches the pairwise relation and classes share one norm.
    const auto ball = enumerate_integers_ball(f, 3.5);
    std::vector<RingElement> nonzero;
    for (const auto& x : ball)
        if (!x.is_zero()) nonzero.push_back(x);
    const auto classes = associate_classes(f, nonzero);
    std::size_t total = 0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        total += classes[i].size();
        CHECK(std::is_sorted(classes[i].begin(), classes[i].end()));
        for (const auto& y : classes[i]) {
            CHECK(norm_abs(f, y) == norm_abs(f, classes[i].front()));
            CHECK(associates(f, classes[i].front(), y));
        }
        if (i > 0) {
            CHECK(classes[i - 1].front() < classes[i].front());
            CHECK_FALSE(associates(f, classes[i - 1].front(), classes[i].front()));
        }
    }
    CHECK(total == nonzero.size());
}

TEST_CASE("census_ball agrees with associate_classes") {
    for (const auto& id : catalog_ids()) {
        const auto f = catalog_field(id);
        std::vector<RingElement> nonzero;
        for (const auto& x : enumerate_integers_ball(f, 5.0))
            if (!x.is_zero()) nonzero.push_back(x);
        const auto classes = associate_classes(f, nonzero);
        std::size_t seen = 0;
        const ClassCensus census = census_ball(f, 5.0, kDefaultEnumerationBudget,
                                               [&](std::span<const std::int64_t> c, std::int64_t norm) {
                                                   ++seen;
                                                   CHECK(BigInt(norm) == norm_abs(f, RingElement(c)));
                                               });
        CHECK(seen == nonzero.size());
        CHECK(census.element_count == nonzero.size());
        REQUIRE(census.classes.size() == classes.size());
        for (std::size_t i = 0; i < classes.size(); ++i) {
            CHECK(RingElement(std::span<const std::int64_t>(census.classes[i].representative)) == classes[i].front());
            CHECK(census.classes[i].size == classes[i].size());
            CHECK(BigInt(census.classes[i].norm) == norm_abs(f, classes[i].front()));
        }
    }
}

TEST_CASE("unit_orbit_count") {
    const auto& f = zeta8();
    const auto orbit = unit_orbit_count(f, ring_one(f), std::sqrt(2.0));
    CHECK(orbit.count == 8);
    CHECK(orbit.coordinate_bound_holds);

    // The orbit inside the R-ball is exactly the part of the class found by enumeration.
    const RingElement x{1, 1, 0, 0};
    for (double r : {3.0, 6.0}) {
        std::size_t direct = 0;
        for (const auto& y : enumerate_integers_ball(f, r))
            if (!y.is_zero() && associates(f, x, y)) ++direct;
        CHECK(unit_orbit_count(f, x, r).count == direct);
    }
    CHECK_THROWS_AS(unit_orbit_count(f, RingElement{0, 0, 0, 0}, 3.0), PreconditionError);
    CHECK_THROWS_AS(unit_orbit_count(f, RingElement{5, 0, 0, 0}, 3.0), PreconditionError);

    std::vector<double> lr, counts;
    for (double r = 2; r <= 16; r *= 2) {
        lr.push_back(std::log(r));
        counts.push_back(double(unit_orbit_count(f, ring_one(f), r).count));
    }
    for (std::size_t i = 1; i < counts.size(); ++i) CHECK(counts[i] >= counts[i - 1]);
    // Growth per doubling stays bounded (log-like, not polynomial).
    CHECK(counts.back() / counts.front() < 2 * lr.back() / lr.front());
}

TEST_CASE("minimal element of the Q(i,sqrt5) lattice is psi(1)") {
    const auto m = min_frobenius_element(field_lattice(isqrt5()));
    CHECK(m.coords == IntVector{1, 0, 0, 0});
    CHECK(m.norm == doctest::Approx(std::sqrt(2.0)));
}
