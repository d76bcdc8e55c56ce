#include <catch2/catch_amalgamated.hpp>

#include "bps/cpoly.hpp"
#include "test_util.hpp"

using bps::cplx;
using bps::Poly;
using bps::Series;
using testutil::Rng;

namespace {
const Poly x6_minus_1{cplx(-1), cplx(0), cplx(0), cplx(0), cplx(0), cplx(0), cplx(1)};
}

TEST_CASE("poly evaluation") {
    CHECK(bps::eval(x6_minus_1, cplx(1.0)) == cplx(0.0));
    CHECK(bps::eval(x6_minus_1, cplx(0.0)) == cplx(-1.0));
    const Poly sq{cplx(4), cplx(-4), cplx(1)}; // (x-2)^2
    CHECK(bps::eval(sq, cplx(3.0)) == cplx(1.0));
}

TEST_CASE("poly degree bookkeeping") {
    CHECK(Poly().degree() == -1);
    CHECK(Poly{cplx(0.0)}.degree() == -1);
    CHECK((Poly{cplx(1), cplx(2)} - Poly{cplx(0), cplx(2)}).degree() == 0);
    CHECK(Poly::from_roots({cplx(1), cplx(-1)}).degree() == 2);
}

TEST_CASE("taylor shift matches direct evaluation") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<cplx> c(size_t(rng.integer(1, 7)));
        for (auto& v : c) v = rng.unit_box();
        Poly p(c);
        cplx x0 = rng.unit_box();
        Poly shifted = bps::taylor_shift(p, x0);
        cplx t = rng.unit_box();
        CHECK(std::abs(bps::eval(shifted, t) - bps::eval(p, x0 + t)) < 1e-12);
    }
}

TEST_CASE("roots of simple benchmark polynomials") {
    auto r1 = bps::roots(Poly{cplx(-1), cplx(0), cplx(1)});
    REQUIRE(r1.size() == 2);
    CHECK(testutil::cdist(r1[0].first, cplx(-1)) < 1e-12);
    CHECK(testutil::cdist(r1[1].first, cplx(1)) < 1e-12);
    CHECK(r1[0].second == 1);
    CHECK(r1[1].second == 1);

    auto r2 = bps::roots(x6_minus_1);
    REQUIRE(r2.size() == 6);
    for (const auto& [z, m] : r2) {
        CHECK(m == 1);
        CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);
        CHECK(std::abs(bps::eval(x6_minus_1, z)) < 1e-10);
    }
}

TEST_CASE("double root is recognized with multiplicity 2") {
    auto r = bps::roots(Poly{cplx(4), cplx(-4), cplx(1)});
    REQUIRE(r.size() == 1);
    CHECK(r[0].second == 2);
    CHECK(testutil::cdist(r[0].first, cplx(2)) < 1e-10);
}

TEST_CASE("roots recovers well-separated random root sets") {
    Rng rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        int n = rng.integer(2, 8);
        std::vector<cplx> chosen;
        while (int(chosen.size()) < n) {
            cplx cand = rng.disk(2.0);
            bool ok = true;
            for (cplx c : chosen)
                if (testutil::cdist(c, cand) < 5e-2) ok = false;
            if (ok) chosen.push_back(cand);
        }
        auto rec = bps::roots(Poly::from_roots(chosen));
        REQUIRE(rec.size() == chosen.size());
        for (cplx c : chosen) {
            double best = 1e9;
            for (const auto& [z, m] : rec) best = std::min(best, testutil::cdist(z, c));
            CHECK(best < 1e-10);
        }
    }
}

TEST_CASE("roots merges a seeded double root among bystanders") {
    // (x - 0.5)^2 * (x+1) * (x - 2i)
    Poly p = Poly::from_roots({cplx(0.5), cplx(0.5), cplx(-1), cplx(0, 2)});
    auto r = bps::roots(p);
    REQUIRE(r.size() == 3);
    int total = 0;
    bool found_double = false;
    for (const auto& [z, m] : r) {
        total += m;
        if (m == 2) {
            found_double = true;
            CHECK(testutil::cdist(z, cplx(0.5)) < 1e-9);
        }
    }
    CHECK(total == 4);
    CHECK(found_double);
}

TEST_CASE("roots requires positive degree") {
    CHECK_THROWS_AS(bps::roots(Poly{cplx(3.0)}), bps::NonConvergence);
}

TEST_CASE("derivative product rule is exact on integer polynomials") {
    Rng rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<cplx> a(size_t(rng.integer(1, 7))), b(size_t(rng.integer(1, 7)));
        for (auto& v : a) v = cplx(rng.integer(-9, 9), rng.integer(-9, 9));
        for (auto& v : b) v = cplx(rng.integer(-9, 9), rng.integer(-9, 9));
        Poly pa(a), pb(b);
        Poly lhs = bps::derivative(pa * pb);
        Poly rhs = bps::derivative(pa) * pb + pa * bps::derivative(pb);
        REQUIRE(lhs.degree() == rhs.degree());
        for (int k = 0; k <= lhs.degree(); ++k) CHECK(lhs.coeff(k) == rhs.coeff(k));
    }
}

TEST_CASE("series division basics") {
    // 1 / m  (constant quotient)
    Series one = Series::constant(cplx(1), 4);
    Series m = Series::constant(cplx(3), 4);
    Series q = bps::series_div(one, m);
    CHECK(testutil::cdist(q.coeff(0), cplx(1.0 / 3.0)) == 0.0);
    for (int k = 1; k <= 4; ++k) CHECK(q.coeff(k) == cplx(0.0));

    // z / 3 at order 1
    Series z = Series::identity(1);
    Series three = Series::constant(cplx(3), 1);
    Series qz = bps::series_div(z, three);
    CHECK(qz.coeff(0) == cplx(0.0));
    CHECK(testutil::cdist(qz.coeff(1), cplx(1.0 / 3.0)) == 0.0);

    CHECK_THROWS_AS(bps::series_div(one, Series::identity(4)), bps::DivByNonUnit);
}

TEST_CASE("series composition") {
    Series outer(4); // z^2
    outer.set_coeff(2, cplx(1));
    Series inner(4); // z + z^2
    inner.set_coeff(1, cplx(1));
    inner.set_coeff(2, cplx(1));
    Series c = bps::series_compose(outer, inner);
    CHECK(c.coeff(0) == cplx(0));
    CHECK(c.coeff(1) == cplx(0));
    CHECK(testutil::cdist(c.coeff(2), cplx(1)) < 1e-15);
    CHECK(testutil::cdist(c.coeff(3), cplx(2)) < 1e-15);
    CHECK(testutil::cdist(c.coeff(4), cplx(1)) < 1e-15);

    CHECK_THROWS_AS(bps::series_compose(outer, Series::constant(cplx(1), 4)),
                    bps::CompositionConstantTerm);
}

TEST_CASE("jet extracts k-th derivative at 0") {
    Series s(2);
    s.set_coeff(0, cplx(1));
    s.set_coeff(1, cplx(2));
    s.set_coeff(2, cplx(3));
    CHECK(bps::jet(s, 2) == cplx(6.0));
    CHECK(bps::jet(Series::identity(3), 0) == cplx(0.0));

    // jet(series_div(alpha, g), m-2) with alpha = 5, g = 2, m = 2
    Series alpha = Series::constant(cplx(5), 3);
    Series g = Series::constant(cplx(2), 3);
    CHECK(testutil::cdist(bps::jet(bps::series_div(alpha, g), 0), cplx(2.5)) == 0.0);

    CHECK_THROWS_AS(bps::jet(s, 3), bps::OrderTooLow);
}

TEST_CASE("series mul/div invert each other to round-off") {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        Series a(8), b(8);
        for (int k = 0; k <= 8; ++k) {
            a.set_coeff(k, rng.unit_box());
            b.set_coeff(k, rng.unit_box());
        }
        b.set_coeff(0, b.coeff(0) / std::abs(b.coeff(0))); // unit-modulus divisor seed
        Series back = bps::series_mul(bps::series_div(a, b), b);
        for (int k = 0; k <= 8; ++k) CHECK(testutil::cdist(back.coeff(k), a.coeff(k)) < 1e-12);
    }
}

TEST_CASE("series sqrt squares back") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        Series s(10);
        s.set_coeff(0, cplx(1.0) + 0.3 * rng.unit_box());
        for (int k = 1; k <= 10; ++k) s.set_coeff(k, 0.5 * rng.unit_box());
        bps::cplx r0 = std::sqrt(s.coeff(0));
        Series r = bps::series_sqrt(s, r0);
        Series sq = bps::series_mul(r, r);
        for (int k = 0; k <= 10; ++k) CHECK(testutil::cdist(sq.coeff(k), s.coeff(k)) < 1e-12);
    }
}

TEST_CASE("series arithmetic truncates to the smaller order") {
    Series a(8), b(3);
    a.set_coeff(8, cplx(1));
    b.set_coeff(3, cplx(1));
    CHECK((a + b).order() == 3);
    CHECK(bps::series_mul(a, b).order() == 3);
}
