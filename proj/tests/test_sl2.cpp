#include <catch2/catch_amalgamated.hpp>

#include "bps/sl2.hpp"
#include "test_util.hpp"

using namespace bps;
using testutil::Rng;

namespace {

Curve real_curve() {
    // y^2 = (x^2-1)(x^2-4)(x^2-9): six real Weierstrass values
    return Curve(Poly::from_roots({cplx(1), cplx(-1), cplx(2), cplx(-2), cplx(3), cplx(-3)}));
}

Curve random_curve(int g, Rng& rng) {
    std::vector<cplx> roots;
    while (int(roots.size()) < 2 * g + 2) {
        cplx cand = rng.disk(2.0);
        bool ok = true;
        for (cplx r : roots)
            if (std::abs(r - cand) < 0.15) ok = false;
        if (ok) roots.push_back(cand);
    }
    return Curve(Poly::from_roots(roots));
}

Poly random_poly(Rng& rng, int max_deg) {
    std::vector<cplx> c(size_t(max_deg) + 1);
    for (auto& v : c) v = rng.unit_box();
    if (std::abs(c.back()) < 0.1) c.back() += cplx(0.5);
    return Poly(c);
}

/// Independent abelian oracle: composite Simpson quadrature of f(x)/y dx
/// along the path, with its own branch continuation.
cplx abelian_integral(const Curve& c, const Poly& f, const CurvePath& path, int n_per_seg) {
    const auto& pts = path.waypoints();
    cplx total(0.0);
    cplx y_prev = double(path.start_sheet()) * std::sqrt(eval(c.P(), pts.front()));
    for (size_t s = 0; s + 1 < pts.size(); ++s) {
        const cplx a = pts[s], d = pts[s + 1] - pts[s];
        std::vector<cplx> vals;
        for (int k = 0; k <= 2 * n_per_seg; ++k) {
            cplx x = a + d * (double(k) / (2 * n_per_seg));
            cplx w = std::sqrt(eval(c.P(), x));
            cplx y = (std::abs(w - y_prev) <= std::abs(-w - y_prev)) ? w : -w;
            y_prev = y;
            vals.push_back(eval(f, x) / y);
        }
        cplx acc = vals.front() + vals.back();
        for (int k = 1; k < 2 * n_per_seg; ++k) acc += (k % 2 ? 4.0 : 2.0) * vals[size_t(k)];
        total += acc * d / (6.0 * double(n_per_seg));
    }
    return total;
}

} // namespace

TEST_CASE("theta specializes correctly at the coordinate points") {
    Rng rng(101);
    Curve c = random_curve(2, rng);
    Poly f11 = random_poly(rng, 1), f12 = random_poly(rng, 1), f21 = random_poly(rng, 1);
    Sl2System sys(c, f11, f12, f21);

    OneForm t10 = theta(c, sys, ProjPoint(cplx(1), cplx(0)));
    REQUIRE(t10.f().degree() == f21.degree());
    for (int k = 0; k <= f21.degree(); ++k)
        CHECK(std::abs(t10.f().coeff(k) - f21.coeff(k)) < 1e-15);

    OneForm t01 = theta(c, sys, ProjPoint(cplx(0), cplx(1)));
    for (int k = 0; k <= f12.degree(); ++k)
        CHECK(std::abs(t01.f().coeff(k) + f12.coeff(k)) < 1e-15);

    // homogeneity: Theta(lambda c) = lambda^2 Theta(c) before normalization
    cplx c1 = rng.unit_box(), c2 = rng.unit_box(), lam(0.7, -0.4);
    Poly th1 = c1 * c1 * f21 - 2.0 * c1 * c2 * f11 - c2 * c2 * f12;
    cplx l1 = lam * c1, l2 = lam * c2;
    Poly th2 = l1 * l1 * f21 - 2.0 * l1 * l2 * f11 - l2 * l2 * f12;
    for (int k = 0; k <= th1.degree(); ++k)
        CHECK(std::abs(th2.coeff(k) - lam * lam * th1.coeff(k)) < 1e-14);
}

TEST_CASE("branch divisor via theta and the one-form divisor") {
    Rng rng(103);
    Curve c = random_curve(2, rng);
    cplx x0 = rng.disk(1.5);
    while (c.weierstrass_gap(x0) < 0.2) x0 = rng.disk(1.5);
    // a21 = (x - x0) dx/y, c = [1:0]
    Sl2System sys(c, Poly(), Poly(), Poly{-x0, cplx(1)});
    Divisor D = branch_divisor(c, sys, ProjPoint(cplx(1), cplx(0)));
    CHECK(D.degree() == 2);
    cplx y0 = std::sqrt(eval(c.P(), x0));
    CHECK(D.multiplicity(CurvePoint::affine(x0, y0)) == 1);
    CHECK(D.multiplicity(CurvePoint::affine(x0, -y0)) == 1);

    // degenerate c for a system with a21 = 0
    CHECK_THROWS_AS(branch_divisor(c, Sl2System(c, Poly(), random_poly(rng, 1), Poly()),
                                   ProjPoint(cplx(1), cplx(0))),
                    ZeroTheta);
}

TEST_CASE("branch divisor is projectively well defined") {
    Rng rng(211);
    Curve c = random_curve(3, rng);
    Sl2System sys(c, random_poly(rng, 2), random_poly(rng, 2), random_poly(rng, 2));
    cplx c1 = rng.unit_box(), c2 = rng.unit_box(), lam(1.7, 0.9);
    Divisor D1 = branch_divisor(c, sys, ProjPoint(c1, c2));
    Divisor D2 = branch_divisor(c, sys, ProjPoint(lam * c1, lam * c2));
    REQUIRE(D1.degree() == D2.degree());
    for (const auto& [pt, m] : D1.entries()) CHECK(D2.multiplicity(pt) == m);
}

TEST_CASE("random systems: degree, canonical branching, eigen residuals") {
    Rng rng(107);
    for (int g : {2, 3, 4}) {
        Curve c = random_curve(g, rng);
        for (int trial = 0; trial < 12; ++trial) {
            Sl2System sys(c, random_poly(rng, g - 1), random_poly(rng, g - 1),
                          random_poly(rng, g - 1));
            ProjPoint pp(rng.unit_box(), rng.unit_box());
            Divisor D = branch_divisor(c, sys, pp);
            CHECK(D.degree() == 2 * g - 2);

            bool affine_support = !D.touches_infinity();
            CHECK(affine_support); // generic Theta has full degree g-1
            if (affine_support) {
                auto rep = is_canonical(c, D);
                CHECK(rep.canonical);
                for (const auto& [pt, m] : D.entries())
                    if (!c.is_weierstrass_x(pt.x()))
                        CHECK(eigen_residual(c, sys, pp, pt) < 1e-8);
            }
        }
    }
}

TEST_CASE("eigen residual is O(1) away from the branch points") {
    Rng rng(109);
    Curve c = random_curve(2, rng);
    Sl2System sys(c, random_poly(rng, 1), random_poly(rng, 1), random_poly(rng, 1));
    ProjPoint pp(rng.unit_box(), rng.unit_box());
    Divisor D = branch_divisor(c, sys, pp);
    int big = 0, n = 0;
    for (int trial = 0; trial < 60; ++trial) {
        cplx x = rng.disk(2.0);
        if (c.weierstrass_gap(x) < 0.2) continue;
        CurvePoint pt = c.lift(x, rng.uniform() < 0.5 ? 1 : -1);
        bool near_branch = false;
        for (const auto& [bp, m] : D.entries())
            if (!bp.at_infinity() && std::abs(bp.x() - x) < 0.3) near_branch = true;
        if (near_branch) continue;
        ++n;
        if (eigen_residual(c, sys, pp, pt) > 1e-2) ++big;
    }
    CHECK(n > 10);
    CHECK(big == n); // typical points are far from eigenvector alignment
}

TEST_CASE("diagonal system has residual zero everywhere for c = [1:0]") {
    Rng rng(113);
    Curve c = random_curve(2, rng);
    Sl2System sys(c, random_poly(rng, 1), Poly(), Poly());
    ProjPoint pp(cplx(1), cplx(0));
    for (int trial = 0; trial < 20; ++trial) {
        cplx x = rng.disk(2.0);
        if (c.weierstrass_gap(x) < 0.2) continue;
        CHECK(eigen_residual(c, sys, pp, c.lift(x, 1)) < 1e-14);
    }
}

TEST_CASE("monodromy of the zero system is the identity") {
    Curve c = real_curve();
    Sl2System sys(c, Poly(), Poly(), Poly());
    CurvePath loop = CurvePath::circle(cplx(0.0, 2.0), 0.5, 1, 16);
    Eigen::Matrix2cd M = monodromy(c, sys, loop, 1e-10);
    CHECK((M - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("contractible loop has trivial monodromy") {
    Curve c = real_curve();
    Rng rng(127);
    Sl2System sys(c, random_poly(rng, 1), random_poly(rng, 1), random_poly(rng, 1));
    CurvePath loop = CurvePath::circle(cplx(0.0, 2.0), 0.5, 1, 24);
    Eigen::Matrix2cd M = monodromy(c, sys, loop, 1e-11);
    CHECK((M - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("abelian diagonal system matches the 1-D quadrature oracle") {
    Curve c = real_curve();
    Rng rng(131);
    for (int trial = 0; trial < 3; ++trial) {
        Poly f = random_poly(rng, 1);
        Sl2System sys(c, f, Poly(), Poly());
        CurvePath loop = CurvePath::circle(cplx(1.5), 1.0, 1, 32); // encloses {1, 2}
        Eigen::Matrix2cd M = monodromy(c, sys, loop, 1e-11);
        cplx I = abelian_integral(c, f, loop, 4000);
        CHECK(std::abs(M(0, 0) - std::exp(I)) < 1e-6 * std::abs(std::exp(I)));
        CHECK(std::abs(M(1, 1) - std::exp(-I)) < 1e-6 * std::abs(std::exp(-I)));
        CHECK(std::abs(M(0, 1)) < 1e-9);
        CHECK(std::abs(M(1, 0)) < 1e-9);
    }
}

TEST_CASE("monodromy is unimodular on random loops") {
    Rng rng(137);
    Curve c = real_curve();
    for (int trial = 0; trial < 6; ++trial) {
        Sl2System sys(c, random_poly(rng, 1), random_poly(rng, 1), random_poly(rng, 1));
        cplx center(rng.uniform(-1.0, 1.0), rng.uniform(1.5, 2.5));
        CurvePath loop = CurvePath::circle(center, rng.uniform(0.3, 0.8), 1, 24);
        Eigen::Matrix2cd M = monodromy(c, sys, loop, 1e-11);
        CHECK(std::abs(M.determinant() - cplx(1)) < 1e-8);
    }
    // a loop around a Weierstrass pair also has det 1
    Sl2System sys(c, random_poly(rng, 1), random_poly(rng, 1), random_poly(rng, 1));
    Eigen::Matrix2cd M = monodromy(c, sys, CurvePath::circle(cplx(1.5), 1.0, 1, 32), 1e-11);
    CHECK(std::abs(M.determinant() - cplx(1)) < 1e-8);
}

TEST_CASE("homotopic loops produce the same monodromy") {
    Curve c = real_curve();
    Rng rng(139);
    Sl2System sys(c, random_poly(rng, 1), random_poly(rng, 1), random_poly(rng, 1));

    CurvePath circle = CurvePath::circle(cplx(1.5), 1.0, 1, 32);
    // rectangle around the same Weierstrass pair {1, 2}, same basepoint
    std::vector<cplx> rect = {cplx(2.5, 0.0),  cplx(2.5, 0.8),  cplx(0.5, 0.8),
                              cplx(0.5, -0.8), cplx(2.5, -0.8), cplx(2.5, 0.0)};
    CurvePath rpath(rect, 1, true);

    Eigen::Matrix2cd A = monodromy(c, sys, circle, 1e-11);
    Eigen::Matrix2cd B = monodromy(c, sys, rpath, 1e-11);
    CHECK((A - B).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("path validation") {
    Curve c = real_curve();
    Sl2System sys(c, Poly{cplx(1)}, Poly(), Poly());

    CHECK_THROWS_AS(CurvePath({cplx(0, 1)}, 1, false), InvalidPath);
    CHECK_THROWS_AS(CurvePath({cplx(0, 1), cplx(1, 1)}, 2, false), InvalidPath);
    CHECK_THROWS_AS(CurvePath({cplx(0, 1), cplx(1, 1)}, 1, true), InvalidPath);

    // segment passing within 1e-3 of the Weierstrass value x = 1
    CurvePath bad({cplx(0.5, 1e-4), cplx(1.5, 1e-4)}, 1, false);
    CHECK_THROWS_AS(monodromy(c, sys, bad), InvalidPath);

    // a loop around a single Weierstrass value flips the sheet, so declaring
    // it closed must be rejected
    CHECK_THROWS_AS(monodromy(c, sys, CurvePath::circle(cplx(1.0), 0.5, 1, 24)),
                    SheetMismatch);
}
