#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "bps/hyperelliptic.hpp"

namespace bps {

/// Trace-free matrix of holomorphic 1-forms A = (a11 a12; a21 -a11), each
/// entry a polynomial of degree <= g-1 over dx/y. The zero system is
/// accepted (its flat sections are constant and its monodromy is trivial);
/// operations that need Theta != 0 reject it with ZeroTheta.
struct Sl2System {
    Sl2System(const Curve& c, Poly f11, Poly f12, Poly f21)
        : a11(c, std::move(f11)), a12(c, std::move(f12)), a21(c, std::move(f21)) {}

    bool is_zero() const { return a11.is_zero() && a12.is_zero() && a21.is_zero(); }

    OneForm a11, a12, a21;
};

/// Point of the projective line, normalized so max(|c1|, |c2|) = 1.
class ProjPoint {
public:
    ProjPoint(cplx c1, cplx c2) : c1_(c1), c2_(c2) {
        double m = std::max(std::abs(c1_), std::abs(c2_));
        if (m == 0.0) throw InvalidConfig("projective point needs a nonzero representative");
        c1_ /= m;
        c2_ /= m;
    }

    cplx c1() const { return c1_; }
    cplx c2() const { return c2_; }

private:
    cplx c1_, c2_;
};

/// Piecewise-linear path in the x-plane together with the starting sheet:
/// y(start) = sheet * principal sqrt(P(x_start)). A closed path must return
/// to its start point; whether it returns to the same sheet is verified
/// against the declared flag during integration.
class CurvePath {
public:
    CurvePath(std::vector<cplx> waypoints, int start_sheet, bool closed)
        : pts_(std::move(waypoints)), sheet_(start_sheet), closed_(closed) {
        if (pts_.size() < 2) throw InvalidPath("a path needs at least two waypoints");
        if (start_sheet != 1 && start_sheet != -1)
            throw InvalidPath("start sheet must be +1 or -1");
        if (closed_ && std::abs(pts_.front() - pts_.back()) > kPointTol)
            throw InvalidPath("closed path must end at its start point");
    }

    static CurvePath circle(cplx center, double radius, int start_sheet, int segments = 24) {
        std::vector<cplx> pts;
        for (int k = 0; k <= segments; ++k) {
            double th = 2.0 * M_PI * k / segments;
            pts.push_back(center + radius * cplx(std::cos(th), std::sin(th)));
        }
        pts.back() = pts.front();
        return CurvePath(std::move(pts), start_sheet, true);
    }

    const std::vector<cplx>& waypoints() const { return pts_; }
    int start_sheet() const { return sheet_; }
    bool closed() const { return closed_; }

private:
    std::vector<cplx> pts_;
    int sheet_;
    bool closed_;
};

/// Theta_{A,c} = c1^2 a21 - 2 c1 c2 a11 - c2^2 a12, the 1-form whose zeros
/// are the tangency points of the constant section c with the flat foliation.
inline OneForm theta(const Curve& curve, const Sl2System& sys, const ProjPoint& c) {
    Poly f = c.c1() * c.c1() * sys.a21.f() - 2.0 * c.c1() * c.c2() * sys.a11.f() -
             c.c2() * c.c2() * sys.a12.f();
    return OneForm(curve, f);
}

namespace detail {

inline double sl2_scale(const Sl2System& sys) {
    double m = 0.0;
    for (const Poly* f : {&sys.a11.f(), &sys.a12.f(), &sys.a21.f()})
        for (cplx co : f->coeffs()) m = std::max(m, std::abs(co));
    return m;
}

} // namespace detail

inline bool theta_is_zero(const Curve& curve, const Sl2System& sys, const ProjPoint& c) {
    OneForm th = theta(curve, sys, c);
    double scale = detail::sl2_scale(sys);
    for (cplx co : th.f().coeffs())
        if (std::abs(co) > 1e-12 * scale) return false;
    return true;
}

/// Branching divisor of the structure induced by (A, c): the zero divisor
/// of Theta_{A,c}. Always of degree 2g-2.
inline Divisor branch_divisor(const Curve& curve, const Sl2System& sys, const ProjPoint& c) {
    if (theta_is_zero(curve, sys, c))
        throw ZeroTheta("Theta vanishes identically; c is degenerate for this system");
    return oneform_divisor(curve, theta(curve, sys, c));
}

/// Residual of the eigenvector conditions for (c1,c2) at an affine
/// non-Weierstrass point: |Theta(pt)| normalized by the largest |a_ij(pt)|.
inline double eigen_residual(const Curve& curve, const Sl2System& sys, const ProjPoint& c,
                             const CurvePoint& pt) {
    detail::require_x_chart(curve, pt);
    const cplx x = pt.x(), y = pt.y();
    const cplx a11 = eval(sys.a11.f(), x) / y;
    const cplx a12 = eval(sys.a12.f(), x) / y;
    const cplx a21 = eval(sys.a21.f(), x) / y;
    const cplx th = c.c1() * c.c1() * a21 - 2.0 * c.c1() * c.c2() * a11 - c.c2() * c.c2() * a12;
    const double denom = std::max({std::abs(a11), std::abs(a12), std::abs(a21)});
    if (denom == 0.0) return std::abs(th);
    return std::abs(th) / denom;
}

namespace detail {

/// Sampled continuation of y = sqrt(P) along one segment. Refines until the
/// branch turns by less than pi/4 between consecutive samples.
struct SheetTable {
    std::vector<std::vector<cplx>> segment_y; // uniform samples, index 0..n
    std::vector<cplx> seg_a, seg_b;

    cplx lookup(size_t seg, double tau) const {
        const auto& ys = segment_y[seg];
        size_t n = ys.size() - 1;
        size_t idx = size_t(std::min(double(n), std::max(0.0, std::round(tau * double(n)))));
        return ys[idx];
    }
};

inline SheetTable build_sheet_table(const Curve& curve, const CurvePath& path) {
    SheetTable table;
    const auto& pts = path.waypoints();
    cplx y_prev = double(path.start_sheet()) * std::sqrt(eval(curve.P(), pts.front()));
    for (size_t s = 0; s + 1 < pts.size(); ++s) {
        const cplx a = pts[s], b = pts[s + 1];
        int n = 8;
        std::vector<cplx> ys;
        for (;;) {
            ys.assign(1, y_prev);
            bool ok = true;
            for (int k = 1; k <= n; ++k) {
                cplx x = a + (b - a) * (double(k) / n);
                cplx w = std::sqrt(eval(curve.P(), x));
                cplx y = (std::abs(w - ys.back()) <= std::abs(-w - ys.back())) ? w : -w;
                cplx ratio = y / ys.back();
                if (std::abs(std::arg(ratio)) >= M_PI / 4.0) {
                    ok = false;
                    break;
                }
                ys.push_back(y);
            }
            if (ok) break;
            n *= 2;
            if (n > (1 << 15))
                throw StepFailure("sheet tracking cannot resolve the branch turn; "
                                  "the path runs too close to a Weierstrass value");
        }
        y_prev = ys.back();
        table.segment_y.push_back(std::move(ys));
        table.seg_a.push_back(a);
        table.seg_b.push_back(b);
    }
    return table;
}

} // namespace detail

/// Fundamental solution of d Phi = A Phi along the path, Phi(start) = I,
/// by adaptive embedded Runge-Kutta (Dormand-Prince 4/5) with the sheet of
/// y tracked by analytic continuation. For closed paths the final sheet is
/// checked against the declared one (SheetMismatch otherwise). Only the
/// conjugacy class is basepoint-independent; the matrix is reported in the
/// start fiber with Phi(start) = I.
inline Eigen::Matrix2cd monodromy(const Curve& curve, const Sl2System& sys,
                                  const CurvePath& path, double tol = 1e-10) {
    const auto& pts = path.waypoints();
    // keep a margin from the branch locus: the coefficients blow up like 1/y
    for (size_t s = 0; s + 1 < pts.size(); ++s) {
        const cplx a = pts[s], d = pts[s + 1] - pts[s];
        for (cplx w : curve.weierstrass()) {
            double t = std::norm(d) > 0.0
                           ? std::clamp(((w - a) * std::conj(d)).real() / std::norm(d), 0.0, 1.0)
                           : 0.0;
            if (std::abs(w - (a + t * d)) <= 1e-3)
                throw InvalidPath("path passes within 1e-3 of a Weierstrass x-value");
        }
    }

    const auto table = detail::build_sheet_table(curve, path);

    if (path.closed()) {
        const cplx y0 = double(path.start_sheet()) * std::sqrt(eval(curve.P(), pts.front()));
        const cplx ye = table.segment_y.back().back();
        if (std::abs(ye - y0) > std::abs(ye + y0))
            throw SheetMismatch("continuation ends on the opposite sheet; the loop is "
                                "not closed on the curve");
    }

    auto y_at = [&](size_t seg, double tau, cplx x) {
        cplx near = table.lookup(seg, tau);
        cplx w = std::sqrt(eval(curve.P(), x));
        return (std::abs(w - near) <= std::abs(-w - near)) ? w : -w;
    };

    auto rhs = [&](size_t seg, double tau, const Eigen::Matrix2cd& M) {
        const cplx a = pts[seg], b = pts[seg + 1];
        const cplx x = a + (b - a) * tau;
        const cplx y = y_at(seg, tau, x);
        const cplx dxds = b - a;
        const cplx f11 = eval(sys.a11.f(), x) * dxds / y;
        const cplx f12 = eval(sys.a12.f(), x) * dxds / y;
        const cplx f21 = eval(sys.a21.f(), x) * dxds / y;
        Eigen::Matrix2cd A;
        A << f11, f12, f21, -f11;
        return Eigen::Matrix2cd(A * M);
    };

    // Dormand-Prince 5(4) tableau
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    Eigen::Matrix2cd Phi = Eigen::Matrix2cd::Identity();
    for (size_t seg = 0; seg + 1 < pts.size(); ++seg) {
        double tau = 0.0, h = 0.1;
        while (tau < 1.0) {
            h = std::min(h, 1.0 - tau);
            const Eigen::Matrix2cd k1 = rhs(seg, tau, Phi);
            const Eigen::Matrix2cd k2 = rhs(seg, tau + c2 * h, Phi + h * (a21 * k1));
            const Eigen::Matrix2cd k3 = rhs(seg, tau + c3 * h, Phi + h * (a31 * k1 + a32 * k2));
            const Eigen::Matrix2cd k4 =
                rhs(seg, tau + c4 * h, Phi + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const Eigen::Matrix2cd k5 =
                rhs(seg, tau + c5 * h, Phi + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const Eigen::Matrix2cd k6 = rhs(
                seg, tau + h, Phi + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const Eigen::Matrix2cd next =
                Phi + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const Eigen::Matrix2cd k7 = rhs(seg, tau + h, next);
            const Eigen::Matrix2cd errm =
                h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double err = errm.cwiseAbs().maxCoeff();
            const double scale = tol * std::max(1.0, Phi.cwiseAbs().maxCoeff());
            if (err <= scale) {
                Phi = next;
                tau += h;
            }
            const double factor =
                (err > 0.0) ? 0.9 * std::pow(scale / err, 0.2) : 5.0;
            h *= std::clamp(factor, 0.2, 5.0);
            if (h < 1e-12)
                throw StepFailure("step size underflow during monodromy integration");
        }
    }
    return Phi;
}

} // namespace bps
