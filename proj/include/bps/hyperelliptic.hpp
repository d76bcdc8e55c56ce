#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "bps/cpoly.hpp"
#include "bps/errors.hpp"

namespace bps {

/// Point identity tolerance, consistent with root merging in the
/// polynomial kernel.
inline constexpr double kPointTol = 1e-8;

/// Relative singular-value cutoff for rank decisions.
inline constexpr double kRankCutoff = 1e-9;

/// Sentinel for the vanishing order of the zero section.
inline constexpr int kInfiniteOrder = 1 << 28;

/// A point of the curve y^2 = P(x): either an affine sheet point or one of
/// the two points over x = infinity. Infinity(+1) is the sheet on which
/// y / x^(g+1) tends to the principal square root of the leading
/// coefficient of P.
class CurvePoint {
public:
    static CurvePoint affine(cplx x, cplx y) { return CurvePoint(false, x, y, 0); }
    static CurvePoint infinity(int sign) {
        if (sign != 1 && sign != -1) throw InvalidDivisor("infinity sign must be +1 or -1");
        return CurvePoint(true, cplx(0), cplx(0), sign);
    }

    bool at_infinity() const { return at_infinity_; }
    cplx x() const { return x_; }
    cplx y() const { return y_; }
    int inf_sign() const { return inf_sign_; }

private:
    CurvePoint(bool inf, cplx x, cplx y, int s) : at_infinity_(inf), x_(x), y_(y), inf_sign_(s) {}

    bool at_infinity_;
    cplx x_, y_;
    int inf_sign_;
};

inline bool same_point(const CurvePoint& a, const CurvePoint& b, double tol = kPointTol) {
    if (a.at_infinity() != b.at_infinity()) return false;
    if (a.at_infinity()) return a.inf_sign() == b.inf_sign();
    return std::abs(a.x() - b.x()) < tol && std::abs(a.y() - b.y()) < tol;
}

/// J(x,y) = (x,-y); swaps the two points at infinity.
inline CurvePoint involution(const CurvePoint& pt) {
    if (pt.at_infinity()) return CurvePoint::infinity(-pt.inf_sign());
    return CurvePoint::affine(pt.x(), -pt.y());
}

/// The affine model y^2 = P(x) with deg P = 2g+2 and simple roots. The
/// Weierstrass x-values are computed once at construction.
class Curve {
public:
    explicit Curve(Poly P) : P_(std::move(P)) {
        const int d = P_.degree();
        if (d < 6 || d % 2 != 0)
            throw InvalidCurve("deg P must be even and >= 6 (genus >= 2), got degree " +
                               std::to_string(d));
        genus_ = d / 2 - 1;
        auto rts = roots(P_, 1e-10);
        for (const auto& [z, m] : rts) {
            if (m != 1) throw InvalidCurve("P has a repeated root; the curve would be singular");
            weierstrass_.push_back(z);
        }
        for (size_t i = 0; i < weierstrass_.size(); ++i)
            for (size_t j = i + 1; j < weierstrass_.size(); ++j)
                if (std::abs(weierstrass_[i] - weierstrass_[j]) <= kPointTol)
                    throw InvalidCurve("Weierstrass roots closer than the point tolerance");
    }

    const Poly& P() const { return P_; }
    int genus() const { return genus_; }
    const std::vector<cplx>& weierstrass() const { return weierstrass_; }

    double weierstrass_gap(cplx x) const {
        double d = std::numeric_limits<double>::infinity();
        for (cplx w : weierstrass_) d = std::min(d, std::abs(x - w));
        return d;
    }

    bool is_weierstrass_x(cplx x, double tol = kPointTol) const {
        return weierstrass_gap(x) < tol;
    }

    /// The sheet point over x with y = sheet * principal sqrt(P(x)).
    /// At a Weierstrass x-value both sheets collapse to y = 0.
    CurvePoint lift(cplx x, int sheet) const {
        if (is_weierstrass_x(x)) {
            for (cplx w : weierstrass_)
                if (std::abs(x - w) < kPointTol) return CurvePoint::affine(w, cplx(0));
        }
        return CurvePoint::affine(x, double(sheet) * std::sqrt(eval(P_, x)));
    }

    void validate_point(const CurvePoint& pt) const {
        if (pt.at_infinity()) return;
        cplx px = eval(P_, pt.x());
        if (std::abs(pt.y() * pt.y() - px) > 1e-8 * (1.0 + std::abs(px)))
            throw PointNotOnCurve("point does not satisfy y^2 = P(x)");
    }

private:
    Poly P_;
    int genus_ = 0;
    std::vector<cplx> weierstrass_;
};

/// Formal integer combination of curve points; points closer than the
/// identity tolerance are accumulated into a single entry.
class Divisor {
public:
    Divisor() = default;

    void add(const CurvePoint& pt, int mult) {
        if (mult == 0) return;
        for (auto& [p, m] : entries_) {
            if (same_point(p, pt)) {
                m += mult;
                if (m == 0) prune();
                return;
            }
        }
        entries_.emplace_back(pt, mult);
    }

    int degree() const {
        int d = 0;
        for (const auto& [p, m] : entries_) d += m;
        return d;
    }

    int multiplicity(const CurvePoint& pt) const {
        for (const auto& [p, m] : entries_)
            if (same_point(p, pt)) return m;
        return 0;
    }

    bool effective() const {
        for (const auto& [p, m] : entries_)
            if (m < 0) return false;
        return true;
    }

    bool touches_infinity() const {
        for (const auto& [p, m] : entries_)
            if (p.at_infinity()) return true;
        return false;
    }

    const std::vector<std::pair<CurvePoint, int>>& entries() const { return entries_; }

private:
    void prune() {
        std::erase_if(entries_, [](const auto& e) { return e.second == 0; });
    }

    std::vector<std::pair<CurvePoint, int>> entries_;
};

/// Holomorphic quadratic differential in the eigenbasis of the involution:
/// u holds the J-invariant monomial coefficients of x^i dx^2/y^2
/// (0 <= i <= 2g-2), v the anti-invariant ones of x^i dx^2/y
/// (0 <= i <= g-3, empty in genus 2).
class QuadDiff {
public:
    explicit QuadDiff(const Curve& c)
        : genus_(c.genus()), u_(size_t(2 * c.genus() - 1), cplx(0)),
          v_(size_t(std::max(0, c.genus() - 2)), cplx(0)) {}

    QuadDiff(const Curve& c, std::vector<cplx> u, std::vector<cplx> v)
        : genus_(c.genus()), u_(std::move(u)), v_(std::move(v)) {
        if (u_.size() != size_t(2 * genus_ - 1) || v_.size() != size_t(std::max(0, genus_ - 2)))
            throw DegreeBound("QuadDiff coefficient vectors must have sizes 2g-1 and g-2");
    }

    static QuadDiff monomial_invariant(const Curve& c, int i) {
        QuadDiff q(c);
        q.u_.at(size_t(i)) = cplx(1);
        return q;
    }

    static QuadDiff monomial_anti(const Curve& c, int i) {
        QuadDiff q(c);
        q.v_.at(size_t(i)) = cplx(1);
        return q;
    }

    int genus() const { return genus_; }
    const std::vector<cplx>& u() const { return u_; }
    const std::vector<cplx>& v() const { return v_; }

    Poly fplus() const { return Poly(u_); }
    Poly fminus() const { return Poly(v_); }

    bool is_zero(double thresh = 0.0) const {
        for (cplx c : u_)
            if (std::abs(c) > thresh) return false;
        for (cplx c : v_)
            if (std::abs(c) > thresh) return false;
        return true;
    }

    friend QuadDiff operator+(QuadDiff a, const QuadDiff& b) {
        for (size_t i = 0; i < a.u_.size(); ++i) a.u_[i] += b.u_.at(i);
        for (size_t i = 0; i < a.v_.size(); ++i) a.v_[i] += b.v_.at(i);
        return a;
    }

    friend QuadDiff operator*(QuadDiff a, cplx s) {
        for (auto& c : a.u_) c *= s;
        for (auto& c : a.v_) c *= s;
        return a;
    }
    friend QuadDiff operator*(cplx s, QuadDiff a) { return std::move(a) * s; }

private:
    int genus_;
    std::vector<cplx> u_, v_;
};

/// Holomorphic 1-form f(x) dx/y with deg f <= g-1.
class OneForm {
public:
    OneForm(const Curve& c, Poly f) : f_(std::move(f)) {
        if (f_.degree() > c.genus() - 1)
            throw DegreeBound("OneForm polynomial degree exceeds g-1");
    }

    const Poly& f() const { return f_; }
    bool is_zero() const { return f_.is_zero(); }

private:
    Poly f_;
};

/// Monomial basis of H^0(K^2): the 2g-1 invariant elements in ascending
/// degree, then the g-2 anti-invariant ones.
inline std::vector<QuadDiff> qd_basis(const Curve& c) {
    std::vector<QuadDiff> basis;
    basis.reserve(size_t(3 * c.genus() - 3));
    for (int i = 0; i <= 2 * c.genus() - 2; ++i)
        basis.push_back(QuadDiff::monomial_invariant(c, i));
    for (int i = 0; i <= c.genus() - 3; ++i) basis.push_back(QuadDiff::monomial_anti(c, i));
    return basis;
}

namespace detail {

inline void require_x_chart(const Curve& c, const CurvePoint& pt) {
    if (pt.at_infinity())
        throw InfinityChart("x - x0 is not a coordinate at infinity");
    if (c.is_weierstrass_x(pt.x()))
        throw WeierstrassChart("x - x0 is not a coordinate at a Weierstrass point");
}

/// Interleave zeros: S(delta) -> S(t^2) as a series in t.
inline Series stretch_even(const Series& s, int order_t) {
    Series r(order_t);
    for (int k = 0; 2 * k <= order_t; ++k) r.set_coeff(2 * k, s.coeff(k));
    return r;
}

inline Series shift_up(const Series& s, int e, int order) {
    Series r(order);
    for (int k = 0; k + e <= order; ++k) r.set_coeff(k + e, s.coeff(k));
    return r;
}

/// First index with a coefficient that is non-negligible relative to the
/// others, weighted at the given radius so that the natural growth of the
/// tail does not mask a genuine leading term. kInfiniteOrder when the whole
/// series is negligible.
inline int leading_index(const Series& s, double radius, double rel = 1e-9) {
    double m = 0.0, rk = 1.0;
    for (int k = 0; k <= s.order(); ++k) {
        m = std::max(m, std::abs(s.coeff(k)) * rk);
        rk *= radius;
    }
    if (m == 0.0) return kInfiniteOrder;
    rk = 1.0;
    for (int k = 0; k <= s.order(); ++k) {
        if (std::abs(s.coeff(k)) * rk > rel * m) return k;
        rk *= radius;
    }
    return kInfiniteOrder;
}

} // namespace detail

/// Analytic branch of y = sqrt(P(x)) through (x0, y0), as a series in
/// x - x0. Valid up to the nearest Weierstrass x-value.
inline Series y_branch_series(const Curve& c, cplx x0, cplx y0, int order) {
    Series b = Series::of_poly(taylor_shift(c.P(), x0), order);
    return series_sqrt(b, y0);
}

/// Value of the quadratic differential in the chart x - x0 at an affine
/// non-Weierstrass point: f+(x)/P(x) + f-(x)/y.
inline cplx eval_x_chart(const Curve& c, const QuadDiff& q, const CurvePoint& pt) {
    detail::require_x_chart(c, pt);
    cplx val = eval(q.fplus(), pt.x()) / eval(c.P(), pt.x());
    if (!q.v().empty()) val += eval(q.fminus(), pt.x()) / pt.y();
    return val;
}

inline cplx eval_x_chart(const Curve& c, const OneForm& w, const CurvePoint& pt) {
    detail::require_x_chart(c, pt);
    return eval(w.f(), pt.x()) / pt.y();
}

/// Taylor expansion of the x-chart value at pt, with the y-branch chosen
/// through pt. Errors with UnstableExpansion when the requested order is
/// beyond what double precision supports at this point's distance from the
/// branch locus.
inline Series taylor_x_chart(const Curve& c, const QuadDiff& q, const CurvePoint& pt, int order) {
    detail::require_x_chart(c, pt);
    const cplx x0 = pt.x();
    Series B = Series::of_poly(taylor_shift(c.P(), x0), order);
    Series result = series_div(Series::of_poly(taylor_shift(q.fplus(), x0), order), B);
    if (!q.v().empty()) {
        Series ybr = series_sqrt(B, pt.y());
        result = result +
                 series_div(Series::of_poly(taylor_shift(q.fminus(), x0), order), ybr);
    }

    const double rw = c.weierstrass_gap(x0);
    const double rho = std::max(1.0, 2.0 / rw);
    double scale = 1.0 + std::abs(result.coeff(0));
    double cap = 1e10 * scale;
    for (int k = 1; k <= order; ++k) {
        cap *= rho;
        if (std::abs(result.coeff(k)) > cap)
            throw UnstableExpansion("taylor_x_chart: coefficient growth exceeds the "
                                    "convergence budget at order " +
                                    std::to_string(k));
    }
    return result;
}

/// Expansion in the half-integer coordinate t at the Weierstrass point over
/// wx (x = wx + t^2, y = t * unit). Even coefficients come from the
/// invariant part, odd ones from the anti-invariant part.
inline Series weierstrass_t_series(const Curve& c, const QuadDiff& q, cplx wx, int order) {
    Poly psh = taylor_shift(c.P(), wx);
    // divide off the simple root: P(wx + d) = d * U(d)
    std::vector<cplx> ush(psh.coeffs().begin() + 1, psh.coeffs().end());
    Series U = detail::stretch_even(Series(std::move(ush), order), order);
    Series Fp = detail::stretch_even(
        Series::of_poly(taylor_shift(q.fplus(), wx), order), order);
    Series result = 4.0 * series_div(Fp, U);
    if (!q.v().empty()) {
        Series u_t = series_sqrt(U, std::sqrt(U.coeff(0)));
        Series Fm = detail::stretch_even(
            Series::of_poly(taylor_shift(q.fminus(), wx), order), order);
        result = result + detail::shift_up(4.0 * series_div(Fm, u_t), 1, order);
    }
    return result;
}

inline Series weierstrass_t_series(const Curve& c, const OneForm& w, cplx wx, int order) {
    Poly psh = taylor_shift(c.P(), wx);
    std::vector<cplx> ush(psh.coeffs().begin() + 1, psh.coeffs().end());
    Series U = detail::stretch_even(Series(std::move(ush), order), order);
    Series u_t = series_sqrt(U, std::sqrt(U.coeff(0)));
    Series F = detail::stretch_even(Series::of_poly(taylor_shift(w.f(), wx), order), order);
    return 2.0 * series_div(F, u_t);
}

/// Expansion in s = 1/x at Infinity(sign), in the chart ds^2.
inline Series infinity_s_series(const Curve& c, const QuadDiff& q, int sign, int order) {
    const int g = c.genus();
    Series Pt = Series::of_poly(reversed(c.P()), order);
    Series result(order);
    if (!q.fplus().is_zero()) {
        int e = 2 * g - 2 - q.fplus().degree();
        Series part = series_div(Series::of_poly(reversed(q.fplus()), order), Pt);
        result = result + detail::shift_up(part, e, order);
    }
    if (!q.fminus().is_zero()) {
        int e = g - 3 - q.fminus().degree();
        Series sq = series_sqrt(Pt, std::sqrt(Pt.coeff(0)));
        Series part = series_div(Series::of_poly(reversed(q.fminus()), order), sq);
        result = result + double(sign) * detail::shift_up(part, e, order);
    }
    return result;
}

/// Expansion in s = 1/x at Infinity(sign), in the chart ds.
inline Series infinity_s_series(const Curve& c, const OneForm& w, int sign, int order) {
    const int g = c.genus();
    Series Pt = Series::of_poly(reversed(c.P()), order);
    Series sq = series_sqrt(Pt, std::sqrt(Pt.coeff(0)));
    int e = g - 1 - w.f().degree();
    Series part = series_div(Series::of_poly(reversed(w.f()), order), sq);
    return double(-sign) * detail::shift_up(part, e, order);
}

/// Order of vanishing at pt in the appropriate local coordinate: x - x0 at
/// affine non-Weierstrass points, t at Weierstrass points, s = 1/x at
/// infinity.
namespace detail {

inline double infinity_radius(const Curve& c) {
    double m = 1.0;
    for (cplx w : c.weierstrass()) m = std::max(m, std::abs(w));
    return 0.5 / m;
}

/// Distance from a Weierstrass x-value to the rest of the branch locus.
inline double weierstrass_self_gap(const Curve& c, cplx wx) {
    double d = std::numeric_limits<double>::infinity();
    for (cplx w : c.weierstrass())
        if (std::abs(w - wx) > kPointTol) d = std::min(d, std::abs(w - wx));
    return d;
}

} // namespace detail

inline int vanishing_order(const Curve& c, const QuadDiff& q, const CurvePoint& pt) {
    if (q.is_zero()) throw ZeroDifferential("vanishing_order of the zero differential");
    const int g = c.genus();
    const int ord = 4 * g + 4;
    if (pt.at_infinity())
        return detail::leading_index(infinity_s_series(c, q, pt.inf_sign(), ord),
                                     detail::infinity_radius(c));
    if (c.is_weierstrass_x(pt.x()))
        return detail::leading_index(weierstrass_t_series(c, q, pt.x(), ord),
                                     std::sqrt(0.5 * detail::weierstrass_self_gap(c, pt.x())));
    return detail::leading_index(taylor_x_chart(c, q, pt, ord),
                                 0.5 * c.weierstrass_gap(pt.x()));
}

inline int vanishing_order(const Curve& c, const OneForm& w, const CurvePoint& pt) {
    if (w.is_zero()) throw ZeroDifferential("vanishing_order of the zero form");
    const int g = c.genus();
    const int ord = 4 * g + 4;
    if (pt.at_infinity())
        return detail::leading_index(infinity_s_series(c, w, pt.inf_sign(), ord),
                                     detail::infinity_radius(c));
    if (c.is_weierstrass_x(pt.x()))
        return detail::leading_index(weierstrass_t_series(c, w, pt.x(), ord),
                                     std::sqrt(0.5 * detail::weierstrass_self_gap(c, pt.x())));
    Series ybr = y_branch_series(c, pt.x(), pt.y(), ord);
    Series num = Series::of_poly(taylor_shift(w.f(), pt.x()), ord);
    return detail::leading_index(series_div(num, ybr), 0.5 * c.weierstrass_gap(pt.x()));
}

/// Basis (orthonormal coefficient vectors) of Q(X,-E): quadratic
/// differentials vanishing on the effective affine divisor E with at least
/// the prescribed multiplicities. Jet conditions use the local coordinates
/// of vanishing_order.
inline std::vector<QuadDiff> qd_with_zeros(const Curve& c, const Divisor& E) {
    if (!E.effective()) throw InvalidDivisor("E must be effective");
    if (E.touches_infinity())
        throw UnsupportedSupport("divisor support at infinity is not handled; "
                                 "use an affine model adapted to the points");
    for (const auto& [pt, m] : E.entries()) c.validate_point(pt);

    const int g = c.genus();
    const int dim = 3 * g - 3;
    const auto basis = qd_basis(c);
    const int n_rows = E.degree();
    if (n_rows == 0) return basis;

    Eigen::MatrixXcd M(n_rows, dim);
    int row = 0;
    for (const auto& [pt, mult] : E.entries()) {
        const bool wpt = c.is_weierstrass_x(pt.x());
        for (int a = 0; a < dim; ++a) {
            Series s = wpt ? weierstrass_t_series(c, basis[size_t(a)], pt.x(), mult - 1)
                           : taylor_x_chart(c, basis[size_t(a)], pt, mult - 1);
            for (int k = 0; k < mult; ++k) M(row + k, a) = s.coeff(k);
        }
        row += mult;
    }

    // row equilibration: jet scales differ wildly between points
    for (int r = 0; r < n_rows; ++r) {
        double m = M.row(r).cwiseAbs().maxCoeff();
        if (m > 0.0) M.row(r) /= m;
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > kRankCutoff * smax) ++rank;

    std::vector<QuadDiff> kernel;
    for (int k = rank; k < dim; ++k) {
        std::vector<cplx> u(size_t(2 * g - 1)), v(size_t(std::max(0, g - 2)));
        for (int i = 0; i < 2 * g - 1; ++i) u[size_t(i)] = svd.matrixV()(i, k);
        for (int i = 0; i < g - 2; ++i) v[size_t(i)] = svd.matrixV()(2 * g - 1 + i, k);
        kernel.emplace_back(c, std::move(u), std::move(v));
    }
    return kernel;
}

struct CanonicalReport {
    bool canonical = false;
    int dim = 0;             // dim Q(X,-E)
    std::string reason;      // "degree" or "dimension" when not canonical
};

/// Degree-(2g-2) effective divisor is canonical iff it carries g sections
/// of K^2 vanishing on it.
inline CanonicalReport is_canonical(const Curve& c, const Divisor& E) {
    CanonicalReport rep;
    rep.dim = int(qd_with_zeros(c, E).size());
    if (E.degree() != 2 * c.genus() - 2) {
        rep.reason = "degree";
        return rep;
    }
    if (rep.dim != c.genus()) {
        rep.reason = "dimension";
        return rep;
    }
    rep.canonical = true;
    return rep;
}

/// Zero divisor of the 1-form f(x) dx/y: affine roots of f lifted to both
/// sheets (order doubled at Weierstrass x-values), plus g-1-deg f at each
/// point over infinity. Always of degree 2g-2.
inline Divisor oneform_divisor(const Curve& c, const OneForm& w) {
    if (w.is_zero()) throw ZeroForm("divisor of the zero 1-form");
    const int g = c.genus();
    Divisor D;
    if (w.f().degree() >= 1) {
        for (const auto& [r, m] : roots(w.f())) {
            bool at_w = false;
            for (cplx wx : c.weierstrass()) {
                if (std::abs(r - wx) < kPointTol) {
                    D.add(CurvePoint::affine(wx, cplx(0)), 2 * m);
                    at_w = true;
                    break;
                }
            }
            if (!at_w) {
                cplx y = std::sqrt(eval(c.P(), r));
                D.add(CurvePoint::affine(r, y), m);
                D.add(CurvePoint::affine(r, -y), m);
            }
        }
    }
    const int inf_ord = g - 1 - w.f().degree();
    if (inf_ord > 0) {
        D.add(CurvePoint::infinity(+1), inf_ord);
        D.add(CurvePoint::infinity(-1), inf_ord);
    }
    return D;
}

} // namespace bps
