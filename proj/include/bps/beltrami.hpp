#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bps/cpoly.hpp"
#include "bps/errors.hpp"

namespace bps {

inline constexpr cplx kImagUnit{0.0, 1.0};

/// Local model of a branch point of order m-1: the projective chart reads
/// c(z) = z^m + sum_{k>m} e_k z^k on the disk |z| < 1, mapping into the
/// w-disk of radius r_disk. The cofactor g(z) = c'(z) z^(1-m) with g(0) = m
/// is what enters the contraction formula.
class BranchChart {
public:
    BranchChart(int m, Series c, double r_disk = 1.0)
        : m_(m), c_(pad(std::move(c), m)), r_disk_(r_disk) {
        if (m_ < 2) throw InvalidChart("chart covering order m must be >= 2");
        if (r_disk_ <= 0) throw InvalidChart("r_disk must be positive");
        for (int k = 0; k < m_; ++k)
            if (std::abs(c_.coeff(k)) > 1e-14)
                throw InvalidChart("chart series must vanish to order m at 0");
        if (std::abs(c_.coeff(m_) - cplx(1)) > 1e-14)
            throw InvalidChart("chart series must have unit coefficient at z^m");
    }

    /// The exact model chart c(z) = z^m.
    static BranchChart monomial(int m, double r_disk = 1.0) {
        Series c(std::max(kDefaultSeriesOrder, 2 * m));
        c.set_coeff(m, cplx(1));
        return BranchChart(m, std::move(c), r_disk);
    }

    int m() const { return m_; }
    double r_disk() const { return r_disk_; }
    const Series& c() const { return c_; }

    cplx c_eval(cplx z) const { return c_.eval(z); }

    cplx dc_eval(cplx z) const {
        cplx acc(0.0);
        for (int k = c_.order(); k >= 1; --k) acc = acc * z + double(k) * c_.coeff(k);
        return acc;
    }

    /// g(z) = c'(z) z^(1-m), as a series of order c.order() - m (>= m-2).
    Series g_series() const {
        Series g(c_.order() - m_);
        for (int k = 0; k <= g.order(); ++k) g.set_coeff(k, double(k + m_) * c_.coeff(k + m_));
        return g;
    }

    /// |e_k| upper bound for |c(z)| on |z| = rho.
    double c_upper(double rho) const {
        double s = 0.0;
        for (int k = c_.order(); k >= 1; --k) s = (s + std::abs(c_.coeff(k))) * rho;
        return s;
    }

    /// Lower bound rho^m - sum_{k>m} |e_k| rho^k for |c(z)| on |z| = rho.
    double c_lower(double rho) const {
        double s = std::pow(rho, m_);
        double rk = std::pow(rho, m_);
        for (int k = m_ + 1; k <= c_.order(); ++k) {
            rk *= rho;
            s -= std::abs(c_.coeff(k)) * rk;
        }
        return s;
    }

private:
    static Series pad(Series c, int m) {
        const int need = std::max(c.order(), 2 * m - 2);
        return Series(c.coeffs(), need);
    }

    int m_;
    Series c_;
    double r_disk_;
};

/// Radial bump eta(w) = h(|w|^2): identically 1 on |w| <= r1, identically 0
/// on |w| >= r2, a polynomial smoothstep in |w|^2 in between. Degree 5 is
/// C^2 at the seams; degree 3 is the C^1 alternative used to check that
/// results do not depend on the profile.
class BumpProfile {
public:
    BumpProfile(double r1, double r2, int smoothstep_degree = 5)
        : r1_(r1), r2_(r2), deg_(smoothstep_degree) {
        if (!(0.0 < r1 && r1 < r2))
            throw InvalidProfile("need 0 < r1 < r2");
        if (deg_ != 3 && deg_ != 5)
            throw InvalidProfile("smoothstep degree must be 3 or 5");
    }

    double r1() const { return r1_; }
    double r2() const { return r2_; }
    int smoothstep_degree() const { return deg_; }

    double h(double s) const {
        const double a = r1_ * r1_, b = r2_ * r2_;
        if (s <= a) return 1.0;
        if (s >= b) return 0.0;
        return 1.0 - step((s - a) / (b - a));
    }

    double dh(double s) const {
        const double a = r1_ * r1_, b = r2_ * r2_;
        if (s <= a || s >= b) return 0.0;
        return -dstep((s - a) / (b - a)) / (b - a);
    }

    /// Supremum of |grad eta| = 2 |h'(|w|^2)| |w| over the plane.
    double grad_bound() const {
        const double smax = (deg_ == 5) ? 15.0 / 8.0 : 1.5;
        return 2.0 * smax * r2_ / (r2_ * r2_ - r1_ * r1_);
    }

private:
    double step(double t) const {
        return deg_ == 5 ? t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
                         : t * t * (3.0 - 2.0 * t);
    }
    double dstep(double t) const {
        return deg_ == 5 ? 30.0 * t * t * (1.0 - t) * (1.0 - t) : 6.0 * t * (1.0 - t);
    }

    double r1_, r2_;
    int deg_;
};

inline double eta(const BumpProfile& b, cplx w) { return b.h(std::norm(w)); }

/// d eta / d wbar = h'(|w|^2) w.
inline cplx eta_wbar(const BumpProfile& b, cplx w) { return b.dh(std::norm(w)) * w; }

/// d eta / d w = h'(|w|^2) conj(w).
inline cplx eta_w(const BumpProfile& b, cplx w) { return b.dh(std::norm(w)) * std::conj(w); }

/// Displacement q of the branch image and deformation time t.
struct MoveSpec {
    cplx q;
    double t = 1.0;
};

namespace detail {

inline void check_move(const BranchChart& chart, const BumpProfile& b, const MoveSpec& mv) {
    if (b.r2() > chart.r_disk())
        throw InvalidProfile("bump support exceeds the chart disk");
    if (mv.t < 0.0 || mv.t > 1.0) throw InvalidMove("time must lie in [0,1]");
    if (std::abs(mv.q) >= chart.r_disk() - b.r2())
        throw InvalidMove("|q| must be smaller than r_disk - r2 so the moved point "
                          "stays inside the chart");
    if (std::abs(mv.t * mv.q) * b.grad_bound() >= 1.0)
        throw NonInjectiveIsotopy("t*q too large for the bump gradient bound");
}

} // namespace detail

/// H(t,w) = w + t q eta(w): the compactly supported isotopy translating the
/// branch image. Injective under the gradient bound, which is enforced.
inline cplx move_isotopy(const MoveSpec& mv, const BumpProfile& b, cplx w) {
    if (mv.t < 0.0 || mv.t > 1.0) throw InvalidMove("time must lie in [0,1]");
    if (std::abs(mv.t * mv.q) * b.grad_bound() >= 1.0)
        throw NonInjectiveIsotopy("t*q too large for the bump gradient bound");
    return w + mv.t * mv.q * eta(b, w);
}

/// Beltrami coefficient of the movement at time t, in the z-chart:
///   mu_t(z) = t q eta_wbar(c(z)) conj(c'(z)) / [(1 + t q eta_w(c(z))) c'(z)].
/// Extends by 0 through the branch point, where eta(c(z)) is constant.
inline cplx mu_t(const BranchChart& chart, const BumpProfile& b, const MoveSpec& mv, cplx z) {
    detail::check_move(chart, b, mv);
    const cplx w = chart.c_eval(z);
    const cplx ewb = eta_wbar(b, w);
    if (ewb == cplx(0.0)) return cplx(0.0); // plateau or outside the support
    const cplx cp = chart.dc_eval(z);
    if (cp == cplx(0.0))
        throw BranchPointSingularity("c'(z) = 0 away from the bump plateau");
    const cplx den = (cplx(1.0) + mv.t * mv.q * eta_w(b, w)) * cp;
    return mv.t * mv.q * ewb * std::conj(cp) / den;
}

/// First-order term at t = 0: q eta_wbar(c(z)) conj(c'(z)) / c'(z).
inline cplx mu_dot0(const BranchChart& chart, const BumpProfile& b, cplx q, cplx z) {
    const cplx w = chart.c_eval(z);
    const cplx ewb = eta_wbar(b, w);
    if (ewb == cplx(0.0)) return cplx(0.0);
    const cplx cp = chart.dc_eval(z);
    if (cp == cplx(0.0))
        throw BranchPointSingularity("c'(z) = 0 away from the bump plateau");
    return q * ewb * std::conj(cp) / cp;
}

/// Closed-form pairing <alpha, mu_dot0> = 2 pi i q / (m-2)! *
/// d^(m-2)/dz^(m-2) [alpha/g](0), via series division and jet extraction.
inline cplx residue_contraction(const Series& alpha, const BranchChart& chart, cplx q) {
    const int m = chart.m();
    if (alpha.order() < m - 2)
        throw OrderTooLow("alpha truncation order must be at least m-2");
    Series ratio = series_div(alpha, chart.g_series());
    double fact = 1.0;
    for (int i = 2; i <= m - 2; ++i) fact *= double(i);
    return 2.0 * M_PI * kImagUnit * q / fact * jet(ratio, m - 2);
}

struct QuadratureSpec {
    int radial = 48;
    int angular = 64;
    double tol = 1e-9;
    int max_refine = 6;
};

namespace detail {

/// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(size_t(n), 0.0);
    w.assign(size_t(n), 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double z1, pp;
        do {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            z1 = z;
            z = z1 - p1 / pp;
        } while (std::abs(z - z1) > 1e-15);
        x[size_t(i)] = -z;
        x[size_t(n - 1 - i)] = z;
        w[size_t(i)] = w[size_t(n - 1 - i)] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

inline cplx pairwise_sum(std::vector<cplx>& terms, size_t lo, size_t hi) {
    if (hi - lo == 1) return terms[lo];
    size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(terms, lo, mid) + pairwise_sum(terms, mid, hi);
}

/// Radii of a z-annulus containing the preimage of the bump transition
/// region r1 <= |w| <= r2 under c.
inline std::pair<double, double> transition_annulus(const BranchChart& chart,
                                                    const BumpProfile& b) {
    bool pure_monomial = true;
    for (int k = chart.m() + 1; k <= chart.c().order(); ++k)
        if (chart.c().coeff(k) != cplx(0.0)) pure_monomial = false;
    if (pure_monomial)
        return {std::pow(b.r1(), 1.0 / chart.m()), std::pow(b.r2(), 1.0 / chart.m())};

    // c_upper is increasing in rho, so the inner radius comes from bisection
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (lo + hi);
        (chart.c_upper(mid) <= b.r1() ? lo : hi) = mid;
    }
    const double rho_lo = lo;

    // c_lower need not be monotone for a perturbed chart: scan downward for
    // the last radius where the lower bound still undershoots r2
    if (chart.c_lower(1.0) < b.r2())
        throw InvalidChart("bump transition region escapes the chart disk");
    const int n_scan = 512;
    double rho_hi = 1.0;
    for (int i = n_scan - 1; i >= 0; --i) {
        double r = rho_lo + (1.0 - rho_lo) * (double(i) / n_scan);
        if (chart.c_lower(r) < b.r2()) {
            rho_hi = std::min(1.0, rho_lo + (1.0 - rho_lo) * (double(i + 1) / n_scan));
            break;
        }
    }
    return {rho_lo, rho_hi};
}

} // namespace detail

/// Direct 2-D integral of alpha(z) mu_dot0(z) over the annulus covering the
/// bump transition, in polar coordinates: Gauss-Legendre radially, midpoint
/// rule in the angle, with the area convention dz dzbar = -2i dA pinned by
/// the m = 2 closed form. This is the independent oracle for
/// residue_contraction. Refines the grid until two consecutive levels agree
/// to spec.tol; GridTooCoarse if the budget runs out.
inline cplx quadrature_contraction(const Series& alpha, const BranchChart& chart,
                                   const BumpProfile& b, cplx q,
                                   const QuadratureSpec& spec = {}) {
    const auto [rho_lo, rho_hi] = detail::transition_annulus(chart, b);

    auto level_value = [&](int nr, int nt) {
        std::vector<double> gx, gw;
        detail::gauss_legendre(nr, gx, gw);
        std::vector<cplx> terms;
        terms.reserve(size_t(nr) * size_t(nt));
        const double mid = 0.5 * (rho_hi + rho_lo), half = 0.5 * (rho_hi - rho_lo);
        const double dtheta = 2.0 * M_PI / nt;
        for (int i = 0; i < nr; ++i) {
            const double r = mid + half * gx[size_t(i)];
            const double wr = gw[size_t(i)] * half;
            for (int j = 0; j < nt; ++j) {
                const double th = (j + 0.5) * dtheta;
                const cplx z = r * cplx(std::cos(th), std::sin(th));
                cplx f = alpha.eval(z) * mu_dot0(chart, b, q, z);
                terms.push_back(f * (wr * dtheta * r));
            }
        }
        cplx area_sum = detail::pairwise_sum(terms, 0, terms.size());
        return -2.0 * kImagUnit * area_sum;
    };

    cplx prev = level_value(spec.radial, spec.angular);
    for (int lvl = 1; lvl <= spec.max_refine; ++lvl) {
        cplx cur = level_value(spec.radial << lvl, spec.angular << lvl);
        if (std::abs(cur - prev) <= spec.tol * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    throw GridTooCoarse("quadrature did not settle within the refinement budget");
}

} // namespace bps
