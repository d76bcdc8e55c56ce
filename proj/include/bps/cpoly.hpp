#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <utility>
#include <vector>

#include "bps/errors.hpp"

namespace bps {

using cplx = std::complex<double>;

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Default truncation order for local expansions.
inline constexpr int kDefaultSeriesOrder = 16;

/// Dense complex polynomial, coefficients stored in ascending degree.
/// The zero polynomial has an empty coefficient vector and degree() == -1;
/// otherwise the leading coefficient is kept nonzero by trimming.
class Poly {
public:
    Poly() = default;
    Poly(std::initializer_list<cplx> coeffs) : c_(coeffs) { trim(); }
    explicit Poly(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Poly constant(cplx a) { return Poly{a}; }
    static Poly x() { return Poly{cplx(0.0), cplx(1.0)}; }

    /// Monic product of (x - r) over the given roots.
    static Poly from_roots(const std::vector<cplx>& roots) {
        Poly p{cplx(1.0)};
        for (cplx r : roots) p = p * Poly{-r, cplx(1.0)};
        return p;
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<cplx>& coeffs() const { return c_; }

    cplx coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : cplx(0.0);
    }

    cplx leading() const { return c_.empty() ? cplx(0.0) : c_.back(); }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<cplx> r(std::max(a.c_.size(), b.c_.size()), cplx(0.0));
        for (size_t i = 0; i < a.c_.size(); ++i) r[i] += a.c_[i];
        for (size_t i = 0; i < b.c_.size(); ++i) r[i] += b.c_[i];
        return Poly(std::move(r));
    }

    friend Poly operator-(const Poly& a, const Poly& b) { return a + (b * cplx(-1.0)); }

    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return Poly();
        std::vector<cplx> r(a.c_.size() + b.c_.size() - 1, cplx(0.0));
        for (size_t i = 0; i < a.c_.size(); ++i)
            for (size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
        return Poly(std::move(r));
    }

    friend Poly operator*(const Poly& a, cplx s) {
        std::vector<cplx> r = a.c_;
        for (cplx& v : r) v *= s;
        return Poly(std::move(r));
    }
    friend Poly operator*(cplx s, const Poly& a) { return a * s; }

private:
    void trim() {
        while (!c_.empty() && c_.back() == cplx(0.0)) c_.pop_back();
    }

    std::vector<cplx> c_;
};

/// Horner evaluation, nesting fixed in ascending degree so results are
/// reproducible bit for bit.
inline cplx eval(const Poly& p, cplx z) {
    cplx acc(0.0);
    const auto& c = p.coeffs();
    for (size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
    return acc;
}

inline Poly derivative(const Poly& p) {
    if (p.degree() < 1) return Poly();
    std::vector<cplx> r(p.degree());
    for (int k = 1; k <= p.degree(); ++k) r[k - 1] = double(k) * p.coeff(k);
    return Poly(std::move(r));
}

/// Coefficients of p(x0 + t) as a polynomial in t (Ruffini-Horner shift).
inline Poly taylor_shift(const Poly& p, cplx x0) {
    if (p.is_zero()) return Poly();
    std::vector<cplx> work = p.coeffs();
    const int n = static_cast<int>(work.size());
    std::vector<cplx> out(n);
    for (int k = 0; k < n; ++k) {
        // synthetic division of the current quotient by (x - x0)
        for (int i = n - 2; i >= k; --i) work[i] += x0 * work[i + 1];
        out[k] = work[k];
    }
    return Poly(std::move(out));
}

/// x^deg * p(1/x): the coefficient vector reversed. Used for expansions
/// at infinity.
inline Poly reversed(const Poly& p) {
    std::vector<cplx> r(p.coeffs().rbegin(), p.coeffs().rend());
    return Poly(std::move(r));
}

inline double coeff_scale(const Poly& p, double z_abs) {
    double s = 0.0, zp = 1.0;
    for (const cplx& c : p.coeffs()) {
        s += std::abs(c) * zp;
        zp *= z_abs;
    }
    return s;
}

namespace detail {

struct RootCluster {
    cplx center;
    int mult;
};

inline cplx newton_polish(const Poly& p, const Poly& dp, cplx z, int steps) {
    for (int i = 0; i < steps; ++i) {
        cplx d = eval(dp, z);
        if (std::abs(d) == 0.0) break;
        cplx step = eval(p, z) / d;
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
        z -= step;
    }
    return z;
}

} // namespace detail

/// Simultaneous Aberth-Ehrlich iteration for all roots of p, followed by
/// Newton refinement and multiplicity clustering. Roots closer than tol are
/// merged unconditionally; beyond that, clusters at the sqrt(eps) resolution
/// limit of double precision are merged only when the derivative residuals
/// at the polished centroid are consistent with a genuine multiple root.
/// Returns (root, multiplicity) pairs sorted by (Re, Im); multiplicities sum
/// to deg p. Throws NonConvergence after max_iter sweeps.
inline std::vector<std::pair<cplx, int>> roots(const Poly& p, double tol = 1e-10,
                                               int max_iter = 200) {
    if (p.degree() < 1) throw NonConvergence("roots: degree must be >= 1");

    // strip exact zero roots
    std::vector<cplx> mon = p.coeffs();
    int zero_mult = 0;
    while (mon.size() > 1 && mon.front() == cplx(0.0)) {
        mon.erase(mon.begin());
        ++zero_mult;
    }
    const int n = static_cast<int>(mon.size()) - 1;
    const cplx lead = mon.back();
    for (cplx& c : mon) c /= lead;

    std::vector<cplx> z(n);
    if (n > 0) {
        double radius = 0.0;
        for (int i = 0; i < n; ++i) radius = std::max(radius, std::abs(mon[i]));
        radius = 1.0 + radius;
        for (int k = 0; k < n; ++k) {
            double ang = 2.0 * M_PI * k / n + 0.4;
            z[k] = radius * cplx(std::cos(ang), std::sin(ang));
        }

        const Poly q(mon);
        const Poly dq = derivative(q);
        bool converged = false;
        for (int iter = 0; iter < max_iter && !converged; ++iter) {
            converged = true;
            for (int k = 0; k < n; ++k) {
                cplx pv = eval(q, z[k]);
                if (std::abs(pv) <= 32.0 * kEps * coeff_scale(q, std::abs(z[k]))) continue;
                cplx dv = eval(dq, z[k]);
                if (std::abs(dv) == 0.0) {
                    z[k] += cplx(1e-8, 1e-8);
                    converged = false;
                    continue;
                }
                cplx w = pv / dv;
                cplx s(0.0);
                for (int j = 0; j < n; ++j)
                    if (j != k) s += cplx(1.0) / (z[k] - z[j]);
                cplx delta = w / (cplx(1.0) - w * s);
                z[k] -= delta;
                if (std::abs(delta) > 1e-13 * (1.0 + std::abs(z[k]))) converged = false;
            }
        }
        if (!converged) throw NonConvergence("roots: Aberth iteration hit the iteration cap");
        for (int k = 0; k < n; ++k) z[k] = detail::newton_polish(q, dq, z[k], 3);
    }

    for (int i = 0; i < zero_mult; ++i) z.push_back(cplx(0.0));

    // union-find clustering
    const int total = static_cast<int>(z.size());
    std::vector<int> parent(total);
    for (int i = 0; i < total; ++i) parent[i] = i;
    auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

    const double cluster_reach = 1e-4; // candidate scale, validated below
    for (int i = 0; i < total; ++i)
        for (int j = i + 1; j < total; ++j) {
            double d = std::abs(z[i] - z[j]);
            double h = std::max(tol, cluster_reach * (1.0 + std::abs(z[i]) + std::abs(z[j])));
            if (d < h) unite(i, j);
        }

    std::vector<std::vector<int>> groups(total);
    for (int i = 0; i < total; ++i) groups[find(i)].push_back(i);

    // derivative polynomials of the monic input, for residual validation
    std::vector<Poly> derivs;
    derivs.push_back(Poly(mon));
    {
        Poly full = derivs[0];
        for (int i = 0; i < zero_mult; ++i) full = full * Poly{cplx(0.0), cplx(1.0)};
        derivs[0] = full;
    }
    for (int j = 1; j <= p.degree(); ++j) derivs.push_back(derivative(derivs[j - 1]));

    auto consistent_mult = [&](cplx center, int m) {
        for (int j = 0; j < m; ++j) {
            double scale = coeff_scale(derivs[j], std::abs(center));
            if (std::abs(eval(derivs[j], center)) > 1e4 * kEps * std::max(scale, 1.0))
                return false;
        }
        return true;
    };

    std::vector<detail::RootCluster> out;
    for (const auto& grp : groups) {
        if (grp.empty()) continue;
        cplx centroid(0.0);
        for (int i : grp) centroid += z[i];
        centroid /= double(grp.size());
        const int m = static_cast<int>(grp.size());

        bool forced = true; // merged already at <= tol?
        if (m > 1) {
            for (int a : grp)
                for (int b : grp)
                    if (std::abs(z[a] - z[b]) >= tol) forced = false;
        }
        if (m > 1) {
            cplx polished = detail::newton_polish(derivs[m - 1], derivs[m], centroid, 6);
            if (forced || consistent_mult(polished, m)) {
                out.push_back({polished, m});
                continue;
            }
            // reject the merge, keep members individually
            for (int i : grp) out.push_back({z[i], 1});
            continue;
        }
        out.push_back({centroid, 1});
    }

    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.center.real() != b.center.real()) return a.center.real() < b.center.real();
        return a.center.imag() < b.center.imag();
    });
    std::vector<std::pair<cplx, int>> result;
    result.reserve(out.size());
    for (const auto& c : out) result.emplace_back(c.center, c.mult);
    return result;
}

/// Truncated power series c0 + c1 z + ... + cN z^N. Binary operations
/// truncate to the smaller of the two orders and never extend it.
class Series {
public:
    explicit Series(int order) : c_(static_cast<size_t>(order) + 1, cplx(0.0)) {}

    Series(std::vector<cplx> coeffs, int order) : c_(std::move(coeffs)) {
        c_.resize(static_cast<size_t>(order) + 1, cplx(0.0));
    }

    static Series of_poly(const Poly& p, int order) {
        Series s(order);
        for (int k = 0; k <= order; ++k) s.c_[k] = p.coeff(k);
        return s;
    }

    static Series constant(cplx a, int order) {
        Series s(order);
        s.c_[0] = a;
        return s;
    }

    static Series identity(int order) {
        Series s(order);
        if (order >= 1) s.c_[1] = cplx(1.0);
        return s;
    }

    int order() const { return static_cast<int>(c_.size()) - 1; }
    cplx coeff(int k) const {
        return (k >= 0 && k <= order()) ? c_[k] : cplx(0.0);
    }
    void set_coeff(int k, cplx v) { c_.at(k) = v; }
    const std::vector<cplx>& coeffs() const { return c_; }

    bool is_zero(double thresh = 0.0) const {
        for (const cplx& c : c_)
            if (std::abs(c) > thresh) return false;
        return true;
    }

    cplx eval(cplx z) const {
        cplx acc(0.0);
        for (size_t i = c_.size(); i-- > 0;) acc = acc * z + c_[i];
        return acc;
    }

    friend Series operator+(const Series& a, const Series& b) {
        const int n = std::min(a.order(), b.order());
        Series r(n);
        for (int k = 0; k <= n; ++k) r.c_[k] = a.c_[k] + b.c_[k];
        return r;
    }

    friend Series operator-(const Series& a, const Series& b) {
        const int n = std::min(a.order(), b.order());
        Series r(n);
        for (int k = 0; k <= n; ++k) r.c_[k] = a.c_[k] - b.c_[k];
        return r;
    }

    friend Series operator*(const Series& a, cplx s) {
        Series r = a;
        for (cplx& v : r.c_) v *= s;
        return r;
    }
    friend Series operator*(cplx s, const Series& a) { return a * s; }

private:
    std::vector<cplx> c_;
};

inline Series series_mul(const Series& a, const Series& b) {
    const int n = std::min(a.order(), b.order());
    Series r(n);
    for (int k = 0; k <= n; ++k) {
        cplx acc(0.0);
        for (int j = 0; j <= k; ++j) acc += a.coeff(j) * b.coeff(k - j);
        r.set_coeff(k, acc);
    }
    return r;
}

inline Series series_div(const Series& a, const Series& b) {
    if (std::abs(b.coeff(0)) == 0.0)
        throw DivByNonUnit("series_div: divisor has zero constant term");
    const int n = std::min(a.order(), b.order());
    Series q(n);
    for (int k = 0; k <= n; ++k) {
        cplx acc = a.coeff(k);
        for (int j = 0; j < k; ++j) acc -= q.coeff(j) * b.coeff(k - j);
        q.set_coeff(k, acc / b.coeff(0));
    }
    return q;
}

/// s(t(z)) for t with zero constant term, via Horner over series.
inline Series series_compose(const Series& s, const Series& t) {
    if (std::abs(t.coeff(0)) != 0.0)
        throw CompositionConstantTerm("series_compose: inner series must vanish at 0");
    const int n = std::min(s.order(), t.order());
    Series r = Series::constant(s.coeff(n), n);
    for (int k = n - 1; k >= 0; --k) {
        r = series_mul(r, t);
        r.set_coeff(0, r.coeff(0) + s.coeff(k));
    }
    return r;
}

/// Square-root series with the branch pinned by the caller: r0 must square
/// to the constant term of s.
inline Series series_sqrt(const Series& s, cplx r0) {
    const cplx s0 = s.coeff(0);
    if (std::abs(s0) == 0.0)
        throw DivByNonUnit("series_sqrt: constant term must be nonzero");
    Series r(s.order());
    r.set_coeff(0, r0);
    for (int k = 1; k <= s.order(); ++k) {
        cplx acc = s.coeff(k);
        for (int j = 1; j < k; ++j) acc -= r.coeff(j) * r.coeff(k - j);
        r.set_coeff(k, acc / (2.0 * r0));
    }
    return r;
}

inline Series series_derivative(const Series& s) {
    if (s.order() == 0) return Series(0);
    Series r(s.order() - 1);
    for (int k = 1; k <= s.order(); ++k) r.set_coeff(k - 1, double(k) * s.coeff(k));
    return r;
}

/// k-th derivative of the series at 0, i.e. k! * c_k.
inline cplx jet(const Series& s, int k) {
    if (k < 0 || k > s.order())
        throw OrderTooLow("jet: requested derivative order exceeds series truncation");
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= double(i);
    return f * s.coeff(k);
}

} // namespace bps
