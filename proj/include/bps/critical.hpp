#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

#include "bps/beltrami.hpp"
#include "bps/hyperelliptic.hpp"

namespace bps {

struct BranchEntry {
    CurvePoint point;
    int order; // branch order lambda >= 1; the local chart covers with m = lambda + 1
};

/// Configuration of branch points with orders. Supports only affine
/// non-Weierstrass points: movements are represented in the x - x0 chart,
/// which degenerates at Weierstrass points and at infinity.
class BranchConfig {
public:
    BranchConfig(const Curve& c, std::vector<BranchEntry> entries)
        : entries_(std::move(entries)) {
        if (entries_.empty()) throw InvalidConfig("empty branch configuration");
        for (const auto& e : entries_) {
            if (e.order < 1) throw InvalidConfig("branch orders must be >= 1");
            if (e.point.at_infinity())
                throw InvalidConfig("branch points at infinity are not supported");
            if (c.is_weierstrass_x(e.point.x()))
                throw InvalidConfig("branch points at Weierstrass points are not supported");
            c.validate_point(e.point);
        }
        for (size_t i = 0; i < entries_.size(); ++i)
            for (size_t j = i + 1; j < entries_.size(); ++j)
                if (same_point(entries_[i].point, entries_[j].point))
                    throw InvalidConfig("branch points must be pairwise distinct");
    }

    /// Interleaved layout p1, J(p1), ..., pn, J(pn) of simple points; this
    /// is the column order the critical-line equations refer to.
    static BranchConfig paired_simple(const Curve& c, const std::vector<CurvePoint>& base) {
        std::vector<BranchEntry> es;
        for (const auto& p : base) {
            es.push_back({p, 1});
            es.push_back({involution(p), 1});
        }
        return BranchConfig(c, std::move(es));
    }

    const std::vector<BranchEntry>& entries() const { return entries_; }
    int size() const { return int(entries_.size()); }

    int total_order() const {
        int k = 0;
        for (const auto& e : entries_) k += e.order;
        return k;
    }

    bool all_simple() const {
        for (const auto& e : entries_)
            if (e.order != 1) return false;
        return true;
    }

    /// True when the entries come as consecutive (p, J(p)) pairs of equal
    /// order.
    bool paired() const {
        if (entries_.size() % 2 != 0) return false;
        for (size_t i = 0; i + 1 < entries_.size(); i += 2) {
            if (entries_[i].order != entries_[i + 1].order) return false;
            if (!same_point(involution(entries_[i].point), entries_[i + 1].point))
                return false;
        }
        return true;
    }

    Divisor divisor() const {
        Divisor D;
        for (const auto& e : entries_) D.add(e.point, e.order);
        return D;
    }

private:
    std::vector<BranchEntry> entries_;
};

/// Pairing of a quadratic differential with the unit movement (q = 1) of a
/// branch point of the given order, computed in the x - x0 chart with the
/// model chart z^(order+1).
inline cplx move_pairing(const Curve& c, const QuadDiff& alpha, const CurvePoint& p,
                         int order) {
    const int m = order + 1;
    Series local = taylor_x_chart(c, alpha, p, m - 2);
    return residue_contraction(local, BranchChart::monomial(m), cplx(1));
}

/// Rows indexed by the 3g-3 monomial basis differentials, one column per
/// branch point; entry (a, j) pairs basis element a with the unit move of
/// point j. The kernel of this matrix is the space of first-order trivial
/// movements.
struct PairingMatrix {
    Eigen::MatrixXcd M;
    std::vector<int> orders;
    std::string chart = "x-chart";
};

inline PairingMatrix pairing_matrix(const Curve& c, const BranchConfig& cfg) {
    const auto basis = qd_basis(c);
    PairingMatrix pm;
    pm.M.resize(long(basis.size()), cfg.size());
    for (int j = 0; j < cfg.size(); ++j) {
        const auto& e = cfg.entries()[size_t(j)];
        pm.orders.push_back(e.order);
        for (size_t a = 0; a < basis.size(); ++a)
            pm.M(long(a), j) = move_pairing(c, basis[a], e.point, e.order);
    }
    return pm;
}

/// Orthonormal null-space basis by SVD with relative cutoff tol * sigma_max.
inline std::vector<Eigen::VectorXcd> kernel(const Eigen::MatrixXcd& M,
                                            double tol = kRankCutoff) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * smax) ++rank;
    std::vector<Eigen::VectorXcd> out;
    for (int k = rank; k < M.cols(); ++k) out.push_back(svd.matrixV().col(k));
    return out;
}

inline std::vector<Eigen::VectorXcd> kernel(const PairingMatrix& pm, double tol = kRankCutoff) {
    return kernel(pm.M, tol);
}

inline int rank_of(const Eigen::MatrixXcd& M, double tol = kRankCutoff) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * smax) ++rank;
    return rank;
}

struct CriticalityReport {
    int kernel_dim = 0;
    bool canonical = false;
    int dim_q = 0;      // dim Q(X, -div)
    bool consistent = false; // kernel_dim > 0 implies canonical
};

/// Executable form of the main implication: a configuration whose pairing
/// matrix has nontrivial kernel must sit on a canonical divisor.
inline CriticalityReport criticality_test(const Curve& c, const BranchConfig& cfg) {
    if (cfg.total_order() > 2 * c.genus() - 2)
        throw InvalidConfig("criticality analysis requires k <= 2g-2");
    CriticalityReport rep;
    rep.kernel_dim = int(kernel(pairing_matrix(c, cfg)).size());
    auto can = is_canonical(c, cfg.divisor());
    rep.canonical = can.canonical;
    rep.dim_q = can.dim;
    rep.consistent = !(rep.kernel_dim > 0 && !rep.canonical);
    return rep;
}

namespace detail {

inline void require_principal_paired(const Curve& c, const BranchConfig& cfg) {
    if (!cfg.paired())
        throw InvalidConfig("configuration must consist of (p, J(p)) pairs in "
                            "interleaved order");
    if (!cfg.all_simple())
        throw InvalidConfig("the principal stratum requires simple branch points");
    if (cfg.total_order() != 2 * c.genus() - 2)
        throw InvalidConfig("need k = 2g-2 branch points");
}

} // namespace detail

/// The constants Q_l, l = 1..g-2, built from the anti-invariant
/// differentials beta_l = prod_{k != l, k <= g-2} (x - x_k) dx^2/y:
/// Q_l = -beta_l(p_{g-1}) / beta_l(p_l), evaluated in the x-chart. Their
/// values are chart-convention dependent; their nonvanishing is not.
inline std::vector<cplx> q_constants(const Curve& c, const BranchConfig& cfg) {
    detail::require_principal_paired(c, cfg);
    const int g = c.genus();
    std::vector<cplx> out;
    if (g == 2) return out; // every quadratic differential is invariant

    std::vector<CurvePoint> base;
    for (size_t i = 0; i < cfg.entries().size(); i += 2) base.push_back(cfg.entries()[i].point);

    for (int l = 0; l < g - 2; ++l) {
        Poly prod{cplx(1)};
        for (int k = 0; k < g - 2; ++k)
            if (k != l) prod = prod * Poly{-base[size_t(k)].x(), cplx(1)};
        QuadDiff beta(c, std::vector<cplx>(size_t(2 * g - 1), cplx(0)),
                      [&] {
                          std::vector<cplx> v(size_t(g - 2), cplx(0));
                          for (int i = 0; i <= prod.degree(); ++i) v[size_t(i)] = prod.coeff(i);
                          return v;
                      }());
        cplx den = eval_x_chart(c, beta, base[size_t(l)]);
        cplx num = eval_x_chart(c, beta, base[size_t(g - 2)]);
        if (std::abs(den) < 1e-10 || std::abs(num) < 1e-10)
            throw DegenerateConfig("a required beta evaluation vanishes; branch points "
                                   "are too close to sharing x-coordinates");
        out.push_back(-num / den);
    }
    return out;
}

/// Kernel of the pairing matrix for a paired simple canonical configuration,
/// together with the residuals of the two families of linear equations the
/// kernel satisfies: z_i + w_i = 0 for every pair, and z_l = Q_l z_{g-1}.
struct CriticalLine {
    std::vector<Eigen::VectorXcd> kernel; // unit-norm basis vectors
    std::vector<cplx> Q;
    std::vector<double> residual_sum; // |z_i + w_i|, one per pair
    std::vector<double> residual_q;   // |z_l - Q_l z_{g-1}|, one per l
    double diagonal_gap = 0.0;        // max |z_i - w_i|: distance from the diagonal slice
};

inline CriticalLine critical_line(const Curve& c, const BranchConfig& cfg) {
    detail::require_principal_paired(c, cfg);
    const int g = c.genus();
    auto ker = kernel(pairing_matrix(c, cfg));
    if (ker.size() != 1)
        throw UnexpectedKernelDim("expected a 1-dimensional critical direction, found " +
                                  std::to_string(ker.size()));
    CriticalLine line;
    line.kernel = std::move(ker);
    line.Q = q_constants(c, cfg);
    const auto& v = line.kernel.front();
    for (int i = 0; i < g - 1; ++i) {
        line.residual_sum.push_back(std::abs(v(2 * i) + v(2 * i + 1)));
        line.diagonal_gap = std::max(line.diagonal_gap, std::abs(v(2 * i) - v(2 * i + 1)));
    }
    for (int l = 0; l < g - 2; ++l)
        line.residual_q.push_back(std::abs(v(2 * l) - line.Q[size_t(l)] * v(2 * (g - 2))));
    return line;
}

struct RankStats {
    int samples = 0;
    int min_rank = 0;
    int max_rank = 0;
};

namespace detail {

/// Deterministic uniform double in [0,1) from raw mt19937_64 output, so
/// results do not depend on the standard library's distribution code.
struct ConfigSampler {
    explicit ConfigSampler(uint64_t seed) : eng(seed) {}

    double uniform() { return double(eng() >> 11) * 0x1.0p-53; }

    cplx disk(double radius) {
        for (;;) {
            double x = 2.0 * uniform() - 1.0, y = 2.0 * uniform() - 1.0;
            if (x * x + y * y <= 1.0) return radius * cplx(x, y);
        }
    }

    /// Simple points in a disk around the branch locus, away from
    /// Weierstrass values and from unpaired x-collisions.
    std::vector<CurvePoint> simple_points(const Curve& c, int k) {
        double radius = 0.0;
        for (cplx w : c.weierstrass()) radius = std::max(radius, std::abs(w));
        radius = 1.5 * radius + 0.5;
        std::vector<CurvePoint> pts;
        while (int(pts.size()) < k) {
            cplx x = disk(radius);
            if (c.weierstrass_gap(x) < 1e-2) continue;
            bool collide = false;
            for (const auto& p : pts)
                if (std::abs(p.x() - x) < 1e-4) collide = true;
            if (collide) continue;
            pts.push_back(c.lift(x, uniform() < 0.5 ? 1 : -1));
        }
        return pts;
    }

    std::mt19937_64 eng;
};

} // namespace detail

/// Rank of the pairing matrix over random simple configurations in the
/// sub-canonical range; the expected value is the constant k.
inline RankStats rank_profile(const Curve& c, int k, int samples, uint64_t seed) {
    detail::ConfigSampler smp(seed);
    RankStats st;
    st.samples = samples;
    st.min_rank = 1 << 20;
    st.max_rank = -1;
    for (int s = 0; s < samples; ++s) {
        auto pts = smp.simple_points(c, k);
        std::vector<BranchEntry> es;
        for (const auto& p : pts) es.push_back({p, 1});
        BranchConfig cfg(c, std::move(es));
        int r = rank_of(pairing_matrix(c, cfg).M);
        st.min_rank = std::min(st.min_rank, r);
        st.max_rank = std::max(st.max_rank, r);
    }
    return st;
}

} // namespace bps
