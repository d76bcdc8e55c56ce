#pragma once

#include <chrono>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bps/critical.hpp"
#include "bps/sl2.hpp"

namespace bps {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double ms = 0.0;
};

namespace selftest_detail {

using detail::ConfigSampler;

inline Curve sampled_curve(int g, ConfigSampler& smp) {
    std::vector<cplx> roots;
    while (int(roots.size()) < 2 * g + 2) {
        cplx cand = smp.disk(2.0);
        bool ok = true;
        for (cplx r : roots)
            if (std::abs(r - cand) < 0.15) ok = false;
        if (ok) roots.push_back(cand);
    }
    return Curve(Poly::from_roots(roots));
}

inline cplx sampled_unit(ConfigSampler& smp) {
    return cplx(2.0 * smp.uniform() - 1.0, 2.0 * smp.uniform() - 1.0);
}

inline Poly sampled_poly(ConfigSampler& smp, int deg) {
    std::vector<cplx> c(size_t(deg) + 1);
    for (auto& v : c) v = sampled_unit(smp);
    if (std::abs(c.back()) < 0.1) c.back() += cplx(0.5);
    return Poly(std::move(c));
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(3) << v;
    return os.str();
}

template <class F>
inline CriterionResult timed(int id, const std::string& name, F&& body,
                             double limit_ms = 0.0) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
               .count();
    if (limit_ms > 0.0 && r.ms > limit_ms) {
        r.pass = false;
        r.detail += " [over the " + fmt(limit_ms) + " ms budget]";
    }
    return r;
}

} // namespace selftest_detail

/// The acceptance suite: every criterion runs at its stated tolerance and
/// reports one pass/fail line. Deterministic (fixed seeds throughout).
inline std::vector<CriterionResult> run_acceptance(std::ostream* live = nullptr) {
    using namespace selftest_detail;
    std::vector<CriterionResult> results;
    auto emit = [&](CriterionResult r) {
        if (live) {
            (*live) << (r.pass ? "[PASS] " : "[FAIL] ") << std::setw(2) << std::setfill('0')
                    << r.id << std::setfill(' ') << " " << r.name << " (" << fmt(r.ms)
                    << " ms)" << (r.detail.empty() ? "" : "  -- " + r.detail) << "\n";
            live->flush();
        }
        results.push_back(std::move(r));
    };

    // 1. residue formula golden case, m = 2
    emit(timed(1, "residue-golden-case", [&](CriterionResult& r) {
        ConfigSampler smp(1001);
        BranchChart chart = BranchChart::monomial(2);
        double worst = 0.0;
        auto t0 = std::chrono::steady_clock::now();
        for (int trial = 0; trial < 20; ++trial) {
            cplx a = sampled_unit(smp), q = sampled_unit(smp);
            cplx got = residue_contraction(Series::constant(a, 4), chart, q);
            cplx want = M_PI * kImagUnit * q * a;
            worst = std::max(worst, std::abs(got - want) / std::abs(want));
        }
        double elapsed =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        r.pass = worst < 1e-12 && elapsed < 1.0;
        r.detail = "max rel err " + fmt(worst) + ", eval time " + fmt(elapsed) + " ms";
    }));

    // 2. quadrature oracle equals the residue formula: 45 cases
    emit(timed(2, "oracle-equivalence", [&](CriterionResult& r) {
        ConfigSampler smp(1002);
        const std::vector<std::pair<double, double>> radii = {
            {0.3, 0.7}, {0.2, 0.5}, {0.45, 0.8}};
        double worst = 0.0;
        int cases = 0;
        for (int m : {2, 3, 4}) {
            BranchChart chart = BranchChart::monomial(m);
            for (auto [r1, r2] : radii) {
                BumpProfile b(r1, r2);
                for (int i = 0; i < 5; ++i) {
                    Series alpha(4);
                    for (int k = 0; k <= 4; ++k) alpha.set_coeff(k, sampled_unit(smp));
                    cplx q = sampled_unit(smp);
                    cplx res = residue_contraction(alpha, chart, q);
                    cplx quad = quadrature_contraction(alpha, chart, b, q);
                    worst = std::max(worst,
                                     std::abs(quad - res) / std::max(1.0, std::abs(res)));
                    ++cases;
                }
            }
        }
        r.pass = worst < 1e-6 && cases == 45;
        r.detail = std::to_string(cases) + " cases, max rel err " + fmt(worst);
    }, 30000.0));

    // 3. independence of the bump profile
    emit(timed(3, "bump-independence", [&](CriterionResult& r) {
        ConfigSampler smp(1003);
        double worst = 0.0;
        for (int m : {2, 3}) {
            BranchChart chart = BranchChart::monomial(m);
            for (auto [r1, r2] : {std::pair{0.3, 0.7}, std::pair{0.25, 0.55}}) {
                Series alpha(4);
                for (int k = 0; k <= 4; ++k) alpha.set_coeff(k, sampled_unit(smp));
                cplx q = sampled_unit(smp);
                cplx a = quadrature_contraction(alpha, chart, BumpProfile(r1, r2, 5), q);
                cplx b = quadrature_contraction(alpha, chart, BumpProfile(r1, r2, 3), q);
                worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
            }
        }
        r.pass = worst < 1e-6;
        r.detail = "max rel gap " + fmt(worst);
    }));

    // 4. first-order convergence of mu_t/t to mu_dot0
    emit(timed(4, "first-order-check", [&](CriterionResult& r) {
        BranchChart chart = BranchChart::monomial(2);
        BumpProfile b(0.3, 0.7);
        const cplx q(0.21, 0.13);
        const std::vector<double> ts = {1e-2, 1e-3, 1e-4};
        std::vector<double> sups;
        for (double t : ts) {
            double sup = 0.0;
            for (int i = 0; i < 50; ++i)
                for (int j = 0; j < 50; ++j) {
                    cplx z(-0.99 + 0.04 * i, -0.99 + 0.04 * j);
                    cplx diff =
                        mu_t(chart, b, MoveSpec{q, t}, z) / t - mu_dot0(chart, b, q, z);
                    sup = std::max(sup, std::abs(diff));
                }
            sups.push_back(sup);
        }
        double slope = std::log(sups[0] / sups[2]) / std::log(ts[0] / ts[2]);
        r.pass = std::abs(slope - 1.0) <= 0.1;
        r.detail = "log-log slope " + fmt(slope);
    }));

    // 5. canonical-divisor test: paired vs generic divisors
    emit(timed(5, "canonical-divisor-test", [&](CriterionResult& r) {
        ConfigSampler smp(1005);
        bool ok = true;
        std::string why;
        for (int g : {2, 3, 4}) {
            Curve c = sampled_curve(g, smp);
            for (int trial = 0; trial < 5 && ok; ++trial) {
                Divisor E;
                for (const auto& p : smp.simple_points(c, g - 1)) {
                    E.add(p, 1);
                    E.add(involution(p), 1);
                }
                auto rep = is_canonical(c, E);
                if (!rep.canonical || rep.dim != g) {
                    ok = false;
                    why = "paired divisor failed at g=" + std::to_string(g);
                }
            }
            for (int trial = 0; trial < 100 && ok; ++trial) {
                Divisor E;
                for (const auto& p : smp.simple_points(c, 2 * g - 2)) E.add(p, 1);
                auto rep = is_canonical(c, E);
                if (rep.canonical || rep.dim != g - 1) {
                    ok = false;
                    why = "generic divisor failed at g=" + std::to_string(g);
                }
            }
        }
        r.pass = ok;
        r.detail = ok ? "paired: dim = g; 300 generic: dim = g-1" : why;
    }, 10000.0));

    // 6. sl2 systems end to end
    emit(timed(6, "sl2-cross-check", [&](CriterionResult& r) {
        ConfigSampler smp(1006);
        bool ok = true;
        std::string why;
        double worst_residual = 0.0;
        for (int g : {2, 3, 4}) {
            Curve c = sampled_curve(g, smp);
            for (int trial = 0; trial < 50 && ok; ++trial) {
                Sl2System sys(c, sampled_poly(smp, g - 1), sampled_poly(smp, g - 1),
                              sampled_poly(smp, g - 1));
                ProjPoint pp(sampled_unit(smp), sampled_unit(smp));
                Divisor D = branch_divisor(c, sys, pp);
                if (D.degree() != 2 * g - 2) {
                    ok = false;
                    why = "branch degree != 2g-2 at g=" + std::to_string(g);
                    break;
                }
                if (D.touches_infinity()) continue; // nongeneric; skip the affine checks
                for (const auto& [pt, m] : D.entries()) {
                    if (c.is_weierstrass_x(pt.x())) continue;
                    double res = eigen_residual(c, sys, pp, pt);
                    worst_residual = std::max(worst_residual, res);
                    if (res >= 1e-8) {
                        ok = false;
                        why = "eigen residual " + fmt(res);
                    }
                }
                if (ok && !is_canonical(c, D).canonical) {
                    ok = false;
                    why = "branch divisor not canonical at g=" + std::to_string(g);
                }
            }
        }
        r.pass = ok;
        r.detail = ok ? "150 systems, max eigen residual " + fmt(worst_residual) : why;
    }, 60000.0));

    // 7. monodromy: unimodularity, abelian closed form, homotopy invariance
    emit(timed(7, "monodromy", [&](CriterionResult& r) {
        ConfigSampler smp(1007);
        Curve c(Poly::from_roots(
            {cplx(1), cplx(-1), cplx(2), cplx(-2), cplx(3), cplx(-3)}));
        double worst_det = 0.0, worst_ab = 0.0, worst_hom = 0.0;

        for (int trial = 0; trial < 10; ++trial) {
            Sl2System sys(c, sampled_poly(smp, 1), sampled_poly(smp, 1),
                          sampled_poly(smp, 1));
            cplx center(2.0 * smp.uniform() - 1.0, 1.5 + smp.uniform());
            CurvePath loop = CurvePath::circle(center, 0.3 + 0.5 * smp.uniform(), 1, 24);
            Eigen::Matrix2cd M = monodromy(c, sys, loop, 1e-11);
            worst_det = std::max(worst_det, std::abs(M.determinant() - cplx(1)));
        }

        for (int trial = 0; trial < 3; ++trial) {
            Poly f = sampled_poly(smp, 1);
            Sl2System sys(c, f, Poly(), Poly());
            CurvePath loop = CurvePath::circle(cplx(1.5), 1.0, 1, 32);
            Eigen::Matrix2cd M = monodromy(c, sys, loop, 1e-11);
            // independent 1-D Simpson quadrature of the abelian integral
            cplx I(0.0);
            {
                const auto& pts = loop.waypoints();
                cplx y_prev = std::sqrt(eval(c.P(), pts.front()));
                for (size_t s = 0; s + 1 < pts.size(); ++s) {
                    const cplx a = pts[s], d = pts[s + 1] - pts[s];
                    const int n = 2000;
                    cplx acc(0.0);
                    std::vector<cplx> vals;
                    for (int k = 0; k <= 2 * n; ++k) {
                        cplx x = a + d * (double(k) / (2 * n));
                        cplx w = std::sqrt(eval(c.P(), x));
                        cplx y = (std::abs(w - y_prev) <= std::abs(-w - y_prev)) ? w : -w;
                        y_prev = y;
                        vals.push_back(eval(f, x) / y);
                    }
                    acc = vals.front() + vals.back();
                    for (int k = 1; k < 2 * n; ++k) acc += (k % 2 ? 4.0 : 2.0) * vals[size_t(k)];
                    I += acc * d / (6.0 * double(n));
                }
            }
            worst_ab = std::max(worst_ab,
                                std::abs(M(0, 0) - std::exp(I)) / std::abs(std::exp(I)));
            worst_ab = std::max(worst_ab, std::abs(M(0, 1)));
            worst_ab = std::max(worst_ab, std::abs(M(1, 0)));
        }

        {
            Sl2System sys(c, sampled_poly(smp, 1), sampled_poly(smp, 1),
                          sampled_poly(smp, 1));
            CurvePath circle = CurvePath::circle(cplx(1.5), 1.0, 1, 32);
            std::vector<cplx> rect = {cplx(2.5, 0.0),  cplx(2.5, 0.8),  cplx(0.5, 0.8),
                                      cplx(0.5, -0.8), cplx(2.5, -0.8), cplx(2.5, 0.0)};
            Eigen::Matrix2cd A = monodromy(c, sys, circle, 1e-11);
            Eigen::Matrix2cd B = monodromy(c, sys, CurvePath(rect, 1, true), 1e-11);
            worst_hom = (A - B).cwiseAbs().maxCoeff();
        }

        r.pass = worst_det < 1e-8 && worst_ab < 1e-6 && worst_hom < 1e-6;
        r.detail = "det gap " + fmt(worst_det) + ", abelian gap " + fmt(worst_ab) +
                   ", homotopy gap " + fmt(worst_hom);
    }));

    // 8. the main implication: nontrivial kernel forces a canonical divisor
    emit(timed(8, "kernel-implies-canonical", [&](CriterionResult& r) {
        ConfigSampler smp(1008);
        int counterexamples = 0, nontrivial = 0, total = 0;
        for (int g : {2, 3}) {
            Curve c = sampled_curve(g, smp);
            for (int trial = 0; trial < 100; ++trial) {
                BranchConfig cfg = [&]() {
                    double kind = smp.uniform();
                    if (kind < 0.4) { // paired simple, k = 2..2g-2 even
                        int pairs = 1 + int(smp.uniform() * (g - 1)) % (g - 1);
                        std::vector<CurvePoint> base = smp.simple_points(c, pairs);
                        return BranchConfig::paired_simple(c, base);
                    }
                    if (kind < 0.8) { // unpaired simple
                        int k = 1 + int(smp.uniform() * (2 * g - 2)) % (2 * g - 2);
                        std::vector<BranchEntry> es;
                        for (const auto& p : smp.simple_points(c, k)) es.push_back({p, 1});
                        return BranchConfig(c, std::move(es));
                    }
                    // one double point plus simple ones
                    int extra = int(smp.uniform() * (2 * g - 4 + 1)) % (2 * g - 3);
                    std::vector<BranchEntry> es;
                    auto pts = smp.simple_points(c, extra + 1);
                    es.push_back({pts[0], 2});
                    for (int i = 1; i <= extra; ++i) es.push_back({pts[size_t(i)], 1});
                    return BranchConfig(c, std::move(es));
                }();
                auto rep = criticality_test(c, cfg);
                ++total;
                if (rep.kernel_dim > 0) ++nontrivial;
                if (!rep.consistent) ++counterexamples;
            }
        }
        r.pass = counterexamples == 0 && total == 200 && nontrivial > 0;
        r.detail = std::to_string(total) + " configs, " + std::to_string(nontrivial) +
                   " with nontrivial kernel, " + std::to_string(counterexamples) +
                   " counterexamples";
    }));

    // 9. hyperelliptic converse: 1-dimensional critical direction
    emit(timed(9, "hyperelliptic-critical-line", [&](CriterionResult& r) {
        ConfigSampler smp(1009);
        bool ok = true;
        std::string why;
        double worst_sum = 0.0, worst_q = 0.0;
        for (int g : {2, 3, 4}) {
            Curve c = sampled_curve(g, smp);
            for (int trial = 0; trial < 10 && ok; ++trial) {
                BranchConfig cfg =
                    BranchConfig::paired_simple(c, smp.simple_points(c, g - 1));
                CriticalLine line = critical_line(c, cfg); // throws unless kernel dim = 1
                for (double s : line.residual_sum) worst_sum = std::max(worst_sum, s);
                for (double s : line.residual_q) worst_q = std::max(worst_q, s);
                for (cplx Q : line.Q)
                    if (std::abs(Q) <= 1e-8) {
                        ok = false;
                        why = "vanishing Q constant";
                    }
                if (line.diagonal_gap <= 1e-3) {
                    ok = false;
                    why = "kernel too close to the diagonal slice";
                }
            }
        }
        if (worst_sum >= 1e-8 || worst_q >= 1e-8) {
            ok = false;
            why = "kernel equations violated";
        }
        r.pass = ok;
        r.detail = ok ? "30 configs; max residuals " + fmt(worst_sum) + " / " + fmt(worst_q)
                      : why;
    }));

    // 10. sub-canonical immersion: full rank k for k < 2g-2
    emit(timed(10, "subcanonical-rank", [&](CriterionResult& r) {
        ConfigSampler smp(1010);
        bool ok = true;
        std::string why;
        for (int g : {2, 3, 4}) {
            Curve c = sampled_curve(g, smp);
            for (int k = 1; k < 2 * g - 2 && ok; ++k) {
                RankStats st = rank_profile(c, k, 100, 4242 + uint64_t(10 * g + k));
                if (st.min_rank != k || st.max_rank != k) {
                    ok = false;
                    why = "rank defect at g=" + std::to_string(g) + " k=" + std::to_string(k);
                }
            }
        }
        r.pass = ok;
        r.detail = ok ? "rank = k over 100 samples per (g,k), g=2..4" : why;
    }));

    // 11. kernel dimension is chart-independent (column rescalings)
    emit(timed(11, "chart-invariance", [&](CriterionResult& r) {
        ConfigSampler smp(1011);
        bool ok = true;
        int checked = 0;
        for (int cfg_i = 0; cfg_i < 20 && ok; ++cfg_i) {
            int g = (cfg_i % 2) ? 3 : 2;
            Curve c = sampled_curve(g, smp);
            BranchConfig cfg = (cfg_i % 3 == 0)
                                   ? BranchConfig::paired_simple(c, smp.simple_points(c, g - 1))
                                   : [&] {
                                         int k = 1 + int(smp.uniform() * (2 * g - 2)) %
                                                         (2 * g - 2);
                                         std::vector<BranchEntry> es;
                                         for (const auto& p : smp.simple_points(c, k))
                                             es.push_back({p, 1});
                                         return BranchConfig(c, std::move(es));
                                     }();
            PairingMatrix pm = pairing_matrix(c, cfg);
            size_t kd = kernel(pm).size();
            for (int rs = 0; rs < 20 && ok; ++rs) {
                Eigen::MatrixXcd scaled = pm.M;
                for (int j = 0; j < scaled.cols(); ++j) {
                    cplx s;
                    do {
                        s = sampled_unit(smp);
                    } while (std::abs(s) < 0.1);
                    scaled.col(j) *= s;
                }
                if (kernel(scaled).size() != kd) ok = false;
                ++checked;
            }
        }
        r.pass = ok && checked == 400;
        r.detail = std::to_string(checked) + " rescalings checked";
    }));

    return results;
}

inline bool acceptance_passed(const std::vector<CriterionResult>& rs) {
    for (const auto& r : rs)
        if (!r.pass) return false;
    return true;
}

} // namespace bps
