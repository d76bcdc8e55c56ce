#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "bps/io.hpp"
#include "bps/selftest.hpp"

using namespace bps;
using nlohmann::json;

namespace {

double default_tol() {
    if (const char* s = std::getenv("BPS_TOL")) {
        char* end = nullptr;
        double v = std::strtod(s, &end);
        if (end != s && v > 0.0) return v;
    }
    return 1e-8;
}

cplx parse_cplx(const std::string& s, const std::string& what) {
    double re = 0, im = 0;
    if (std::sscanf(s.c_str(), "%lf,%lf", &re, &im) != 2)
        throw ParseError(what + ": expected \"re,im\", got \"" + s + "\"");
    return cplx(re, im);
}

void print(const json& j) { std::cout << j.dump() << "\n"; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"branched projective structures on hyperelliptic curves: canonical-divisor "
                 "tests, movement pairings, sl2 branch loci and monodromy"};
    app.require_subcommand(0, 1);

    double tol = default_tol();
    app.add_option("--tol", tol, "kernel/rank cutoff and ODE tolerance")
        ->capture_default_str();
    bool selftest = false;
    app.add_flag("--selftest", selftest, "run the acceptance suite and exit");

    // canonical <curve.json> <divisor.json>
    std::string arg_curve, arg_divisor;
    auto* cmd_canonical =
        app.add_subcommand("canonical", "is the divisor canonical on the curve?");
    cmd_canonical->add_option("curve", arg_curve, "curve JSON file")->required();
    cmd_canonical->add_option("divisor", arg_divisor, "divisor JSON file")->required();

    // contract --mode residue|quadrature <chart.json> <alpha.json> --q re,im
    std::string arg_mode = "residue", arg_chart, arg_alpha, arg_q = "1,0";
    double arg_r1 = 0.3, arg_r2 = 0.7, arg_qtol = 1e-9;
    int arg_step_deg = 5, arg_radial = 48, arg_angular = 64, arg_refine = 6;
    auto* cmd_contract = app.add_subcommand(
        "contract", "pairing of a quadratic differential with a unit branch move");
    cmd_contract->add_option("--mode", arg_mode, "residue or quadrature")
        ->check(CLI::IsMember({"residue", "quadrature"}))
        ->capture_default_str();
    cmd_contract->add_option("chart", arg_chart, "chart JSON file")->required();
    cmd_contract->add_option("alpha", arg_alpha, "series JSON file")->required();
    cmd_contract->add_option("--q", arg_q, "displacement as re,im")->capture_default_str();
    cmd_contract->add_option("--r1", arg_r1, "bump plateau radius")->capture_default_str();
    cmd_contract->add_option("--r2", arg_r2, "bump support radius")->capture_default_str();
    cmd_contract->add_option("--smoothstep", arg_step_deg, "smoothstep degree (3 or 5)")
        ->capture_default_str();
    cmd_contract->add_option("--radial", arg_radial, "radial quadrature nodes")
        ->capture_default_str();
    cmd_contract->add_option("--angular", arg_angular, "angular quadrature nodes")
        ->capture_default_str();
    cmd_contract->add_option("--qtol", arg_qtol, "quadrature refinement tolerance")
        ->capture_default_str();
    cmd_contract->add_option("--max-refine", arg_refine, "refinement budget")
        ->capture_default_str();

    // critical <curve.json> <config.json>
    std::string arg_config;
    auto* cmd_critical = app.add_subcommand(
        "critical", "critical line of a paired simple branch configuration");
    cmd_critical->add_option("curve", arg_curve, "curve JSON file")->required();
    cmd_critical->add_option("config", arg_config, "config JSON file")->required();

    // pairing <curve.json> <config.json> [--format json|csv]
    std::string arg_format = "json";
    auto* cmd_pairing =
        app.add_subcommand("pairing", "pairing matrix of a branch configuration");
    cmd_pairing->add_option("curve", arg_curve, "curve JSON file")->required();
    cmd_pairing->add_option("config", arg_config, "config JSON file")->required();
    cmd_pairing->add_option("--format", arg_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    // rank --g G --k K --samples N --seed S [--curve file]
    int arg_g = 2, arg_k = 1, arg_samples = 100;
    uint64_t arg_seed = 1;
    std::string arg_curve_opt;
    auto* cmd_rank =
        app.add_subcommand("rank", "pairing-matrix rank over random simple configurations");
    cmd_rank->add_option("--g", arg_g, "genus (unit curve y^2 = x^(2g+2)-1 by default)")
        ->capture_default_str();
    cmd_rank->add_option("--k", arg_k, "number of simple branch points")->capture_default_str();
    cmd_rank->add_option("--samples", arg_samples, "sample count")->capture_default_str();
    cmd_rank->add_option("--seed", arg_seed, "RNG seed")->capture_default_str();
    cmd_rank->add_option("--curve", arg_curve_opt, "curve JSON file overriding --g");

    // sl2-branch <curve.json> <system.json> --c c1re,c1im,c2re,c2im
    std::string arg_system, arg_c = "1,0,0,1";
    auto* cmd_sl2_branch =
        app.add_subcommand("sl2-branch", "branch divisor of an sl2 system");
    cmd_sl2_branch->add_option("curve", arg_curve, "curve JSON file")->required();
    cmd_sl2_branch->add_option("system", arg_system, "system JSON file")->required();
    cmd_sl2_branch->add_option("--c", arg_c, "projective point c1re,c1im,c2re,c2im")
        ->capture_default_str();

    // sl2-monodromy <curve.json> <system.json> <path.json>
    std::string arg_path;
    auto* cmd_sl2_mon =
        app.add_subcommand("sl2-monodromy", "fundamental solution along a path");
    cmd_sl2_mon->add_option("curve", arg_curve, "curve JSON file")->required();
    cmd_sl2_mon->add_option("system", arg_system, "system JSON file")->required();
    cmd_sl2_mon->add_option("path", arg_path, "path JSON file")->required();

    // sl2-eigen <curve.json> <system.json> --c ... --x re,im --sheet s
    std::string arg_x = "0,0";
    int arg_sheet = 1;
    auto* cmd_sl2_eigen =
        app.add_subcommand("sl2-eigen", "eigenvector residual of c at a curve point");
    cmd_sl2_eigen->add_option("curve", arg_curve, "curve JSON file")->required();
    cmd_sl2_eigen->add_option("system", arg_system, "system JSON file")->required();
    cmd_sl2_eigen->add_option("--c", arg_c, "projective point c1re,c1im,c2re,c2im")
        ->capture_default_str();
    cmd_sl2_eigen->add_option("--x", arg_x, "x-coordinate re,im")->capture_default_str();
    cmd_sl2_eigen->add_option("--sheet", arg_sheet, "sheet sign (+1 or -1)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        print(json{{"error", "ParseError"}, {"detail", e.what()}});
        return 1;
    }

    try {
        if (selftest) {
            auto results = run_acceptance(&std::cout);
            std::cout << (acceptance_passed(results) ? "SELFTEST PASS" : "SELFTEST FAIL")
                      << "\n";
            return acceptance_passed(results) ? 0 : 1;
        }

        if (cmd_canonical->parsed()) {
            Curve c = io::curve_from(io::load_json(arg_curve));
            Divisor D = io::divisor_from(io::load_json(arg_divisor));
            if (D.degree() != 2 * c.genus() - 2) {
                print(json{{"canonical", false}, {"reason", "degree"}, {"degree", D.degree()}});
                return 0;
            }
            auto rep = is_canonical(c, D);
            json out{{"canonical", rep.canonical}, {"dim", rep.dim}};
            if (!rep.reason.empty()) out["reason"] = rep.reason;
            print(out);
            return 0;
        }

        if (cmd_contract->parsed()) {
            BranchChart chart = io::chart_from(io::load_json(arg_chart));
            Series alpha = io::series_from(io::load_json(arg_alpha), "alpha");
            cplx q = parse_cplx(arg_q, "--q");
            cplx value;
            if (arg_mode == "residue") {
                value = residue_contraction(alpha, chart, q);
            } else {
                BumpProfile b(arg_r1, arg_r2, arg_step_deg);
                QuadratureSpec spec;
                spec.radial = arg_radial;
                spec.angular = arg_angular;
                spec.tol = arg_qtol;
                spec.max_refine = arg_refine;
                value = quadrature_contraction(alpha, chart, b, q, spec);
            }
            print(json{{"mode", arg_mode}, {"value", io::complex_json(value)}});
            return 0;
        }

        if (cmd_critical->parsed()) {
            Curve c = io::curve_from(io::load_json(arg_curve));
            BranchConfig cfg = io::config_from(c, io::load_json(arg_config));
            CriticalLine line = critical_line(c, cfg);
            json kv = json::array();
            for (long i = 0; i < line.kernel.front().size(); ++i)
                kv.push_back(io::complex_json(line.kernel.front()(i)));
            json Q = json::array();
            for (cplx q : line.Q) Q.push_back(io::complex_json(q));
            print(json{{"kernel_dim", line.kernel.size()},
                       {"kernel", kv},
                       {"Q", Q},
                       {"residual_sum", line.residual_sum},
                       {"residual_q", line.residual_q},
                       {"diagonal_gap", line.diagonal_gap}});
            return 0;
        }

        if (cmd_pairing->parsed()) {
            Curve c = io::curve_from(io::load_json(arg_curve));
            BranchConfig cfg = io::config_from(c, io::load_json(arg_config));
            PairingMatrix pm = pairing_matrix(c, cfg);
            if (arg_format == "csv") {
                std::cout << io::matrix_csv(pm.M);
            } else {
                print(json{{"rows", pm.M.rows()},
                           {"cols", pm.M.cols()},
                           {"chart", pm.chart},
                           {"orders", pm.orders},
                           {"matrix", io::matrix_json(pm.M)},
                           {"kernel_dim", kernel(pm, tol).size()}});
            }
            return 0;
        }

        if (cmd_rank->parsed()) {
            Curve c = [&] {
                if (!arg_curve_opt.empty()) return io::curve_from(io::load_json(arg_curve_opt));
                if (arg_g < 2) throw InvalidCurve("--g must be at least 2");
                std::vector<cplx> pc(size_t(2 * arg_g + 3), cplx(0));
                pc[0] = cplx(-1);
                pc.back() = cplx(1);
                return Curve(Poly(std::move(pc)));
            }();
            RankStats st = rank_profile(c, arg_k, arg_samples, arg_seed);
            print(json{{"g", c.genus()},
                       {"k", arg_k},
                       {"samples", st.samples},
                       {"min_rank", st.min_rank},
                       {"max_rank", st.max_rank}});
            return 0;
        }

        if (cmd_sl2_branch->parsed() || cmd_sl2_eigen->parsed()) {
            Curve c = io::curve_from(io::load_json(arg_curve));
            Sl2System sys = io::system_from(c, io::load_json(arg_system));
            double c1r, c1i, c2r, c2i;
            if (std::sscanf(arg_c.c_str(), "%lf,%lf,%lf,%lf", &c1r, &c1i, &c2r, &c2i) != 4)
                throw ParseError("--c: expected c1re,c1im,c2re,c2im");
            ProjPoint pp(cplx(c1r, c1i), cplx(c2r, c2i));
            if (cmd_sl2_branch->parsed()) {
                Divisor D = branch_divisor(c, sys, pp);
                print(json{{"degree", D.degree()}, {"divisor", io::divisor_json(D)}});
            } else {
                cplx x = parse_cplx(arg_x, "--x");
                CurvePoint pt = c.lift(x, arg_sheet);
                print(json{{"residual", eigen_residual(c, sys, pp, pt)}});
            }
            return 0;
        }

        if (cmd_sl2_mon->parsed()) {
            Curve c = io::curve_from(io::load_json(arg_curve));
            Sl2System sys = io::system_from(c, io::load_json(arg_system));
            CurvePath path = io::path_from(io::load_json(arg_path));
            Eigen::Matrix2cd M = monodromy(c, sys, path, tol);
            print(json{{"Phi",
                        {io::complex_json(M(0, 0)), io::complex_json(M(0, 1)),
                         io::complex_json(M(1, 0)), io::complex_json(M(1, 1))}},
                       {"det", io::complex_json(M.determinant())}});
            return 0;
        }

        std::cout << app.help();
        return 0;
    } catch (const ParseError& e) {
        print(json{{"error", e.code()}, {"detail", e.what()}});
        return 1;
    } catch (const Error& e) {
        print(json{{"error", e.code()}, {"detail", e.what()}});
        return 2;
    } catch (const std::exception& e) {
        print(json{{"error", "Internal"}, {"detail", e.what()}});
        return 2;
    }
}
