#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include "bps/critical.hpp"
#include "bps/sl2.hpp"

namespace bps::io {

using json = nlohmann::json;

inline json complex_json(cplx z) {
    // +0.0 normalizes the sign of IEEE negative zeros
    return json::array({z.real() + 0.0, z.imag() + 0.0});
}

inline cplx complex_from(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError(where + ": expected a complex number as [re, im]");
    return cplx(j[0].get<double>(), j[1].get<double>());
}

inline json poly_json(const Poly& p) {
    json arr = json::array();
    for (cplx c : p.coeffs()) arr.push_back(complex_json(c));
    return arr;
}

inline Poly poly_from(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected an array of [re, im] pairs");
    std::vector<cplx> c;
    for (size_t i = 0; i < j.size(); ++i)
        c.push_back(complex_from(j[i], where + "[" + std::to_string(i) + "]"));
    return Poly(std::move(c));
}

inline Series series_from(const json& j, const std::string& where) {
    Poly p = poly_from(j, where);
    int order = std::max<int>(0, int(j.size()) - 1);
    return Series::of_poly(p, order);
}

inline json series_json(const Series& s) {
    json arr = json::array();
    for (cplx c : s.coeffs()) arr.push_back(complex_json(c));
    return arr;
}

// Curve JSON: {"P": [[re,im], ...]}
inline Curve curve_from(const json& j) {
    if (!j.is_object() || !j.contains("P"))
        throw ParseError("curve: expected an object with field \"P\"");
    return Curve(poly_from(j["P"], "curve.P"));
}

inline json curve_json(const Curve& c) { return json{{"P", poly_json(c.P())}}; }

inline json point_json(const CurvePoint& p) {
    if (p.at_infinity()) return json{{"inf", p.inf_sign()}};
    return json{{"x", complex_json(p.x())}, {"y", complex_json(p.y())}};
}

// Divisor JSON: list of {"x":[re,im],"y":[re,im],"mult":n} or {"inf":s,"mult":n}
inline Divisor divisor_from(const json& j) {
    if (!j.is_array()) throw ParseError("divisor: expected a list of point entries");
    Divisor D;
    for (size_t i = 0; i < j.size(); ++i) {
        const json& e = j[i];
        const std::string where = "divisor[" + std::to_string(i) + "]";
        if (!e.is_object()) throw ParseError(where + ": expected an object");
        int mult = e.value("mult", 1);
        if (e.contains("inf")) {
            D.add(CurvePoint::infinity(e["inf"].get<int>()), mult);
        } else if (e.contains("x") && e.contains("y")) {
            D.add(CurvePoint::affine(complex_from(e["x"], where + ".x"),
                                     complex_from(e["y"], where + ".y")),
                  mult);
        } else {
            throw ParseError(where + ": need either x/y or inf");
        }
    }
    return D;
}

inline json divisor_json(const Divisor& D) {
    // sorted for reproducible output
    auto entries = D.entries();
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.first.at_infinity() != b.first.at_infinity()) return !a.first.at_infinity();
        if (a.first.at_infinity()) return a.first.inf_sign() > b.first.inf_sign();
        auto ka = std::array<double, 4>{a.first.x().real(), a.first.x().imag(),
                                        a.first.y().real(), a.first.y().imag()};
        auto kb = std::array<double, 4>{b.first.x().real(), b.first.x().imag(),
                                        b.first.y().real(), b.first.y().imag()};
        return ka < kb;
    });
    json arr = json::array();
    for (const auto& [p, m] : entries) {
        json e = point_json(p);
        e["mult"] = m;
        arr.push_back(std::move(e));
    }
    return arr;
}

// Config JSON mirrors divisor JSON with per-point "order"
inline BranchConfig config_from(const Curve& c, const json& j) {
    if (!j.is_array()) throw ParseError("config: expected a list of point entries");
    std::vector<BranchEntry> es;
    for (size_t i = 0; i < j.size(); ++i) {
        const json& e = j[i];
        const std::string where = "config[" + std::to_string(i) + "]";
        if (!e.is_object() || !e.contains("x") || !e.contains("y"))
            throw ParseError(where + ": expected an object with x and y");
        es.push_back({CurvePoint::affine(complex_from(e["x"], where + ".x"),
                                         complex_from(e["y"], where + ".y")),
                      e.value("order", 1)});
    }
    return BranchConfig(c, std::move(es));
}

// System JSON: {"a11": [...], "a12": [...], "a21": [...]}
inline Sl2System system_from(const Curve& c, const json& j) {
    if (!j.is_object()) throw ParseError("system: expected an object");
    auto field = [&](const char* name) {
        return j.contains(name) ? poly_from(j[name], std::string("system.") + name) : Poly();
    };
    return Sl2System(c, field("a11"), field("a12"), field("a21"));
}

// Path JSON: {"waypoints": [[re,im],...], "sheet": s, "closed": bool}
inline CurvePath path_from(const json& j) {
    if (!j.is_object() || !j.contains("waypoints"))
        throw ParseError("path: expected an object with field \"waypoints\"");
    std::vector<cplx> pts;
    const json& w = j["waypoints"];
    if (!w.is_array()) throw ParseError("path.waypoints: expected a list");
    for (size_t i = 0; i < w.size(); ++i)
        pts.push_back(complex_from(w[i], "path.waypoints[" + std::to_string(i) + "]"));
    return CurvePath(std::move(pts), j.value("sheet", 1), j.value("closed", false));
}

// Chart JSON: {"m": n, "c": [[re,im],...] (optional), "r_disk": r (optional)}
inline BranchChart chart_from(const json& j) {
    if (!j.is_object() || !j.contains("m"))
        throw ParseError("chart: expected an object with field \"m\"");
    const int m = j["m"].get<int>();
    const double r_disk = j.value("r_disk", 1.0);
    if (j.contains("c")) return BranchChart(m, series_from(j["c"], "chart.c"), r_disk);
    return BranchChart::monomial(m, r_disk);
}

inline json matrix_json(const Eigen::MatrixXcd& M) {
    json rows = json::array();
    for (long i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (long k = 0; k < M.cols(); ++k) row.push_back(complex_json(M(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Matrix CSV: one row per differential, entries "re+imi".
inline std::string matrix_csv(const Eigen::MatrixXcd& M) {
    std::ostringstream os;
    os.precision(17);
    for (long i = 0; i < M.rows(); ++i) {
        for (long k = 0; k < M.cols(); ++k) {
            if (k) os << ",";
            double re = M(i, k).real() + 0.0, im = M(i, k).imag() + 0.0;
            os << re << (im < 0 ? "-" : "+") << std::abs(im) << "i";
        }
        os << "\n";
    }
    return os.str();
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

} // namespace bps::io
