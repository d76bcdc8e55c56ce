#include <catch2/catch_amalgamated.hpp>

#include "bps/io.hpp"
#include "test_util.hpp"

using namespace bps;
using nlohmann::json;
using testutil::Rng;

TEST_CASE("complex and polynomial round trips") {
    cplx z(1.25, -3.5);
    CHECK(io::complex_from(io::complex_json(z), "t") == z);
    CHECK_THROWS_AS(io::complex_from(json::array({1.0}), "t"), ParseError);
    CHECK_THROWS_AS(io::complex_from(json("x"), "t"), ParseError);

    Poly p{cplx(1, 2), cplx(0), cplx(-0.5, 0.25)};
    Poly q = io::poly_from(io::poly_json(p), "t");
    REQUIRE(q.degree() == p.degree());
    for (int k = 0; k <= p.degree(); ++k) CHECK(q.coeff(k) == p.coeff(k));
}

TEST_CASE("curve, divisor and config parsing") {
    json cj = json::parse(R"({"P": [[-1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[1,0]]})");
    Curve c = io::curve_from(cj);
    CHECK(c.genus() == 2);
    json back = io::curve_json(c);
    CHECK(back["P"].size() == 7);

    json dj = json::parse(
        R"([{"x":[0,0],"y":[0,1],"mult":1},{"x":[0,0],"y":[0,-1],"mult":1},{"inf":1,"mult":2}])");
    Divisor D = io::divisor_from(dj);
    CHECK(D.degree() == 4);
    CHECK(D.multiplicity(CurvePoint::infinity(1)) == 2);
    Divisor D2 = io::divisor_from(io::divisor_json(D));
    CHECK(D2.degree() == 4);
    for (const auto& [p, m] : D.entries()) CHECK(D2.multiplicity(p) == m);

    CHECK_THROWS_AS(io::divisor_from(json::parse(R"([{"mult":1}])")), ParseError);
    CHECK_THROWS_AS(io::curve_from(json::parse(R"({"Q": []})")), ParseError);

    json cfgj = json::parse(R"([{"x":[0,0],"y":[0,1],"order":1},{"x":[0,0],"y":[0,-1]}])");
    BranchConfig cfg = io::config_from(c, cfgj);
    CHECK(cfg.paired());
    CHECK(cfg.total_order() == 2);
}

TEST_CASE("system, path and chart parsing") {
    Curve c = io::curve_from(json::parse(R"({"P": [[-1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[1,0]]})"));
    json sj = json::parse(R"({"a11": [[1,0]], "a12": [], "a21": [[0,1],[2,0]]})");
    Sl2System sys = io::system_from(c, sj);
    CHECK(sys.a11.f().degree() == 0);
    CHECK(sys.a12.is_zero());
    CHECK(sys.a21.f().degree() == 1);

    json pj = json::parse(R"({"waypoints": [[0,2],[1,2],[0,2]], "sheet": -1, "closed": true})");
    CurvePath path = io::path_from(pj);
    CHECK(path.start_sheet() == -1);
    CHECK(path.closed());
    CHECK(path.waypoints().size() == 3);
    CHECK_THROWS_AS(io::path_from(json::object()), ParseError);

    BranchChart mono = io::chart_from(json::parse(R"({"m": 3})"));
    CHECK(mono.m() == 3);
    CHECK(mono.g_series().coeff(0) == cplx(3));
    BranchChart pert = io::chart_from(
        json::parse(R"({"m": 2, "c": [[0,0],[0,0],[1,0],[0,0],[0.25,0]]})"));
    CHECK(pert.g_series().coeff(2) == cplx(1.0));

    CHECK_THROWS_AS(io::chart_from(json::parse(R"({"m": 2, "c": [[1,0],[0,0],[1,0]]})")),
                    InvalidChart);
}

TEST_CASE("matrix csv format") {
    Eigen::MatrixXcd M(1, 2);
    M(0, 0) = cplx(1.5, 2.25);
    M(0, 1) = cplx(-0.5, -1.0);
    std::string csv = io::matrix_csv(M);
    CHECK(csv == "1.5+2.25i,-0.5-1i\n");
}

TEST_CASE("json emission is deterministic") {
    Rng rng(401);
    Curve c = io::curve_from(json::parse(R"({"P": [[-1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[1,0]]})"));
    Divisor D;
    for (int i = 0; i < 3; ++i) {
        cplx x = rng.disk(0.5);
        D.add(c.lift(x, 1), 1);
    }
    CHECK(io::divisor_json(D).dump() == io::divisor_json(D).dump());
}

TEST_CASE("load_json reports missing files as parse errors") {
    CHECK_THROWS_AS(io::load_json("/nonexistent/file.json"), ParseError);
}

TEST_CASE("error codes are distinct and machine readable") {
    CHECK(ParseError("x").code() == "ParseError");
    CHECK(WeierstrassChart("x").code() == "WeierstrassChart");
    CHECK(ZeroTheta("x").code() == "ZeroTheta");
    CHECK(GridTooCoarse("x").code() == "GridTooCoarse");
    CHECK(UnexpectedKernelDim("x").code() == "UnexpectedKernelDim");
    CHECK(DegenerateConfig("x").code() != NonInjectiveIsotopy("x").code());
}
