#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "halo/manin.hpp"
#include "halo/newton.hpp"

using namespace halo;

namespace {

// hand-built series over a small window, J chosen so every digit is certified
FredholmSeries tiny_series(std::vector<std::vector<int64_t>> coeffs) {
  FredholmSeries F;
  F.p = 3;
  F.j = 0;
  F.st = 4;
  F.Dd = 1;
  F.S = 4;
  F.T = TsRing::make(3, 20, 8);
  F.J = 20;
  F.n_max = (unsigned)coeffs.size() - 1;
  for (auto& row : coeffs) {
    TSeries s = TSeries::zero(F.T);
    for (size_t m = 0; m < row.size(); m++) s.c[m] = F.T.R.from_i64(row[m]);
    F.c.push_back(s);
  }
  F.pguard.assign(F.n_max + 1, 0);
  return F;
}

std::vector<std::pair<Rational, unsigned>> slope_list(
    std::initializer_list<std::pair<int64_t, unsigned>> xs) {
  std::vector<std::pair<Rational, unsigned>> out;
  for (auto& [s, m] : xs) out.push_back({Rational(s), m});
  return out;
}

}  // namespace

TEST_CASE("hull construction and flags") {
  Rational h(1, 2);
  SUBCASE("collinear points merge into one segment") {
    Polygon P = make_polygon({{0, Rational(0), PtFlag::EXACT},
                              {1, Rational(1), PtFlag::EXACT},
                              {2, Rational(2), PtFlag::EXACT}});
    REQUIRE(P.hull.size() == 2);
    CHECK(P.hull[1].first == 2);
    CHECK(P.slopes == slope_list({{1, 2}}));
    CHECK(P.segs[0].certified);
  }
  SUBCASE("ties never anchor but do flag") {
    Polygon P = make_polygon({{0, Rational(0), PtFlag::EXACT},
                              {1, h, PtFlag::TIE},
                              {2, Rational(2), PtFlag::EXACT}});
    REQUIRE(P.hull.size() == 2);  // the TIE point is not a vertex
    CHECK(P.hull[0].first == 0);
    CHECK(P.hull[1].first == 2);
    CHECK_FALSE(P.segs[0].certified);  // constraint 1/2 sits below the chord
  }
  SUBCASE("constraints strictly above leave the segment certified") {
    Polygon P = make_polygon({{0, Rational(0), PtFlag::EXACT},
                              {1, Rational(5), PtFlag::ATLEAST},
                              {2, Rational(2), PtFlag::EXACT}});
    REQUIRE(P.segs.size() == 1);
    CHECK(P.segs[0].certified);
  }
  SUBCASE("hull values interpolate") {
    Polygon P = make_polygon({{0, Rational(0), PtFlag::EXACT},
                              {2, Rational(1), PtFlag::EXACT},
                              {4, Rational(4), PtFlag::EXACT}});
    CHECK(*polygon_value(P, 1) == h);
    CHECK(*polygon_value(P, 3) == Rational(5, 2));
    CHECK_FALSE(polygon_value(P, 5).has_value());
    CHECK(slopes_below(P, Rational(3, 2)) ==
          std::vector<std::pair<Rational, unsigned>>{{h, 2}});
  }
}

TEST_CASE("specialization polygons of trivial series") {
  SUBCASE("1 - X is a single ordinary segment") {
    FredholmSeries F = tiny_series({{1}, {-1}});
    Polygon P = newton_at(F, WeightSpec::boundary(0, Rational(1, 2)));
    CHECK(P.slopes == slope_list({{0, 1}}));
    CHECK(P.segs[0].certified);
  }
  SUBCASE("1 - TX at v = 1/2 has slope 1/2") {
    FredholmSeries F = tiny_series({{1}, {0, -1}});
    Polygon P = newton_at(F, WeightSpec::boundary(0, Rational(1, 2)));
    REQUIRE(P.slopes.size() == 1);
    CHECK(P.slopes[0].first == Rational(1, 2));
    CHECK(P.points[1].flag == PtFlag::EXACT);
  }
  SUBCASE("ultrametric tie is reported, not resolved") {
    // pT + T^3 at v = 1/2: terms m=1 and m=3 both reach 3/2
    FredholmSeries F = tiny_series({{1}, {0, 3, 0, 1}});
    Polygon P = newton_at(F, WeightSpec::boundary(0, Rational(1, 2)));
    CHECK(P.points[1].flag == PtFlag::TIE);
    CHECK(P.points[1].y == Rational(3, 2));
    REQUIRE(P.hull.size() == 1);  // only n=0 is EXACT
  }
  SUBCASE("universal weight is refused") {
    FredholmSeries F = tiny_series({{1}, {-1}});
    CHECK_THROWS_AS((void)newton_at(F, WeightSpec::universal(0)), std::invalid_argument);
  }
}

TEST_CASE("lower and upper bound polygons") {
  std::vector<long> lam = lambda_profile(3, 4, 24);
  Rational v(1, 2);
  Polygon lb = lb_polygon(lam, v);
  SUBCASE("flat through the first (p+1)t indices") {
    CHECK(*polygon_value(lb, 4) == Rational(0));
    CHECK(lb.slopes[0].first == Rational(0));
  }
  SUBCASE("touch grid values follow the closed form") {
    CHECK(*polygon_value(lb, 12) == Rational(lambda_closed_form(3, 1, 1)) * v);
    CHECK(*polygon_value(lb, 24) == Rational(lambda_closed_form(3, 1, 2)) * v);
  }
  SUBCASE("doubling v doubles the polygon pointwise") {
    Polygon lb2 = lb_polygon(lam, v + v);
    for (unsigned n = 0; n <= 24; n++)
      CHECK(*polygon_value(lb2, n) == *polygon_value(lb, n) + *polygon_value(lb, n));
  }
  SUBCASE("chord polygon stays above the convex lower bound") {
    Polygon ub = ub_polygon(3, 1, lam, v);
    REQUIRE(ub.hull.size() == 3);  // grid 0, 12, 24
    CHECK(ub.hull[1].first == 12);
    for (unsigned n = 0; n <= 24; n++) CHECK(*polygon_value(ub, n) >= *polygon_value(lb, n));
    // chords touch the lower bound exactly on the grid
    CHECK(*polygon_value(ub, 12) == *polygon_value(lb, 12));
    CHECK(*polygon_value(ub, 24) == *polygon_value(lb, 24));
    CHECK(*polygon_value(ub, 6) > *polygon_value(lb, 6));
  }
}

TEST_CASE("boundary radius is exact") {
  CHECK(boundary_radius(3, 4) == Rational(1, 5));
  CHECK(boundary_radius(3, 88) == Rational(1, 89));
}

TEST_CASE("halo decomposition at N=4") {
  Domain D = build_domain(4);
  finish_domain(D);
  UpTable tab = up_table(D, 3);
  TsRing T = TsRing::make(3, 24, 14);
  // Dd = 20 certifies 13 coefficient digits in the m-adic sense, enough to pin
  // the full window n <= 12 with EXACT flags
  UpMatrix U = assemble_up(T, tab, 0, 20);
  CHECK(U.S == 80);
  FredholmSeries F = fredholm(U, 12);
  CHECK(F.J == 13);

  std::vector<Rational> samples{Rational(1, 7), Rational(1, 11), Rational(2, 15)};
  HaloReport rep = halo_decompose(F, samples);
  CHECK(rep.stability);
  CHECK(rep.breakpoints == std::vector<unsigned>{0, 3, 9, 12});
  REQUIRE(rep.components.size() == 3);
  CHECK(rep.components[0].alpha == Rational(0));
  CHECK(rep.components[0].degree == 3);
  CHECK(rep.components[1].alpha == Rational(1));
  CHECK(rep.components[1].degree == 6);
  CHECK(rep.components[2].alpha == Rational(2));
  CHECK(rep.components[2].degree == 3);
  for (const HaloComponent& c : rep.components) CHECK(c.certified);
  CHECK(rep.coverage == 12);
  CHECK(rep.sandwich == Verdict::PASS);
  CHECK(rep.dichotomy == Verdict::PASS);
  CHECK(rep.units_unknown == 0);
  CHECK(rep.units + rep.nonunits == 13);

  SUBCASE("samples at or beyond the radius are refused") {
    CHECK_THROWS_AS((void)halo_decompose(F, {Rational(1, 5)}), std::domain_error);
    CHECK_THROWS_AS((void)halo_decompose(F, {Rational(1, 4)}), std::domain_error);
    CHECK_THROWS_AS((void)halo_decompose(F, {}), std::invalid_argument);
  }
  SUBCASE("report serializes") {
    nlohmann::json j = nlohmann::json::parse(halo_json(rep));
    CHECK(j["schema"] == "halo-report/1");
    CHECK(j["breakpoints"] == nlohmann::json({0, 3, 9, 12}));
    CHECK(j["components"][0]["interval"] == "[0,0]");
    CHECK(j["components"][1]["interval"] == "(0,1)");  // alpha 1, p-1 = 2
    CHECK(j["components"][2]["interval"] == "[1,1]");
    CHECK(j["sandwich"] == "PASS");
    CHECK(j["stability"] == true);
  }
}

TEST_CASE("halo decomposition of 1 - X") {
  FredholmSeries F = tiny_series({{1}, {-1}});
  HaloReport rep = halo_decompose(F, {Rational(1, 7)});
  REQUIRE(rep.components.size() == 1);
  CHECK(rep.components[0].alpha == Rational(0));
  CHECK(rep.components[0].degree == 1);
  CHECK(rep.units == 2);  // both c_0 and c_1 have unit leading digit
  CHECK(rep.dichotomy == Verdict::PASS);
}

TEST_CASE("center-weight polygons against the control oracle") {
  Domain D = build_domain(4);
  finish_domain(D);
  UpTable tab = up_table(D, 3);
  TsRing T = TsRing::make(3, 24, 14);
  UpMatrix U = assemble_up(T, tab, 0, 10);
  FredholmSeries F = fredholm(U, 12);
  PadicCtx C = PadicCtx::make(3, 24);
  SUBCASE("weight 0: ordinary multiplicity 3") {
    PAdicInt b0 = beta_center(C, 0, 24);
    Polygon P = newton_at(F, WeightSpec::center(0, b0));
    CHECK(slopes_below(P, Rational(1)) == slope_list({{0, 3}}));
  }
  SUBCASE("weight 1: slopes below 2 are {0 x3, 1 x2}") {
    PAdicInt b1 = beta_center(C, 1, 24);
    Polygon P = newton_at(F, WeightSpec::center(0, b1));
    CHECK(slopes_below(P, Rational(2)) == slope_list({{0, 3}, {1, 2}}));
  }
  SUBCASE("exact center series gives the same small slopes") {
    CenterSeries c0 = center_fredholm(C, tab, 0, 0, 10);
    Polygon P = newton_center(C, c0);
    CHECK(slopes_below(P, Rational(1)) == slope_list({{0, 3}}));
    CenterSeries c1 = center_fredholm(C, tab, 0, 1, 10);
    Polygon P1 = newton_center(C, c1);
    CHECK(slopes_below(P1, Rational(2)) == slope_list({{0, 3}, {1, 2}}));
  }
}

TEST_CASE("arithmetic progression detector") {
  SUBCASE("consecutive integers form one progression") {
    std::vector<std::pair<Rational, unsigned>> xs;
    for (int64_t i = 0; i <= 5; i++) xs.push_back({Rational(i), 1});
    ApReport rep = ap_detect(xs, 4);
    REQUIRE(rep.progressions.size() == 1);
    CHECK(rep.progressions[0].diff == Rational(1));
    CHECK(rep.progressions[0].length == 6);
    CHECK(rep.residual == 0);
  }
  SUBCASE("half-integers and integers split into two progressions") {
    std::vector<std::pair<Rational, unsigned>> xs{{Rational(1, 2), 1},
                                                  {Rational(3, 2), 1},
                                                  {Rational(5, 2), 1},
                                                  {Rational(1), 1},
                                                  {Rational(2), 1}};
    ApReport rep = ap_detect(xs, 4);
    CHECK(rep.progressions.size() == 2);
    CHECK(rep.residual == 0);
  }
  SUBCASE("constant runs use difference zero") {
    ApReport rep = ap_detect({{Rational(0), 3}, {Rational(1), 6}, {Rational(2), 3}}, 8);
    CHECK(rep.progressions.size() == 3);
    CHECK(rep.covered == 12);
    CHECK(rep.residual == 0);
    for (const Progression& pr : rep.progressions) CHECK(pr.diff == Rational(0));
  }
  SUBCASE("budget exhaustion leaves a residual") {
    ApReport rep = ap_detect({{Rational(0), 2}, {Rational(1, 2), 2}}, 1);
    CHECK(rep.progressions.size() == 1);
    CHECK(rep.residual > 0);
    CHECK(rep.covered + rep.residual == 4);
  }
}

TEST_CASE("polygon exports") {
  FredholmSeries F = tiny_series({{1}, {0, -1}});
  Polygon P = newton_at(F, WeightSpec::boundary(0, Rational(1, 2)));
  nlohmann::json j = nlohmann::json::parse(polygon_json(P));
  CHECK(j["schema"] == "halo-polygon/1");
  CHECK(j["points"].size() == 2);
  CHECK(j["points"][1]["y"] == "1/2");
  CHECK(j["points"][1]["flag"] == "EXACT");
  CHECK(j["slopes"][0]["slope"] == "1/2");
  CHECK(j["slopes"][0]["mult"] == 1);
  std::string csv = polygon_csv(P);
  CHECK(csv == "slope,multiplicity,certified\n1/2,1,1\n");
}
