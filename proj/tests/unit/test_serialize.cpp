#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "kmtc/dyadic.hpp"
#include "kmtc/errors.hpp"
#include "kmtc/family.hpp"
#include "kmtc/harness.hpp"
#include "kmtc/serialize.hpp"

using namespace kmtc;

TEST_CASE("shortest round-trip double formatting") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.5) == "1.5");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(0.1) == "0.1");
  // Sign of zero survives.
  CHECK(format_double(-0.0) == "-0");
  // Bitwise round trip across magnitudes.
  for (double v : {1.0 / 3.0, 6.02214076e23, 1e-300, -4.9e-324, 0.30000000000000004,
                   123456789.123456789}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
    CHECK(s.find(',') == std::string::npos);
  }
}

TEST_CASE("csv escaping follows the quoting rules") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("has,comma") == "\"has,comma\"");
  CHECK(csv_escape("has\"quote") == "\"has\"\"quote\"");
  CHECK(csv_escape("has\nnewline") == "\"has\nnewline\"");
  CHECK(csv_escape("") == "");

  std::ostringstream os;
  write_csv_row(os, {"a", "b,c", "d"});
  CHECK(os.str() == "a,\"b,c\",d\n");
}

TEST_CASE("family specs round trip through json") {
  FamilySpec1D g;
  g.kind = FamilyKind::gaussian;
  g.var = 2.5;

  FamilySpec1D p;
  p.kind = FamilyKind::poly_gaussian;
  p.tau = 0.35;

  FamilySpec1D c;
  c.kind = FamilyKind::conv_power;
  c.base.shape = "triangle";
  c.base.half_width = 0.75;
  c.m = 4;

  FamilySpec1D sc;
  sc.kind = FamilyKind::smoothed_compact;
  sc.b2 = 0.4;
  sc.inner = std::make_shared<FamilySpec1D>(c);

  FamilySpec1D samp;
  samp.kind = FamilyKind::conv_power;
  samp.base.shape = "samples";
  samp.base.sample_grid = Grid{-1.0, 1.0, 5};
  samp.base.samples = {0.1, 0.2, 0.4, 0.2, 0.1};
  samp.m = 2;

  for (const FamilySpec1D& raw : {g, p, c, sc, samp}) {
    const FamilySpec1D spec = standardize(raw);
    const Json j = family_to_json(spec);
    const FamilySpec1D back = family_from_json(j);
    // Byte-identical re-serialization is the round-trip criterion.
    CHECK(family_to_json(back).dump() == j.dump());
    CHECK(family_label(back) == family_label(spec));
  }
}

TEST_CASE("family json rejects malformed input") {
  CHECK_THROWS_AS(family_from_json(Json::parse(R"({"var":1})")), NumericError);
  CHECK_THROWS_AS(family_from_json(Json::parse(R"({"kind":"mystery"})")),
                  NumericError);
  CHECK_THROWS_AS(family_from_json(Json::parse(R"({"kind":"gaussian","var":0})")),
                  NumericError);
  CHECK_THROWS_AS(
      family_from_json(Json::parse(R"({"kind":"poly_gaussian","tau":-1})")),
      NumericError);
  CHECK_THROWS_AS(
      family_from_json(Json::parse(R"({"kind":"smoothed_compact","b2":0.2})")),
      NumericError);
  CHECK_THROWS_AS(family_from_json(Json::parse(R"({"kind":"conv_power"})")),
                  NumericError);
}

TEST_CASE("product families accept three spellings") {
  const Json full = Json::parse(
      R"({"coords":[{"kind":"gaussian","var":1},{"kind":"poly_gaussian","tau":0.5}]})");
  ProductFamily a = product_from_json(full);
  CHECK(a.d() == 2);
  CHECK(a.coords[0].kind == FamilyKind::gaussian);
  CHECK(a.coords[1].kind == FamilyKind::poly_gaussian);

  const Json shorthand =
      Json::parse(R"({"spec":{"kind":"poly_gaussian","tau":0.3},"d":3})");
  ProductFamily b = product_from_json(shorthand);
  CHECK(b.d() == 3);
  for (const auto& cspec : b.coords) CHECK(cspec.tau == 0.3);

  const Json bare = Json::parse(R"({"kind":"gaussian","var":4})");
  ProductFamily c = product_from_json(bare);
  CHECK(c.d() == 1);
  CHECK(c.coords[0].var == 4.0);

  // Round trip of the explicit form.
  CHECK(product_to_json(product_from_json(product_to_json(a))).dump() ==
        product_to_json(a).dump());
}

TEST_CASE("grid policy round trip and validation") {
  GridPolicy gp;
  gp.radius_sigma = 6.0;
  gp.n_points = 4096;
  gp.max_points = 8192;
  GridPolicy back = grid_policy_from_json(grid_policy_to_json(gp));
  CHECK(back.radius_sigma == gp.radius_sigma);
  CHECK(back.n_points == gp.n_points);
  CHECK(back.max_points == gp.max_points);
  CHECK_THROWS_AS(grid_policy_from_json(Json::parse(R"({"n_points":8})")),
                  NumericError);
}

TEST_CASE("decomposition text uses exact dyadic fractions") {
  CHECK(decomposition_text(decompose(3, 2)) ==
        "S_3 = 3/4*S[4] + 1/4*D[2,0] + 1/2*D[1,1]");
  CHECK(decomposition_text(decompose(2, 2)) == "S_2 = 1/2*S[4] + 1/2*D[2,0]");
  CHECK(decomposition_text(decompose(4, 2)) == "S_4 = 1*S[4]");
  CHECK(decomposition_text(decompose(5, 3)) ==
        "S_5 = 5/8*S[8] + 3/8*D[3,0] + 1/4*D[2,1] + 1/2*D[1,2]");

  const Json j = decomposition_to_json(decompose(3, 2));
  CHECK(j.at("global_coeff_exact") == "3/4");
  CHECK(j.at("terms").size() == 2);
  CHECK(j.at("terms")[0].at("gamma_exact") == "1/4");
}

TEST_CASE("path tables carry a 1-based index and LF line ends") {
  CouplingOutput out;
  out.N = 1;
  out.d = 2;
  out.x = {1.0, 2.0, 3.0, 4.0};
  out.y = {1.5, 2.5, 3.5, 4.5};
  out.disc = {1.0, 2.0};
  std::ostringstream os;
  write_coupling_csv(os, out);
  CHECK(os.str() ==
        "k,x_1,x_2,y_1,y_2,disc\n"
        "1,1,2,1.5,2.5,1\n"
        "2,3,4,3.5,4.5,2\n");
}

TEST_CASE("probe reports serialize with fixed key order") {
  ProbeReport rep;
  rep.name = "demo";
  rep.pass = false;
  rep.worst_margin = -0.25;
  rep.fitted["c2"] = 1.5;
  rep.notes.push_back("note a");
  rep.points.push_back({1.0, 0.5, 0.25, -0.25});
  const Json j = probe_to_json(rep);
  CHECK(j.begin().key() == "name");
  CHECK(j.at("pass") == false);
  CHECK(j.at("points")[0].at("margin") == -0.25);

  std::ostringstream os;
  write_probe_rows(os, rep);
  CHECK(os.str() == "demo,1,0.5,0.25,-0.25\n");
}

TEST_CASE("run config json omits execution-only fields") {
  const Json in = Json::parse(R"({
    "family": {"spec": {"kind": "poly_gaussian", "tau": 0.3}, "d": 2},
    "N": 6,
    "seed": 11,
    "replicates": 50,
    "jobs": 4,
    "out": "/tmp/somewhere"
  })");
  RunConfig cfg = run_config_from_json(in);
  CHECK(cfg.N == 6);
  CHECK(cfg.seed == 11);
  CHECK(cfg.replicates == 50);
  CHECK(cfg.jobs == 4);
  const Json out = run_config_to_json(cfg);
  CHECK(out.contains("family"));
  CHECK(out.contains("seed"));
  CHECK_FALSE(out.contains("jobs"));
  CHECK_FALSE(out.contains("out"));
  // Same settings always serialize to the same bytes.
  CHECK(out.dump() == run_config_to_json(run_config_from_json(in)).dump());
}
