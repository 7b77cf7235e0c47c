#include <doctest.h>

#include <cmath>
#include <string>

#include "skc/model_io.hpp"

using namespace skc;

namespace {

std::string models_dir() { return SKC_MODELS_DIR; }

void expect_path(const std::string& text, const std::string& needle) {
  try {
    parse_model(text);
    FAIL(("expected a ValidationError mentioning " + needle));
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("every shipped model file loads as its declared kind") {
  CHECK(std::holds_alternative<ScalarGaussTriple>(
      load_model(models_dir() + "/scalar.json").payload));
  CHECK(std::holds_alternative<ProductGaussSource>(
      load_model(models_dir() + "/product.json").payload));
  CHECK(std::holds_alternative<GaussVectorModel>(
      load_model(models_dir() + "/vector_commutative.json").payload));
  CHECK(std::holds_alternative<GaussVectorModel>(
      load_model(models_dir() + "/vector_noncommutative.json").payload));
  CHECK(std::holds_alternative<SpectrumTriple>(
      load_model(models_dir() + "/spectrum_ma1.json").payload));
  CHECK(std::holds_alternative<DiscreteJoint>(
      load_model(models_dir() + "/discrete_cascade.json").payload));
  CHECK(std::holds_alternative<OneshotInstance>(
      load_model(models_dir() + "/oneshot_desk.json").payload));
}

TEST_CASE("scalar round trip and unit flag") {
  const ModelFile m = parse_model(R"({"kind":"scalar","rho_xy":0.8,"rho_xz":0.5})");
  CHECK(m.unit == Unit::Nats);
  const auto& t = std::get<ScalarGaussTriple>(m.payload);
  CHECK(t.rho_xy == 0.8);
  CHECK(t.rho_xz == 0.5);

  const ModelFile b =
      parse_model(R"({"kind":"scalar","unit":"bits","rho_xy":0.8,"rho_xz":0.5})");
  CHECK(b.unit == Unit::Bits);

  const ModelFile back = parse_model(serialize_model(b));
  CHECK(back.unit == Unit::Bits);
  CHECK(std::get<ScalarGaussTriple>(back.payload).rho_xy == 0.8);
}

TEST_CASE("malformed inputs carry a field path") {
  expect_path(R"({"rho_xy":0.8})", "/kind");
  expect_path(R"({"kind":"scalar","rho_xy":0.8,"rho_xz":0.5,"extra":1})", "/extra");
  expect_path(R"({"kind":"scalar","rho_xy":0.8})", "/rho_xz");
  expect_path(R"({"kind":"scalar","rho_xy":"x","rho_xz":0.5})", "/rho_xy");
  expect_path(R"({"kind":"widget"})", "/kind");
  expect_path(R"({"kind":"scalar","unit":"octal","rho_xy":0.8,"rho_xz":0.5})", "/unit");
  expect_path(R"({"kind":"vector","sx":[[1,0],[1]],"sy":[[1]],"sz":[[1]],"sxy":[[1]],"sxz":[[1]]})",
              "/sx");
  expect_path(
      R"({"kind":"spectrum","sx":{"acov":[1.0],"grid":[1.0]},"sy":{"acov":[1.0]},"sz":{"acov":[1.0]},"sxy":{"acov":[0.0]},"sxz":{"acov":[0.0]}})",
      "/sx");
  expect_path(R"({"kind":"oneshot","source":[[[0.5],[0.5]]],"channel":[[1.0]],"m":1,"m1":1,"m2":1.5})",
              "/m2");
  CHECK_THROWS_AS(parse_model("{not json"), ValidationError);
  CHECK_THROWS_AS(load_model(models_dir() + "/does_not_exist.json"), ValidationError);
  // Payload validation still applies after shape checks.
  CHECK_THROWS_AS(parse_model(R"({"kind":"scalar","rho_xy":1.7,"rho_xz":0.0})"),
                  DegenerateCorrelation);
}

TEST_CASE("matrix payload round trips bit-exactly") {
  const ModelFile m = load_model(models_dir() + "/vector_noncommutative.json");
  const ModelFile back = parse_model(serialize_model(m));
  const auto& a = std::get<GaussVectorModel>(m.payload);
  const auto& b = std::get<GaussVectorModel>(back.payload);
  CHECK((a.sx - b.sx).norm() == 0.0);
  CHECK((a.sxy - b.sxy).norm() == 0.0);
  CHECK((a.sxz - b.sxz).norm() == 0.0);
}

TEST_CASE("spectrum payloads: acov and grid forms") {
  const ModelFile m = load_model(models_dir() + "/spectrum_ma1.json");
  const auto& s = std::get<SpectrumTriple>(m.payload);
  CHECK(s.sx.eval(0.0).real() == doctest::Approx(1.6).epsilon(1e-14));
  const ModelFile back = parse_model(serialize_model(m));
  const auto& s2 = std::get<SpectrumTriple>(back.payload);
  for (double w : {0.0, 1.0, 2.5})
    CHECK(std::abs(s.sx.eval(w) - s2.sx.eval(w)) <= 1e-15);

  // Two-sided acov and grid forms survive a round trip as well.
  const ModelFile g = parse_model(R"({
    "kind":"spectrum",
    "sx":{"grid":[1.0,1.0,1.0,1.0]},
    "sy":{"grid":[1.0,1.0,1.0,1.0]},
    "sz":{"grid":[1.0,1.0,1.0,1.0]},
    "sxy":{"grid":[[0.5,0.0],[0.5,0.1],[0.5,0.0],[0.5,-0.1]]},
    "sxz":{"acov":{"kmin":-1,"coeffs":[0.1,0.4,0.1]}}
  })");
  const auto& gs = std::get<SpectrumTriple>(g.payload);
  CHECK(gs.sxy.grid_backed());
  CHECK_FALSE(gs.sxz.grid_backed());
  const ModelFile gb = parse_model(serialize_model(g));
  const auto& gs2 = std::get<SpectrumTriple>(gb.payload);
  for (int j = 0; j < 4; ++j) {
    const double w = 2.0 * M_PI * j / 4.0;
    CHECK(std::abs(gs.sxy.eval(w) - gs2.sxy.eval(w)) <= 1e-15);
  }
}

TEST_CASE("discrete and oneshot payloads validate on load") {
  const ModelFile d = load_model(models_dir() + "/discrete_cascade.json");
  const auto& j = std::get<DiscreteJoint>(d.payload);
  CHECK(j.nx == 2);
  CHECK(j.at(0, 0, 0) == 0.365625);

  // pmf that does not sum to one is rejected by the payload validator.
  CHECK_THROWS_AS(parse_model(R"({"kind":"discrete","pmf":[[[0.5,0.2],[0.1,0.1]]]})"),
                  ValidationError);

  const ModelFile o = load_model(models_dir() + "/oneshot_desk.json");
  const auto& inst = std::get<OneshotInstance>(o.payload);
  CHECK(inst.m == 2);
  CHECK(inst.channel(0, 0) == 0.75);
  const ModelFile ob = parse_model(serialize_model(o));
  CHECK(std::get<OneshotInstance>(ob.payload).source.p == inst.source.p);
}
