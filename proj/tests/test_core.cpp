#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include <vshp/params.hpp>

#include "helpers.hpp"

using namespace vshp;

namespace {

std::string without_line(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + " ", 0) != 0) out << line << "\n";
  return out.str();
}

std::string with_value(const std::string& text, const std::string& key, const std::string& value) {
  return without_line(text, key) + key + " = " + value + "\n";
}

LoadResult parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_params(in, "<test>");
}

}  // namespace

TEST_CASE("shipped parameter file matches the built-in reference set") {
  const LoadResult r = load_params(testutil::data_path("plant_params.txt"));
  CHECK(r.params.waterway.T_w == doctest::Approx(1.211).epsilon(1e-12));
  CHECK(r.params.waterway.Z_0 == doctest::Approx(9.61).epsilon(1e-12));
  CHECK(r.params.turbine.sigma == doctest::Approx(0.369).epsilon(1e-12));
  // the file mirrors the defaults exactly
  CHECK(serialize_params(r.params) == serialize_params(default_params()));
  CHECK(params_hash(r.params) == params_hash(default_params()));
  // optional keys are commented out in the file and reported as defaulted
  bool saw_ta = false;
  for (const auto& d : r.defaulted)
    if (d.rfind("turbine.T_a", 0) == 0) saw_ta = true;
  CHECK(saw_ta);
}

TEST_CASE("omitting T_a fills the documented default with a notice") {
  const std::string text = without_line(serialize_params(default_params()), "turbine.T_a");
  const LoadResult r = parse_text(text);
  CHECK(r.params.turbine.T_a == doctest::Approx(10.0));
  REQUIRE(r.defaulted.size() == 1);
  CHECK(r.defaulted[0] == "turbine.T_a = 10 (defaulted)");
}

TEST_CASE("invariant violations name the invariant") {
  const std::string base = serialize_params(default_params());
  CHECK_THROWS_WITH_AS(parse_text(with_value(base, "waterway.T_e", "0")),
                       doctest::Contains("T_e must be > 0"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_text(with_value(base, "waterway.Z_0", "5.0")),
                       doctest::Contains("Z_0 inconsistent"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_text(with_value(base, "turbine.xi", "0.2")),
                       doctest::Contains("xi must be > psi"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_text(with_value(base, "governor.rate_limit", "0")),
                       doctest::Contains("rate_limit must be > 0"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_text(with_value(base, "plant.tanh_n_den", "1")),
                       doctest::Contains("n_den >= n_num + 1"), ValidationError);
}

TEST_CASE("load errors name the offending key") {
  const std::string base = serialize_params(default_params());
  CHECK_THROWS_WITH_AS(parse_text(without_line(base, "waterway.T_w")),
                       doctest::Contains("waterway.T_w"), LoadError);
  CHECK_THROWS_WITH_AS(parse_text(base + "waterway.bogus = 1\n"), doctest::Contains("unknown key"),
                       LoadError);
  CHECK_THROWS_WITH_AS(parse_text(base + "waterway.T_w = 1.2\n"), doctest::Contains("duplicate"),
                       LoadError);
  CHECK_THROWS_WITH_AS(parse_text(with_value(base, "waterway.T_w", "abc")),
                       doctest::Contains("bad value"), LoadError);
}

TEST_CASE("Z_0 consistency with T_w/T_e holds for the reference values") {
  const PlantParams p = default_params();
  const double ratio = p.waterway.T_w / p.waterway.T_e;
  CHECK(std::abs(p.waterway.Z_0 - ratio) / p.waterway.Z_0 < 1e-3);
}

TEST_CASE("per-unit conversion between plant and turbine bases") {
  const PlantParams p = default_params();
  const TurbinePu tp = plant_to_turbine_pu(1.0, 1.0, p.turbine, p.waterway);
  CHECK(tp.q_t == doctest::Approx(170.0 / 153.0).epsilon(1e-14));
  CHECK(tp.h_t == doctest::Approx(1.0).epsilon(1e-14));  // equal head bases

  testutil::Lcg rng(2024);
  for (int i = 0; i < 200; ++i) {
    const double q = rng.uniform(-2.0, 2.0);
    const double h = rng.uniform(0.0, 2.0);
    const TurbinePu t = plant_to_turbine_pu(q, h, p.turbine, p.waterway);
    const PlantPu back = turbine_to_plant_pu(t.q_t, t.h_t, p.turbine, p.waterway);
    CHECK(back.q == doctest::Approx(q).epsilon(1e-12));
    CHECK(back.h == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("friction head loss is signed and odd") {
  CHECK(friction_head_loss(0.049, 1.0) == doctest::Approx(0.049));
  CHECK(friction_head_loss(0.02, -0.5) == doctest::Approx(-0.005));
  CHECK(friction_head_loss(0.0, 123.4) == 0.0);

  testutil::Lcg rng(7);
  for (int i = 0; i < 200; ++i) {
    const double f = rng.uniform(0.0, 0.2);
    const double q = rng.uniform(-3.0, 3.0);
    CHECK(friction_head_loss(f, -q) == doctest::Approx(-friction_head_loss(f, q)).epsilon(1e-15));
  }
}

TEST_CASE("serialization and hash are deterministic and value-sensitive") {
  const PlantParams p = default_params();
  CHECK(serialize_params(p) == serialize_params(p));
  PlantParams q = p;
  q.turbine.sigma = 0.37;
  CHECK(params_hash(p) != params_hash(q));
}

TEST_CASE("penstock mode names round-trip") {
  for (auto m : {PenstockMode::TravellingWaveDelay, PenstockMode::LumpedTanh,
                 PenstockMode::Inelastic})
    CHECK(penstock_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(penstock_mode_from_string("nope"), ValidationError);
}
