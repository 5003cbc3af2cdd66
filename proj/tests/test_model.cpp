#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "quadsim/key_value.hpp"
#include "quadsim/model.hpp"
#include "test_util.hpp"

using namespace quadsim;
using testing::measured_params;

TEST_CASE("measured parameter set passes with the planar-bound warning") {
  auto rep = validate_params(measured_params());
  CHECK(rep.level == ValidationLevel::Warn);
  REQUIRE(rep.warnings.size() == 1);
  CHECK(rep.failures.empty());
}

TEST_CASE("zero mass fails validation") {
  auto p = measured_params();
  p.M = 0.0;
  CHECK(validate_params(p).level == ValidationLevel::Fail);
}

TEST_CASE("halved Jzz clears the warning") {
  auto p = measured_params();
  p.Jzz /= 2.0;  // 0.014744 < Jxx + Jyy = 0.028270
  auto rep = validate_params(p);
  CHECK(rep.level == ValidationLevel::Pass);
  CHECK(rep.warnings.empty());
}

TEST_CASE("base weight") {
  CHECK(base_weight(measured_params()) == doctest::Approx(4.0329848).epsilon(1e-7));

  QuadcopterParams p = measured_params();
  p.M = 4.0;
  p.g = 1.0;
  CHECK(base_weight(p) == doctest::Approx(1.0));
  p.M = 0.4;
  p.g = 9.80665;
  CHECK(base_weight(p) == doctest::Approx(0.9806650));
}

TEST_CASE("base weight is linear in M and g") {
  auto p = measured_params();
  double b = base_weight(p);
  auto p2 = p;
  p2.M *= 3.0;
  CHECK(base_weight(p2) == doctest::Approx(3.0 * b));
  auto p3 = p;
  p3.g *= 0.5;
  CHECK(base_weight(p3) == doctest::Approx(0.5 * b));
}

TEST_CASE("parameter file round trip") {
  auto path = std::filesystem::temp_directory_path() / "quadsim_params_rt.txt";
  auto p = measured_params();
  auto m = testing::canonical_prop();
  write_params_file(path.string(), p, m);
  auto kv = load_key_value_file(path.string());
  auto p2 = params_from_kv(kv);
  auto m2 = propeller_from_kv(kv);
  CHECK(p2.M == p.M);
  CHECK(p2.Jzz == p.Jzz);
  CHECK(p2.gamma1 == p.gamma1);
  CHECK(m2.h1 == m.h1);
  CHECK(m2.g2 == m.g2);
  std::filesystem::remove(path);
}

TEST_CASE("shipped canonical parameter file parses and validates") {
  auto kv = load_key_value_file(std::string(QUADSIM_DATA_DIR) + "/params.txt");
  auto p = params_from_kv(kv);
  CHECK(validate_params(p).ok());
  CHECK(p.M == 1.645);
  auto m = propeller_from_kv(kv);
  CHECK(validate_propeller(m).ok());
}

TEST_CASE("key=value parser rejects malformed lines") {
  CHECK_THROWS_AS(parse_key_value("M 1.645"), std::runtime_error);
  CHECK_THROWS_AS(parse_key_value("= 3"), std::runtime_error);
  auto kv = parse_key_value("a = 1 # comment\n# full comment\n\nb = 2.5");
  CHECK(kv.get_double("a") == 1.0);
  CHECK(kv.get_double("b") == 2.5);
  CHECK_THROWS_AS(kv.get_double("missing"), std::runtime_error);
}
