#include <string>

#include "doctest.h"
#include "msw/config.hpp"
#include "msw/errors.hpp"

using namespace msw;

namespace {

bool message_contains(const std::vector<KeyValues>& layers, const std::string& needle) {
  try {
    resolve_config(layers);
  } catch (const ConfigError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("config text parsing") {
  const KeyValues kv = parse_config_text("# comment\n\n level = 3   # trailing\nframework=MT\n  days =0.5\n");
  REQUIRE(kv.size() == 3);
  CHECK(kv[0] == std::pair<std::string, std::string>{"level", "3"});
  CHECK(kv[1] == std::pair<std::string, std::string>{"framework", "MT"});
  CHECK(kv[2] == std::pair<std::string, std::string>{"days", "0.5"});
  CHECK_THROWS_WITH_AS(parse_config_text("level = 3\nlevel 4\n", "f"), doctest::Contains("f:2"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("level = 3\nlevel = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(" = 4\n"), ConfigError);
  CHECK_THROWS_AS(read_config_file("/nonexistent/msw.cfg"), ConfigError);
}

TEST_CASE("later layers override earlier ones") {
  const RunConfig c = resolve_config({{{"level", "3"}, {"days", "2"}}, {{"level", "4"}}});
  CHECK(c.spec.level == 4);
  CHECK(c.spec.days == 2.0);
}

TEST_CASE("all configuration errors are reported together") {
  const std::vector<KeyValues> bad = {{{"nonsense", "1"}, {"level", "x"}, {"days", "-1"}, {"framework", "MZ"}}};
  CHECK(message_contains(bad, "unknown key 'nonsense'"));
  CHECK(message_contains(bad, "level"));
  CHECK(message_contains(bad, "days must be positive"));
  CHECK(message_contains(bad, "framework"));
  CHECK(message_contains({{{"framework", "MC"}, {"beta2", "5"}}}, "beta"));
  CHECK(message_contains({{{"level", "9"}}}, "level"));
  CHECK(message_contains({{{"xi", "1.5"}}}, "xi"));
}

TEST_CASE("defaults follow the test and preset") {
  const RunConfig m = default_config(TestCase::Mountain, Framework::MoistConvective);
  CHECK(m.spec.mountain.h0 == 2000.0);
  CHECK(m.spec.days == 50.0);
  CHECK(m.spec.level == 5);
  CHECK(m.spec.H == 5960.0);
  CHECK(m.spec.xi == 0.02);
  CHECK(m.framework.beta1 == 1600.0);
  CHECK(m.framework.beta2 == 0.0);
  const RunConfig md = default_config(TestCase::Mountain, Framework::MoistThermal, "desk");
  CHECK(md.spec.level == 4);
  CHECK(md.spec.days == 15.0);
  CHECK(md.framework.beta1 == 0.0);
  CHECK(md.framework.beta2 == doctest::Approx(10.0 * constants::kGravity));
  const RunConfig jd = default_config(TestCase::UnstableJet, Framework::MoistConvectiveThermal, "desk");
  CHECK(jd.spec.level == 5);
  CHECK(jd.spec.days == 6.0);
  CHECK(jd.spec.q0 == 0.0027);
  CHECK(jd.spec.H == 10000.0);
  const RunConfig s = resolve_config({});
  CHECK(s.spec.test == TestCase::SteadyState);
  CHECK(s.physics.gamma_r == 1e-3);
  CHECK(s.physics.q_precip == 1e-4);
  CHECK(s.spec.H == doctest::Approx(3e4 / constants::kGravity));
  CHECK_THROWS_AS(default_config(TestCase::Mountain, Framework::MoistConvective, "huge"), ConfigError);
}

TEST_CASE("physics parameters take q0, H and xi from the test") {
  RunConfig c = resolve_config({{{"test", "jet"}, {"xi", "0.1"}}});
  const PhysicsParams p = c.physics_params();
  CHECK(p.q0 == 0.0027);
  CHECK(p.H == 10000.0);
  CHECK(p.xi == 0.1);
}

TEST_CASE("the echoed configuration reproduces itself") {
  const RunConfig c = resolve_config({{{"test", "mountain"}, {"framework", "MCPT"}, {"beta1", "8500"},
                                       {"dt", "1234.5678901234567"}, {"jet_alpha", "0.3333333333333333"},
                                       {"output_dir", "somewhere/else"}, {"limiter", "false"}}});
  const std::string echo = echo_config(c);
  const RunConfig back = resolve_config({parse_config_text(echo)});
  CHECK(echo_config(back) == echo);
  CHECK(back.dt == c.dt);
  CHECK(back.framework.framework == Framework::MoistConvectivePseudoThermal);
  CHECK(back.limiter == false);
  CHECK(echo.find("mountain_h0 = 2000") != std::string::npos);
  // Every key is echoed exactly once.
  for (const std::string& k : config_keys()) {
    CHECK(echo.find("\n" + k + " = ") != std::string::npos);
  }
}
