#include "msw/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "msw/errors.hpp"

namespace msw {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(fmt::format("'{}' is not a number", v));
  return x;
}

int parse_int(const std::string& v) {
  int x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(fmt::format("'{}' is not an integer", v));
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("'{}' is not a boolean (true/false)", v));
}

struct Key {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename Access>
Key real_key(std::string name, Access access) {
  return {std::move(name), [access](const RunConfig& c) { return fmt::format("{}", access(const_cast<RunConfig&>(c))); },
          [access](RunConfig& c, const std::string& v) { access(c) = parse_double(v); }};
}

template <typename Access>
Key int_key(std::string name, Access access) {
  return {std::move(name), [access](const RunConfig& c) { return fmt::format("{}", access(const_cast<RunConfig&>(c))); },
          [access](RunConfig& c, const std::string& v) { access(c) = parse_int(v); }};
}

template <typename Access>
Key bool_key(std::string name, Access access) {
  return {std::move(name),
          [access](const RunConfig& c) { return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false"); },
          [access](RunConfig& c, const std::string& v) { access(c) = parse_bool(v); }};
}

template <typename Access>
Key path_key(std::string name, Access access) {
  return {std::move(name), [access](const RunConfig& c) { return access(const_cast<RunConfig&>(c)).string(); },
          [access](RunConfig& c, const std::string& v) { access(c) = v; }};
}

// Keys that select the defaults; they are applied before everything else.
const std::vector<std::string> kSelectors = {"test", "framework", "preset"};

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back({"test", [](const RunConfig& c) { return std::string(test_name(c.spec.test)); },
                 [](RunConfig& c, const std::string& v) { c.spec.test = parse_test(v); }});
    k.push_back({"framework", [](const RunConfig& c) { return std::string(framework_name(c.framework.framework)); },
                 [](RunConfig& c, const std::string& v) { c.framework.framework = c.spec.framework = parse_framework(v); }});
    k.push_back({"preset", [](const RunConfig& c) { return c.preset; },
                 [](RunConfig& c, const std::string& v) {
                   if (v != "paper" && v != "desk") throw ConfigError(fmt::format("unknown preset '{}' (paper or desk)", v));
                   c.preset = v;
                 }});
    k.push_back(int_key("level", [](RunConfig& c) -> int& { return c.spec.level; }));
    k.push_back(real_key("days", [](RunConfig& c) -> double& { return c.spec.days; }));
    k.push_back(real_key("dt", [](RunConfig& c) -> double& { return c.dt; }));
    k.push_back(real_key("courant", [](RunConfig& c) -> double& { return c.courant; }));
    k.push_back({"scheme", [](const RunConfig& c) { return std::string(scheme_name(c.physics.scheme)); },
                 [](RunConfig& c, const std::string& v) { c.physics.scheme = parse_scheme(v); }});
    k.push_back(path_key("output_dir", [](RunConfig& c) -> std::filesystem::path& { return c.output_dir; }));
    k.push_back(real_key("snapshot_days", [](RunConfig& c) -> double& { return c.snapshot_days; }));
    k.push_back(path_key("restart", [](RunConfig& c) -> std::filesystem::path& { return c.restart; }));
    k.push_back(bool_key("limiter", [](RunConfig& c) -> bool& { return c.limiter; }));
    k.push_back(int_key("outer_iterations", [](RunConfig& c) -> int& { return c.outer_iterations; }));
    k.push_back(int_key("inner_iterations", [](RunConfig& c) -> int& { return c.inner_iterations; }));
    k.push_back(real_key("linear_tolerance", [](RunConfig& c) -> double& { return c.linear_tolerance; }));
    k.push_back(int_key("max_level", [](RunConfig& c) -> int& { return c.max_level; }));

    k.push_back(real_key("beta1", [](RunConfig& c) -> double& { return c.framework.beta1; }));
    k.push_back(real_key("beta2", [](RunConfig& c) -> double& { return c.framework.beta2; }));
    k.push_back({"coriolis", [](const RunConfig& c) { return std::string(coriolis_name(c.framework.coriolis)); },
                 [](RunConfig& c, const std::string& v) { c.framework.coriolis = parse_coriolis(v); }});
    k.push_back({"g", [](const RunConfig& c) { return fmt::format("{}", c.spec.g); },
                 [](RunConfig& c, const std::string& v) { c.spec.g = c.framework.g = parse_double(v); }});
    k.push_back({"omega", [](const RunConfig& c) { return fmt::format("{}", c.spec.omega); },
                 [](RunConfig& c, const std::string& v) { c.spec.omega = c.framework.omega = parse_double(v); }});
    k.push_back(real_key("radius", [](RunConfig& c) -> double& { return c.spec.radius; }));

    k.push_back(real_key("u0", [](RunConfig& c) -> double& { return c.spec.u0; }));
    k.push_back(real_key("Phi0", [](RunConfig& c) -> double& { return c.spec.Phi0; }));
    k.push_back(real_key("epsilon", [](RunConfig& c) -> double& { return c.spec.epsilon; }));
    k.push_back(real_key("H", [](RunConfig& c) -> double& { return c.spec.H; }));
    k.push_back(real_key("q0", [](RunConfig& c) -> double& { return c.spec.q0; }));
    k.push_back(real_key("xi", [](RunConfig& c) -> double& { return c.spec.xi; }));
    k.push_back(real_key("tau_v", [](RunConfig& c) -> double& { return c.physics.tau_v; }));
    k.push_back(real_key("tau_r", [](RunConfig& c) -> double& { return c.physics.tau_r; }));
    k.push_back(real_key("gamma_r", [](RunConfig& c) -> double& { return c.physics.gamma_r; }));
    k.push_back(real_key("q_precip", [](RunConfig& c) -> double& { return c.physics.q_precip; }));
    k.push_back(bool_key("theta_in_saturation", [](RunConfig& c) -> bool& { return c.physics.theta_in_saturation; }));

    k.push_back(real_key("mountain_h0", [](RunConfig& c) -> double& { return c.spec.mountain.h0; }));
    k.push_back(real_key("mountain_radius", [](RunConfig& c) -> double& { return c.spec.mountain.radius; }));
    k.push_back(real_key("mountain_lon_c", [](RunConfig& c) -> double& { return c.spec.mountain.lon_c; }));
    k.push_back(real_key("mountain_lat_c", [](RunConfig& c) -> double& { return c.spec.mountain.lat_c; }));

    k.push_back(bool_key("jet_perturb", [](RunConfig& c) -> bool& { return c.spec.perturb; }));
    k.push_back(real_key("jet_u_max", [](RunConfig& c) -> double& { return c.spec.jet.u_max; }));
    k.push_back(real_key("jet_phi0", [](RunConfig& c) -> double& { return c.spec.jet.phi0; }));
    k.push_back(real_key("jet_phi1", [](RunConfig& c) -> double& { return c.spec.jet.phi1; }));
    k.push_back(real_key("jet_h_hat", [](RunConfig& c) -> double& { return c.spec.jet.h_hat; }));
    k.push_back(real_key("jet_alpha", [](RunConfig& c) -> double& { return c.spec.jet.alpha; }));
    k.push_back(real_key("jet_beta", [](RunConfig& c) -> double& { return c.spec.jet.beta; }));
    k.push_back(real_key("jet_phi2", [](RunConfig& c) -> double& { return c.spec.jet.phi2; }));
    k.push_back(real_key("jet_delta_b", [](RunConfig& c) -> double& { return c.spec.jet.delta_b; }));
    k.push_back(int_key("jet_balance_panels", [](RunConfig& c) -> int& { return c.spec.balance_panels; }));
    return k;
  }();
  return keys;
}

const Key* find_key(const std::string& name) {
  for (const Key& k : key_table()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

std::vector<std::string> validation_errors(const RunConfig& c) {
  std::vector<std::string> errors;
  auto check = [&](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  };
  check([&] { validate(c.physics_params()); });
  check([&] { validate(c.framework); });
  if (c.spec.level < 0 || c.spec.level > c.max_level) {
    errors.push_back(fmt::format("level must lie in [0, {}] (got {})", c.max_level, c.spec.level));
  }
  if (!(c.spec.days > 0.0)) errors.push_back("days must be positive");
  if (!(c.dt >= 0.0)) errors.push_back("dt must be nonnegative (0 derives it from the Courant number)");
  if (c.dt == 0.0 && !(c.courant > 0.0)) errors.push_back("courant must be positive");
  if (!(c.snapshot_days >= 0.0)) errors.push_back("snapshot_days must be nonnegative");
  if (c.outer_iterations < 1 || c.inner_iterations < 1) errors.push_back("iteration counts must be at least 1");
  if (!(c.linear_tolerance > 0.0 && c.linear_tolerance < 1.0)) errors.push_back("linear_tolerance must lie in (0, 1)");
  if (!(c.spec.radius > 0.0) || !(c.spec.g > 0.0)) errors.push_back("radius and g must be positive");
  if (c.spec.balance_panels < 10000) errors.push_back("jet_balance_panels must be at least 10000");
  return errors;
}

}  // namespace

PhysicsParams RunConfig::physics_params() const {
  PhysicsParams p = physics;
  p.q0 = spec.q0;
  p.H = spec.H;
  p.xi = spec.xi;
  return p;
}

KeyValues parse_config_text(const std::string& text, const std::string& origin) {
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, n));
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: missing key", origin, n));
    if (std::any_of(out.begin(), out.end(), [&](const auto& kv) { return kv.first == key; })) {
      throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", origin, n, key));
    }
    out.emplace_back(key, value);
  }
  return out;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

RunConfig default_config(TestCase test, Framework framework, const std::string& preset) {
  RunConfig c;
  c.spec = default_spec(test, framework);
  c.framework = make_framework(framework);
  c.physics = default_physics(c.spec);
  c.preset = preset;
  if (preset == "desk") {
    if (test == TestCase::Mountain) {
      c.spec.level = 4;
      c.spec.days = 15.0;
    } else if (test == TestCase::UnstableJet) {
      c.spec.level = 5;
      c.spec.days = 6.0;
    }
  } else if (preset != "paper") {
    throw ConfigError(fmt::format("unknown preset '{}' (paper or desk)", preset));
  }
  return c;
}

RunConfig resolve_config(const std::vector<KeyValues>& layers) {
  std::map<std::string, std::string> merged;
  std::vector<std::string> order;
  for (const KeyValues& layer : layers) {
    for (const auto& [k, v] : layer) {
      if (!merged.count(k)) order.push_back(k);
      merged[k] = v;
    }
  }

  std::vector<std::string> errors;
  TestCase test = TestCase::SteadyState;
  Framework framework = Framework::MoistConvectiveThermal;
  std::string preset = "paper";
  try {
    if (merged.count("test")) test = parse_test(merged["test"]);
  } catch (const ConfigError& e) {
    errors.push_back(fmt::format("test: {}", e.what()));
  }
  try {
    if (merged.count("framework")) framework = parse_framework(merged["framework"]);
  } catch (const ConfigError& e) {
    errors.push_back(fmt::format("framework: {}", e.what()));
  }
  if (merged.count("preset")) preset = merged["preset"];
  if (preset != "paper" && preset != "desk") {
    errors.push_back(fmt::format("preset: unknown preset '{}' (paper or desk)", preset));
    preset = "paper";
  }

  RunConfig c = default_config(test, framework, preset);
  for (const std::string& k : order) {
    if (std::find(kSelectors.begin(), kSelectors.end(), k) != kSelectors.end()) continue;
    const Key* key = find_key(k);
    if (!key) {
      errors.push_back(fmt::format("unknown key '{}'", k));
      continue;
    }
    try {
      key->set(c, merged[k]);
    } catch (const Error& e) {
      errors.push_back(fmt::format("{}: {}", k, e.what()));
    }
  }
  for (std::string& e : validation_errors(c)) errors.push_back(std::move(e));
  if (!errors.empty()) {
    std::string msg = fmt::format("{} configuration error(s):", errors.size());
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return c;
}

std::string echo_config(const RunConfig& cfg) {
  std::string out = "# resolved configuration; feed back with --config to reproduce the run\n";
  for (const Key& k : key_table()) out += fmt::format("{} = {}\n", k.name, k.get(cfg));
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> names;
  for (const Key& k : key_table()) names.push_back(k.name);
  return names;
}

}  // namespace msw
