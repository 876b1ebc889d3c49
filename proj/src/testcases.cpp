#include "msw/testcases.hpp"

#include <cmath>

#include <fmt/format.h>

#include "msw/errors.hpp"

namespace msw {

namespace {

constexpr double kPi = std::numbers::pi;

std::pair<double, double> lonlat(const Vec3& x) { return lonlat_of(x); }

Vec3 eastward(const Vec3& x, double speed) {
  const double rho = std::hypot(x.x(), x.y());
  if (rho == 0.0) return Vec3::Zero();
  return speed / rho * Vec3(-x.y(), x.x(), 0.0);
}

}  // namespace

std::string_view test_name(TestCase t) {
  switch (t) {
    case TestCase::SteadyState: return "steady";
    case TestCase::Mountain: return "mountain";
    case TestCase::UnstableJet: return "jet";
  }
  return "?";
}

TestCase parse_test(std::string_view name) {
  if (name == "steady" || name == "steady_state") return TestCase::SteadyState;
  if (name == "mountain") return TestCase::Mountain;
  if (name == "jet" || name == "unstable_jet") return TestCase::UnstableJet;
  throw ConfigError(fmt::format("unknown test case '{}' (expected steady, mountain or jet)", name));
}

double JetProfile::e_n() const { return std::exp(-4.0 / ((phi1 - phi0) * (phi1 - phi0))); }

double JetProfile::u(double lat) const {
  if (lat <= phi0 || lat >= phi1) return 0.0;
  return u_max / e_n() * std::exp(1.0 / ((lat - phi0) * (lat - phi1)));
}

double JetProfile::bump(double lon, double lat) const {
  return h_hat * std::cos(lat) * std::exp(-(lon / alpha) * (lon / alpha)) *
         std::exp(-((phi2 - lat) / beta) * ((phi2 - lat) / beta));
}

TestCaseSpec default_spec(TestCase test, Framework framework) {
  TestCaseSpec s;
  s.test = test;
  s.framework = framework;
  switch (test) {
    case TestCase::SteadyState:
      s.H = s.Phi0 / s.g;
      s.q0 = 0.007;
      s.xi = 0.0;
      s.days = 5.0;
      s.level = 5;
      break;
    case TestCase::Mountain:
      s.H = 5960.0;
      s.q0 = 0.007;
      s.xi = 0.02;
      s.days = 50.0;
      s.level = 5;
      break;
    case TestCase::UnstableJet:
      s.H = 10000.0;
      s.q0 = 0.0027;
      s.xi = 0.02;
      s.days = 6.0;
      s.level = 6;
      break;
  }
  return s;
}

double theta_background(double lat, const TestCaseSpec& spec) {
  const double w = spec.omega_w() + spec.sigma();
  const double c2 = std::cos(lat) * std::cos(lat);
  const double s2 = std::sin(lat) * std::sin(lat);
  const double num = spec.theta0() + spec.sigma() * c2 * (w * c2 + 2.0 * (spec.Phi0 - w));
  const double den = spec.Phi0 * spec.Phi0 + w * w * s2 * s2 - 2.0 * spec.Phi0 * w * s2;
  return num / den;
}

double mountain_topography(double lon, double lat, const MountainParams& m) {
  double dl = std::remainder(lon - m.lon_c, 2.0 * kPi);
  if (dl <= -kPi) dl += 2.0 * kPi;
  const double r = std::hypot(dl, lat - m.lat_c);
  return m.h0 * (1.0 - std::min(m.radius, r) / m.radius);
}

JetBalance::JetBalance(const TestCaseSpec& spec, const FrameworkConfig& cfg, bool constant_b)
    : spec_(spec), cfg_(cfg), constant_b_(constant_b) {
  const JetProfile& j = spec.jet;
  if (!(j.phi0 > -kPi / 2 && j.phi1 < kPi / 2 && j.phi0 < j.phi1)) {
    throw ArgumentError("jet profile must vanish at the poles (need -pi/2 < phi0 < phi1 < pi/2)");
  }
  if (spec.balance_panels < 10000) throw ArgumentError("jet balance needs at least 10^4 panels");
  const int n = spec.balance_panels;
  h_ = kPi / n;
  cumulative_.assign(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    const double a = -kPi / 2 + i * h_;
    cumulative_[i + 1] = cumulative_[i] + partial(a, a + h_);
  }
}

double JetBalance::integrand(double lat) const {
  const double u = spec_.jet.u(lat);
  if (u == 0.0) return 0.0;
  const double b = constant_b_ ? spec_.g : spec_.g - spec_.jet.delta_b * std::cos(lat);
  const Vec3 x(std::cos(lat), 0.0, std::sin(lat));
  const double f = cfg_.coriolis_parameter(x, true);
  return (u * u * std::tan(lat) + spec_.radius * f * u) / std::sqrt(b);
}

double JetBalance::partial(double a, double b) const {
  static const IntervalRule rule = gauss_legendre(9);
  double sum = 0.0;
  for (int q = 0; q < rule.size(); ++q) sum += rule.weights[q] * integrand(a + (b - a) * rule.points[q]);
  return sum * (b - a);
}

double JetBalance::depth(double lat) const {
  const double t = (lat + kPi / 2) / h_;
  const int n = static_cast<int>(cumulative_.size()) - 1;
  const int i = std::clamp(static_cast<int>(std::floor(t)), 0, n - 1);
  const double start = -kPi / 2 + i * h_;
  const double integral = cumulative_[i] + partial(start, lat);
  const double db = constant_b_ ? 0.0 : spec_.jet.delta_b;
  const double b = spec_.g - db * std::cos(lat);
  return (spec_.H * std::sqrt(spec_.g - db) - integral) / std::sqrt(b);
}

AnalyticFields analytic_fields(const TestCaseSpec& spec, const FrameworkConfig& cfg) {
  AnalyticFields a;
  const bool thermal = cfg.thermal();
  const double g = spec.g;
  if (spec.test == TestCase::UnstableJet) {
    auto balance = std::make_shared<JetBalance>(spec, cfg, !thermal);
    const JetProfile jet = spec.jet;
    const bool perturb = spec.perturb;
    a.u = [jet](const Vec3& x) { return eastward(x, jet.u(lonlat(x).second)); };
    a.D = [balance, jet, perturb](const Vec3& x) {
      const auto [lon, lat] = lonlat(x);
      return balance->depth(lat) + (perturb ? jet.bump(lon, lat) : 0.0);
    };
    a.b = [jet, g, thermal](const Vec3& x) {
      return thermal ? g - jet.delta_b * std::cos(lonlat(x).second) : g;
    };
    a.B = [](const Vec3&) { return 0.0; };
    a.theta = [jet, g](const Vec3& x) { return -jet.delta_b * std::cos(lonlat(x).second) / g; };
    return a;
  }

  const double u0 = spec.u0;
  const double w = spec.omega_w() + (thermal ? spec.sigma() : 0.0);
  const double H = spec.H;
  const bool mountain = spec.test == TestCase::Mountain;
  const MountainParams mp = spec.mountain;
  a.u = [u0](const Vec3& x) { return Vec3(u0 / x.norm() * Vec3(-x.y(), x.x(), 0.0)); };
  a.B = [mountain, mp](const Vec3& x) {
    if (!mountain) return 0.0;
    const auto [lon, lat] = lonlat(x);
    return mountain_topography(lon, lat, mp);
  };
  auto topo = a.B;
  a.D = [w, H, g, topo](const Vec3& x) {
    const double s = x.z() / x.norm();
    return H - w * s * s / g - topo(x);
  };
  a.theta = [spec](const Vec3& x) { return theta_background(lonlat(x).second, spec); };
  a.b = [spec, g, thermal](const Vec3& x) {
    return thermal ? g * (1.0 - theta_background(lonlat(x).second, spec)) : g;
  };
  return a;
}

InitialCondition make_initial_state(const Discretisation& disc, const TestCaseSpec& spec, const FrameworkConfig& cfg,
                                    const PhysicsParams& params) {
  const AnalyticFields a = analytic_fields(spec, cfg);
  InitialCondition ic{make_zero_state(disc), Field(disc.dg())};
  State& s = ic.state;
  s.u = project_vector(disc, a.u);
  s.D = project_scalar(disc, a.D);
  s.B = project_scalar(disc, a.B);
  if (cfg.thermal()) {
    s.b = project_scalar(disc, a.b);
  } else {
    s.b.values.setConstant(cfg.g);
  }
  ic.theta = project_scalar(disc, a.theta);
  for (Eigen::Index i = 0; i < s.D.values.size(); ++i) {
    if (!(s.D.values(i) + s.B.values(i) > 0.0)) {
      throw ConfigError(fmt::format("initial total depth is nonpositive at dof {}", i));
    }
  }
  const Eigen::VectorXd qsat = saturation_field(s, params, cfg, &ic.theta);
  s.qv.values = (1.0 - params.xi) * qsat;
  return ic;
}

PhysicsParams default_physics(const TestCaseSpec& spec) {
  PhysicsParams p;
  p.q0 = spec.q0;
  p.H = spec.H;
  p.xi = spec.xi;
  return p;
}

}  // namespace msw
