#include "uuv/vehicle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace uuv;

namespace {
constexpr double kDt = 1.0 / 240.0;

VehicleState run(VehicleState s, const ActuatorCommand& cmd, double seconds,
                 const VehicleParams& p = {}) {
  const auto n = static_cast<int>(std::lround(seconds / kDt));
  for (int i = 0; i < n; ++i) s = step(s, cmd, kDt, p);
  return s;
}
}  // namespace

TEST_CASE("equilibrium at rest") {
  VehicleState s;
  s.position = Vec3d(1.0, 2.0, 0.5);
  s.psi = 0.3;
  const VehicleState next = run(s, {}, 1.0);
  CHECK((next.position - s.position).norm() == 0.0);
  CHECK(next.psi == doctest::Approx(s.psi).epsilon(1e-15));
  CHECK(next.u == 0.0);
  CHECK(next.w == 0.0);
  CHECK(next.r == 0.0);
}

TEST_CASE("terminal surge speed") {
  const VehicleParams p;
  const VehicleState s = run(VehicleState{}, {0.5, 0.5, PumpMode::kOff}, 30.0);
  const double analytic = std::sqrt(2.0 * 0.5 * p.max_thrust_per_prop / p.drag_surge);
  CHECK(std::abs(s.u - analytic) / analytic < 0.01);
  CHECK(std::abs(s.v) < 1e-12);
  CHECK(std::abs(s.r) < 1e-12);
}

TEST_CASE("surge transient against an RK4 oracle") {
  // m u' = T(t) - c u|u| with T(t) = 2 * 0.5 * Tmax * (1 - exp(-t/tau)).
  const VehicleParams p;
  auto rhs = [&](double t, double u) {
    const double thrust = 2.0 * 0.5 * p.max_thrust_per_prop * (1.0 - std::exp(-t / p.motor_time_constant));
    return (thrust - p.drag_surge * u * std::abs(u)) / p.mass;
  };
  double u = 0.0;
  const double h = 1e-4;
  for (int i = 0; i < 20000; ++i) {  // 2 s
    const double t = i * h;
    const double k1 = rhs(t, u);
    const double k2 = rhs(t + h / 2, u + h / 2 * k1);
    const double k3 = rhs(t + h / 2, u + h / 2 * k2);
    const double k4 = rhs(t + h, u + h * k3);
    u += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  const VehicleState s = run(VehicleState{}, {0.5, 0.5, PumpMode::kOff}, 2.0);
  CHECK(std::abs(s.u - u) < 2e-3);
}

TEST_CASE("pure spin and mirror symmetry") {
  const VehicleState spin = run(VehicleState{}, {0.4, -0.4, PumpMode::kOff}, 3.0);
  CHECK(std::abs(spin.u) < 1e-9);
  CHECK(std::abs(spin.r) > 0.0);

  VehicleState a, b;
  a.position = b.position = Vec3d(2.0, 2.0, 0.0);
  for (int i = 0; i < 2400; ++i) {
    a = step(a, {0.6, 0.3, PumpMode::kOff}, kDt, {});
    b = step(b, {0.3, 0.6, PumpMode::kOff}, kDt, {});
    CHECK(std::abs(a.r + b.r) < 1e-9);
    CHECK(std::abs(a.u - b.u) < 1e-9);
  }
  CHECK(a.r > 0.0);  // stronger left propeller turns to starboard
}

TEST_CASE("drag dissipates energy") {
  VehicleState s;
  s.position = Vec3d(2.0, 2.0, 0.6);
  s.u = 0.4;
  s.v = -0.2;
  s.w = 0.1;
  s.r = 0.5;
  double prev = std::hypot(std::hypot(s.u, s.v), std::hypot(s.w, s.r));
  for (int i = 0; i < 2000; ++i) {
    s = step(s, {}, kDt, {});
    const double now = std::hypot(std::hypot(s.u, s.v), std::hypot(s.w, s.r));
    CHECK(now <= prev);
    prev = now;
  }
}

TEST_CASE("heave terminal velocity and depth clamp") {
  const VehicleParams p;
  VehicleState s;
  s.syringe_fill = 17.5;
  s = run(s, {}, 20.0);
  const double analytic = std::sqrt(p.gravity * p.water_density * 5.0 * 1e-6 / p.drag_heave);
  CHECK(s.w > 0.0);
  CHECK(std::abs(s.w - analytic) / analytic < 0.01);

  s = run(s, {}, 60.0);
  CHECK(s.position.z() == p.tank_depth);
  CHECK(s.w == 0.0);

  VehicleState light;
  light.syringe_fill = 5.0;
  light = run(light, {}, 5.0);
  CHECK(light.position.z() == 0.0);
  CHECK(light.w == 0.0);
}

TEST_CASE("pump_step") {
  const VehicleParams p;
  double fill = 0.0;
  int steps = 0;
  while (fill < 25.0) {
    fill = pump_step(fill, PumpMode::kIntake, kDt, p);
    ++steps;
  }
  CHECK(std::abs(steps - 3600) <= 1);
  CHECK(pump_step(25.0, PumpMode::kIntake, 1.0, p) == 25.0);
  CHECK(pump_step(12.5, PumpMode::kExpel, 3.0, p) == doctest::Approx(7.5).epsilon(1e-12));
  CHECK(pump_step(1.0, PumpMode::kExpel, 3.0, p) == 0.0);
  CHECK(pump_step(4.0, PumpMode::kOff, 3.0, p) == 4.0);

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> mode(0, 2);
  VehicleState s;
  for (int i = 0; i < 20000; ++i) {
    s = step(s, {0.0, 0.0, static_cast<PumpMode>(mode(rng))}, 0.05, p);
    CHECK(s.syringe_fill >= 0.0);
    CHECK(s.syringe_fill <= 25.0);
  }
}

TEST_CASE("ir_response") {
  const VehicleParams p;
  const IrReading empty = ir_response(0.0, 0.0, p);
  CHECK(empty.channels[0] == doctest::Approx(1.0));
  CHECK(empty.channels[8] == doctest::Approx(std::exp(-1.0 / (2 * 0.0049))).epsilon(1e-9));
  CHECK(empty.channels[8] < 1e-40);

  const IrReading half = ir_response(12.5, 0.0, p);
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(half.channels[static_cast<std::size_t>(k)] -
                   half.channels[static_cast<std::size_t>(8 - k)]) < 1e-15);
  }

  const IrReading bright = ir_response(12.5, 0.9, p);
  for (double c : bright.channels) {
    CHECK(c >= 0.9);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("estimate_plunger") {
  const VehicleParams p;
  CHECK(std::abs(estimate_plunger(ir_response(12.5, 0.0, p)).fill - 12.5) < 0.1);
  for (double f = 2.0; f <= 23.0; f += 3.0) {
    const PlungerEstimate e = estimate_plunger(ir_response(f, 0.0, p));
    CHECK(std::abs(e.fill - f) < 0.5);
    CHECK_FALSE(e.degraded);
  }

  IrReading flat;
  flat.channels.fill(0.4);
  try {
    estimate_plunger(flat);
    FAIL("expected NoSignal");
  } catch (const VehicleError& e) {
    CHECK(e.kind() == VehicleError::Kind::kNoSignal);
  }

  for (double f = 0.0; f <= 25.0; f += 0.5) {
    try {
      CHECK(estimate_plunger(ir_response(f, 0.9, p)).degraded);
    } catch (const VehicleError& e) {
      CHECK(e.kind() == VehicleError::Kind::kNoSignal);
    }
  }
}

TEST_CASE("depth_reading") {
  std::mt19937_64 rng(2);
  VehicleState s;
  s.position.z() = 1.0;
  CHECK(depth_reading(s, 0.0, rng) == 1.0);
  s.position.z() = 0.0;
  CHECK(depth_reading(s, 0.0, rng) == 0.0);
  s.position.z() = 0.12345;
  CHECK(depth_reading(s, 0.0, rng) == 0.123);

  s.position.z() = 1.0;
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) sum += depth_reading(s, 0.005, rng);
  CHECK(std::abs(sum / 10000.0 - 1.0) < 0.001);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(step(VehicleState{}, {}, 0.0, {}), VehicleError);
  CHECK_THROWS_AS(step(VehicleState{}, {}, 0.06, {}), VehicleError);
  VehicleParams bad;
  bad.neutral_fill = 10.0;
  CHECK_THROWS_AS(bad.validate(), VehicleError);
  VehicleParams negative;
  negative.mass = -1.0;
  CHECK_THROWS_AS(negative.validate(), VehicleError);
}

TEST_CASE("determinism") {
  VehicleState a, b;
  for (int i = 0; i < 1000; ++i) {
    const ActuatorCommand c{std::sin(i * 0.01), std::cos(i * 0.013),
                            i % 300 < 150 ? PumpMode::kIntake : PumpMode::kExpel};
    a = step(a, c, kDt, {});
    b = step(b, c, kDt, {});
  }
  CHECK(a.position == b.position);
  CHECK(a.psi == b.psi);
  CHECK(a.u == b.u);
}
