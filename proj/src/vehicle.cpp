#include "uuv/vehicle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace uuv {

void VehicleParams::validate() const {
  auto positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw VehicleError(VehicleError::Kind::kInvalidParams,
                         fmt::format("vehicle.{} must be positive and finite (got {})", name,
                                     value));
    }
  };
  positive(mass, "mass");
  positive(body_length, "body_length");
  positive(propeller_separation, "propeller_separation");
  positive(max_thrust_per_prop, "max_thrust_per_prop");
  positive(motor_time_constant, "motor_time_constant");
  positive(drag_surge, "drag_surge");
  positive(drag_sway, "drag_sway");
  positive(drag_heave, "drag_heave");
  positive(drag_yaw, "drag_yaw");
  positive(yaw_inertia, "yaw_inertia");
  positive(syringe_capacity, "syringe_capacity");
  positive(neutral_fill, "neutral_fill");
  positive(pump_max_rate, "pump_max_rate");
  positive(tank_depth, "tank_depth");
  positive(water_density, "water_density");
  positive(gravity, "gravity");
  if (std::abs(neutral_fill - 0.5 * syringe_capacity) > 1e-9) {
    throw VehicleError(VehicleError::Kind::kInvalidParams,
                       fmt::format("vehicle.neutral_fill ({}) must be half of "
                                   "vehicle.syringe_capacity ({})",
                                   neutral_fill, syringe_capacity));
  }
}

Posed VehicleState::pose() const {
  return Posed{position, rot_z(psi) * rot_y(theta) * rot_x(phi)};
}

namespace {

// Velocity update with the quadratic drag treated implicitly in its
// magnitude: m (x' - x)/dt = force - c |x| x'. The steady state is exact.
double drag_update(double value, double force, double drag, double inertia, double dt) {
  return (value + dt * force / inertia) / (1.0 + dt * drag * std::abs(value) / inertia);
}

}  // namespace

VehicleState step(const VehicleState& state, const ActuatorCommand& cmd, double dt,
                  const VehicleParams& params) {
  if (!(dt > 0.0 && dt <= 0.05)) {
    throw VehicleError(VehicleError::Kind::kInvalidDt,
                       fmt::format("step: dt {} outside (0, 0.05]", dt));
  }
  VehicleState next = state;

  const double target_left = std::clamp(cmd.motor_left, -1.0, 1.0) * params.max_thrust_per_prop;
  const double target_right =
      std::clamp(cmd.motor_right, -1.0, 1.0) * params.max_thrust_per_prop;
  const double lag = dt / params.motor_time_constant;
  next.motor_thrust_left += lag * (target_left - state.motor_thrust_left);
  next.motor_thrust_right += lag * (target_right - state.motor_thrust_right);

  next.syringe_fill = pump_step(state.syringe_fill, cmd.pump, dt, params);

  const double thrust_sum = next.motor_thrust_left + next.motor_thrust_right;
  // Left thrust above right turns the bow to starboard: positive r in NED.
  const double yaw_torque =
      (next.motor_thrust_left - next.motor_thrust_right) * 0.5 * params.propeller_separation;
  const double buoyancy_deficit = params.gravity * params.water_density *
                                  (next.syringe_fill - params.neutral_fill) * 1e-6;

  next.u = drag_update(state.u, thrust_sum, params.drag_surge, params.mass, dt);
  next.v = drag_update(state.v, 0.0, params.drag_sway, params.mass, dt);
  next.w = drag_update(state.w, buoyancy_deficit, params.drag_heave, params.mass, dt);
  next.r = drag_update(state.r, yaw_torque, params.drag_yaw, params.yaw_inertia, dt);

  next.psi = wrap_angle(state.psi + dt * next.r);
  const double c = std::cos(next.psi);
  const double s = std::sin(next.psi);
  next.position.x() += dt * (c * next.u - s * next.v);
  next.position.y() += dt * (s * next.u + c * next.v);
  next.position.z() += dt * next.w;

  if (next.position.z() <= 0.0) {
    next.position.z() = 0.0;
    if (next.w < 0.0) next.w = 0.0;
  } else if (next.position.z() >= params.tank_depth) {
    next.position.z() = params.tank_depth;
    if (next.w > 0.0) next.w = 0.0;
  }
  next.phi = 0.0;
  next.theta = 0.0;
  return next;
}

double pump_step(double fill, PumpMode mode, double dt, const VehicleParams& params) {
  const double delta = params.pump_max_rate / 60.0 * dt;
  switch (mode) {
    case PumpMode::kIntake:
      return std::min(fill + delta, params.syringe_capacity);
    case PumpMode::kExpel:
      return std::max(fill - delta, 0.0);
    case PumpMode::kOff:
      break;
  }
  return fill;
}

IrReading ir_response(double fill, double ambient, const VehicleParams& params) {
  IrReading reading;
  const double plunger = fill / params.syringe_capacity;
  for (std::size_t k = 0; k < reading.channels.size(); ++k) {
    const double pos = static_cast<double>(k) / 8.0;
    const double dist = pos - plunger;
    const double lit = std::exp(-dist * dist / (2.0 * kIrSigma * kIrSigma));
    reading.channels[k] = std::clamp(lit + ambient, 0.0, 1.0);
  }
  return reading;
}

PlungerEstimate estimate_plunger(const IrReading& reading, double syringe_capacity) {
  const auto [lo_it, hi_it] = std::minmax_element(reading.channels.begin(), reading.channels.end());
  const double lo = *lo_it;
  const double contrast = *hi_it - lo;
  if (contrast <= kIrNoiseFloor) {
    throw VehicleError(VehicleError::Kind::kNoSignal,
                       fmt::format("estimate_plunger: IR contrast {} within noise floor", contrast));
  }
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < reading.channels.size(); ++k) {
    const double c = reading.channels[k] - lo;
    weighted += static_cast<double>(k) / 8.0 * c;
    total += c;
  }
  return PlungerEstimate{syringe_capacity * weighted / total, contrast,
                         contrast < kIrDegradedContrast};
}

double depth_reading(const VehicleState& state, double noise_sigma, std::mt19937_64& rng) {
  double z = state.position.z();
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    z += noise(rng);
  }
  return std::round(z * 1000.0) / 1000.0;
}

}  // namespace uuv
