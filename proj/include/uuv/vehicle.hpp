#pragma once

// Ground-truth plant: planar differential-thrust dynamics on the surface plus
// heave driven by the syringe ballast, and the onboard depth / IR sensors.

#include "uuv/frames.hpp"

#include <array>
#include <random>
#include <stdexcept>
#include <string>

namespace uuv {

struct VehicleParams {
  double mass = 2.7;                   // kg
  double body_length = 0.30;           // m
  double propeller_separation = 0.06;  // m
  double max_thrust_per_prop = 0.8;    // N
  double motor_time_constant = 0.15;   // s
  double drag_surge = 4.0;             // N s^2/m^2
  double drag_sway = 12.0;
  double drag_heave = 20.0;
  double drag_yaw = 0.08;     // N m s^2/rad^2
  double yaw_inertia = 0.02;  // kg m^2
  double syringe_capacity = 25.0;  // mL
  double neutral_fill = 12.5;      // mL
  double pump_max_rate = 100.0;    // mL/min
  double tank_depth = 1.372;       // m
  double water_density = 1000.0;   // kg/m^3
  double gravity = 9.81;           // m/s^2

  /// Throws VehicleError(kInvalidParams) naming the offending field.
  void validate() const;
};

enum class PumpMode { kOff = 0, kIntake = 1, kExpel = 2 };

struct ActuatorCommand {
  double motor_left = 0.0;   // normalized, clamped to [-1, 1]
  double motor_right = 0.0;
  PumpMode pump = PumpMode::kOff;
};

/// World frame is NED: z is depth, psi is positive clockwise seen from above.
struct VehicleState {
  Vec3d position = Vec3d::Zero();
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
  double r = 0.0;
  double syringe_fill = 12.5;  // mL
  double motor_thrust_left = 0.0;   // N
  double motor_thrust_right = 0.0;  // N

  Posed pose() const;
};

struct IrReading {
  std::array<double, 9> channels{};
};

struct PlungerEstimate {
  double fill = 0.0;      // mL
  double contrast = 0.0;  // max - min channel
  bool degraded = false;
};

class VehicleError : public std::runtime_error {
 public:
  enum class Kind { kInvalidDt, kInvalidParams, kNoSignal };

  VehicleError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr double kIrSigma = 0.07;
inline constexpr double kIrNoiseFloor = 0.05;
inline constexpr double kIrDegradedContrast = 0.3;

/// One semi-implicit Euler step of length dt in (0, 0.05].
VehicleState step(const VehicleState& state, const ActuatorCommand& cmd, double dt,
                  const VehicleParams& params);

/// Syringe fill after running the pump for dt seconds, clamped to capacity.
double pump_step(double fill, PumpMode mode, double dt, const VehicleParams& params);

IrReading ir_response(double fill, double ambient, const VehicleParams& params);

/// Background-subtracted centroid of the IR array, scaled to mL.
PlungerEstimate estimate_plunger(const IrReading& reading,
                                 double syringe_capacity = 25.0);

/// Depth with Gaussian noise, quantized to 1 mm.
double depth_reading(const VehicleState& state, double noise_sigma, std::mt19937_64& rng);

}  // namespace uuv
