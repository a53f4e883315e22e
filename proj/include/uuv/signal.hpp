#pragma once

// Uniform-grid signal kernels used by the tracking pipeline.

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace uuv {

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using VecXd = VecX<double>;

class SignalError : public std::runtime_error {
 public:
  enum class Kind { kEmpty, kTooShort, kWindowTooLarge, kBadArgument, kNonMonotoneTimestamps };

  SignalError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Adds the multiple of 2*pi to each sample that keeps consecutive outputs
/// within pi of each other. The first sample is left untouched.
template <typename Scalar>
VecX<Scalar> unwrap_angles(const VecX<Scalar>& series) {
  if (series.size() == 0) {
    throw SignalError(SignalError::Kind::kEmpty, "unwrap_angles: empty series");
  }
  constexpr Scalar kTwoPi = 2 * std::numbers::pi_v<Scalar>;
  VecX<Scalar> out(series.size());
  out(0) = series(0);
  for (Eigen::Index i = 1; i < series.size(); ++i) {
    const Scalar turns = std::round((out(i - 1) - series(i)) / kTwoPi);
    out(i) = series(i) + turns * kTwoPi;
  }
  return out;
}

/// Central differences inside, one-sided at both ends; same length as input.
template <typename Scalar>
VecX<Scalar> finite_difference(const VecX<Scalar>& values, Scalar dt) {
  const Eigen::Index n = values.size();
  if (n < 2) {
    throw SignalError(SignalError::Kind::kTooShort,
                      "finite_difference: need at least 2 samples, got " + std::to_string(n));
  }
  if (!(dt > Scalar(0))) {
    throw SignalError(SignalError::Kind::kBadArgument, "finite_difference: dt must be positive");
  }
  VecX<Scalar> out(n);
  out(0) = (values(1) - values(0)) / dt;
  out(n - 1) = (values(n - 1) - values(n - 2)) / dt;
  const Scalar two_dt = 2 * dt;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    out(i) = (values(i + 1) - values(i - 1)) / two_dt;
  }
  return out;
}

/// Trailing mean over the last `window` samples. The first window-1 outputs
/// average over however many samples exist so far.
///
/// A trailing window delays a ramp by (window-1)/2 samples.
template <typename Scalar>
VecX<Scalar> moving_average(const VecX<Scalar>& values, int window) {
  if (window < 1) {
    throw SignalError(SignalError::Kind::kBadArgument, "moving_average: window must be >= 1");
  }
  const Eigen::Index n = values.size();
  if (n < window) {
    throw SignalError(SignalError::Kind::kWindowTooLarge,
                      "moving_average: window " + std::to_string(window) +
                          " exceeds series length " + std::to_string(n));
  }
  VecX<Scalar> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index begin = std::max<Eigen::Index>(0, i - window + 1);
    out(i) = values.segment(begin, i - begin + 1).mean();
  }
  return out;
}

template <typename Scalar>
struct UniformSeries {
  VecX<Scalar> timestamps;
  VecX<Scalar> values;
};

/// Number of grid points t0 + k/rate that fall inside [t0, t_last]. A grid
/// point within 1e-6 periods of t_last counts as inside.
template <typename Scalar>
Eigen::Index uniform_grid_size(Scalar t0, Scalar t_last, Scalar rate) {
  return static_cast<Eigen::Index>(std::floor((t_last - t0) * rate + Scalar(1e-6))) + 1;
}

/// Linear interpolation of (timestamps, values) onto t0 + k/rate. Grid points
/// are computed as t0 + k/rate rather than accumulated, so spacing is exact to
/// representation precision.
template <typename Scalar>
UniformSeries<Scalar> resample_uniform(const VecX<Scalar>& timestamps,
                                       const VecX<Scalar>& values, Scalar rate) {
  const Eigen::Index n = timestamps.size();
  if (n != values.size()) {
    throw SignalError(SignalError::Kind::kBadArgument,
                      "resample_uniform: timestamps and values differ in length");
  }
  if (n < 2) {
    throw SignalError(SignalError::Kind::kTooShort, "resample_uniform: need at least 2 samples");
  }
  if (!(rate > Scalar(0))) {
    throw SignalError(SignalError::Kind::kBadArgument, "resample_uniform: rate must be positive");
  }
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(timestamps(i) > timestamps(i - 1))) {
      throw SignalError(SignalError::Kind::kNonMonotoneTimestamps,
                        "resample_uniform: timestamps not strictly increasing at index " +
                            std::to_string(i));
    }
  }

  const Scalar t0 = timestamps(0);
  const Scalar t_last = timestamps(n - 1);
  const Eigen::Index m = uniform_grid_size(t0, t_last, rate);

  UniformSeries<Scalar> out{VecX<Scalar>(m), VecX<Scalar>(m)};
  Eigen::Index seg = 0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const Scalar t = t0 + static_cast<Scalar>(k) / rate;
    out.timestamps(k) = t;
    const Scalar tq = std::min(t, t_last);
    while (seg + 2 < n && timestamps(seg + 1) < tq) ++seg;
    const Scalar ta = timestamps(seg);
    const Scalar tb = timestamps(seg + 1);
    const Scalar alpha = (tq - ta) / (tb - ta);
    out.values(k) = values(seg) + alpha * (values(seg + 1) - values(seg));
  }
  return out;
}

}  // namespace uuv
