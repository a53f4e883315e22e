#pragma once

// Geometry core: plane fitting, the tilt-correcting world rotation, the
// camera-to-world transform, yaw extraction and the planar body-velocity
// rotation. Everything here is a pure function templated on the scalar type.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace uuv {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

/// Proper rotation, stored as a dense 3x3 matrix. Validity is checked with
/// is_rotation() rather than encoded in the type.
template <typename Scalar>
using RotationMatrix = Eigen::Matrix<Scalar, 3, 3>;

using Vec3d = Vec3<double>;
using RotationMatrixd = RotationMatrix<double>;

/// Plane a*x + b*y + c*z + d = 0 with c pinned to -1, i.e. z = a*x + b*y + d.
template <typename Scalar>
struct PlaneCoefficients {
  Scalar a{0};
  Scalar b{0};
  Scalar d{0};
  static constexpr Scalar c{-1};

  Vec3<Scalar> normal() const { return Vec3<Scalar>(a, b, c); }

  /// Signed z-residual a*x + b*y - z + d of one point.
  Scalar residual(const Vec3<Scalar>& p) const {
    return a * p.x() + b * p.y() - p.z() + d;
  }
};

template <typename Scalar>
struct Pose {
  Vec3<Scalar> translation = Vec3<Scalar>::Zero();
  RotationMatrix<Scalar> rotation = RotationMatrix<Scalar>::Identity();

  static Pose identity() { return Pose{}; }

  /// Composition: (this * other) maps other's frame through this one.
  Pose operator*(const Pose& other) const {
    return Pose{translation + rotation * other.translation,
                rotation * other.rotation};
  }

  Pose inverse() const {
    RotationMatrix<Scalar> rt = rotation.transpose();
    return Pose{-(rt * translation), rt};
  }
};

using PlaneCoefficientsd = PlaneCoefficients<double>;
using Posed = Pose<double>;

class FramesError : public std::runtime_error {
 public:
  enum class Kind {
    kInsufficientPoints,
    kDegenerateConfiguration,
    kDegenerateNormal,
    kGimbalDegenerate,
  };

  FramesError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

template <typename Scalar>
bool is_rotation(const RotationMatrix<Scalar>& r, Scalar tol = Scalar(1e-9)) {
  const Scalar gram_err =
      (r * r.transpose() - RotationMatrix<Scalar>::Identity()).cwiseAbs().maxCoeff();
  return gram_err <= tol && std::abs(r.determinant() - Scalar(1)) <= tol;
}

/// Elementary rotations (right-handed, active).
template <typename Scalar>
RotationMatrix<Scalar> rot_x(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Vec3<Scalar>::UnitX()).toRotationMatrix();
}

template <typename Scalar>
RotationMatrix<Scalar> rot_y(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Vec3<Scalar>::UnitY()).toRotationMatrix();
}

template <typename Scalar>
RotationMatrix<Scalar> rot_z(Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, Vec3<Scalar>::UnitZ()).toRotationMatrix();
}

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar angle) {
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  constexpr Scalar kTwoPi = 2 * kPi;
  Scalar wrapped = std::remainder(angle, kTwoPi);
  if (wrapped <= -kPi) wrapped += kTwoPi;
  return wrapped;
}

/// Least-squares fit of z = a*x + b*y + d.
///
/// The 3x3 normal equations are formed on mean-centered coordinates and
/// solved by Gaussian elimination with partial pivoting. A pivot smaller than
/// 1e-12 times the largest diagonal entry is treated as singular, which is
/// what happens when the points are collinear in the x-y projection.
template <typename Scalar>
PlaneCoefficients<Scalar> fit_plane(std::span<const Vec3<Scalar>> points) {
  if (points.size() < 3) {
    throw FramesError(FramesError::Kind::kInsufficientPoints,
                      "fit_plane: need at least 3 points, got " +
                          std::to_string(points.size()));
  }

  Vec3<Scalar> mean = Vec3<Scalar>::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<Scalar>(points.size());

  // Unknowns (a, b, d') for z' = a x' + b y' + d' on centered data.
  Eigen::Matrix<Scalar, 3, 3> normal = Eigen::Matrix<Scalar, 3, 3>::Zero();
  Vec3<Scalar> rhs = Vec3<Scalar>::Zero();
  for (const auto& p : points) {
    const Vec3<Scalar> row(p.x() - mean.x(), p.y() - mean.y(), Scalar(1));
    normal.noalias() += row * row.transpose();
    rhs += row * (p.z() - mean.z());
  }

  const Scalar scale = normal.diagonal().cwiseAbs().maxCoeff();
  const Scalar pivot_tol = Scalar(1e-12) * scale;

  for (int col = 0; col < 3; ++col) {
    int pivot_row = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(normal(r, col)) > std::abs(normal(pivot_row, col))) pivot_row = r;
    }
    if (!(std::abs(normal(pivot_row, col)) > pivot_tol)) {
      throw FramesError(FramesError::Kind::kDegenerateConfiguration,
                        "fit_plane: points are collinear in the x-y projection");
    }
    if (pivot_row != col) {
      normal.row(col).swap(normal.row(pivot_row));
      std::swap(rhs(col), rhs(pivot_row));
    }
    for (int r = col + 1; r < 3; ++r) {
      const Scalar factor = normal(r, col) / normal(col, col);
      normal.row(r) -= factor * normal.row(col);
      rhs(r) -= factor * rhs(col);
    }
  }

  Vec3<Scalar> sol;
  for (int r = 2; r >= 0; --r) {
    Scalar acc = rhs(r);
    for (int c = r + 1; c < 3; ++c) acc -= normal(r, c) * sol(c);
    sol(r) = acc / normal(r, r);
  }

  PlaneCoefficients<Scalar> plane;
  plane.a = sol(0);
  plane.b = sol(1);
  plane.d = sol(2) + mean.z() - sol(0) * mean.x() - sol(1) * mean.y();
  return plane;
}

/// Rotation whose rows are u1 = n x e_x, u2 = u3 x u1, u3 = n, all normalized,
/// with n the plane normal (a, b, c). Maps n/|n| to e_z.
///
/// Row 2 is u3 x u1 (not u1 x u3) so that the determinant is +1.
template <typename Scalar>
RotationMatrix<Scalar> world_rotation(const PlaneCoefficients<Scalar>& plane) {
  const Vec3<Scalar> n = plane.normal();
  const Vec3<Scalar> u3 = n.normalized();
  const Vec3<Scalar> u1_raw = n.cross(Vec3<Scalar>::UnitX());
  // |n x e_x| = |n| sin(angle); the angle must exceed 1e-6 rad.
  if (!(u1_raw.norm() > Scalar(1e-6) * n.norm())) {
    throw FramesError(FramesError::Kind::kDegenerateNormal,
                      "world_rotation: plane normal is parallel to the x-axis");
  }
  const Vec3<Scalar> u1 = u1_raw.normalized();
  const Vec3<Scalar> u2 = u3.cross(u1).normalized();

  RotationMatrix<Scalar> r;
  r.row(0) = u1.transpose();
  r.row(1) = u2.transpose();
  r.row(2) = u3.transpose();
  return r;
}

/// R_OC^T * (q_BC - q_OC).
template <typename Scalar>
Vec3<Scalar> to_world(const Vec3<Scalar>& detection_translation,
                      const Vec3<Scalar>& origin,
                      const RotationMatrix<Scalar>& r_oc) {
  return r_oc.transpose() * (detection_translation - origin);
}

/// Yaw of a yaw-pitch-roll decomposition: atan2(R(1,0), R(0,0)).
template <typename Scalar>
Scalar extract_yaw(const RotationMatrix<Scalar>& r_bc) {
  if (std::abs(r_bc(2, 0)) > Scalar(1) - Scalar(1e-9)) {
    throw FramesError(FramesError::Kind::kGimbalDegenerate,
                      "extract_yaw: pitch at +/-90 deg, yaw undefined");
  }
  return wrap_angle(std::atan2(r_bc(1, 0), r_bc(0, 0)));
}

/// Surge, sway and heave from world-frame planar rates and heading. Heave
/// is zero: the vehicle is tracked only on the surface.
template <typename Scalar>
Vec3<Scalar> body_velocities(Scalar xdot, Scalar ydot, Scalar psi) {
  const Scalar c = std::cos(psi);
  const Scalar s = std::sin(psi);
  return Vec3<Scalar>(c * xdot + s * ydot, -s * xdot + c * ydot, Scalar(0));
}

}  // namespace uuv
