#pragma once

#include <array>

#include <Eigen/Core>

namespace gsc {

/// Quaternion as (w, x, y, z).
using Quat = std::array<double, 4>;

Quat quat_multiply(const Quat& a, const Quat& b);
Quat quat_conjugate(const Quat& q);
Quat quat_normalize(const Quat& q);
/// w >= 0; ties resolved by the first nonzero component.
Quat quat_canonical(const Quat& q);

/// Unit quaternion of a proper rotation matrix, canonical sign.
Quat quat_from_rotation(const Eigen::Matrix3d& R);
/// Rotation matrix of q (normalised first).
Eigen::Matrix3d rotation_from_quat(const Quat& q);

/// World-to-camera rotation for a camera at `eye` looking at `target`
/// (x right, y down, z forward). `up` points up in the image.
Eigen::Matrix3d look_at_rotation(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                                 const Eigen::Vector3d& up);

}  // namespace gsc
