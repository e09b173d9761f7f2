#include "gsc/geometry.hpp"

#include <cmath>

#include <Eigen/Geometry>

namespace gsc {

Quat quat_multiply(const Quat& a, const Quat& b) {
    return {
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    };
}

Quat quat_conjugate(const Quat& q) { return {q[0], -q[1], -q[2], -q[3]}; }

Quat quat_normalize(const Quat& q) {
    const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    if (!(n > 1e-300)) return {1.0, 0.0, 0.0, 0.0};
    return {q[0] / n, q[1] / n, q[2] / n, q[3] / n};
}

Quat quat_canonical(const Quat& q) {
    for (double c : q) {
        if (c > 0.0) return q;
        if (c < 0.0) return {-q[0], -q[1], -q[2], -q[3]};
    }
    return q;
}

Quat quat_from_rotation(const Eigen::Matrix3d& R) {
    const Eigen::Quaterniond e(R);
    return quat_canonical(quat_normalize({e.w(), e.x(), e.y(), e.z()}));
}

Eigen::Matrix3d rotation_from_quat(const Quat& qin) {
    const Quat q = quat_normalize(qin);
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Eigen::Matrix3d R;
    R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return R;
}

Eigen::Matrix3d look_at_rotation(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                                 const Eigen::Vector3d& up) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    const Eigen::Vector3d right = forward.cross(up).normalized();
    const Eigen::Vector3d down = forward.cross(right);
    Eigen::Matrix3d R;
    R.row(0) = right.transpose();
    R.row(1) = down.transpose();
    R.row(2) = forward.transpose();
    return R;
}

}  // namespace gsc
