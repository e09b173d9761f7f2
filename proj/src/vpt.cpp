#include "gsc/vpt.hpp"

#include <string>

#include "gsc/error.hpp"
#include "gsc/geometry.hpp"

namespace gsc {

VptPlanes vpt_forward(const CameraView& view, std::span<const GaussianRecord> records,
                      std::size_t view_index) {
    const int W = view.width, H = view.height;
    if (records.size() != static_cast<std::size_t>(W) * H)
        throw ValidationError("view " + std::to_string(view_index) + ": record grid does not match camera size");

    const Eigen::Matrix3d R = view.rotation();
    const Eigen::Vector3d T = view.translation();
    const Eigen::Matrix3d K = view.intrinsics();
    const Quat q_view = quat_from_rotation(R);
    const double f = view.focal();

    VptPlanes out;
    out.depth = Plane(W, H);
    out.dx = Plane(W, H);
    out.dy = Plane(W, H);
    for (auto& p : out.qhat) p = Plane(W, H);
    for (auto& p : out.shat) p = Plane(W, H);

    for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
            const auto& rec = records[static_cast<std::size_t>(i) * W + j];
            const Eigen::Vector3d mu(rec.mu[0], rec.mu[1], rec.mu[2]);
            const Eigen::Vector3d p = K * (R * mu + T);
            const double z = p.z();
            if (!(z > 0.0)) throw BehindCameraError(view_index, i, j, z);
            const double x = p.x() / z / W;
            const double y = p.y() / z / H;
            out.depth.at(i, j) = z;
            out.dx.at(i, j) = x - pixel_center_x(j, W);
            out.dy.at(i, j) = y - pixel_center_y(i, H);

            const Quat qhat =
                quat_canonical(quat_normalize(quat_multiply(q_view, {rec.q[0], rec.q[1], rec.q[2], rec.q[3]})));
            for (int c = 0; c < 4; ++c) out.qhat[c].at(i, j) = qhat[c];
            for (int c = 0; c < 3; ++c) out.shat[c].at(i, j) = f * rec.s[c] / z;
        }
    }
    return out;
}

std::vector<GaussianGeometry> vpt_inverse(const CameraView& view, const VptPlanes& planes) {
    const int W = view.width, H = view.height;
    if (planes.depth.width != W || planes.depth.height != H)
        throw ValidationError("plane dimensions do not match camera");

    const Eigen::Matrix3d Rt = view.rotation().transpose();
    const Eigen::Vector3d T = view.translation();
    const Quat q_view_inv = quat_conjugate(quat_from_rotation(view.rotation()));
    const double f = view.focal();
    const double fx = view.fx, fy = view.fy, cx = view.cx, cy = view.cy;

    std::vector<GaussianGeometry> out(static_cast<std::size_t>(W) * H);
    for (int i = 0; i < H; ++i) {
        for (int j = 0; j < W; ++j) {
            const double z = planes.depth.at(i, j);
            if (!(z > 0.0))
                throw ValidationError("nonpositive depth at pixel (" + std::to_string(i) + ", " +
                                      std::to_string(j) + ")");
            const double u = (planes.dx.at(i, j) + pixel_center_x(j, W)) * W;
            const double v = (planes.dy.at(i, j) + pixel_center_y(i, H)) * H;
            const Eigen::Vector3d cam((u - cx) * z / fx, (v - cy) * z / fy, z);
            const Eigen::Vector3d mu = Rt * (cam - T);

            Quat qhat;
            for (int c = 0; c < 4; ++c) qhat[c] = planes.qhat[c].at(i, j);
            const Quat q = quat_canonical(quat_normalize(quat_multiply(q_view_inv, quat_normalize(qhat))));

            auto& g = out[static_cast<std::size_t>(i) * W + j];
            for (int c = 0; c < 3; ++c) g.mu[c] = static_cast<float>(mu[c]);
            for (int c = 0; c < 4; ++c) g.q[c] = static_cast<float>(q[c]);
            for (int c = 0; c < 3; ++c) g.s[c] = static_cast<float>(planes.shat[c].at(i, j) * z / f);
        }
    }
    return out;
}

}  // namespace gsc
