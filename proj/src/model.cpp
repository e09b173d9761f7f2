#include "gsc/model.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>

#include "gsc/error.hpp"

namespace gsc {

Eigen::Matrix3d CameraView::rotation() const {
    Eigen::Matrix3d m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = R[r * 3 + c];
    return m;
}

Eigen::Vector3d CameraView::translation() const { return {T[0], T[1], T[2]}; }

Eigen::Matrix3d CameraView::intrinsics() const {
    Eigen::Matrix3d K;
    K << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    return K;
}

Eigen::Vector3d CameraView::center() const { return -(rotation().transpose() * translation()); }

double CameraView::focal() const {
    return std::sqrt(static_cast<double>(fx) * static_cast<double>(fy));
}

std::size_t SceneModel::record_count() const {
    std::size_t n = 0;
    for (const auto& v : views) n += v.records.size();
    return n;
}

std::vector<GaussianRecord> SceneModel::merged() const {
    std::vector<GaussianRecord> out;
    out.reserve(record_count());
    for (const auto& v : views) out.insert(out.end(), v.records.begin(), v.records.end());
    return out;
}

std::array<float, 4> canonical_quaternion(std::array<float, 4> q) {
    for (float c : q) {
        if (c > 0.0f) return q;
        if (c < 0.0f) return {-q[0], -q[1], -q[2], -q[3]};
    }
    return q;
}

void validate_camera(const CameraView& cam) {
    if (!(cam.fx > 0.0f) || !(cam.fy > 0.0f))
        throw ValidationError("camera focal lengths must be positive");
    if (cam.width < 1 || cam.height < 1) throw ValidationError("camera dimensions must be >= 1");
    for (float v : cam.R)
        if (!std::isfinite(v)) throw ValidationError("camera rotation is not finite");
    for (float v : cam.T)
        if (!std::isfinite(v)) throw ValidationError("camera translation is not finite");
    if (!std::isfinite(cam.cx) || !std::isfinite(cam.cy))
        throw ValidationError("camera principal point is not finite");
    const Eigen::Matrix3d R = cam.rotation();
    const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (ortho > 1e-6 || std::abs(R.determinant() - 1.0) > 1e-6)
        throw ValidationError("camera rotation is not a proper rotation (orthonormality error " +
                              std::to_string(ortho) + ")");
}

void validate_record(const GaussianRecord& rec, int sh_degree, std::size_t index) {
    const auto fail = [index](const std::string& what) {
        throw ValidationError("record " + std::to_string(index) + ": " + what);
    };
    for (float v : rec.mu)
        if (!std::isfinite(v)) fail("position is not finite");
    double n2 = 0.0;
    for (float v : rec.q) n2 += static_cast<double>(v) * v;
    if (!(std::abs(std::sqrt(n2) - 1.0) <= 1e-5)) fail("quaternion is not unit length");
    for (float v : rec.s)
        if (!(v > 0.0f) || !std::isfinite(v)) fail("scale must be positive");
    if (!(rec.sigma >= 0.0f && rec.sigma <= 1.0f)) fail("opacity outside [0, 1]");
    if (rec.sh.size() != static_cast<std::size_t>(sh_coeff_count(sh_degree)))
        fail("expected " + std::to_string(sh_coeff_count(sh_degree)) + " SH coefficients, got " +
             std::to_string(rec.sh.size()));
    for (float v : rec.sh)
        if (!std::isfinite(v)) fail("SH coefficient is not finite");
}

void validate_scene(const SceneModel& scene) {
    if (scene.sh_degree < 0 || scene.sh_degree > 3)
        throw ValidationError("sh_degree must be in [0, 3]");
    std::size_t index = 0;
    for (std::size_t v = 0; v < scene.views.size(); ++v) {
        const auto& view = scene.views[v];
        validate_camera(view.camera);
        const auto expected =
            static_cast<std::size_t>(view.camera.width) * static_cast<std::size_t>(view.camera.height);
        if (view.records.size() != expected)
            throw ValidationError("view " + std::to_string(v) + " has " +
                                  std::to_string(view.records.size()) + " records, expected " +
                                  std::to_string(expected));
        for (const auto& rec : view.records) validate_record(rec, scene.sh_degree, index++);
    }
}

std::size_t raw_scene_bytes(const SceneModel& scene) {
    const std::size_t per_record = (3 + 4 + 3 + 1 + sh_coeff_count(scene.sh_degree)) * sizeof(float);
    return scene.record_count() * per_record;
}

}  // namespace gsc
