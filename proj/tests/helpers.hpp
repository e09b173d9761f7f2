#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "gsc/geometry.hpp"
#include "gsc/model.hpp"

namespace gsc::test {

/// Fresh per-test scratch directory, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("gsc-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return q.toRotationMatrix();
}

inline Quat random_unit_quat(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return quat_canonical(quat_normalize({n(rng), n(rng), n(rng), n(rng)}));
}

inline CameraView random_camera(std::mt19937_64& rng, int width, int height) {
    std::uniform_real_distribution<double> f(0.6, 1.6), t(-2.0, 2.0), c(0.4, 0.6);
    CameraView cam;
    cam.width = width;
    cam.height = height;
    cam.fx = static_cast<float>(f(rng) * width);
    cam.fy = static_cast<float>(f(rng) * width);
    cam.cx = static_cast<float>(c(rng) * width);
    cam.cy = static_cast<float>(c(rng) * height);
    // orthonormalise the float matrix so it passes validation at 1e-6
    Eigen::Matrix3d R = random_rotation(rng);
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) cam.R[r * 3 + k] = static_cast<float>(R(r, k));
    for (auto& v : cam.T) v = static_cast<float>(t(rng));
    return cam;
}

/// A valid record placed in front of `cam`, projecting near pixel (row, col).
inline GaussianRecord random_record_in_front(std::mt19937_64& rng, const CameraView& cam, int row, int col,
                                             int sh_degree, double jitter = 0.45) {
    std::uniform_real_distribution<double> z(0.5, 10.0), off(-jitter, jitter), s(0.005, 0.3), sh(-1.0, 1.0),
        op(0.0, 1.0);
    const double depth = z(rng);
    const double u = col + 0.5 + off(rng), v = row + 0.5 + off(rng);
    const Eigen::Vector3d pc((u - cam.cx) * depth / cam.fx, (v - cam.cy) * depth / cam.fy, depth);
    const Eigen::Vector3d mu = cam.rotation().transpose() * (pc - cam.translation());
    GaussianRecord rec;
    for (int k = 0; k < 3; ++k) rec.mu[k] = static_cast<float>(mu[k]);
    const Quat q = random_unit_quat(rng);
    for (int k = 0; k < 4; ++k) rec.q[k] = static_cast<float>(q[k]);
    for (auto& x : rec.s) x = static_cast<float>(s(rng));
    rec.sh.resize(sh_coeff_count(sh_degree));
    for (auto& x : rec.sh) x = static_cast<float>(sh(rng));
    rec.sigma = static_cast<float>(op(rng));
    return rec;
}

inline SceneModel random_scene(std::uint64_t seed, int views, int width, int height, int sh_degree) {
    std::mt19937_64 rng(seed);
    SceneModel scene;
    scene.sh_degree = sh_degree;
    for (int v = 0; v < views; ++v) {
        ViewMap view;
        view.camera = random_camera(rng, width, height);
        for (int i = 0; i < height; ++i)
            for (int j = 0; j < width; ++j) view.records.push_back(random_record_in_front(rng, view.camera, i, j, sh_degree));
        scene.views.push_back(std::move(view));
    }
    return scene;
}

}  // namespace gsc::test
