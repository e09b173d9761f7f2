#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace gsc {

/// Pinhole camera with world-to-camera extrinsics: x_cam = R * x_world + T.
struct CameraView {
    float fx = 1.0f;
    float fy = 1.0f;
    float cx = 0.0f;
    float cy = 0.0f;
    std::array<float, 9> R{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
    std::array<float, 3> T{0, 0, 0};
    int width = 1;
    int height = 1;

    Eigen::Matrix3d rotation() const;
    Eigen::Vector3d translation() const;
    Eigen::Matrix3d intrinsics() const;
    /// Camera center in world coordinates, -R^T T.
    Eigen::Vector3d center() const;
    /// Geometric mean focal length sqrt(fx * fy).
    double focal() const;

    friend bool operator==(const CameraView&, const CameraView&) = default;
};

/// One pixel-aligned Gaussian. `sh` holds d = 3 (N+1)^2 coefficients laid
/// out basis-major: coefficient of basis j for colour channel c is sh[3j + c].
struct GaussianRecord {
    std::array<float, 3> mu{0, 0, 0};
    std::array<float, 4> q{1, 0, 0, 0};  // (w, x, y, z)
    std::array<float, 3> s{1, 1, 1};
    std::vector<float> sh;
    float sigma = 1.0f;  // opacity, post-activation

    friend bool operator==(const GaussianRecord&, const GaussianRecord&) = default;
};

/// Camera plus its H x W row-major grid of Gaussians.
struct ViewMap {
    CameraView camera;
    std::vector<GaussianRecord> records;

    const GaussianRecord& at(int row, int col) const {
        return records[static_cast<std::size_t>(row) * camera.width + col];
    }
    GaussianRecord& at(int row, int col) {
        return records[static_cast<std::size_t>(row) * camera.width + col];
    }

    friend bool operator==(const ViewMap&, const ViewMap&) = default;
};

struct SceneModel {
    int sh_degree = 0;
    std::vector<ViewMap> views;

    std::size_t record_count() const;
    /// All records of all views, view-major.
    std::vector<GaussianRecord> merged() const;

    friend bool operator==(const SceneModel&, const SceneModel&) = default;
};

constexpr int sh_basis_count(int degree) { return (degree + 1) * (degree + 1); }
constexpr int sh_coeff_count(int degree) { return 3 * sh_basis_count(degree); }

/// Flips q so that w >= 0; when w == 0 the first nonzero component is made positive.
std::array<float, 4> canonical_quaternion(std::array<float, 4> q);

/// Throws ValidationError naming the offending field.
void validate_camera(const CameraView& cam);
/// Throws ValidationError naming `index`.
void validate_record(const GaussianRecord& rec, int sh_degree, std::size_t index);
void validate_scene(const SceneModel& scene);

/// Size in bytes of the scene as uncompressed float32 records (cameras excluded).
std::size_t raw_scene_bytes(const SceneModel& scene);

}  // namespace gsc
