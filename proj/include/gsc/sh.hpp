#pragma once

#include <array>
#include <span>

#include <Eigen/Core>

namespace gsc {

/// Real spherical harmonics up to degree 3 with the sign and normalisation
/// constants used by common splatting renderers. Basis index is l*l + (l + m).
struct ShBasis {
    static constexpr int kMaxDegree = 3;
    static constexpr double kC0 = 0.28209479177387814;
    static constexpr double kC1 = 0.4886025119029199;

    int degree = 0;

    int size() const { return (degree + 1) * (degree + 1); }

    /// Fills out[0 .. size()) for unit direction `dir`.
    void eval(const Eigen::Vector3d& dir, std::span<double> out) const;
};

/// RGB radiance along `dir` from basis-major coefficients (sh[3j + c]),
/// without the +0.5 offset or clamping.
std::array<double, 3> sh_radiance(int degree, std::span<const float> sh, const Eigen::Vector3d& dir);

}  // namespace gsc
