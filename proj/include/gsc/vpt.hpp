#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "gsc/grid.hpp"
#include "gsc/model.hpp"

namespace gsc {

/// Gaussian geometry expressed in the generating camera's frame.
struct VptPlanes {
    Plane depth;                 // camera-space z
    Plane dx, dy;                // normalized image offset from the pixel centre
    std::array<Plane, 4> qhat;   // camera-space rotation (w, x, y, z)
    std::array<Plane, 3> shat;   // perspective-scaled size f * s / z
};

struct GaussianGeometry {
    std::array<float, 3> mu;
    std::array<float, 4> q;
    std::array<float, 3> s;
};

/// Normalized pixel-centre convention: pixel (row i, col j) sits at
/// ((j + 0.5) / W, (i + 0.5) / H).
inline double pixel_center_x(int col, int width) { return (col + 0.5) / width; }
inline double pixel_center_y(int row, int height) { return (row + 0.5) / height; }

/// World -> camera space. Throws BehindCameraError (tagged with `view_index`)
/// when any Gaussian has z <= 0.
VptPlanes vpt_forward(const CameraView& view, std::span<const GaussianRecord> records,
                      std::size_t view_index = 0);

/// Camera -> world space. Throws ValidationError on a nonpositive depth.
std::vector<GaussianGeometry> vpt_inverse(const CameraView& view, const VptPlanes& planes);

}  // namespace gsc
