#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gsc/model.hpp"

namespace gsc {

/// Interleaved RGB, row-major, values in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> rgb;

    Image() = default;
    Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0.0f) {}

    float& at(int row, int col, int c) { return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + c]; }
    float at(int row, int col, int c) const { return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + c]; }

    friend bool operator==(const Image&, const Image&) = default;
};

struct RenderTarget {
    int width = 1;
    int height = 1;
    CameraView camera;
    std::array<float, 3> background{0.0f, 0.0f, 0.0f};
};

/// Camera-space depth below which Gaussians are not drawn.
inline constexpr double kNearPlane = 0.01;
/// Isotropic screen-space dilation added to every projected covariance (pixels^2).
inline constexpr double kDilation = 0.3;
inline constexpr double kMaxAlpha = 0.99;
/// Contributions beyond this Mahalanobis power (0.5 d^T S^-1 d) are dropped.
inline constexpr double kMaxPower = 8.0;

struct RenderStats {
    std::size_t drawn = 0;
    std::size_t culled = 0;      // behind the near plane
    std::size_t degenerate = 0;  // non-invertible screen covariance
};

/// Front-to-back EWA splatting of `gaussians` (depth-sorted, ties by index).
/// Pixel (row i, col j) samples the image point (j + 0.5, i + 0.5).
/// Output is independent of `threads`.
Image render(std::span<const GaussianRecord> gaussians, int sh_degree, const RenderTarget& target,
             RenderStats* stats = nullptr, unsigned threads = 0);

/// Renders every view's Gaussians together, as seen by `camera`.
Image render_scene(const SceneModel& scene, const CameraView& camera, unsigned threads = 0);

/// 10 log10(1 / MSE) over all channels; +infinity for identical images.
double psnr(const Image& a, const Image& b);
/// Mean SSIM over channels using an 11x11 Gaussian window (sigma 1.5).
double ssim(const Image& a, const Image& b);

void write_png(const Image& img, const std::string& path);
void write_pfm(const Image& img, const std::string& path);

}  // namespace gsc
