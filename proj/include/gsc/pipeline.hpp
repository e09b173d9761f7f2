#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "gsc/container.hpp"
#include "gsc/model.hpp"
#include "gsc/plane_codec.hpp"
#include "gsc/quantizer.hpp"
#include "gsc/renderer.hpp"

namespace gsc {

struct EncodeConfig {
    int qg = 0;
    int k = 6;  // clamped to the SH dimension
    std::map<ChannelClass, double> alpha;  // overrides of default_alpha
    Backend backend = Backend::internal_lossy;
    HevcTools hevc;
    bool hevc_fallback = false;  // use internal-lossy when the HEVC encoder is missing
    bool use_vpt = true;
    bool use_vabr = true;
    bool centered = false;  // fit the colour basis on mean-centred data
    unsigned threads = 0;   // 0 = hardware concurrency

    double alpha_for(ChannelClass c) const;
};

/// Throws the first error raised by any stage; nothing is written.
CompressedScene encode_scene(const SceneModel& scene, const EncodeConfig& cfg);

/// Inverse of encode_scene. Opacity is clamped to [0, 1], quaternions are
/// renormalised and scales kept positive.
SceneModel decode_scene(const CompressedScene& cs, const HevcTools& tools = {}, unsigned threads = 0);

struct ViewMetrics {
    double psnr = 0;
    double ssim = 0;
};

struct EvalReport {
    std::vector<ViewMetrics> views;
    double mean_psnr = 0;
    double mean_ssim = 0;
    std::size_t raw_bytes = 0;
    std::size_t container_bytes = 0;
    double ratio = 0;  // raw_bytes / container_bytes, 0 when container_bytes is 0
};

/// Camera with intrinsics rescaled to a width x height image.
CameraView resized_camera(const CameraView& cam, int width, int height);

/// Renders both models from every camera and compares them.
/// `on_render` (optional) receives (view index, original image, decoded image).
EvalReport evaluate(const SceneModel& original, const SceneModel& decoded, const std::vector<CameraView>& cameras,
                    std::size_t container_bytes, unsigned threads = 0,
                    const std::function<void(std::size_t, const Image&, const Image&)>& on_render = {});

struct SweepRow {
    int qg = 0;
    std::size_t bytes = 0;
    double psnr = 0;
    double ssim = 0;
};

/// Encodes `scene` once per qg (other settings from `cfg`), decodes and
/// evaluates at the scene's own cameras.
std::vector<SweepRow> sweep(const SceneModel& scene, const EncodeConfig& cfg, const std::vector<int>& qgs);

/// Runs fn(0) .. fn(n - 1) on up to `threads` workers; rethrows the error of
/// the lowest failing index.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace gsc
