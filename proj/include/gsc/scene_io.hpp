#pragma once

#include <cstddef>
#include <string>

#include "gsc/model.hpp"

namespace gsc {

enum class SceneFormat { native, ply };

/// `.ply` selects PLY, anything else the native `.gsmap` layout.
SceneFormat format_from_path(const std::string& path);

/// Native `.gsmap` layout (little-endian):
///   "GSMP" | u32 version=1 | u32 view_count | u32 sh_degree
///   per view: u32 W | u32 H | f32 fx fy cx cy | f32 R[9] row-major | f32 T[3]
///             then W*H records, row-major: f32 mu[3] q[4] s[3] sh[d] sigma
inline constexpr std::size_t kNativeHeaderBytes = 16;
inline constexpr std::size_t kNativeCameraBytes = 72;

/// PLY files use the usual splat attribute layout (x y z, nx ny nz, f_dc_*,
/// f_rest_*, opacity as logit, scale_* as log, rot_* as w x y z). Views are
/// stored consecutively; the grouping comes from the sidecar `<stem>.cams`,
/// one line per view: fx fy cx cy W H r00 r01 r02 t0 r10 r11 r12 t1 r20 r21 r22 t2.
std::string sidecar_path(const std::string& ply_path);

SceneModel load_scene(const std::string& path, SceneFormat format);
SceneModel load_scene(const std::string& path);
/// Returns the number of bytes written to `path` (sidecar excluded).
std::size_t save_scene(const SceneModel& scene, const std::string& path, SceneFormat format);
std::size_t save_scene(const SceneModel& scene, const std::string& path);

}  // namespace gsc
