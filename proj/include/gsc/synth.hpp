#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "gsc/model.hpp"

namespace gsc {

enum class SynthGeometry { plane, sphere, room };

std::string_view geometry_name(SynthGeometry g);
/// "plane", "sphere" or "room"; throws ValidationError otherwise.
SynthGeometry geometry_from_name(std::string_view name);

struct SynthSpec {
    std::uint64_t seed = 1;
    int views = 2;
    double radius = 3.0;                      // camera distance from look_at
    std::array<double, 3> look_at{0, 0, 0};
    double arc_degrees = 60.0;                // angular spread of the camera ring
    int width = 64;
    int height = 64;
    int sh_degree = 1;
    SynthGeometry geometry = SynthGeometry::plane;
    double offset_jitter = 0.0;  // pixels, uniform in [-j/2, j/2] per axis
    double scale_jitter = 0.0;   // relative, uniform in [-j, j]
};

/// Throws ValidationError unless resolution >= 4x4, views >= 1 and the
/// remaining fields are in range.
void validate_spec(const SynthSpec& spec);

/// Counter-based generator: splitmix64 finaliser of (seed, stream, index).
std::uint64_t synth_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
/// Uniform in [0, 1) with 53 bits.
double synth_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Cameras on a horizontal arc (x-z plane) around look_at, all facing it.
/// fx = fy = W, principal point at the image centre, y down.
std::vector<CameraView> synth_cameras(const SynthSpec& spec);

/// One Gaussian per pixel and view, placed on the analytic surface hit by the
/// pixel-centre ray. Scales are proportional to depth / focal, rotations put
/// the thin axis along the surface normal, and colours come from a smooth
/// procedural texture with a single view-dependent SH direction.
SceneModel generate(const SynthSpec& spec);

}  // namespace gsc
