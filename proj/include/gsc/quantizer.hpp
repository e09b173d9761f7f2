#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gsc/grid.hpp"

namespace gsc {

enum class ChannelClass { depth, offset_xy, scale, rotation, color, opacity };

std::string_view channel_name(ChannelClass c);
/// Accepts "depth", "offset_xy" (or "offset"), "scale", "rotation", "color",
/// "opacity". Throws ValidationError otherwise.
ChannelClass channel_from_name(std::string_view name);

/// Step-to-sigma divisor per channel class: depth 2048, colour 1024, all others 256.
double default_alpha(ChannelClass c);

/// Smallest quantization step used for a non-constant plane. Steps below this
/// would only resolve float32 rounding noise of unit-scale inputs.
inline constexpr double kMinStep = 1.0 / (1 << 20);

struct ChannelQuantMeta {
    float step = 1.0f;
    float offset = 0.0f;
    float alpha = 1.0f;
    std::uint32_t count_truncated = 0;

    friend bool operator==(const ChannelQuantMeta&, const ChannelQuantMeta&) = default;
};

struct QuantizedPlane {
    IndexPlane indices;
    ChannelQuantMeta meta;
};

/// Population standard deviation, accumulated in double in index order.
double population_sigma(std::span<const double> values);

/// index = round((v - offset) / step) clamped to [0, 16383] with offset the
/// plane minimum and step = sigma / alpha (sigma = `shared_sigma` when given,
/// otherwise the plane's own). A zero sigma gives step 1. Step and offset are
/// rounded to float32 before use so the decoder sees the same values.
QuantizedPlane quantize_plane(const Plane& values, double alpha, std::optional<double> shared_sigma = {});

Plane dequantize_plane(const IndexPlane& indices, const ChannelQuantMeta& meta);

}  // namespace gsc
