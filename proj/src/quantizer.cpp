#include "gsc/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsc/error.hpp"

namespace gsc {

std::string_view channel_name(ChannelClass c) {
    switch (c) {
        case ChannelClass::depth: return "depth";
        case ChannelClass::offset_xy: return "offset_xy";
        case ChannelClass::scale: return "scale";
        case ChannelClass::rotation: return "rotation";
        case ChannelClass::color: return "color";
        case ChannelClass::opacity: return "opacity";
    }
    return "?";
}

ChannelClass channel_from_name(std::string_view name) {
    if (name == "depth") return ChannelClass::depth;
    if (name == "offset_xy" || name == "offset") return ChannelClass::offset_xy;
    if (name == "scale") return ChannelClass::scale;
    if (name == "rotation") return ChannelClass::rotation;
    if (name == "color" || name == "colour") return ChannelClass::color;
    if (name == "opacity") return ChannelClass::opacity;
    throw ValidationError("unknown channel class '" + std::string(name) + "'");
}

double default_alpha(ChannelClass c) {
    switch (c) {
        case ChannelClass::depth: return 2048.0;
        case ChannelClass::offset_xy: return 256.0;
        case ChannelClass::scale: return 256.0;
        case ChannelClass::rotation: return 256.0;
        case ChannelClass::color: return 1024.0;
        case ChannelClass::opacity: return 256.0;
    }
    throw ValidationError("unknown channel class");
}

double population_sigma(std::span<const double> values) {
    if (values.empty()) return 0.0;
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

QuantizedPlane quantize_plane(const Plane& values, double alpha, std::optional<double> shared_sigma) {
    if (values.empty()) throw ValidationError("cannot quantize an empty plane");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be positive");
    for (std::size_t n = 0; n < values.size(); ++n) {
        if (!std::isfinite(values.data[n]))
            throw ValidationError("non-finite value at pixel (" + std::to_string(n / values.width) + ", " +
                                  std::to_string(n % values.width) + ")");
    }

    const double sigma = shared_sigma ? *shared_sigma : population_sigma(values.span());
    const double step = sigma > 0.0 ? std::max(sigma / alpha, kMinStep) : 1.0;
    const double vmin = *std::min_element(values.data.begin(), values.data.end());

    QuantizedPlane out;
    out.meta.alpha = static_cast<float>(alpha);
    out.meta.step = static_cast<float>(step);
    out.meta.offset = static_cast<float>(vmin);
    if (static_cast<double>(out.meta.offset) > vmin)
        out.meta.offset = std::nextafter(out.meta.offset, -std::numeric_limits<float>::infinity());

    const double step_f = out.meta.step;
    const double offset_f = out.meta.offset;
    out.indices = IndexPlane(values.width, values.height);
    for (std::size_t n = 0; n < values.size(); ++n) {
        const double t = std::round((values.data[n] - offset_f) / step_f);
        if (t > kMaxIndex) {
            out.indices.data[n] = kMaxIndex;
            ++out.meta.count_truncated;
        } else {
            out.indices.data[n] = static_cast<std::uint16_t>(std::max(t, 0.0));
        }
    }
    return out;
}

Plane dequantize_plane(const IndexPlane& indices, const ChannelQuantMeta& meta) {
    Plane out(indices.width, indices.height);
    const double step = meta.step;
    const double offset = meta.offset;
    for (std::size_t n = 0; n < indices.size(); ++n) out.data[n] = offset + indices.data[n] * step;
    return out;
}

}  // namespace gsc
