#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gsc/grid.hpp"
#include "gsc/quantizer.hpp"

namespace gsc {

enum class Backend : std::uint8_t { internal_lossless = 0, internal_lossy = 1, hevc = 2 };

std::string_view backend_name(Backend b);
/// "internal-lossless", "internal-lossy" or "hevc".
Backend backend_from_name(std::string_view name);

struct EncodedPlane {
    Backend backend = Backend::internal_lossless;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> payload;
    int qp_used = 0;

    friend bool operator==(const EncodedPlane&, const EncodedPlane&) = default;
};

/// Effective QP per channel is qc(channel) + qg.
struct QpConfig {
    int qg = 0;

    static int qc(ChannelClass c);
    int effective(ChannelClass c) const { return qc(c) + qg; }
};

/// Paths of the external HEVC encoder/decoder (HM/HTM command-line conventions).
struct HevcTools {
    std::string encoder;
    std::string decoder;
};

inline constexpr int kRiceBlock = 16;
/// Block parameter value marking a block whose residuals are all zero.
inline constexpr std::uint32_t kZeroBlock = 15;

/// MED prediction from left `a`, top `b`, top-left `c`.
constexpr int med_predict(int a, int b, int c) {
    const int mx = a > b ? a : b;
    const int mn = a > b ? b : a;
    if (c >= mx) return mn;
    if (c <= mn) return mx;
    return a + b - c;
}

/// Signed residual -> unsigned: 0, -1, 1, -2, 2 ... -> 0, 1, 2, 3, 4 ...
constexpr std::uint32_t zigzag(int e) {
    return e >= 0 ? static_cast<std::uint32_t>(e) << 1 : (static_cast<std::uint32_t>(-e) << 1) - 1;
}
constexpr int unzigzag(std::uint32_t u) {
    return (u & 1u) ? -static_cast<int>((u + 1) >> 1) : static_cast<int>(u >> 1);
}

/// Raster-order MED residuals of the plane; out-of-plane neighbours are 0.
Grid<int> med_residuals(const IndexPlane& plane);

/// Bitstream: 16x16 blocks in raster order; per block a 4-bit Rice parameter
/// k in [0, 14] (or 15 = all residuals zero, nothing follows), then the
/// block's zigzagged MED residuals in raster order, each as
/// (u >> k) zero bits, a one bit, then the low k bits of u. MSB first.
EncodedPlane encode_plane_lossless(const IndexPlane& plane);

/// Divisor applied to indices for a given QP: round(2^(qp / 6)), qp < 0 treated as 0.
int lossy_divisor(int qp);

/// Indices divided by lossy_divisor(qp) (rounded to nearest, ties to even), then
/// lossless coded. Decoding multiplies back by the divisor.
EncodedPlane encode_plane_lossy(const IndexPlane& plane, int qp);

/// Throws BackendUnavailableError when the encoder cannot be found, ProcessError
/// when it fails.
EncodedPlane encode_plane_hevc(const IndexPlane& plane, int qp, const std::string& encoder_path);

/// `tools` is only consulted for the hevc backend.
IndexPlane decode_plane(const EncodedPlane& ep, const HevcTools& tools = {});

/// True when `path` names an executable file directly or on PATH.
bool executable_available(const std::string& path);

}  // namespace gsc
