#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsc/model.hpp"
#include "gsc/plane_codec.hpp"
#include "gsc/quantizer.hpp"
#include "gsc/vabr.hpp"

namespace gsc {

inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderBytes = 36;
inline constexpr std::size_t kContainerCameraBytes = 64;
inline constexpr std::size_t kQuantMetaBytes = 16;
inline constexpr std::size_t kPlaneFrameBytes = 9;  // backend u8, qp i32, length u32

/// Header flag bits.
enum ContainerFlags : std::uint32_t {
    kFlagHalfPixelCenters = 1u << 0,  // offsets relative to ((j + .5) / W, (i + .5) / H)
    kFlagCenteredBasis = 1u << 1,     // colour basis fitted on mean-centred data
    kFlagNoVpt = 1u << 2,             // geometry planes hold world-space values
    kFlagNoVabr = 1u << 3,            // colour planes hold raw SH coefficients, no basis block
    kFlagJointSigma = 1u << 4,        // quantization sigma pooled over all views per channel
};

struct ContainerHeader {
    std::uint32_t version = kContainerVersion;
    std::uint32_t view_count = 0;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t sh_degree = 0;
    std::uint32_t k = 0;  // colour planes per view
    std::uint32_t flags = 0;
    std::int32_t qg = 0;

    friend bool operator==(const ContainerHeader&, const ContainerHeader&) = default;
};

/// Planes per view: depth, dx, dy, s1..s3, q1..q4, c1..ck, opacity.
constexpr int planes_per_view(int k) { return 11 + k; }

/// Channel class of plane slot `slot` (0-based, per view) when k colour planes are stored.
ChannelClass plane_class(int slot, int k);
/// Short label such as "depth", "dx", "s2", "q4", "c1", "opacity".
std::string plane_label(int slot, int k);

/// File layout, little-endian:
///   header   "TSPL" u32 version, view_count, W, H, sh_degree, k, flags; i32 qg   (36 bytes)
///   cameras  per view f32 fx fy cx cy R[9] T[3]                                 (64 bytes each)
///   basis    absent when kFlagNoVabr; else u32 d, f32 lambda[d], f32 W[d*k] column-major
///   quant    per plane f32 step, offset, alpha; u32 count_truncated             (16 bytes each)
///   planes   per plane u8 backend, i32 qp, u32 length, payload bytes
/// Planes are ordered view-major, then by slot.
struct CompressedScene {
    ContainerHeader header;
    std::vector<CameraView> cameras;
    std::optional<VabrBasis> basis;
    std::vector<ChannelQuantMeta> quant;
    std::vector<EncodedPlane> planes;

    friend bool operator==(const CompressedScene&, const CompressedScene&) = default;
};

/// Throws CorruptionError / FormatError describing the first violated invariant.
void validate_container(const CompressedScene& cs);

std::vector<std::uint8_t> serialize_container(const CompressedScene& cs);
CompressedScene parse_container(std::span<const std::uint8_t> data);

std::size_t write_container(const CompressedScene& cs, const std::string& path);
CompressedScene read_container(const std::string& path);

struct BitAllocation {
    std::size_t header = 0;
    std::size_t metadata = 0;  // cameras, basis, quantization metadata, plane framing
    std::size_t position = 0;  // depth + dx + dy payloads
    std::size_t scale = 0;
    std::size_t rotation = 0;
    std::size_t color = 0;
    std::size_t opacity = 0;

    std::size_t total() const { return header + metadata + position + scale + rotation + color + opacity; }
};

BitAllocation bit_allocation_report(const CompressedScene& cs);

}  // namespace gsc
