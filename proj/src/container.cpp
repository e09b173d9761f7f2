#include "gsc/container.hpp"

#include <cstring>

#include "gsc/bytes.hpp"
#include "gsc/error.hpp"

namespace gsc {

namespace {

constexpr char kMagic[5] = "TSPL";

}  // namespace

ChannelClass plane_class(int slot, int k) {
    if (slot == 0 || slot == 1 || slot == 2) return slot == 0 ? ChannelClass::depth : ChannelClass::offset_xy;
    if (slot < 6) return ChannelClass::scale;
    if (slot < 10) return ChannelClass::rotation;
    if (slot < 10 + k) return ChannelClass::color;
    return ChannelClass::opacity;
}

std::string plane_label(int slot, int k) {
    switch (slot) {
        case 0: return "depth";
        case 1: return "dx";
        case 2: return "dy";
        default: break;
    }
    if (slot < 6) return "s" + std::to_string(slot - 2);
    if (slot < 10) return "q" + std::to_string(slot - 5);
    if (slot < 10 + k) return "c" + std::to_string(slot - 9);
    return "opacity";
}

void validate_container(const CompressedScene& cs) {
    const auto& h = cs.header;
    if (h.version != kContainerVersion)
        throw UnsupportedVersionError("unsupported container version " + std::to_string(h.version));
    if (cs.cameras.size() != h.view_count)
        throw CorruptionError("camera count " + std::to_string(cs.cameras.size()) + " does not match view count " +
                              std::to_string(h.view_count));
    if (h.sh_degree > 3) throw CorruptionError("sh_degree out of range");
    const std::uint32_t d = static_cast<std::uint32_t>(sh_coeff_count(static_cast<int>(h.sh_degree)));
    if (h.flags & kFlagNoVabr) {
        if (cs.basis) throw CorruptionError("basis present although colour reduction is disabled");
        if (h.k != d) throw CorruptionError("raw colour planes must number d = " + std::to_string(d));
    } else {
        if (!cs.basis) throw CorruptionError("colour basis missing");
        if (cs.basis->dim() != static_cast<int>(d) || cs.basis->k() != static_cast<int>(h.k))
            throw CorruptionError("colour basis shape does not match header");
        if (h.k < 1) throw CorruptionError("k must be >= 1");
    }
    const std::size_t expected = static_cast<std::size_t>(h.view_count) * planes_per_view(static_cast<int>(h.k));
    if (cs.planes.size() != expected)
        throw CorruptionError("plane count " + std::to_string(cs.planes.size()) + " does not match views x (11 + k) = " +
                              std::to_string(expected));
    if (cs.quant.size() != expected) throw CorruptionError("quantization metadata count does not match plane count");
    for (std::size_t p = 0; p < cs.planes.size(); ++p) {
        const auto& ep = cs.planes[p];
        if (ep.width != static_cast<int>(h.width) || ep.height != static_cast<int>(h.height))
            throw CorruptionError("plane " + std::to_string(p) + " dimensions differ from header");
        if (static_cast<std::uint8_t>(ep.backend) > static_cast<std::uint8_t>(Backend::hevc))
            throw CorruptionError("plane " + std::to_string(p) + " has unknown backend id");
    }
    for (const auto& cam : cs.cameras)
        if (cam.width != static_cast<int>(h.width) || cam.height != static_cast<int>(h.height))
            throw CorruptionError("camera dimensions differ from header");
}

std::vector<std::uint8_t> serialize_container(const CompressedScene& cs) {
    validate_container(cs);
    ByteWriter out;
    const auto& h = cs.header;
    out.tag(kMagic);
    out.u32(h.version);
    out.u32(h.view_count);
    out.u32(h.width);
    out.u32(h.height);
    out.u32(h.sh_degree);
    out.u32(h.k);
    out.u32(h.flags);
    out.i32(h.qg);
    for (const auto& cam : cs.cameras) {
        out.f32(cam.fx);
        out.f32(cam.fy);
        out.f32(cam.cx);
        out.f32(cam.cy);
        for (float r : cam.R) out.f32(r);
        for (float t : cam.T) out.f32(t);
    }
    if (cs.basis) {
        const auto& b = *cs.basis;
        out.u32(static_cast<std::uint32_t>(b.dim()));
        for (Eigen::Index i = 0; i < b.lambda.size(); ++i) out.f32(static_cast<float>(b.lambda[i]));
        for (Eigen::Index c = 0; c < b.W.cols(); ++c)
            for (Eigen::Index r = 0; r < b.W.rows(); ++r) out.f32(static_cast<float>(b.W(r, c)));
    }
    for (const auto& q : cs.quant) {
        out.f32(q.step);
        out.f32(q.offset);
        out.f32(q.alpha);
        out.u32(q.count_truncated);
    }
    for (const auto& ep : cs.planes) {
        out.u8(static_cast<std::uint8_t>(ep.backend));
        out.i32(ep.qp_used);
        out.u32(static_cast<std::uint32_t>(ep.payload.size()));
        out.bytes(ep.payload);
    }
    return out.take();
}

CompressedScene parse_container(std::span<const std::uint8_t> data) {
    ByteReader in(data);
    CompressedScene cs;
    auto& h = cs.header;
    try {
        in.section("header");
        const auto magic = in.bytes(4);
        if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad magic, not a .tspl container");
        h.version = in.u32();
        if (h.version != kContainerVersion)
            throw UnsupportedVersionError("unsupported container version " + std::to_string(h.version));
        h.view_count = in.u32();
        h.width = in.u32();
        h.height = in.u32();
        h.sh_degree = in.u32();
        h.k = in.u32();
        h.flags = in.u32();
        h.qg = in.i32();
        if (h.sh_degree > 3) throw CorruptionError("sh_degree out of range");
        if (h.view_count > 0 && (h.width == 0 || h.height == 0 || h.width > 1u << 16 || h.height > 1u << 16))
            throw CorruptionError("implausible plane dimensions");
        if (h.k > 48) throw CorruptionError("implausible colour plane count");

        in.section("cameras");
        if (in.remaining() / kContainerCameraBytes < h.view_count)
            throw CorruptionError("container truncated in section 'cameras'");
        cs.cameras.resize(h.view_count);
        for (auto& cam : cs.cameras) {
            cam.fx = in.f32();
            cam.fy = in.f32();
            cam.cx = in.f32();
            cam.cy = in.f32();
            for (auto& r : cam.R) r = in.f32();
            for (auto& t : cam.T) t = in.f32();
            cam.width = static_cast<int>(h.width);
            cam.height = static_cast<int>(h.height);
        }

        if (!(h.flags & kFlagNoVabr)) {
            in.section("basis");
            const auto d = in.u32();
            if (d != static_cast<std::uint32_t>(sh_coeff_count(static_cast<int>(h.sh_degree))))
                throw CorruptionError("basis dimension does not match sh_degree");
            VabrBasis b;
            b.degree = static_cast<int>(h.sh_degree);
            b.uncentered = !(h.flags & kFlagCenteredBasis);
            b.lambda.resize(d);
            for (std::uint32_t i = 0; i < d; ++i) b.lambda[i] = in.f32();
            b.W.resize(d, h.k);
            for (std::uint32_t c = 0; c < h.k; ++c)
                for (std::uint32_t r = 0; r < d; ++r) b.W(r, c) = in.f32();
            cs.basis = std::move(b);
        }

        const std::size_t plane_count =
            static_cast<std::size_t>(h.view_count) * planes_per_view(static_cast<int>(h.k));
        in.section("quantization metadata");
        if (in.remaining() / kQuantMetaBytes < plane_count)
            throw CorruptionError("container truncated in section 'quantization metadata'");
        cs.quant.resize(plane_count);
        for (auto& q : cs.quant) {
            q.step = in.f32();
            q.offset = in.f32();
            q.alpha = in.f32();
            q.count_truncated = in.u32();
        }

        cs.planes.resize(plane_count);
        for (std::size_t p = 0; p < plane_count; ++p) {
            in.section("plane " + std::to_string(p));
            auto& ep = cs.planes[p];
            ep.backend = static_cast<Backend>(in.u8());
            ep.qp_used = in.i32();
            const auto len = in.u32();
            const auto payload = in.bytes(len);
            ep.payload.assign(payload.begin(), payload.end());
            ep.width = static_cast<int>(h.width);
            ep.height = static_cast<int>(h.height);
        }
    } catch (const ParseError& e) {
        throw CorruptionError("container truncated in section '" + in.section() + "': " + e.what());
    }
    if (in.remaining() != 0)
        throw CorruptionError(std::to_string(in.remaining()) + " unexpected trailing bytes after last plane");
    validate_container(cs);
    return cs;
}

std::size_t write_container(const CompressedScene& cs, const std::string& path) {
    const auto bytes = serialize_container(cs);
    write_file(path, bytes);
    return bytes.size();
}

CompressedScene read_container(const std::string& path) { return parse_container(read_file(path)); }

BitAllocation bit_allocation_report(const CompressedScene& cs) {
    BitAllocation a;
    a.header = kContainerHeaderBytes;
    a.metadata = cs.cameras.size() * kContainerCameraBytes + cs.quant.size() * kQuantMetaBytes +
                 cs.planes.size() * kPlaneFrameBytes;
    if (cs.basis) a.metadata += 4 + 4 * static_cast<std::size_t>(cs.basis->dim() + cs.basis->W.size());
    const int k = static_cast<int>(cs.header.k);
    const int per_view = planes_per_view(k);
    for (std::size_t p = 0; p < cs.planes.size(); ++p) {
        const std::size_t n = cs.planes[p].payload.size();
        switch (plane_class(static_cast<int>(p % per_view), k)) {
            case ChannelClass::depth:
            case ChannelClass::offset_xy: a.position += n; break;
            case ChannelClass::scale: a.scale += n; break;
            case ChannelClass::rotation: a.rotation += n; break;
            case ChannelClass::color: a.color += n; break;
            case ChannelClass::opacity: a.opacity += n; break;
        }
    }
    return a;
}

}  // namespace gsc
