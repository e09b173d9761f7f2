#include "gsc/plane_codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsc/bitstream.hpp"
#include "gsc/error.hpp"

namespace gsc {

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::internal_lossless: return "internal-lossless";
        case Backend::internal_lossy: return "internal-lossy";
        case Backend::hevc: return "hevc";
    }
    return "?";
}

Backend backend_from_name(std::string_view name) {
    if (name == "internal-lossless" || name == "lossless") return Backend::internal_lossless;
    if (name == "internal-lossy" || name == "lossy") return Backend::internal_lossy;
    if (name == "hevc") return Backend::hevc;
    throw ValidationError("unknown backend '" + std::string(name) + "'");
}

int QpConfig::qc(ChannelClass c) {
    switch (c) {
        case ChannelClass::depth: return -4;
        case ChannelClass::offset_xy: return 12;
        case ChannelClass::scale: return 0;
        case ChannelClass::rotation: return 9;
        case ChannelClass::color: return 3;
        case ChannelClass::opacity: return 0;
    }
    throw ValidationError("unknown channel class");
}

Grid<int> med_residuals(const IndexPlane& plane) {
    Grid<int> res(plane.width, plane.height);
    for (int i = 0; i < plane.height; ++i) {
        for (int j = 0; j < plane.width; ++j) {
            const int a = j > 0 ? plane.at(i, j - 1) : 0;
            const int b = i > 0 ? plane.at(i - 1, j) : 0;
            const int c = (i > 0 && j > 0) ? plane.at(i - 1, j - 1) : 0;
            res.at(i, j) = static_cast<int>(plane.at(i, j)) - med_predict(a, b, c);
        }
    }
    return res;
}

namespace {

constexpr int kMaxRiceK = 14;

template <class Fn>
void for_each_block(int width, int height, Fn&& fn) {
    for (int by = 0; by < height; by += kRiceBlock)
        for (int bx = 0; bx < width; bx += kRiceBlock)
            fn(by, std::min(by + kRiceBlock, height), bx, std::min(bx + kRiceBlock, width));
}

std::vector<std::uint8_t> encode_bitstream(const IndexPlane& plane) {
    for (auto v : plane.data)
        if (v > kMaxIndex) throw ValidationError("plane sample exceeds 14 bits");
    const Grid<int> res = med_residuals(plane);
    BitWriter bw;
    std::vector<std::uint32_t> block;
    block.reserve(kRiceBlock * kRiceBlock);
    for_each_block(plane.width, plane.height, [&](int y0, int y1, int x0, int x1) {
        block.clear();
        bool all_zero = true;
        for (int i = y0; i < y1; ++i)
            for (int j = x0; j < x1; ++j) {
                block.push_back(zigzag(res.at(i, j)));
                all_zero = all_zero && block.back() == 0;
            }
        if (all_zero) {
            bw.put(kZeroBlock, 4);
            return;
        }
        int best_k = 0;
        std::uint64_t best_cost = std::numeric_limits<std::uint64_t>::max();
        for (int k = 0; k <= kMaxRiceK; ++k) {
            std::uint64_t cost = 0;
            for (auto u : block) cost += (u >> k) + 1 + k;
            if (cost < best_cost) {
                best_cost = cost;
                best_k = k;
            }
        }
        bw.put(static_cast<std::uint32_t>(best_k), 4);
        for (auto u : block) {
            bw.put_zeros(u >> best_k);
            bw.put(1, 1);
            if (best_k > 0) bw.put(u & ((1u << best_k) - 1), best_k);
        }
    });
    return bw.finish();
}

IndexPlane decode_bitstream(std::span<const std::uint8_t> payload, int width, int height) {
    if (width < 1 || height < 1) throw CorruptionError("invalid plane dimensions");
    IndexPlane plane(width, height);
    BitReader br(payload);
    for_each_block(width, height, [&](int y0, int y1, int x0, int x1) {
        const auto k = br.get(4);
        for (int i = y0; i < y1; ++i) {
            for (int j = x0; j < x1; ++j) {
                const int a = j > 0 ? plane.at(i, j - 1) : 0;
                const int b = i > 0 ? plane.at(i - 1, j) : 0;
                const int c = (i > 0 && j > 0) ? plane.at(i - 1, j - 1) : 0;
                int e = 0;
                if (k != kZeroBlock) {
                    const auto start = br.position();
                    std::uint32_t q = 0;
                    const std::uint32_t q_max = (2u * kMaxIndex) >> k;
                    while (!br.bit())
                        if (++q > q_max) throw DecodeError("Rice quotient out of range", start);
                    const std::uint32_t u = (q << k) | (k > 0 ? br.get(static_cast<int>(k)) : 0u);
                    e = unzigzag(u);
                }
                const int v = med_predict(a, b, c) + e;
                if (v < 0 || v > kMaxIndex) throw DecodeError("decoded sample outside 14-bit range", br.position());
                plane.at(i, j) = static_cast<std::uint16_t>(v);
            }
        }
    });
    if (br.size_bits() - br.position() >= 8) throw DecodeError("trailing bytes after plane data", br.position());
    return plane;
}

}  // namespace

EncodedPlane encode_plane_lossless(const IndexPlane& plane) {
    EncodedPlane ep;
    ep.backend = Backend::internal_lossless;
    ep.width = plane.width;
    ep.height = plane.height;
    ep.payload = encode_bitstream(plane);
    return ep;
}

int lossy_divisor(int qp) {
    const int d = static_cast<int>(std::lround(std::pow(2.0, std::max(qp, 0) / 6.0)));
    return std::clamp(d, 1, static_cast<int>(kMaxIndex));
}

EncodedPlane encode_plane_lossy(const IndexPlane& plane, int qp) {
    const int D = lossy_divisor(qp);
    IndexPlane reduced(plane.width, plane.height);
    for (std::size_t n = 0; n < plane.size(); ++n) {
        // round to nearest, ties to even: half-up would bias every tie by +D/2
        const int idx = plane.data[n];
        int r = idx / D;
        const int twice_rem = 2 * (idx % D);
        if (twice_rem > D || (twice_rem == D && (r & 1))) ++r;
        reduced.data[n] = static_cast<std::uint16_t>(r);
    }
    EncodedPlane ep;
    ep.backend = Backend::internal_lossy;
    ep.width = plane.width;
    ep.height = plane.height;
    ep.qp_used = std::max(qp, 0);
    ep.payload = encode_bitstream(reduced);
    return ep;
}

IndexPlane decode_hevc_plane(const EncodedPlane& ep, const std::string& decoder_path);

IndexPlane decode_plane(const EncodedPlane& ep, const HevcTools& tools) {
    switch (ep.backend) {
        case Backend::internal_lossless: return decode_bitstream(ep.payload, ep.width, ep.height);
        case Backend::internal_lossy: {
            IndexPlane plane = decode_bitstream(ep.payload, ep.width, ep.height);
            const int D = lossy_divisor(ep.qp_used);
            for (auto& v : plane.data) v = static_cast<std::uint16_t>(std::min<int>(v * D, kMaxIndex));
            return plane;
        }
        case Backend::hevc: return decode_hevc_plane(ep, tools.decoder);
    }
    throw CorruptionError("unknown plane backend id " + std::to_string(static_cast<int>(ep.backend)));
}

}  // namespace gsc
