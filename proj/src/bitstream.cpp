#include "gsc/bitstream.hpp"

#include "gsc/error.hpp"

namespace gsc {

void BitWriter::put(std::uint32_t bits, int count) {
    for (int i = count - 1; i >= 0; --i) {
        if ((bits_ & 7) == 0) buf_.push_back(0);
        if ((bits >> i) & 1u) buf_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ & 7));
        ++bits_;
    }
}

void BitWriter::put_zeros(std::uint32_t count) {
    for (std::uint32_t i = 0; i < count; ++i) {
        if ((bits_ & 7) == 0) buf_.push_back(0);
        ++bits_;
    }
}

std::vector<std::uint8_t> BitWriter::finish() {
    bits_ = 0;
    return std::move(buf_);
}

bool BitReader::bit() {
    if (pos_ >= size_bits()) throw DecodeError("bitstream exhausted", pos_);
    const bool b = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u;
    ++pos_;
    return b;
}

std::uint32_t BitReader::get(int count) {
    std::uint32_t v = 0;
    for (int i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint32_t>(bit());
    return v;
}

}  // namespace gsc
