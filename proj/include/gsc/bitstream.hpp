#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gsc {

/// MSB-first bit packer; the final byte is zero-padded.
class BitWriter {
public:
    void put(std::uint32_t bits, int count);
    void put_zeros(std::uint32_t count);
    std::vector<std::uint8_t> finish();
    std::uint64_t bit_count() const noexcept { return bits_; }

private:
    std::vector<std::uint8_t> buf_;
    std::uint64_t bits_ = 0;
};

/// MSB-first bit reader. Reading past the end throws DecodeError.
class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint32_t get(int count);
    bool bit();
    std::uint64_t position() const noexcept { return pos_; }
    std::uint64_t size_bits() const noexcept { return static_cast<std::uint64_t>(data_.size()) * 8; }

private:
    std::span<const std::uint8_t> data_;
    std::uint64_t pos_ = 0;
};

}  // namespace gsc
