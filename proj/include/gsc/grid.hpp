#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gsc {

/// Row-major H x W array.
template <class T>
struct Grid {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(int w, int h, T fill = T{})
        : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::size_t size() const noexcept { return data.size(); }
    bool empty() const noexcept { return data.empty(); }

    T& at(int row, int col) {
        assert(row >= 0 && row < height && col >= 0 && col < width);
        return data[static_cast<std::size_t>(row) * width + col];
    }
    const T& at(int row, int col) const {
        assert(row >= 0 && row < height && col >= 0 && col < width);
        return data[static_cast<std::size_t>(row) * width + col];
    }

    std::span<T> span() noexcept { return data; }
    std::span<const T> span() const noexcept { return data; }

    friend bool operator==(const Grid&, const Grid&) = default;
};

using Plane = Grid<double>;
/// Quantized samples; only the low 14 bits are ever set.
using IndexPlane = Grid<std::uint16_t>;

inline constexpr std::uint16_t kMaxIndex = 16383;

}  // namespace gsc
