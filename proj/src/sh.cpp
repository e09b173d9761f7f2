#include "gsc/sh.hpp"

#include <cassert>

namespace gsc {

namespace {

constexpr double kC2[] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                          -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                          0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                          -0.5900435899266435};

}  // namespace

void ShBasis::eval(const Eigen::Vector3d& dir, std::span<double> out) const {
    assert(degree >= 0 && degree <= kMaxDegree);
    assert(out.size() >= static_cast<std::size_t>(size()));
    const double x = dir.x(), y = dir.y(), z = dir.z();
    out[0] = kC0;
    if (degree < 1) return;
    out[1] = -kC1 * y;
    out[2] = kC1 * z;
    out[3] = -kC1 * x;
    if (degree < 2) return;
    const double xx = x * x, yy = y * y, zz = z * z;
    const double xy = x * y, yz = y * z, xz = x * z;
    out[4] = kC2[0] * xy;
    out[5] = kC2[1] * yz;
    out[6] = kC2[2] * (2.0 * zz - xx - yy);
    out[7] = kC2[3] * xz;
    out[8] = kC2[4] * (xx - yy);
    if (degree < 3) return;
    out[9] = kC3[0] * y * (3.0 * xx - yy);
    out[10] = kC3[1] * xy * z;
    out[11] = kC3[2] * y * (4.0 * zz - xx - yy);
    out[12] = kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    out[13] = kC3[4] * x * (4.0 * zz - xx - yy);
    out[14] = kC3[5] * z * (xx - yy);
    out[15] = kC3[6] * x * (xx - 3.0 * yy);
}

std::array<double, 3> sh_radiance(int degree, std::span<const float> sh, const Eigen::Vector3d& dir) {
    std::array<double, 16> y{};
    const ShBasis basis{degree};
    basis.eval(dir, y);
    std::array<double, 3> rgb{0.0, 0.0, 0.0};
    for (int j = 0; j < basis.size(); ++j)
        for (int c = 0; c < 3; ++c) rgb[c] += y[j] * sh[3 * j + c];
    return rgb;
}

}  // namespace gsc
