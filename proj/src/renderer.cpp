#include "gsc/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <limits>
#include <numeric>
#include <thread>

#include <png.h>

#include "gsc/bytes.hpp"
#include "gsc/error.hpp"
#include "gsc/geometry.hpp"
#include "gsc/sh.hpp"

namespace gsc {

namespace {

struct Splat {
    double depth;
    double mx, my;          // screen-space mean
    double ca, cb, cc;      // conic (inverse 2D covariance)
    int x0, x1, y0, y1;     // inclusive pixel bounds
    float opacity;
    std::array<float, 3> color;
};

std::vector<Splat> project(std::span<const GaussianRecord> gaussians, int sh_degree, const RenderTarget& target,
                           RenderStats& stats) {
    const CameraView& cam = target.camera;
    const Eigen::Matrix3d R = cam.rotation();
    const Eigen::Vector3d T = cam.translation();
    const Eigen::Vector3d eye = cam.center();
    const double fx = cam.fx, fy = cam.fy, cx = cam.cx, cy = cam.cy;

    std::vector<Splat> splats;
    splats.reserve(gaussians.size());
    for (const auto& g : gaussians) {
        const Eigen::Vector3d mu(g.mu[0], g.mu[1], g.mu[2]);
        const Eigen::Vector3d p = R * mu + T;
        if (!(p.z() > kNearPlane)) {
            ++stats.culled;
            continue;
        }
        const Eigen::Matrix3d Rq = rotation_from_quat({g.q[0], g.q[1], g.q[2], g.q[3]});
        const Eigen::Matrix3d M = Rq * Eigen::Vector3d(g.s[0], g.s[1], g.s[2]).asDiagonal();
        const Eigen::Matrix3d cov = R * (M * M.transpose()) * R.transpose();

        const double z = p.z(), iz = 1.0 / z;
        Eigen::Matrix<double, 2, 3> J;
        J << fx * iz, 0.0, -fx * p.x() * iz * iz, 0.0, fy * iz, -fy * p.y() * iz * iz;
        const Eigen::Matrix2d cov2 = J * cov * J.transpose();
        const double a = cov2(0, 0) + kDilation;
        const double b = cov2(0, 1);
        const double c = cov2(1, 1) + kDilation;
        const double det = a * c - b * b;
        if (!(det > 0.0) || !std::isfinite(det)) {
            ++stats.degenerate;
            continue;
        }

        Splat s;
        s.depth = z;
        s.mx = fx * p.x() * iz + cx;
        s.my = fy * p.y() * iz + cy;
        s.ca = c / det;
        s.cb = -b / det;
        s.cc = a / det;
        const double mid = 0.5 * (a + c);
        const double lmax = mid + std::sqrt(std::max(0.0, mid * mid - det));
        const double radius = std::ceil(std::sqrt(2.0 * kMaxPower * lmax));
        // pixel j covers centre j + 0.5
        const double lo_x = std::floor(s.mx - radius - 0.5), hi_x = std::ceil(s.mx + radius - 0.5);
        const double lo_y = std::floor(s.my - radius - 0.5), hi_y = std::ceil(s.my + radius - 0.5);
        if (hi_x < 0 || hi_y < 0 || lo_x >= target.width || lo_y >= target.height || !std::isfinite(radius)) continue;
        s.x0 = static_cast<int>(std::max(lo_x, 0.0));
        s.x1 = static_cast<int>(std::min(hi_x, target.width - 1.0));
        s.y0 = static_cast<int>(std::max(lo_y, 0.0));
        s.y1 = static_cast<int>(std::min(hi_y, target.height - 1.0));

        const Eigen::Vector3d dir = (mu - eye).normalized();
        const auto rgb = sh_radiance(sh_degree, g.sh, dir);
        for (int k = 0; k < 3; ++k) s.color[k] = static_cast<float>(std::clamp(rgb[k] + 0.5, 0.0, 1.0));
        s.opacity = g.sigma;
        splats.push_back(s);
        ++stats.drawn;
    }
    std::stable_sort(splats.begin(), splats.end(), [](const Splat& l, const Splat& r) { return l.depth < r.depth; });
    return splats;
}

void composite_rows(const std::vector<Splat>& splats, int row0, int row1, const RenderTarget& target, Image& img) {
    const int W = target.width;
    std::vector<double> color(static_cast<std::size_t>(row1 - row0) * W * 3, 0.0);
    std::vector<double> trans(static_cast<std::size_t>(row1 - row0) * W, 1.0);
    for (const auto& s : splats) {
        const int y0 = std::max(s.y0, row0), y1 = std::min(s.y1, row1 - 1);
        for (int i = y0; i <= y1; ++i) {
            const double dy = i + 0.5 - s.my;
            for (int j = s.x0; j <= s.x1; ++j) {
                const double dx = j + 0.5 - s.mx;
                const double power = 0.5 * (s.ca * dx * dx + s.cc * dy * dy) + s.cb * dx * dy;
                if (power > kMaxPower || power < 0.0) continue;
                const double alpha = std::min(kMaxAlpha, s.opacity * std::exp(-power));
                const std::size_t px = static_cast<std::size_t>(i - row0) * W + j;
                const double t = trans[px];
                for (int k = 0; k < 3; ++k) color[px * 3 + k] += t * alpha * s.color[k];
                trans[px] = t * (1.0 - alpha);
            }
        }
    }
    for (int i = row0; i < row1; ++i)
        for (int j = 0; j < W; ++j) {
            const std::size_t px = static_cast<std::size_t>(i - row0) * W + j;
            for (int k = 0; k < 3; ++k)
                img.at(i, j, k) = static_cast<float>(
                    std::clamp(color[px * 3 + k] + trans[px] * target.background[k], 0.0, 1.0));
        }
}

}  // namespace

Image render(std::span<const GaussianRecord> gaussians, int sh_degree, const RenderTarget& target,
             RenderStats* stats, unsigned threads) {
    if (target.width < 1 || target.height < 1) throw ValidationError("render target must be at least 1x1");
    RenderStats local;
    const auto splats = project(gaussians, sh_degree, target, local);
    if (stats) *stats = local;

    Image img(target.width, target.height);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(target.height));
    if (threads <= 1) {
        composite_rows(splats, 0, target.height, target, img);
        return img;
    }
    std::vector<std::thread> pool;
    const int band = (target.height + static_cast<int>(threads) - 1) / static_cast<int>(threads);
    for (int r0 = 0; r0 < target.height; r0 += band)
        pool.emplace_back(composite_rows, std::cref(splats), r0, std::min(r0 + band, target.height), std::cref(target),
                          std::ref(img));
    for (auto& t : pool) t.join();
    return img;
}

Image render_scene(const SceneModel& scene, const CameraView& camera, unsigned threads) {
    RenderTarget target;
    target.width = camera.width;
    target.height = camera.height;
    target.camera = camera;
    const auto all = scene.merged();
    return render(all, scene.sh_degree, target, nullptr, threads);
}

double psnr(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height) throw ValidationError("psnr: image dimensions differ");
    double se = 0.0;
    for (std::size_t n = 0; n < a.rgb.size(); ++n) {
        const double d = static_cast<double>(a.rgb[n]) - b.rgb[n];
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = se / static_cast<double>(a.rgb.size());
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height) throw ValidationError("ssim: image dimensions differ");
    const int W = a.width, H = a.height;
    int win = std::min({11, W, H});
    if (win % 2 == 0) --win;
    const int half = win / 2;
    std::vector<double> kernel(win);
    double ksum = 0.0;
    for (int t = 0; t < win; ++t) {
        kernel[t] = std::exp(-0.5 * (t - half) * (t - half) / (1.5 * 1.5));
        ksum += kernel[t];
    }
    for (auto& k : kernel) k /= ksum;

    constexpr double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
    const int OW = W - win + 1, OH = H - win + 1;
    // separable 'valid' filter
    auto filter = [&](const std::vector<double>& src) {
        std::vector<double> tmp(static_cast<std::size_t>(H) * OW), out(static_cast<std::size_t>(OH) * OW);
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < OW; ++j) {
                double s = 0.0;
                for (int t = 0; t < win; ++t) s += kernel[t] * src[static_cast<std::size_t>(i) * W + j + t];
                tmp[static_cast<std::size_t>(i) * OW + j] = s;
            }
        for (int i = 0; i < OH; ++i)
            for (int j = 0; j < OW; ++j) {
                double s = 0.0;
                for (int t = 0; t < win; ++t) s += kernel[t] * tmp[static_cast<std::size_t>(i + t) * OW + j];
                out[static_cast<std::size_t>(i) * OW + j] = s;
            }
        return out;
    };

    double total = 0.0;
    const std::size_t n = static_cast<std::size_t>(W) * H;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
        for (std::size_t p = 0; p < n; ++p) {
            x[p] = a.rgb[p * 3 + c];
            y[p] = b.rgb[p * 3 + c];
            xx[p] = x[p] * x[p];
            yy[p] = y[p] * y[p];
            xy[p] = x[p] * y[p];
        }
        const auto mx = filter(x), my = filter(y), sxx = filter(xx), syy = filter(yy), sxy = filter(xy);
        double acc = 0.0;
        for (std::size_t p = 0; p < mx.size(); ++p) {
            const double vx = sxx[p] - mx[p] * mx[p];
            const double vy = syy[p] - my[p] * my[p];
            const double cxy = sxy[p] - mx[p] * my[p];
            acc += ((2 * mx[p] * my[p] + C1) * (2 * cxy + C2)) /
                   ((mx[p] * mx[p] + my[p] * my[p] + C1) * (vx + vy + C2));
        }
        total += acc / static_cast<double>(mx.size());
    }
    return total / 3.0;
}

void write_png(const Image& img, const std::string& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) throw IoError("cannot open '" + path + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng initialisation failed");
    }
    std::vector<png_byte> rows(static_cast<std::size_t>(img.width) * img.height * 3);
    for (std::size_t n = 0; n < rows.size(); ++n)
        rows[n] = static_cast<png_byte>(std::lround(std::clamp(img.rgb[n], 0.0f, 1.0f) * 255.0f));
    std::vector<png_bytep> ptrs(img.height);
    for (int i = 0; i < img.height; ++i) ptrs[i] = rows.data() + static_cast<std::size_t>(i) * img.width * 3;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng failed writing '" + path + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_rows(png, info, ptrs.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
}

// PFM stores rows bottom-to-top; negative scale means little-endian.
void write_pfm(const Image& img, const std::string& path) {
    ByteWriter out;
    const std::string header = "PF\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n-1.0\n";
    out.bytes(std::span(reinterpret_cast<const std::uint8_t*>(header.data()), header.size()));
    for (int i = img.height - 1; i >= 0; --i)
        for (int j = 0; j < img.width; ++j)
            for (int c = 0; c < 3; ++c) out.f32(img.at(i, j, c));
    write_file(path, out.data());
}

}  // namespace gsc
