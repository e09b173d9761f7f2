#include "gsc/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Geometry>

#include "gsc/error.hpp"
#include "gsc/geometry.hpp"
#include "gsc/sh.hpp"

namespace gsc {

namespace {

constexpr std::uint64_t kStreamScene = 1;
constexpr std::uint64_t kStreamJitter = 2;

/// Screen-space standard deviation of each splat, in pixels.
constexpr double kFootprint = 0.6;
/// Thickness along the surface normal relative to the footprint.
constexpr double kFlatness = 0.1;

struct Hit {
    double t;
    Eigen::Vector3d normal;
};

std::optional<double> ray_plane(const Eigen::Vector3d& o, const Eigen::Vector3d& d, double z) {
    if (d.z() <= 1e-6) return std::nullopt;
    const double t = (z - o.z()) / d.z();
    return t > 0 ? std::optional<double>(t) : std::nullopt;
}

std::optional<double> ray_sphere(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const Eigen::Vector3d& c,
                                 double r) {
    const Eigen::Vector3d oc = o - c;
    const double a = d.squaredNorm();
    const double b = oc.dot(d);
    const double disc = b * b - a * (oc.squaredNorm() - r * r);
    if (disc < 0) return std::nullopt;
    const double t = (-b - std::sqrt(disc)) / a;
    return t > 0 ? std::optional<double>(t) : std::nullopt;
}

/// Slab test; returns (t_enter, t_exit) and the axis of each.
struct SlabResult {
    double t0, t1;
    int axis0, axis1;
};

std::optional<SlabResult> ray_box(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const Eigen::Vector3d& lo,
                                  const Eigen::Vector3d& hi) {
    SlabResult r{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0, 0};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-12) {
            if (o[a] < lo[a] || o[a] > hi[a]) return std::nullopt;
            continue;
        }
        double ta = (lo[a] - o[a]) / d[a], tb = (hi[a] - o[a]) / d[a];
        if (ta > tb) std::swap(ta, tb);
        if (ta > r.t0) r.t0 = ta, r.axis0 = a;
        if (tb < r.t1) r.t1 = tb, r.axis1 = a;
    }
    if (r.t0 > r.t1 || r.t1 <= 0) return std::nullopt;
    return r;
}

Hit intersect(const SynthSpec& spec, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
    const Eigen::Vector3d c(spec.look_at[0], spec.look_at[1], spec.look_at[2]);
    const double R = spec.radius;
    switch (spec.geometry) {
        case SynthGeometry::plane:
            if (auto t = ray_plane(o, d, c.z())) return {*t, {0, 0, -1}};
            break;
        case SynthGeometry::sphere:
            if (auto t = ray_sphere(o, d, c, 0.4 * R)) return {*t, (o + *t * d - c).normalized()};
            if (auto t = ray_plane(o, d, c.z() + 0.6 * R)) return {*t, {0, 0, -1}};
            break;
        case SynthGeometry::room: {
            const Eigen::Vector3d inner(0.25 * R, 0.25 * R, 0.25 * R);
            if (auto b = ray_box(o, d, c - inner, c + inner); b && b->t0 > 0) {
                Eigen::Vector3d n = Eigen::Vector3d::Zero();
                n[b->axis0] = d[b->axis0] > 0 ? -1.0 : 1.0;
                return {b->t0, n};
            }
            const Eigen::Vector3d outer(2.0 * R, 2.0 * R, 2.0 * R);
            if (auto b = ray_box(o, d, c - outer, c + outer)) {
                Eigen::Vector3d n = Eigen::Vector3d::Zero();
                n[b->axis1] = d[b->axis1] > 0 ? -1.0 : 1.0;
                return {b->t1, n};
            }
            break;
        }
    }
    // Ray misses every surface: park the Gaussian on a far shell.
    return {2.0 * R, -d.normalized()};
}

/// Rotation whose third axis is `n`.
Quat normal_frame(const Eigen::Vector3d& n) {
    const Eigen::Vector3d ref = std::abs(n.y()) < 0.9 ? Eigen::Vector3d(0, 1, 0) : Eigen::Vector3d(1, 0, 0);
    const Eigen::Vector3d t1 = ref.cross(n).normalized();
    const Eigen::Vector3d t2 = n.cross(t1);
    Eigen::Matrix3d M;
    M.col(0) = t1;
    M.col(1) = t2;
    M.col(2) = n;
    return quat_from_rotation(M);
}

/// Scene-wide texture parameters drawn from the seed.
struct Texture {
    Eigen::Vector3d base;
    Eigen::Vector3d u1, u2;
    Eigen::Vector3d w1, w2, w3, w4;
    double p1, p2, p3, p4;
    std::vector<double> view_dir;  // (d - 3) coefficients of the view-dependent part

    Texture(const SynthSpec& spec) {
        std::uint64_t n = 0;
        auto uni = [&](double lo, double hi) { return lo + (hi - lo) * synth_uniform(spec.seed, kStreamScene, n++); };
        for (int c = 0; c < 3; ++c) base[c] = uni(0.35, 0.65);
        for (int c = 0; c < 3; ++c) u1[c] = uni(-0.12, 0.12);
        for (int c = 0; c < 3; ++c) u2[c] = uni(-0.12, 0.12);
        const double k = std::numbers::pi / spec.radius;
        // mostly horizontal and mostly vertical waves keep the image gradients axis-aligned
        w1 = Eigen::Vector3d(uni(0.8, 1.2), uni(-0.1, 0.1), uni(-0.3, 0.3)) * k;
        w2 = Eigen::Vector3d(uni(-0.1, 0.1), uni(0.8, 1.2), uni(-0.3, 0.3)) * k;
        w3 = Eigen::Vector3d(uni(0.5, 0.8), uni(-0.1, 0.1), uni(-0.2, 0.2)) * k;
        w4 = Eigen::Vector3d(uni(-0.1, 0.1), uni(0.5, 0.8), uni(-0.2, 0.2)) * k;
        p1 = uni(0, 2 * std::numbers::pi);
        p2 = uni(0, 2 * std::numbers::pi);
        p3 = uni(0, 2 * std::numbers::pi);
        p4 = uni(0, 2 * std::numbers::pi);
        const int rest = sh_coeff_count(spec.sh_degree) - 3;
        view_dir.resize(rest);
        for (int j = 0; j < rest; ++j) {
            const int band = static_cast<int>(std::sqrt(static_cast<double>(j / 3 + 1)));
            view_dir[j] = uni(-0.15, 0.15) / band;
        }
    }

    void shade(const Eigen::Vector3d& P, GaussianRecord& rec) const {
        const Eigen::Vector3d rgb = base + std::sin(w1.dot(P) + p1) * u1 + std::sin(w2.dot(P) + p2) * u2;
        for (int c = 0; c < 3; ++c) rec.sh[c] = static_cast<float>((rgb[c] - 0.5) / ShBasis::kC0);
        const double g = 0.5 + 0.5 * std::sin(w3.dot(P) + p3);
        for (std::size_t j = 0; j < view_dir.size(); ++j) rec.sh[3 + j] = static_cast<float>(g * view_dir[j]);
        rec.sigma = static_cast<float>(0.75 + 0.2 * std::sin(w4.dot(P) + p4));
    }
};

}  // namespace

std::string_view geometry_name(SynthGeometry g) {
    switch (g) {
        case SynthGeometry::plane: return "plane";
        case SynthGeometry::sphere: return "sphere";
        case SynthGeometry::room: return "room";
    }
    return "?";
}

SynthGeometry geometry_from_name(std::string_view name) {
    if (name == "plane") return SynthGeometry::plane;
    if (name == "sphere") return SynthGeometry::sphere;
    if (name == "room") return SynthGeometry::room;
    throw ValidationError("unknown geometry '" + std::string(name) + "' (expected plane, sphere or room)");
}

void validate_spec(const SynthSpec& spec) {
    if (spec.width < 4 || spec.height < 4) throw ValidationError("synth resolution must be at least 4x4");
    if (spec.views < 1) throw ValidationError("synth needs at least one view");
    if (spec.sh_degree < 0 || spec.sh_degree > 3) throw ValidationError("sh_degree must be in [0, 3]");
    if (!(spec.radius > 0)) throw ValidationError("camera radius must be positive");
    if (!(spec.arc_degrees >= 0 && spec.arc_degrees < 360)) throw ValidationError("arc must be in [0, 360)");
    if (!(spec.offset_jitter >= 0 && spec.offset_jitter <= 1)) throw ValidationError("offset jitter must be in [0, 1]");
    if (!(spec.scale_jitter >= 0 && spec.scale_jitter < 1)) throw ValidationError("scale jitter must be in [0, 1)");
}

std::uint64_t synth_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + stream * 0xD1B54A32D192ED03ull + index * 0x9E3779B97F4A7C15ull;
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double synth_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return static_cast<double>(synth_hash(seed, stream, index) >> 11) * 0x1.0p-53;
}

std::vector<CameraView> synth_cameras(const SynthSpec& spec) {
    validate_spec(spec);
    const Eigen::Vector3d target(spec.look_at[0], spec.look_at[1], spec.look_at[2]);
    std::vector<CameraView> cams(spec.views);
    for (int v = 0; v < spec.views; ++v) {
        const double frac = spec.views == 1 ? 0.0 : static_cast<double>(v) / (spec.views - 1) - 0.5;
        const double a = frac * spec.arc_degrees * std::numbers::pi / 180.0;
        const Eigen::Vector3d eye = target + spec.radius * Eigen::Vector3d(std::sin(a), 0.0, -std::cos(a));
        const Eigen::Matrix3d R = look_at_rotation(eye, target, Eigen::Vector3d(0, -1, 0));
        const Eigen::Vector3d T = -R * eye;
        auto& cam = cams[v];
        cam.width = spec.width;
        cam.height = spec.height;
        cam.fx = cam.fy = static_cast<float>(spec.width);
        cam.cx = static_cast<float>(spec.width / 2.0);
        cam.cy = static_cast<float>(spec.height / 2.0);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) cam.R[r * 3 + c] = static_cast<float>(R(r, c));
        for (int r = 0; r < 3; ++r) cam.T[r] = static_cast<float>(T[r]);
    }
    return cams;
}

SceneModel generate(const SynthSpec& spec) {
    const auto cams = synth_cameras(spec);
    const Texture tex(spec);
    const int d = sh_coeff_count(spec.sh_degree);
    const std::size_t pixels = static_cast<std::size_t>(spec.width) * spec.height;

    SceneModel scene;
    scene.sh_degree = spec.sh_degree;
    scene.views.resize(cams.size());
    for (std::size_t v = 0; v < cams.size(); ++v) {
        const CameraView& cam = cams[v];
        // work from the stored float camera so back-projection is exact for it
        const Eigen::Matrix3d R = cam.rotation();
        const Eigen::Vector3d T = cam.translation();
        const Eigen::Vector3d eye = -R.transpose() * T;
        const double f = cam.focal();

        auto& view = scene.views[v];
        view.camera = cam;
        view.records.resize(pixels);
        for (int i = 0; i < spec.height; ++i) {
            for (int j = 0; j < spec.width; ++j) {
                const std::size_t px = static_cast<std::size_t>(i) * spec.width + j;
                const std::uint64_t key = (v * pixels + px) * 4;
                double u = j + 0.5, w = i + 0.5;
                if (spec.offset_jitter > 0) {
                    u += spec.offset_jitter * (synth_uniform(spec.seed, kStreamJitter, key) - 0.5);
                    w += spec.offset_jitter * (synth_uniform(spec.seed, kStreamJitter, key + 1) - 0.5);
                }
                const Eigen::Vector3d ray_cam((u - cam.cx) / cam.fx, (w - cam.cy) / cam.fy, 1.0);
                const Eigen::Vector3d dir = R.transpose() * ray_cam;
                const Hit hit = intersect(spec, eye, dir);
                // camera-space z of the hit equals t since ray_cam.z == 1
                const double z = hit.t;
                const Eigen::Vector3d P = eye + z * dir;

                auto& rec = view.records[px];
                rec.sh.assign(d, 0.0f);
                for (int c = 0; c < 3; ++c) rec.mu[c] = static_cast<float>(P[c]);
                const Quat q = normal_frame(hit.normal);
                for (int c = 0; c < 4; ++c) rec.q[c] = static_cast<float>(q[c]);
                double size = kFootprint * z / f;
                if (spec.scale_jitter > 0)
                    size *= 1.0 + spec.scale_jitter * (2.0 * synth_uniform(spec.seed, kStreamJitter, key + 2) - 1.0);
                rec.s = {static_cast<float>(size), static_cast<float>(size), static_cast<float>(kFlatness * size)};
                tex.shade(P, rec);
            }
        }
    }
    validate_scene(scene);
    return scene;
}

}  // namespace gsc
