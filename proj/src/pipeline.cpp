#include "gsc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "gsc/error.hpp"
#include "gsc/geometry.hpp"
#include "gsc/vabr.hpp"
#include "gsc/vpt.hpp"

namespace gsc {

namespace {

/// Smallest scale kept after decoding; quantization may round a scale to zero.
constexpr float kMinScale = 1e-9f;

unsigned worker_count(unsigned threads) {
    return threads ? threads : std::max(1u, std::thread::hardware_concurrency());
}

/// The 11 non-colour planes of one view, in slot order (colour slots excluded).
std::vector<Plane> geometry_planes(const ViewMap& view, std::size_t view_index, bool use_vpt) {
    const int W = view.camera.width, H = view.camera.height;
    std::vector<Plane> out;
    out.reserve(11);
    if (use_vpt) {
        auto vp = vpt_forward(view.camera, view.records, view_index);
        out.push_back(std::move(vp.depth));
        out.push_back(std::move(vp.dx));
        out.push_back(std::move(vp.dy));
        for (auto& p : vp.shat) out.push_back(std::move(p));
        for (auto& p : vp.qhat) out.push_back(std::move(p));
    } else {
        for (int n = 0; n < 10; ++n) out.emplace_back(W, H);
        for (std::size_t px = 0; px < view.records.size(); ++px) {
            const auto& r = view.records[px];
            for (int c = 0; c < 3; ++c) out[c].data[px] = r.mu[c];
            for (int c = 0; c < 3; ++c) out[3 + c].data[px] = r.s[c];
            for (int c = 0; c < 4; ++c) out[6 + c].data[px] = r.q[c];
        }
    }
    Plane opacity(W, H);
    for (std::size_t px = 0; px < view.records.size(); ++px) opacity.data[px] = view.records[px].sigma;
    out.push_back(std::move(opacity));
    return out;
}

EncodedPlane encode_one(const IndexPlane& plane, ChannelClass cls, const EncodeConfig& cfg, Backend backend) {
    const int qp = QpConfig{cfg.qg}.effective(cls);
    switch (backend) {
        case Backend::internal_lossless: return encode_plane_lossless(plane);
        case Backend::internal_lossy: return encode_plane_lossy(plane, std::max(qp, 0));
        case Backend::hevc: return encode_plane_hevc(plane, qp, cfg.hevc.encoder);
    }
    throw ValidationError("unknown backend");
}

}  // namespace

double EncodeConfig::alpha_for(ChannelClass c) const {
    const auto it = alpha.find(c);
    return it == alpha.end() ? default_alpha(c) : it->second;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = std::min<std::size_t>(worker_count(threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = std::numeric_limits<std::size_t>::max();
    std::exception_ptr failure;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_at) failed_at = i, failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

CompressedScene encode_scene(const SceneModel& scene, const EncodeConfig& cfg) {
    validate_scene(scene);
    if (scene.views.empty()) throw ValidationError("scene has no views");
    const int W = scene.views[0].camera.width, H = scene.views[0].camera.height;
    for (const auto& v : scene.views)
        if (v.camera.width != W || v.camera.height != H)
            throw ValidationError("all views must share one resolution");
    if (cfg.k < 1) throw ValidationError("k must be >= 1");
    for (const auto& [cls, a] : cfg.alpha)
        if (!(a > 0) || !std::isfinite(a))
            throw ValidationError("alpha for " + std::string(channel_name(cls)) + " must be positive");

    Backend backend = cfg.backend;
    if (backend == Backend::hevc && !executable_available(cfg.hevc.encoder)) {
        if (!cfg.hevc_fallback)
            throw BackendUnavailableError("HEVC encoder '" + cfg.hevc.encoder + "' not found or not executable");
        backend = Backend::internal_lossy;
    }

    const std::size_t V = scene.views.size();
    const int d = sh_coeff_count(scene.sh_degree);
    const int k = cfg.use_vabr ? std::min(cfg.k, d) : d;
    const int per_view = planes_per_view(k);

    CompressedScene cs;
    auto& h = cs.header;
    h.view_count = static_cast<std::uint32_t>(V);
    h.width = static_cast<std::uint32_t>(W);
    h.height = static_cast<std::uint32_t>(H);
    h.sh_degree = static_cast<std::uint32_t>(scene.sh_degree);
    h.k = static_cast<std::uint32_t>(k);
    h.qg = cfg.qg;
    h.flags = kFlagHalfPixelCenters | kFlagJointSigma;
    if (!cfg.use_vpt) h.flags |= kFlagNoVpt;
    if (!cfg.use_vabr) h.flags |= kFlagNoVabr;
    if (cfg.use_vabr && cfg.centered) h.flags |= kFlagCenteredBasis;
    for (const auto& v : scene.views) cs.cameras.push_back(v.camera);

    // float planes, view-major then slot
    std::vector<Plane> planes(V * per_view);
    parallel_for(V, cfg.threads, [&](std::size_t v) {
        auto geo = geometry_planes(scene.views[v], v, cfg.use_vpt);
        for (int s = 0; s < 10; ++s) planes[v * per_view + s] = std::move(geo[s]);
        planes[v * per_view + per_view - 1] = std::move(geo[10]);
    });

    const auto all = scene.merged();
    Eigen::MatrixXd coeffs = color_matrix(all, scene.sh_degree);
    if (cfg.use_vabr) {
        const auto dirs = sample_directions(cs.cameras);
        const auto lambda = visibility_weights(dirs, scene.sh_degree);
        // the decoder only sees float32 basis values, so encode with those too
        const VabrBasis basis = round_to_f32(fit_basis(coeffs, lambda, k, cfg.centered));
        coeffs = vabr_forward(coeffs, basis);
        cs.basis = basis;
    }
    const std::size_t pixels = static_cast<std::size_t>(W) * H;
    for (std::size_t v = 0; v < V; ++v)
        for (int c = 0; c < k; ++c) {
            Plane p(W, H);
            for (std::size_t px = 0; px < pixels; ++px) p.data[px] = coeffs(c, v * pixels + px);
            planes[v * per_view + 10 + c] = std::move(p);
        }

    // sigma pooled over views per slot; colour planes all use the first colour slot's
    std::vector<double> sigma(per_view);
    for (int s = 0; s < per_view; ++s) {
        std::vector<double> pooled;
        pooled.reserve(V * pixels);
        for (std::size_t v = 0; v < V; ++v) {
            const auto& p = planes[v * per_view + s].data;
            pooled.insert(pooled.end(), p.begin(), p.end());
        }
        sigma[s] = population_sigma(pooled);
    }
    for (int c = 1; c < k; ++c) sigma[10 + c] = sigma[10];

    cs.quant.resize(planes.size());
    cs.planes.resize(planes.size());
    parallel_for(planes.size(), cfg.threads, [&](std::size_t n) {
        const int slot = static_cast<int>(n % per_view);
        const ChannelClass cls = plane_class(slot, k);
        auto q = quantize_plane(planes[n], cfg.alpha_for(cls), sigma[slot]);
        cs.quant[n] = q.meta;
        cs.planes[n] = encode_one(q.indices, cls, cfg, backend);
    });
    validate_container(cs);
    return cs;
}

SceneModel decode_scene(const CompressedScene& cs, const HevcTools& tools, unsigned threads) {
    validate_container(cs);
    const auto& h = cs.header;
    const int W = static_cast<int>(h.width), H = static_cast<int>(h.height);
    const int k = static_cast<int>(h.k);
    const int per_view = planes_per_view(k);
    const int degree = static_cast<int>(h.sh_degree);
    const int d = sh_coeff_count(degree);
    const std::size_t V = h.view_count;
    const std::size_t pixels = static_cast<std::size_t>(W) * H;

    std::vector<Plane> planes(cs.planes.size());
    parallel_for(cs.planes.size(), threads, [&](std::size_t n) {
        planes[n] = dequantize_plane(decode_plane(cs.planes[n], tools), cs.quant[n]);
    });

    Eigen::MatrixXd Z(k, V * pixels);
    for (std::size_t v = 0; v < V; ++v)
        for (int c = 0; c < k; ++c) {
            const auto& p = planes[v * per_view + 10 + c].data;
            for (std::size_t px = 0; px < pixels; ++px) Z(c, v * pixels + px) = p[px];
        }
    const Eigen::MatrixXd X = cs.basis ? vabr_inverse(Z, *cs.basis) : Z;
    if (X.rows() != d) throw CorruptionError("colour planes do not match the SH dimension");

    SceneModel scene;
    scene.sh_degree = degree;
    scene.views.resize(V);
    parallel_for(V, threads, [&](std::size_t v) {
        auto& view = scene.views[v];
        view.camera = cs.cameras[v];
        view.records.resize(pixels);
        const Plane* p = &planes[v * per_view];
        if (h.flags & kFlagNoVpt) {
            for (std::size_t px = 0; px < pixels; ++px) {
                auto& r = view.records[px];
                for (int c = 0; c < 3; ++c) r.mu[c] = static_cast<float>(p[c].data[px]);
                for (int c = 0; c < 3; ++c) r.s[c] = static_cast<float>(p[3 + c].data[px]);
                Quat q;
                for (int c = 0; c < 4; ++c) q[c] = p[6 + c].data[px];
                q = quat_canonical(quat_normalize(q));
                for (int c = 0; c < 4; ++c) r.q[c] = static_cast<float>(q[c]);
            }
        } else {
            VptPlanes vp;
            vp.depth = p[0];
            vp.dx = p[1];
            vp.dy = p[2];
            for (int c = 0; c < 3; ++c) vp.shat[c] = p[3 + c];
            for (int c = 0; c < 4; ++c) vp.qhat[c] = p[6 + c];
            const auto geo = vpt_inverse(view.camera, vp);
            for (std::size_t px = 0; px < pixels; ++px) {
                auto& r = view.records[px];
                r.mu = geo[px].mu;
                r.q = geo[px].q;
                r.s = geo[px].s;
            }
        }
        const auto& op = p[per_view - 1].data;
        for (std::size_t px = 0; px < pixels; ++px) {
            auto& r = view.records[px];
            for (auto& s : r.s) s = std::max(s, kMinScale);
            r.sigma = static_cast<float>(std::clamp(op[px], 0.0, 1.0));
            r.sh.resize(d);
            for (int j = 0; j < d; ++j) r.sh[j] = static_cast<float>(X(j, v * pixels + px));
        }
    });
    return scene;
}

CameraView resized_camera(const CameraView& cam, int width, int height) {
    if (width < 1 || height < 1) throw ValidationError("render size must be at least 1x1");
    CameraView out = cam;
    const double sx = static_cast<double>(width) / cam.width, sy = static_cast<double>(height) / cam.height;
    out.fx = static_cast<float>(cam.fx * sx);
    out.cx = static_cast<float>(cam.cx * sx);
    out.fy = static_cast<float>(cam.fy * sy);
    out.cy = static_cast<float>(cam.cy * sy);
    out.width = width;
    out.height = height;
    return out;
}

EvalReport evaluate(const SceneModel& original, const SceneModel& decoded, const std::vector<CameraView>& cameras,
                    std::size_t container_bytes, unsigned threads,
                    const std::function<void(std::size_t, const Image&, const Image&)>& on_render) {
    EvalReport rep;
    rep.raw_bytes = raw_scene_bytes(original);
    rep.container_bytes = container_bytes;
    rep.ratio = container_bytes ? static_cast<double>(rep.raw_bytes) / static_cast<double>(container_bytes) : 0.0;
    for (std::size_t v = 0; v < cameras.size(); ++v) {
        const Image a = render_scene(original, cameras[v], threads);
        const Image b = render_scene(decoded, cameras[v], threads);
        rep.views.push_back({psnr(a, b), ssim(a, b)});
        if (on_render) on_render(v, a, b);
    }
    if (!rep.views.empty()) {
        for (const auto& m : rep.views) {
            rep.mean_psnr += m.psnr;
            rep.mean_ssim += m.ssim;
        }
        rep.mean_psnr /= static_cast<double>(rep.views.size());
        rep.mean_ssim /= static_cast<double>(rep.views.size());
    }
    return rep;
}

std::vector<SweepRow> sweep(const SceneModel& scene, const EncodeConfig& cfg, const std::vector<int>& qgs) {
    std::vector<CameraView> cams;
    for (const auto& v : scene.views) cams.push_back(v.camera);
    std::vector<SweepRow> rows;
    for (int qg : qgs) {
        EncodeConfig c = cfg;
        c.qg = qg;
        const auto cs = encode_scene(scene, c);
        const auto bytes = serialize_container(cs).size();
        const auto rep = evaluate(scene, decode_scene(cs, cfg.hevc, cfg.threads), cams, bytes, cfg.threads);
        rows.push_back({qg, bytes, rep.mean_psnr, rep.mean_ssim});
    }
    return rows;
}

}  // namespace gsc
