#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "doctest.h"
#include "gsc/error.hpp"
#include "gsc/pipeline.hpp"
#include "gsc/synth.hpp"
#include "gsc/vabr.hpp"
#include "helpers.hpp"

using namespace gsc;

namespace {

SceneModel small_synth(SynthGeometry geo = SynthGeometry::plane, int degree = 1, double jitter = 0.0) {
    SynthSpec spec;
    spec.seed = 3;
    spec.views = 2;
    spec.width = 32;
    spec.height = 24;
    spec.sh_degree = degree;
    spec.geometry = geo;
    spec.offset_jitter = jitter;
    spec.scale_jitter = jitter;
    return generate(spec);
}

std::vector<CameraView> cameras_of(const SceneModel& s) {
    std::vector<CameraView> c;
    for (const auto& v : s.views) c.push_back(v.camera);
    return c;
}

double render_psnr(const SceneModel& a, const SceneModel& b) {
    return evaluate(a, b, cameras_of(a), 0, 2).mean_psnr;
}

/// Lossless backend, k = d, and per channel the largest power-of-two alpha
/// (starting at 2^20) whose planes still fit the 14-bit index range.
EncodeConfig transparent_config(const SceneModel& s) {
    EncodeConfig cfg;
    cfg.backend = Backend::internal_lossless;
    cfg.k = sh_coeff_count(s.sh_degree);
    for (auto c : {ChannelClass::depth, ChannelClass::offset_xy, ChannelClass::scale, ChannelClass::rotation,
                   ChannelClass::color, ChannelClass::opacity})
        cfg.alpha[c] = 1 << 20;
    for (;;) {
        const auto cs = encode_scene(s, cfg);
        std::map<ChannelClass, bool> overflow;
        const int per_view = planes_per_view(cfg.k);
        for (std::size_t n = 0; n < cs.quant.size(); ++n)
            if (cs.quant[n].count_truncated) overflow[plane_class(static_cast<int>(n % per_view), cfg.k)] = true;
        if (overflow.empty()) return cfg;
        for (const auto& [c, _] : overflow) cfg.alpha[c] /= 2;
    }
}

/// Largest |a - b| over one field, relative to the largest |b| of that field.
template <class Get>
double field_error(const SceneModel& a, const SceneModel& b, Get get) {
    double err = 0, mag = 0;
    for (std::size_t v = 0; v < a.views.size(); ++v)
        for (std::size_t n = 0; n < a.views[v].records.size(); ++n) {
            const auto& x = get(a.views[v].records[n]);
            const auto& y = get(b.views[v].records[n]);
            for (std::size_t i = 0; i < x.size(); ++i) {
                err = std::max(err, std::abs(static_cast<double>(x[i]) - y[i]));
                mag = std::max(mag, std::abs(static_cast<double>(y[i])));
            }
        }
    return mag > 0 ? err / mag : err;
}

}  // namespace

TEST_CASE("structure preservation") {
    const auto scene = small_synth(SynthGeometry::sphere, 2);
    EncodeConfig cfg;
    const auto cs = encode_scene(scene, cfg);
    CHECK(cs.header.view_count == 2);
    CHECK(cs.header.k == 6);
    CHECK(cs.planes.size() == 2u * 17u);
    const auto back = decode_scene(cs);
    REQUIRE(back.views.size() == scene.views.size());
    CHECK(back.sh_degree == scene.sh_degree);
    for (std::size_t v = 0; v < scene.views.size(); ++v) {
        CHECK(back.views[v].camera == scene.views[v].camera);
        CHECK(back.views[v].records.size() == scene.views[v].records.size());
        CHECK(back.views[v].records[0].sh.size() == scene.views[v].records[0].sh.size());
    }
    CHECK_NOTHROW(validate_scene(back));
}

TEST_CASE("lossless backend at qg 0 keeps rendering quality") {
    for (auto geo : {SynthGeometry::plane, SynthGeometry::sphere, SynthGeometry::room}) {
        const auto scene = small_synth(geo);
        EncodeConfig cfg;
        cfg.backend = Backend::internal_lossless;
        const auto back = decode_scene(encode_scene(scene, cfg));
        CHECK(render_psnr(scene, back) >= 45.0);
    }
}

TEST_CASE("near-transparent settings") {
    const auto scene = small_synth(SynthGeometry::sphere, 1, 0.3);
    const auto cs = encode_scene(scene, transparent_config(scene));
    for (const auto& q : cs.quant) CHECK(q.count_truncated == 0);
    const auto back = decode_scene(cs);
    CHECK(render_psnr(scene, back) >= 80.0);
    CHECK(field_error(scene, back, [](const GaussianRecord& r) { return r.mu; }) <= 1e-3);
    CHECK(field_error(scene, back, [](const GaussianRecord& r) { return r.s; }) <= 1e-3);
    CHECK(field_error(scene, back, [](const GaussianRecord& r) { return r.q; }) <= 1e-3);
    CHECK(field_error(scene, back, [](const GaussianRecord& r) { return r.sh; }) <= 1e-3);
    CHECK(field_error(scene, back, [](const GaussianRecord& r) { return std::array<float, 1>{r.sigma}; }) <= 1e-3);
}

TEST_CASE("alpha 2^20 on every channel overflows the 14-bit range") {
    const auto scene = small_synth(SynthGeometry::sphere, 1, 0.3);
    auto cfg = transparent_config(scene);
    for (auto& [c, a] : cfg.alpha) a = 1 << 20;
    const auto cs = encode_scene(scene, cfg);
    std::size_t truncated = 0;
    for (const auto& q : cs.quant) truncated += q.count_truncated;
    CHECK(truncated > 0);
}

TEST_CASE("unquantized colour transform at k = d renders at 80 dB") {
    const auto scene = test::random_scene(31, 2, 20, 16, 2);
    const auto all = scene.merged();
    const auto X = color_matrix(all, 2);
    std::vector<CameraView> cams = cameras_of(scene);
    const auto lambda = visibility_weights(sample_directions(cams), 2);
    const auto basis = fit_basis(X, lambda, 27);
    const Eigen::MatrixXd back = vabr_inverse(vabr_forward(X, basis), basis);
    SceneModel rt = scene;
    std::size_t col = 0;
    for (auto& v : rt.views)
        for (auto& r : v.records) {
            for (int j = 0; j < 27; ++j) r.sh[j] = static_cast<float>(back(j, col));
            ++col;
        }
    CHECK(render_psnr(scene, rt) >= 80.0);
}

TEST_CASE("determinism") {
    const auto scene = small_synth(SynthGeometry::room, 2, 0.2);
    EncodeConfig cfg;
    cfg.qg = 3;
    cfg.threads = 1;
    const auto a = serialize_container(encode_scene(scene, cfg));
    cfg.threads = 8;
    const auto b = serialize_container(encode_scene(scene, cfg));
    CHECK(a == b);
    const auto cs = parse_container(a);
    CHECK(decode_scene(cs, {}, 1) == decode_scene(cs, {}, 4));
}

TEST_CASE("ablation flags") {
    const auto scene = small_synth();
    SUBCASE("no VPT") {
        EncodeConfig with, without;
        without.use_vpt = false;
        const auto a = encode_scene(scene, with), b = encode_scene(scene, without);
        CHECK((b.header.flags & kFlagNoVpt) != 0);
        CHECK(bit_allocation_report(b).position > bit_allocation_report(a).position);
        const auto back = decode_scene(b);
        CHECK(render_psnr(scene, back) >= 35.0);
    }
    SUBCASE("no VABR") {
        EncodeConfig cfg;
        cfg.use_vabr = false;
        const auto cs = encode_scene(scene, cfg);
        CHECK((cs.header.flags & kFlagNoVabr) != 0);
        CHECK_FALSE(cs.basis.has_value());
        CHECK(cs.header.k == 12);
        CHECK(render_psnr(scene, decode_scene(cs)) >= 35.0);
    }
    SUBCASE("centred basis") {
        EncodeConfig cfg;
        cfg.centered = true;
        const auto cs = encode_scene(scene, cfg);
        CHECK((cs.header.flags & kFlagCenteredBasis) != 0);
        CHECK(render_psnr(scene, decode_scene(parse_container(serialize_container(cs)))) >= 35.0);
    }
    SUBCASE("k clamp") {
        SynthSpec spec;
        spec.sh_degree = 0;
        spec.width = spec.height = 8;
        EncodeConfig cfg;
        CHECK(encode_scene(generate(spec), cfg).header.k == 3);
    }
}

TEST_CASE("rate is non-increasing in qg") {
    const auto scene = small_synth(SynthGeometry::sphere, 1);
    EncodeConfig cfg;
    const auto rows = sweep(scene, cfg, {0, 3, 6, 12, 24});
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].bytes <= rows[i - 1].bytes);
        CHECK(rows[i].psnr <= rows[i - 1].psnr + 0.1);
    }
}

TEST_CASE("evaluate") {
    const auto scene = small_synth();
    const auto rep = evaluate(scene, scene, cameras_of(scene), 1000);
    REQUIRE(rep.views.size() == 2);
    CHECK(std::isinf(rep.mean_psnr));
    CHECK(rep.mean_ssim == doctest::Approx(1.0));
    // V * W * H * (3 + 4 + 3 + 12 + 1) * 4
    CHECK(rep.raw_bytes == 2u * 32u * 24u * 23u * 4u);
    CHECK(rep.ratio == doctest::Approx(rep.raw_bytes / 1000.0));

    const auto cam = resized_camera(scene.views[0].camera, 64, 48);
    CHECK(cam.fx == doctest::Approx(2 * scene.views[0].camera.fx));
    CHECK(cam.cy == doctest::Approx(2 * scene.views[0].camera.cy));
    std::size_t calls = 0;
    evaluate(scene, scene, {cam}, 0, 1, [&](std::size_t, const Image& a, const Image& b) {
        CHECK(a.width == 64);
        CHECK(a == b);
        ++calls;
    });
    CHECK(calls == 1);
}

TEST_CASE("encode errors abort") {
    auto scene = small_synth();
    EncodeConfig cfg;
    SUBCASE("Gaussian behind its camera") {
        const auto& cam = scene.views[1].camera;
        const Eigen::Vector3d eye = cam.center();
        const Eigen::Vector3d fwd = cam.rotation().row(2).transpose();
        const Eigen::Vector3d behind = eye - fwd;
        auto& rec = scene.views[1].records[5];
        for (int k = 0; k < 3; ++k) rec.mu[k] = static_cast<float>(behind[k]);
        try {
            encode_scene(scene, cfg);
            FAIL("expected BehindCameraError");
        } catch (const BehindCameraError& e) {
            CHECK(std::string(e.what()).find("view 1") != std::string::npos);
        }
    }
    SUBCASE("mixed resolutions") {
        scene.views[1].camera.width = 16;
        scene.views[1].records.resize(16 * 24);
        CHECK_THROWS_AS(encode_scene(scene, cfg), ValidationError);
    }
    SUBCASE("bad alpha") {
        cfg.alpha[ChannelClass::scale] = 0;
        CHECK_THROWS_AS(encode_scene(scene, cfg), ValidationError);
    }
    SUBCASE("missing HEVC encoder") {
        cfg.backend = Backend::hevc;
        cfg.hevc.encoder = "/nonexistent/TAppEncoder";
        CHECK_THROWS_AS(encode_scene(scene, cfg), BackendUnavailableError);
        cfg.hevc_fallback = true;
        const auto cs = encode_scene(scene, cfg);
        for (const auto& p : cs.planes) CHECK(p.backend == Backend::internal_lossy);
    }
}

TEST_CASE("parallel_for reports the lowest failing index") {
    try {
        parallel_for(100, 8, [](std::size_t i) {
            if (i == 17 || i == 60) throw ValidationError("fail " + std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()) == "fail 17");
    }
    std::vector<int> hit(50, 0);
    parallel_for(50, 3, [&](std::size_t i) { hit[i] = 1; });
    CHECK(std::accumulate(hit.begin(), hit.end(), 0) == 50);
}
