// gsc: compress, inspect and evaluate pixel-aligned Gaussian splat scenes.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gsc/bytes.hpp"
#include "gsc/container.hpp"
#include "gsc/error.hpp"
#include "gsc/pipeline.hpp"
#include "gsc/scene_io.hpp"
#include "gsc/synth.hpp"

namespace {

using namespace gsc;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

struct Size2 {
    int w = 0, h = 0;
};

Size2 parse_size(const std::string& s) {
    Size2 out;
    char x = 0;
    std::istringstream in(s);
    if (!(in >> out.w >> x >> out.h) || (x != 'x' && x != 'X') || !in.eof() || out.w < 1 || out.h < 1)
        throw CLI::ValidationError("size", "expected WxH, got '" + s + "'");
    return out;
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

std::string format_db(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << v;
    return os.str();
}

struct EncodeOptions {
    int qg = 0;
    int k = 6;
    std::string backend = "internal-lossy";
    std::string hevc_enc;
    std::string hevc_dec;
    bool hevc_fallback = false;
    std::vector<std::string> alpha;
    bool no_vpt = false;
    bool no_vabr = false;
    bool centered = false;
    unsigned threads = 0;

    void add_to(CLI::App* app, bool with_qg) {
        if (with_qg) app->add_option("--qg", qg, "global QP offset added to every channel");
        app->add_option("--k", k, "colour components kept after basis reduction")->check(CLI::PositiveNumber);
        app->add_option("--backend", backend, "internal-lossless, internal-lossy or hevc")
            ->check(CLI::IsMember({"internal-lossless", "internal-lossy", "hevc"}));
        app->add_option("--hevc-enc", hevc_enc, "HEVC encoder binary (default $GSC_HEVC_ENC or TAppEncoder)");
        app->add_option("--hevc-dec", hevc_dec, "HEVC decoder binary (default $GSC_HEVC_DEC or TAppDecoder)");
        app->add_flag("--hevc-fallback", hevc_fallback, "use internal-lossy when the HEVC encoder is missing");
        app->add_option("--alpha", alpha, "step divisor override CHANNEL=VALUE (repeatable)");
        app->add_flag("--no-vpt", no_vpt, "store world-space geometry planes");
        app->add_flag("--no-vabr", no_vabr, "store raw SH coefficient planes");
        app->add_flag("--centered", centered, "fit the colour basis on mean-centred coefficients");
        app->add_option("--threads", threads, "worker threads (0 = all cores)");
    }

    EncodeConfig config() const {
        EncodeConfig cfg;
        cfg.qg = qg;
        cfg.k = k;
        cfg.backend = backend_from_name(backend);
        cfg.hevc.encoder = hevc_enc.empty() ? env_or("GSC_HEVC_ENC", "TAppEncoder") : hevc_enc;
        cfg.hevc.decoder = hevc_dec.empty() ? env_or("GSC_HEVC_DEC", "TAppDecoder") : hevc_dec;
        cfg.hevc_fallback = hevc_fallback;
        cfg.use_vpt = !no_vpt;
        cfg.use_vabr = !no_vabr;
        cfg.centered = centered;
        cfg.threads = threads;
        for (const auto& a : alpha) {
            const auto eq = a.find('=');
            if (eq == std::string::npos) throw CLI::ValidationError("--alpha", "expected CHANNEL=VALUE, got '" + a + "'");
            double v = 0;
            try {
                std::size_t used = 0;
                v = std::stod(a.substr(eq + 1), &used);
                if (used != a.size() - eq - 1) throw std::invalid_argument(a);
            } catch (const std::exception&) {
                throw CLI::ValidationError("--alpha", "bad value in '" + a + "'");
            }
            try {
                cfg.alpha[channel_from_name(a.substr(0, eq))] = v;
            } catch (const gsc::ValidationError& e) {
                throw CLI::ValidationError("--alpha", e.what());
            }
        }
        return cfg;
    }
};

void print_planes(const CompressedScene& cs) {
    const int k = static_cast<int>(cs.header.k);
    const int per_view = planes_per_view(k);
    std::cout << "view,plane,backend,qp,step,offset,truncated,bytes\n";
    for (std::size_t n = 0; n < cs.planes.size(); ++n) {
        const auto& ep = cs.planes[n];
        const auto& q = cs.quant[n];
        std::cout << n / per_view << ',' << plane_label(static_cast<int>(n % per_view), k) << ','
                  << backend_name(ep.backend) << ',' << ep.qp_used << ',' << std::setprecision(9) << q.step << ','
                  << q.offset << ',' << q.count_truncated << ',' << ep.payload.size() << '\n';
    }
}

void print_info(const CompressedScene& cs, std::size_t file_bytes, bool csv) {
    const auto a = bit_allocation_report(cs);
    const std::pair<const char*, std::size_t> rows[] = {
        {"header", a.header},     {"metadata", a.metadata}, {"position", a.position}, {"scale", a.scale},
        {"rotation", a.rotation}, {"color", a.color},       {"opacity", a.opacity},
    };
    if (csv) {
        std::cout << "component,bytes\n";
        for (const auto& [name, n] : rows) std::cout << name << ',' << n << '\n';
        return;
    }
    const auto& h = cs.header;
    std::cout << "views        " << h.view_count << "\n"
              << "resolution   " << h.width << "x" << h.height << "\n"
              << "sh_degree    " << h.sh_degree << "\n"
              << "k            " << h.k << (h.flags & kFlagNoVabr ? " (raw SH planes)" : "") << "\n"
              << "qg           " << h.qg << "\n"
              << "vpt          " << (h.flags & kFlagNoVpt ? "off" : "on") << "\n"
              << "backend      " << (cs.planes.empty() ? "-" : std::string(backend_name(cs.planes[0].backend)))
              << "\n"
              << "file bytes   " << file_bytes << "\n\n";
    std::cout << std::left << std::setw(10) << "component" << std::right << std::setw(12) << "bytes" << std::setw(9)
              << "share" << "\n";
    for (const auto& [name, n] : rows)
        std::cout << std::left << std::setw(10) << name << std::right << std::setw(12) << n << std::setw(8)
                  << std::fixed << std::setprecision(2) << (a.total() ? 100.0 * n / a.total() : 0.0) << "%\n";
    std::cout << std::left << std::setw(10) << "total" << std::right << std::setw(12) << a.total() << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"Compression codec for pixel-aligned Gaussian splat maps"};
    app.require_subcommand(1);

    // encode
    std::string enc_in, enc_out;
    EncodeOptions enc_opts;
    auto* enc = app.add_subcommand("encode", "compress a scene into a .tspl container");
    enc->add_option("input", enc_in, "scene (.gsmap or .ply)")->required();
    enc->add_option("output", enc_out, "container path")->required();
    enc_opts.add_to(enc, true);

    // decode
    std::string dec_in, dec_out, dec_hevc;
    unsigned dec_threads = 0;
    auto* dec = app.add_subcommand("decode", "reconstruct a scene from a container");
    dec->add_option("input", dec_in, "container path")->required();
    dec->add_option("output", dec_out, "scene (.gsmap or .ply)")->required();
    dec->add_option("--hevc-dec", dec_hevc, "HEVC decoder binary (default $GSC_HEVC_DEC or TAppDecoder)");
    dec->add_option("--threads", dec_threads, "worker threads (0 = all cores)");

    // info
    std::string info_in;
    bool info_csv = false, info_planes = false;
    auto* info = app.add_subcommand("info", "print header and bit allocation");
    info->add_option("input", info_in, "container path")->required();
    info->add_flag("--csv", info_csv, "component,bytes rows only");
    info->add_flag("--planes", info_planes, "list every plane instead of the summary");

    // eval
    std::string ev_orig, ev_in, ev_size, ev_dir, ev_hevc;
    unsigned ev_threads = 0;
    auto* ev = app.add_subcommand("eval", "render original and decoded scenes and compare");
    ev->add_option("original", ev_orig, "uncompressed scene")->required();
    ev->add_option("container", ev_in, "container path")->required();
    ev->add_option("--render-size", ev_size, "render resolution WxH (default: camera resolution)");
    ev->add_option("--out-dir", ev_dir, "write PNG renders here");
    ev->add_option("--hevc-dec", ev_hevc, "HEVC decoder binary");
    ev->add_option("--threads", ev_threads, "worker threads (0 = all cores)");

    // synth
    std::string syn_out, syn_res = "64x64", syn_geo = "plane";
    SynthSpec spec;
    double noise = 0.0;
    auto* syn = app.add_subcommand("synth", "generate a synthetic pixel-aligned scene");
    syn->add_option("output", syn_out, "scene (.gsmap or .ply)")->required();
    syn->add_option("--seed", spec.seed, "generator seed");
    syn->add_option("--views", spec.views, "number of cameras")->check(CLI::PositiveNumber);
    syn->add_option("--res", syn_res, "resolution WxH");
    syn->add_option("--geometry", syn_geo, "plane, sphere or room")->check(CLI::IsMember({"plane", "sphere", "room"}));
    syn->add_option("--noise", noise, "offset jitter (pixels) and relative scale jitter")->check(CLI::Range(0.0, 0.99));
    syn->add_option("--sh-degree", spec.sh_degree, "SH degree 0-3")->check(CLI::Range(0, 3));
    syn->add_option("--radius", spec.radius, "camera distance to the look-at point");
    syn->add_option("--arc", spec.arc_degrees, "angular spread of the camera ring in degrees");

    // sweep
    std::string sw_in, sw_qg = "0,3,6,12", sw_csv;
    EncodeOptions sw_opts;
    auto* sw = app.add_subcommand("sweep", "rate-distortion sweep over global QP");
    sw->add_option("input", sw_in, "scene (.gsmap or .ply)")->required();
    sw->add_option("--qg", sw_qg, "comma-separated global QP values");
    sw->add_option("--csv", sw_csv, "write qg,bytes,psnr,ssim rows here");
    sw_opts.add_to(sw, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (*enc) {
            const auto cfg = enc_opts.config();
            const auto scene = load_scene(enc_in);
            const auto cs = encode_scene(scene, cfg);
            const auto bytes = write_container(cs, enc_out);
            const auto raw = raw_scene_bytes(scene);
            std::cout << "wrote " << enc_out << ": " << bytes << " bytes (raw " << raw << ", ratio " << std::fixed
                      << std::setprecision(2) << static_cast<double>(raw) / static_cast<double>(bytes) << "x)\n";
        } else if (*dec) {
            HevcTools tools{"", dec_hevc.empty() ? env_or("GSC_HEVC_DEC", "TAppDecoder") : dec_hevc};
            const auto scene = decode_scene(read_container(dec_in), tools, dec_threads);
            save_scene(scene, dec_out);
            std::cout << "wrote " << dec_out << ": " << scene.views.size() << " views, " << scene.record_count()
                      << " Gaussians\n";
        } else if (*info) {
            const auto bytes = read_file(info_in);
            const auto cs = parse_container(bytes);
            if (info_planes)
                print_planes(cs);
            else
                print_info(cs, bytes.size(), info_csv);
        } else if (*ev) {
            const auto original = load_scene(ev_orig);
            const auto bytes = read_file(ev_in);
            HevcTools tools{"", ev_hevc.empty() ? env_or("GSC_HEVC_DEC", "TAppDecoder") : ev_hevc};
            const auto decoded = decode_scene(parse_container(bytes), tools, ev_threads);
            std::vector<CameraView> cams;
            for (const auto& v : original.views) cams.push_back(v.camera);
            if (!ev_size.empty()) {
                const auto sz = parse_size(ev_size);
                for (auto& c : cams) c = resized_camera(c, sz.w, sz.h);
            }
            if (!ev_dir.empty()) std::filesystem::create_directories(ev_dir);
            const auto rep = evaluate(original, decoded, cams, bytes.size(), ev_threads,
                                      [&](std::size_t v, const Image& a, const Image& b) {
                                          if (ev_dir.empty()) return;
                                          const auto base = std::filesystem::path(ev_dir) / ("view" + std::to_string(v));
                                          write_png(a, base.string() + "_original.png");
                                          write_png(b, base.string() + "_decoded.png");
                                      });
            std::cout << std::left << std::setw(6) << "view" << std::right << std::setw(12) << "psnr_db"
                      << std::setw(10) << "ssim" << "\n";
            for (std::size_t v = 0; v < rep.views.size(); ++v)
                std::cout << std::left << std::setw(6) << v << std::right << std::setw(12)
                          << format_db(rep.views[v].psnr) << std::setw(10) << std::fixed << std::setprecision(5)
                          << rep.views[v].ssim << "\n";
            std::cout << std::left << std::setw(6) << "mean" << std::right << std::setw(12) << format_db(rep.mean_psnr)
                      << std::setw(10) << std::fixed << std::setprecision(5) << rep.mean_ssim << "\n\n"
                      << "raw bytes        " << rep.raw_bytes << "\n"
                      << "container bytes  " << rep.container_bytes << "\n"
                      << "ratio            " << std::setprecision(2) << rep.ratio << "x\n";
        } else if (*syn) {
            const auto sz = parse_size(syn_res);
            spec.width = sz.w;
            spec.height = sz.h;
            spec.geometry = geometry_from_name(syn_geo);
            spec.offset_jitter = noise;
            spec.scale_jitter = noise;
            const auto scene = generate(spec);
            const auto bytes = save_scene(scene, syn_out);
            std::cout << "wrote " << syn_out << ": " << scene.views.size() << " views, " << bytes << " bytes\n";
        } else if (*sw) {
            std::vector<int> qgs;
            std::stringstream ss(sw_qg);
            for (std::string tok; std::getline(ss, tok, ',');) {
                try {
                    std::size_t used = 0;
                    qgs.push_back(std::stoi(tok, &used));
                    if (used != tok.size()) throw std::invalid_argument(tok);
                } catch (const std::exception&) {
                    throw CLI::ValidationError("--qg", "bad QP '" + tok + "'");
                }
            }
            const auto rows = sweep(load_scene(sw_in), sw_opts.config(), qgs);
            std::ostringstream out;
            out << "qg,bytes,psnr,ssim\n";
            for (const auto& r : rows)
                out << r.qg << ',' << r.bytes << ',' << format_db(r.psnr) << ',' << std::fixed << std::setprecision(6)
                    << r.ssim << '\n';
            if (sw_csv.empty()) {
                std::cout << out.str();
            } else {
                std::ofstream f(sw_csv);
                if (!(f << out.str())) throw IoError("cannot write '" + sw_csv + "'");
                std::cout << "wrote " << sw_csv << "\n";
            }
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "gsc: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BackendError& e) {
        std::cerr << "gsc: backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const DataError& e) {
        std::cerr << "gsc: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "gsc: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
