#include "gsc/scene_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "gsc/bytes.hpp"
#include "gsc/error.hpp"

namespace gsc {

namespace {

constexpr char kNativeMagic[5] = "GSMP";
constexpr std::uint32_t kNativeVersion = 1;

// ---------------------------------------------------------------- native

SceneModel load_native(const std::string& path) {
    const auto data = read_file(path);
    ByteReader in(data);
    in.section("header");
    const auto magic = in.bytes(4);
    if (std::memcmp(magic.data(), kNativeMagic, 4) != 0) throw ParseError("bad magic, not a .gsmap file", 0);
    const auto version = in.u32();
    if (version != kNativeVersion)
        throw ParseError("unsupported .gsmap version " + std::to_string(version), 4);
    const auto view_count = in.u32();
    const auto degree = in.u32();
    if (degree > 3) throw ParseError("sh_degree " + std::to_string(degree) + " out of range", 12);

    SceneModel scene;
    scene.sh_degree = static_cast<int>(degree);
    const int d = sh_coeff_count(scene.sh_degree);
    scene.views.reserve(std::min<std::uint32_t>(view_count, 1024));
    for (std::uint32_t v = 0; v < view_count; ++v) {
        in.section("camera " + std::to_string(v));
        ViewMap view;
        auto& cam = view.camera;
        const auto w = in.u32();
        const auto h = in.u32();
        if (w == 0 || h == 0 || w > 1u << 16 || h > 1u << 16)
            throw ParseError("implausible view dimensions", in.offset() - 8);
        cam.width = static_cast<int>(w);
        cam.height = static_cast<int>(h);
        cam.fx = in.f32();
        cam.fy = in.f32();
        cam.cx = in.f32();
        cam.cy = in.f32();
        for (auto& r : cam.R) r = in.f32();
        for (auto& t : cam.T) t = in.f32();

        in.section("records of view " + std::to_string(v));
        const std::size_t n = static_cast<std::size_t>(w) * h;
        const std::size_t record_bytes = static_cast<std::size_t>(11 + d) * 4;
        if (in.remaining() / record_bytes < n)
            throw ParseError("file truncated inside records of view " + std::to_string(v), in.offset());
        view.records.resize(n);
        for (auto& rec : view.records) {
            for (auto& x : rec.mu) x = in.f32();
            for (auto& x : rec.q) x = in.f32();
            for (auto& x : rec.s) x = in.f32();
            rec.sh.resize(d);
            for (auto& x : rec.sh) x = in.f32();
            rec.sigma = in.f32();
            rec.q = canonical_quaternion(rec.q);
        }
        scene.views.push_back(std::move(view));
    }
    if (in.remaining() != 0) throw ParseError("trailing bytes after last view", in.offset());
    validate_scene(scene);
    return scene;
}

std::size_t save_native(const SceneModel& scene, const std::string& path) {
    ByteWriter out;
    out.tag(kNativeMagic);
    out.u32(kNativeVersion);
    out.u32(static_cast<std::uint32_t>(scene.views.size()));
    out.u32(static_cast<std::uint32_t>(scene.sh_degree));
    for (const auto& view : scene.views) {
        const auto& cam = view.camera;
        out.u32(static_cast<std::uint32_t>(cam.width));
        out.u32(static_cast<std::uint32_t>(cam.height));
        out.f32(cam.fx);
        out.f32(cam.fy);
        out.f32(cam.cx);
        out.f32(cam.cy);
        for (float r : cam.R) out.f32(r);
        for (float t : cam.T) out.f32(t);
        for (const auto& rec : view.records) {
            for (float x : rec.mu) out.f32(x);
            for (float x : rec.q) out.f32(x);
            for (float x : rec.s) out.f32(x);
            for (float x : rec.sh) out.f32(x);
            out.f32(rec.sigma);
        }
    }
    write_file(path, out.data());
    return out.size();
}

// ---------------------------------------------------------------- PLY

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

std::size_t ply_type_size(PlyType t) {
    switch (t) {
        case PlyType::i8:
        case PlyType::u8: return 1;
        case PlyType::i16:
        case PlyType::u16: return 2;
        case PlyType::i32:
        case PlyType::u32:
        case PlyType::f32: return 4;
        case PlyType::f64: return 8;
    }
    return 0;
}

bool parse_ply_type(const std::string& s, PlyType& t) {
    static const std::map<std::string, PlyType> names = {
        {"char", PlyType::i8},    {"int8", PlyType::i8},     {"uchar", PlyType::u8},
        {"uint8", PlyType::u8},   {"short", PlyType::i16},   {"int16", PlyType::i16},
        {"ushort", PlyType::u16}, {"uint16", PlyType::u16},  {"int", PlyType::i32},
        {"int32", PlyType::i32},  {"uint", PlyType::u32},    {"uint32", PlyType::u32},
        {"float", PlyType::f32},  {"float32", PlyType::f32}, {"double", PlyType::f64},
        {"float64", PlyType::f64},
    };
    const auto it = names.find(s);
    if (it == names.end()) return false;
    t = it->second;
    return true;
}

struct PlyProperty {
    std::string name;
    PlyType type;
    std::size_t offset;  // within a binary vertex
};

enum class PlyEncoding { ascii, binary_le, binary_be };

double read_binary(const std::uint8_t* p, PlyType t, bool swap) {
    std::uint8_t buf[8];
    const std::size_t n = ply_type_size(t);
    for (std::size_t i = 0; i < n; ++i) buf[i] = swap ? p[n - 1 - i] : p[i];
    switch (t) {
        case PlyType::i8: { std::int8_t v; std::memcpy(&v, buf, 1); return v; }
        case PlyType::u8: return buf[0];
        case PlyType::i16: { std::int16_t v; std::memcpy(&v, buf, 2); return v; }
        case PlyType::u16: { std::uint16_t v; std::memcpy(&v, buf, 2); return v; }
        case PlyType::i32: { std::int32_t v; std::memcpy(&v, buf, 4); return v; }
        case PlyType::u32: { std::uint32_t v; std::memcpy(&v, buf, 4); return v; }
        case PlyType::f32: { float v; std::memcpy(&v, buf, 4); return v; }
        case PlyType::f64: { double v; std::memcpy(&v, buf, 8); return v; }
    }
    return 0.0;
}

std::vector<CameraView> load_cams(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open camera sidecar '" + path + "'");
    std::vector<CameraView> cams;
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        CameraView cam;
        double w = 0, h = 0;
        float m[12];
        if (!(ls >> cam.fx >> cam.fy >> cam.cx >> cam.cy >> w >> h))
            throw ParseError("malformed camera line in '" + path + "'", line_start);
        for (float& x : m)
            if (!(ls >> x)) throw ParseError("camera line needs 12 extrinsic values in '" + path + "'", line_start);
        if (w < 1 || h < 1 || w != std::floor(w) || h != std::floor(h))
            throw ParseError("camera dimensions must be positive integers", line_start);
        cam.width = static_cast<int>(w);
        cam.height = static_cast<int>(h);
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) cam.R[r * 3 + c] = m[r * 4 + c];
            cam.T[r] = m[r * 4 + 3];
        }
        cams.push_back(cam);
    }
    return cams;
}

void save_cams(const SceneModel& scene, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << std::setprecision(std::numeric_limits<float>::max_digits10);
    for (const auto& view : scene.views) {
        const auto& c = view.camera;
        out << c.fx << ' ' << c.fy << ' ' << c.cx << ' ' << c.cy << ' ' << c.width << ' ' << c.height;
        for (int r = 0; r < 3; ++r) {
            for (int k = 0; k < 3; ++k) out << ' ' << c.R[r * 3 + k];
            out << ' ' << c.T[r];
        }
        out << '\n';
    }
    if (!out) throw IoError("write failure on '" + path + "'");
}

std::vector<std::string> ply_property_names(int degree) {
    std::vector<std::string> names = {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"};
    const int rest = sh_coeff_count(degree) - 3;
    for (int i = 0; i < rest; ++i) names.push_back("f_rest_" + std::to_string(i));
    names.push_back("opacity");
    for (int i = 0; i < 3; ++i) names.push_back("scale_" + std::to_string(i));
    for (int i = 0; i < 4; ++i) names.push_back("rot_" + std::to_string(i));
    return names;
}

float logit(float p) {
    const double x = p;
    return static_cast<float>(std::log(x / (1.0 - x)));
}

float sigmoid(double x) { return static_cast<float>(1.0 / (1.0 + std::exp(-x))); }

std::size_t save_ply(const SceneModel& scene, const std::string& path) {
    const int nb = sh_basis_count(scene.sh_degree);
    const auto names = ply_property_names(scene.sh_degree);
    std::ostringstream header;
    header << "ply\nformat binary_little_endian 1.0\n"
           << "comment pixel-aligned gaussian maps, cameras in " << std::filesystem::path(sidecar_path(path)).filename().string() << "\n"
           << "element vertex " << scene.record_count() << "\n";
    for (const auto& n : names) header << "property float " << n << "\n";
    header << "end_header\n";

    ByteWriter out;
    const std::string h = header.str();
    out.bytes({reinterpret_cast<const std::uint8_t*>(h.data()), h.size()});
    for (const auto& view : scene.views) {
        for (const auto& rec : view.records) {
            for (float x : rec.mu) out.f32(x);
            for (int i = 0; i < 3; ++i) out.f32(0.0f);
            for (int c = 0; c < 3; ++c) out.f32(rec.sh[c]);
            // f_rest is channel-major: all higher bases of R, then G, then B
            for (int c = 0; c < 3; ++c)
                for (int j = 1; j < nb; ++j) out.f32(rec.sh[3 * j + c]);
            out.f32(logit(rec.sigma));
            for (float x : rec.s) out.f32(std::log(x));
            for (float x : rec.q) out.f32(x);
        }
    }
    write_file(path, out.data());
    save_cams(scene, sidecar_path(path));
    return out.size();
}

SceneModel load_ply(const std::string& path) {
    const auto data = read_file(path);
    // header
    std::size_t pos = 0;
    auto next_line = [&](std::string& line) {
        if (pos >= data.size()) throw ParseError("PLY header not terminated", pos);
        const auto* begin = data.data() + pos;
        const auto* end = static_cast<const std::uint8_t*>(std::memchr(begin, '\n', data.size() - pos));
        if (!end) throw ParseError("PLY header not terminated", pos);
        line.assign(reinterpret_cast<const char*>(begin), reinterpret_cast<const char*>(end));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = static_cast<std::size_t>(end - data.data()) + 1;
    };
    std::string line;
    next_line(line);
    if (line != "ply") throw ParseError("missing 'ply' magic", 0);

    PlyEncoding enc = PlyEncoding::ascii;
    bool have_format = false;
    std::size_t vertex_count = 0;
    bool in_vertex = false, seen_vertex = false;
    std::vector<PlyProperty> props;
    std::size_t stride = 0;
    for (;;) {
        const std::size_t line_start = pos;
        next_line(line);
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "end_header") break;
        if (kw.empty() || kw == "comment" || kw == "obj_info") continue;
        if (kw == "format") {
            std::string f;
            ls >> f;
            if (f == "ascii") enc = PlyEncoding::ascii;
            else if (f == "binary_little_endian") enc = PlyEncoding::binary_le;
            else if (f == "binary_big_endian") enc = PlyEncoding::binary_be;
            else throw ParseError("unknown PLY format '" + f + "'", line_start);
            have_format = true;
        } else if (kw == "element") {
            std::string name;
            std::size_t count = 0;
            if (!(ls >> name >> count)) throw ParseError("malformed element line", line_start);
            if (name == "vertex") {
                if (seen_vertex) throw ParseError("duplicate vertex element", line_start);
                in_vertex = seen_vertex = true;
                vertex_count = count;
            } else {
                if (!seen_vertex) throw ParseError("element '" + name + "' before vertex is not supported", line_start);
                in_vertex = false;
            }
        } else if (kw == "property") {
            std::string type, name;
            ls >> type;
            if (type == "list") {
                if (in_vertex) throw ParseError("list properties on vertex are not supported", line_start);
                continue;
            }
            ls >> name;
            if (!in_vertex) continue;
            PlyType t;
            if (!parse_ply_type(type, t)) throw ParseError("unknown property type '" + type + "'", line_start);
            props.push_back({name, t, stride});
            stride += ply_type_size(t);
        } else {
            throw ParseError("unexpected PLY header keyword '" + kw + "'", line_start);
        }
    }
    if (!have_format) throw ParseError("PLY format line missing", 0);
    if (!seen_vertex) throw ParseError("PLY has no vertex element", pos);

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < props.size(); ++i) index[props[i].name] = i;
    auto require = [&](const std::string& n) {
        const auto it = index.find(n);
        if (it == index.end()) throw ParseError("PLY vertex lacks property '" + n + "'", 0);
        return it->second;
    };
    std::size_t rest = 0;
    while (index.count("f_rest_" + std::to_string(rest))) ++rest;
    const std::size_t bases = rest / 3 + 1;
    int degree = -1;
    for (int l = 0; l <= 3; ++l)
        if (static_cast<std::size_t>(sh_basis_count(l)) == bases && rest % 3 == 0) degree = l;
    if (degree < 0) throw ParseError("unsupported number of f_rest properties: " + std::to_string(rest), 0);

    std::vector<std::size_t> slot;
    for (const auto& n : ply_property_names(degree)) {
        if (n == "nx" || n == "ny" || n == "nz") continue;
        slot.push_back(require(n));
    }

    // body: decode every vertex into `values` (property order)
    std::vector<double> values(props.size());
    auto read_vertex = [&](std::size_t vi) {
        if (enc == PlyEncoding::ascii) {
            for (std::size_t p = 0; p < props.size(); ++p) {
                while (pos < data.size() && std::isspace(data[pos])) ++pos;
                const std::size_t start = pos;
                while (pos < data.size() && !std::isspace(data[pos])) ++pos;
                if (start == pos) throw ParseError("PLY truncated at vertex " + std::to_string(vi), start);
                const std::string tok(reinterpret_cast<const char*>(data.data() + start), pos - start);
                char* endp = nullptr;
                values[p] = std::strtod(tok.c_str(), &endp);
                if (endp != tok.c_str() + tok.size()) throw ParseError("bad number '" + tok + "'", start);
            }
        } else {
            if (data.size() - pos < stride) throw ParseError("PLY truncated at vertex " + std::to_string(vi), pos);
            for (std::size_t p = 0; p < props.size(); ++p)
                values[p] = read_binary(data.data() + pos + props[p].offset, props[p].type, enc == PlyEncoding::binary_be);
            pos += stride;
        }
    };

    const auto cams = load_cams(sidecar_path(path));
    std::size_t expected = 0;
    for (const auto& c : cams) expected += static_cast<std::size_t>(c.width) * c.height;
    if (expected != vertex_count)
        throw ValidationError("camera sidecar describes " + std::to_string(expected) + " pixels but PLY has " +
                              std::to_string(vertex_count) + " vertices");

    SceneModel scene;
    scene.sh_degree = degree;
    const int nb = sh_basis_count(degree);
    std::size_t vi = 0;
    for (const auto& cam : cams) {
        ViewMap view;
        view.camera = cam;
        view.records.resize(static_cast<std::size_t>(cam.width) * cam.height);
        for (auto& rec : view.records) {
            read_vertex(vi++);
            std::size_t k = 0;
            for (auto& x : rec.mu) x = static_cast<float>(values[slot[k++]]);
            rec.sh.assign(3 * nb, 0.0f);
            for (int c = 0; c < 3; ++c) rec.sh[c] = static_cast<float>(values[slot[k++]]);
            for (int c = 0; c < 3; ++c)
                for (int j = 1; j < nb; ++j) rec.sh[3 * j + c] = static_cast<float>(values[slot[k++]]);
            rec.sigma = sigmoid(values[slot[k++]]);
            for (auto& x : rec.s) x = static_cast<float>(std::exp(values[slot[k++]]));
            double q[4], n2 = 0.0;
            for (double& x : q) {
                x = values[slot[k++]];
                n2 += x * x;
            }
            const double n = std::sqrt(n2);
            if (!(n > 0.0)) throw ValidationError("record " + std::to_string(vi - 1) + ": zero quaternion");
            for (int i = 0; i < 4; ++i) rec.q[i] = static_cast<float>(q[i] / n);
            rec.q = canonical_quaternion(rec.q);
        }
        scene.views.push_back(std::move(view));
    }
    validate_scene(scene);
    return scene;
}

}  // namespace

SceneFormat format_from_path(const std::string& path) {
    auto ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".ply" ? SceneFormat::ply : SceneFormat::native;
}

std::string sidecar_path(const std::string& ply_path) {
    return std::filesystem::path(ply_path).replace_extension(".cams").string();
}

SceneModel load_scene(const std::string& path, SceneFormat format) {
    return format == SceneFormat::ply ? load_ply(path) : load_native(path);
}

SceneModel load_scene(const std::string& path) { return load_scene(path, format_from_path(path)); }

std::size_t save_scene(const SceneModel& scene, const std::string& path, SceneFormat format) {
    validate_scene(scene);
    return format == SceneFormat::ply ? save_ply(scene, path) : save_native(scene, path);
}

std::size_t save_scene(const SceneModel& scene, const std::string& path) {
    return save_scene(scene, path, format_from_path(path));
}

}  // namespace gsc
