// Adapter around an external HEVC encoder/decoder pair following the HM/HTM
// command-line conventions. Each plane is coded as one intra-only 4:0:0
// picture at 14-bit depth; samples travel as 16-bit little-endian raw frames.

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gsc/bytes.hpp"
#include "gsc/error.hpp"
#include "gsc/plane_codec.hpp"

extern char** environ;

namespace gsc {

namespace fs = std::filesystem;

namespace {

std::string resolve_executable(const std::string& name) {
    if (name.empty()) return {};
    if (name.find('/') != std::string::npos)
        return ::access(name.c_str(), X_OK) == 0 && fs::is_regular_file(name) ? name : std::string{};
    const char* path = std::getenv("PATH");
    if (!path) return {};
    std::stringstream ss(path);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
        if (dir.empty()) continue;
        const fs::path candidate = fs::path(dir) / name;
        if (::access(candidate.c_str(), X_OK) == 0 && fs::is_regular_file(candidate)) return candidate.string();
    }
    return {};
}

/// Per-call scratch directory, removed on scope exit.
class ScratchDir {
public:
    ScratchDir() {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        path_ = fs::temp_directory_path() /
                ("gsc-hevc-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
                 std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

std::string slurp_text(const fs::path& p, std::size_t limit = 4096) {
    std::ifstream in(p);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (s.size() > limit) s = "..." + s.substr(s.size() - limit);
    return s;
}

/// Runs argv[0] with stdout and stderr captured in `log`; returns the exit status.
int run_process(const std::vector<std::string>& args, const fs::path& log) {
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    pid_t pid = 0;
    const int rc = posix_spawn(&pid, args[0].c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) throw BackendUnavailableError("cannot start '" + args[0] + "': " + std::strerror(rc));
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR) throw BackendError("waitpid failed for '" + args[0] + "'");
    }
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

}  // namespace

bool executable_available(const std::string& path) { return !resolve_executable(path).empty(); }

EncodedPlane encode_plane_hevc(const IndexPlane& plane, int qp, const std::string& encoder_path) {
    const std::string exe = resolve_executable(encoder_path);
    if (exe.empty())
        throw BackendUnavailableError("HEVC encoder '" + encoder_path + "' not found or not executable");

    ScratchDir dir;
    const auto yuv = dir / "plane.yuv";
    const auto bin = dir / "plane.bin";
    const auto log = dir / "encoder.log";
    {
        ByteWriter raw;
        for (auto v : plane.data) raw.u16(v);
        write_file(yuv.string(), raw.data());
    }
    const std::vector<std::string> args = {
        exe,
        "-i", yuv.string(),
        "-b", bin.string(),
        "-wdt", std::to_string(plane.width),
        "-hgt", std::to_string(plane.height),
        "-fr", "1",
        "-f", "1",
        "-q", std::to_string(qp),
        "--InputBitDepth=14",
        "--InternalBitDepth=14",
        "--OutputBitDepth=14",
        "--InputChromaFormat=400",
        "--ChromaFormatIDC=400",
        "--Profile=main-RExt",
        "--IntraPeriod=1",
        "--GOPSize=1",
        "--ConformanceWindowMode=1",
    };
    const int status = run_process(args, log);
    if (status != 0) throw ProcessError("HEVC encoder failed", status, slurp_text(log));
    if (!fs::exists(bin)) throw ProcessError("HEVC encoder produced no bitstream", status, slurp_text(log));

    EncodedPlane ep;
    ep.backend = Backend::hevc;
    ep.width = plane.width;
    ep.height = plane.height;
    ep.qp_used = qp;
    ep.payload = read_file(bin.string());
    return ep;
}

IndexPlane decode_hevc_plane(const EncodedPlane& ep, const std::string& decoder_path) {
    const std::string exe = resolve_executable(decoder_path);
    if (exe.empty())
        throw BackendUnavailableError("HEVC decoder '" + decoder_path + "' not found or not executable");

    ScratchDir dir;
    const auto bin = dir / "plane.bin";
    const auto yuv = dir / "plane.yuv";
    const auto log = dir / "decoder.log";
    write_file(bin.string(), ep.payload);
    const std::vector<std::string> args = {exe, "-b", bin.string(), "-o", yuv.string(), "-d", "14"};
    const int status = run_process(args, log);
    if (status != 0) throw ProcessError("HEVC decoder failed", status, slurp_text(log));

    const auto raw = fs::exists(yuv) ? read_file(yuv.string()) : std::vector<std::uint8_t>{};
    const std::size_t n = static_cast<std::size_t>(ep.width) * ep.height;
    if (raw.size() < 2 * n)
        throw ProcessError("HEVC decoder output has " + std::to_string(raw.size()) + " bytes, expected " +
                               std::to_string(2 * n),
                           status, slurp_text(log));
    IndexPlane plane(ep.width, ep.height);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned v = raw[2 * i] | (raw[2 * i + 1] << 8);
        plane.data[i] = static_cast<std::uint16_t>(std::min<unsigned>(v, kMaxIndex));
    }
    return plane;
}

}  // namespace gsc
