#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gsc/bytes.hpp"
#include "gsc/model.hpp"
#include "gsc/scene_io.hpp"
#include "helpers.hpp"

namespace {

struct Run {
    int status = -1;
    std::string out;
};

/// Runs the CLI with `args` (stderr discarded) and captures stdout.
Run gsc_run(const std::string& args) {
    const std::string cmd = std::string(GSC_CLI_PATH) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    const int st = ::pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("synth, encode, decode, eval, info") {
    gsc::test::TempDir dir("cli");
    const auto map = dir / "s.gsmap", tspl = dir / "s.tspl", dec = dir / "d.gsmap";
    REQUIRE(gsc_run("synth " + map + " --seed 4 --views 2 --res 32x24 --geometry sphere").status == 0);
    CHECK(gsc::load_scene(map).views.size() == 2);

    const auto enc = gsc_run("encode " + map + " " + tspl + " --qg 3 --k 4 --alpha color=512");
    REQUIRE(enc.status == 0);
    CHECK(enc.out.find("ratio") != std::string::npos);
    REQUIRE(gsc_run("decode " + tspl + " " + dec).status == 0);
    CHECK(gsc::load_scene(dec).views[0].records.size() == 32u * 24u);

    const auto ev = gsc_run("eval " + map + " " + tspl + " --render-size 40x30 --out-dir " + (dir / "png"));
    REQUIRE(ev.status == 0);
    CHECK(ev.out.find("mean") != std::string::npos);
    CHECK(ev.out.find("ratio") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "png/view0_original.png"));
    CHECK(std::filesystem::exists(dir / "png/view1_decoded.png"));

    SUBCASE("info --csv sums to the file size") {
        const auto info = gsc_run("info " + tspl + " --csv");
        REQUIRE(info.status == 0);
        const auto rows = parse_csv(info.out);
        REQUIRE(rows.size() == 8);
        CHECK(rows[0] == std::vector<std::string>{"component", "bytes"});
        std::size_t total = 0;
        std::vector<std::string> names;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            names.push_back(rows[i][0]);
            total += std::stoull(rows[i][1]);
        }
        CHECK(names == std::vector<std::string>{"header", "metadata", "position", "scale", "rotation", "color",
                                                "opacity"});
        CHECK(total == std::filesystem::file_size(tspl));
    }
    SUBCASE("info table and planes") {
        const auto info = gsc_run("info " + tspl);
        REQUIRE(info.status == 0);
        CHECK(info.out.find("total") != std::string::npos);
        const auto planes = parse_csv(gsc_run("info " + tspl + " --planes").out);
        CHECK(planes.size() == 1 + 2 * 15);
        CHECK(planes[1][1] == "depth");
        CHECK(planes[11][1] == "c1");
    }
    SUBCASE("deterministic output") {
        const auto again = dir / "again.tspl";
        REQUIRE(gsc_run("encode " + map + " " + again + " --qg 3 --k 4 --alpha color=512").status == 0);
        CHECK(gsc::read_file(again) == gsc::read_file(tspl));
    }
}

TEST_CASE("sweep csv") {
    gsc::test::TempDir dir("cli-sweep");
    const auto map = dir / "s.gsmap", csv = dir / "rd.csv";
    REQUIRE(gsc_run("synth " + map + " --res 24x24 --geometry room").status == 0);
    REQUIRE(gsc_run("sweep " + map + " --qg 0,6,12 --csv " + csv).status == 0);
    std::ifstream in(csv);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto rows = parse_csv(text);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"qg", "bytes", "psnr", "ssim"});
    CHECK(rows[1][0] == "0");
    CHECK(rows[3][0] == "12");
    CHECK(std::stoull(rows[3][1]) <= std::stoull(rows[1][1]));
}

TEST_CASE("exit codes") {
    gsc::test::TempDir dir("cli-exit");
    const auto map = dir / "s.gsmap";
    REQUIRE(gsc_run("synth " + map + " --res 8x8").status == 0);
    CHECK(gsc_run("").status == 1);
    CHECK(gsc_run("frobnicate").status == 1);
    CHECK(gsc_run("encode " + map).status == 1);
    CHECK(gsc_run("encode " + map + " " + (dir / "x.tspl") + " --alpha bogus=3").status == 1);
    CHECK(gsc_run("encode " + map + " " + (dir / "x.tspl") + " --backend zstd").status == 1);
    CHECK(gsc_run("decode " + map + " " + (dir / "y.gsmap")).status == 2);
    CHECK(gsc_run("decode " + (dir / "missing.tspl") + " " + (dir / "y.gsmap")).status == 2);
    CHECK(gsc_run("encode " + map + " " + (dir / "h.tspl") +
                  " --backend hevc --hevc-enc /nonexistent/enc --hevc-dec /nonexistent/dec")
              .status == 3);
    CHECK_FALSE(std::filesystem::exists(dir / "h.tspl"));
    CHECK(gsc_run("encode " + map + " " + (dir / "f.tspl") + " --backend hevc --hevc-enc /nonexistent/enc --hevc-fallback")
              .status == 0);
}
