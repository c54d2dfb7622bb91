#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "polyscat/io.hpp"
#include "polyscat/propagation.hpp"
#include "polyscat/stability.hpp"
#include "support.hpp"

using namespace polyscat;
namespace fs = std::filesystem;

namespace {

const fs::path data_dir = POLYSCAT_DATA_DIR;

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "polyscat");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string &s) { return std::size_t(std::count(s.begin(), s.end(), '\n')); }

void write(const fs::path &p, const std::string &text) { io::atomic_write(p, text); }

const char *small_sweep = R"({
  "mode": "bump",
  "magnitudes": [0.1, 0.05, 0.025],
  "seeds": [1, 2, 3],
  "config": {"directions": [[1, 0], [0, 1]], "quad_order": 128, "n_far": 64}
})";

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("--version") {
        const Result r = run({"--version"});
        CHECK(r.code == 0);
        CHECK(r.out == "polyscat " + version_string() + "\n");
    }

    TEST_CASE("usage errors exit 2") {
        CHECK(run({}).code == cli::validation);
        CHECK(run({"frobnicate"}).code == cli::validation);
        CHECK(run({"solve", "--direction", "x"}).code == cli::validation);
    }

    TEST_CASE("solve writes the far field and diagnostics") {
        const test::TempDir tmp("cli-solve");
        const Result r = run({"solve", "--scene", (data_dir / "square.json").string(), "--config",
                              (data_dir / "config.json").string(), "--out", tmp.path().string(), "--direction", "1"});
        REQUIRE(r.code == 0);
        const ScatterConfig cfg = io::load_config(data_dir / "config.json");
        CHECK(line_count(io::read_text(tmp.path() / "far_field.csv")) == std::size_t(cfg.n_far) + 1);
        const auto diag = nlohmann::json::parse(io::read_text(tmp.path() / "diagnostics.json"));
        CHECK(diag.contains("manifest_hash"));
        const auto manifest = nlohmann::json::parse(io::read_text(tmp.path() / "manifest.json"));
        CHECK(manifest.contains("wall_seconds"));
    }

    TEST_CASE("malformed or invalid input exits 2 and names the field") {
        const test::TempDir tmp("cli-bad");
        write(tmp.path() / "broken.json", "{\"polygons\": [[[0, 0], [1, 0]");
        Result r = run({"solve", "--scene", (tmp.path() / "broken.json").string(), "--out", tmp.path().string()});
        CHECK(r.code == cli::validation);
        CHECK(r.err.find("malformed JSON") != std::string::npos);

        write(tmp.path() / "short.json", R"({"polygons": [[[0, 0], [1, 0]]]})");
        r = run({"solve", "--scene", (tmp.path() / "short.json").string(), "--out", tmp.path().string()});
        CHECK(r.code == cli::validation);
        CHECK(r.err.find("scene.polygons[0]") != std::string::npos);
        // Nothing was written next to the inputs.
        CHECK_FALSE(fs::exists(tmp.path() / "far_field.csv"));
        CHECK_FALSE(fs::exists(tmp.path() / "manifest.json"));
    }

    TEST_CASE("I/O failures exit 4") {
        CHECK(run({"solve", "--scene", "/nonexistent/scene.json"}).code == cli::io);
        const Result r = run({"solve", "--scene", (data_dir / "square.json").string(), "--config",
                              (data_dir / "config.json").string(), "--out", "/proc/polyscat-nope/x"});
        CHECK(r.code == cli::io);
    }

    TEST_CASE("chain on the empty scene validates") {
        const test::TempDir tmp("cli-chain");
        const Result r = run({"chain", "--scene", (data_dir / "empty.json").string(), "--out", tmp.path().string(),
                              "--x0=5,0", "--x1=-5,0"});
        REQUIRE(r.code == 0);
        const BallChain c = chain_from_json(nlohmann::json::parse(io::read_text(tmp.path() / "chain.json")));
        CHECK(c.size() > 1);
        CHECK(chain_is_regular(c, Scatterer2D{}));
        const auto summary = nlohmann::json::parse(io::read_text(tmp.path() / "chain_summary.json"));
        CHECK(summary["regular"] == true);
    }

    TEST_CASE("sweep, audit and determinism") {
        const test::TempDir tmp("cli-sweep");
        write(tmp.path() / "sweep.json", small_sweep);
        const fs::path a = tmp.path() / "a", b = tmp.path() / "b";
        for (const fs::path &dir : {a, b}) {
            const Result r = run({"sweep", "--scene", (data_dir / "square.json").string(), "--config",
                                  (tmp.path() / "sweep.json").string(), "--out", dir.string(), "--svg"});
            REQUIRE(r.code == 0);
        }
        const std::string csv = io::read_text(a / "records.csv");
        CHECK(line_count(csv) == 1 + 1 + 9);  // manifest comment, header, records
        const auto report = nlohmann::json::parse(io::read_text(a / "report.json"));
        CHECK(report["records"].size() == 9);
        CHECK(fs::exists(a / "modulus.svg"));
        // Data files are identical across runs; only manifest.json carries the clock.
        CHECK(io::read_text(b / "records.csv") == csv);
        CHECK(io::read_text(b / "report.json") == io::read_text(a / "report.json"));

        const Result audit = run({"audit", "--records", (a / "report.json").string(), "--out", (tmp.path() / "c").string()});
        REQUIRE(audit.code == 0);
        const auto out = nlohmann::json::parse(io::read_text(tmp.path() / "c" / "audit.json"));
        CHECK(out["violations"].empty());
    }

    TEST_CASE("audit on an empty record file") {
        const test::TempDir tmp("cli-audit");
        write(tmp.path() / "blank.json", "\n");
        write(tmp.path() / "list.json", "[]");
        for (const char *name : {"blank.json", "list.json"}) {
            const fs::path dir = tmp.path() / (std::string(name) + ".out");
            const Result r = run({"audit", "--records", (tmp.path() / name).string(), "--out", dir.string()});
            REQUIRE(r.code == 0);
            const auto out = nlohmann::json::parse(io::read_text(dir / "audit.json"));
            CHECK(out["violations"].empty());
        }
        // A scene file is not a record list.
        CHECK(run({"audit", "--records", (data_dir / "empty.json").string(), "--out", tmp.path().string()}).code ==
              cli::validation);
    }

    TEST_CASE("symmetry command") {
        const test::TempDir tmp("cli-sym");
        write(tmp.path() / "cfg.json", R"({"directions": [[1, 0]], "quad_order": 256})");
        const Result r = run({"symmetry", "--scene", (data_dir / "square.json").string(), "--config",
                              (tmp.path() / "cfg.json").string(), "--out", tmp.path().string()});
        REQUIRE(r.code == 0);
        const auto out = nlohmann::json::parse(io::read_text(tmp.path() / "symmetry.json"));
        CHECK(out["A_sym"].get<double>() < out["A_rot"].get<double>());
    }
}
