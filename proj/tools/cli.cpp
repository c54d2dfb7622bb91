#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <omp.h>

#include "polyscat/errors.hpp"
#include "polyscat/helmholtz.hpp"
#include "polyscat/io.hpp"
#include "polyscat/propagation.hpp"
#include "polyscat/stability.hpp"

namespace polyscat::cli {

namespace fs = std::filesystem;
using Json = io::Json;

namespace {

struct Common {
    std::string scene;
    std::string config;
    std::string out = ".";
    std::uint64_t seed = 1;
    int threads = 0;
    bool verbose = false;
};

/// Wall clock and manifest bookkeeping shared by all commands.
class Run {
public:
    Run(const std::string &command, const Common &c, std::ostream &err) : c_(c), err_(err) {
        manifest_.tool_version = version_string();
        manifest_.command = command;
        manifest_.seeds = {c.seed};
        const std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        manifest_.started = buf;
        start_ = std::chrono::steady_clock::now();
    }

    RunManifest &manifest() { return manifest_; }

    void progress(const std::string &msg) const {
        if (c_.verbose) err_ << "[polyscat] " << msg << '\n';
    }
    void stage(const std::string &name, const std::string &status) {
        manifest_.stages.push_back({name, status});
        progress(name + ": " + status);
    }

    Scatterer2D scene() {
        Scatterer2D s = io::load_scene(c_.scene);
        manifest_.scene_hashes.push_back(io::hex64(io::fnv1a(io::scene_to_json(s).dump())));
        return s;
    }
    ScatterConfig config() {
        ScatterConfig cfg = c_.config.empty() ? ScatterConfig{} : io::load_config(c_.config);
        if (c_.config.empty()) cfg.validate();
        manifest_.config_hash = io::hex64(io::fnv1a(io::config_to_json(cfg).dump()));
        return cfg;
    }

    fs::path out_dir() const {
        std::error_code ec;
        fs::create_directories(c_.out, ec);
        if (!fs::is_directory(c_.out)) throw IoError("cannot create output directory " + c_.out);
        return c_.out;
    }

    /// Written last so that its presence marks a completed run.
    void finish(const fs::path &dir) {
        manifest_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        io::atomic_write(dir / "manifest.json", manifest_.to_json(true).dump(2) + "\n");
    }

private:
    const Common &c_;
    std::ostream &err_;
    RunManifest manifest_;
    std::chrono::steady_clock::time_point start_;
};

void add_common(CLI::App *cmd, Common &c, bool scene_required) {
    auto *s = cmd->add_option("--scene", c.scene, "scene JSON file");
    if (scene_required) s->required();
    cmd->add_option("--config", c.config, "configuration JSON file");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--seed", c.seed, "seed for all stochastic choices");
    cmd->add_option("--threads", c.threads, "worker threads (default: POLYSCAT_THREADS or all cores)");
    cmd->add_flag("--verbose", c.verbose, "progress lines on standard error");
}

void set_threads(int requested) {
    int n = requested;
    if (n <= 0)
        if (const char *env = std::getenv("POLYSCAT_THREADS")) n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
}

Vec2 parse_point(const std::vector<double> &v, const char *field) {
    if (v.size() != 2) throw ValidationError(std::string(field) + ": expected x,y");
    return {v[0], v[1]};
}

Json json_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

// ---- commands ------------------------------------------------------------------

int cmd_solve(const Common &c, std::size_t direction, std::ostream &err) {
    Run run("solve", c, err);
    const Scatterer2D s = run.scene();
    const ScatterConfig cfg = run.config();
    run.progress("solving direction " + std::to_string(direction) + " with " + std::to_string(cfg.quad_order) +
                 " nodes per polygon");
    const WaveField u = solve(s, cfg, direction);
    run.stage("solve", "ok");
    const FarFieldPattern f = far_field(u, std::size_t(cfg.n_far));
    const OpticalTheorem ot = optical_theorem_defect(u);
    Json diag{{"k", cfg.k},
              {"direction_index", direction},
              {"direction", {u.incident().direction.x, u.incident().direction.y}},
              {"bc", to_string(s.bc())},
              {"representation", u.representation().kind()},
              {"unknowns", u.diagnostics().unknowns},
              {"chief_rows", u.diagnostics().chief_rows},
              {"condition_estimate", u.diagnostics().condition_estimate},
              {"far_field_l2", f.l2_norm()},
              {"optical_theorem", {{"defect", ot.defect}, {"extinction", ot.extinction},
                                   {"scattered", ot.scattered}, {"degenerate", ot.degenerate}}}};
    if (!s.empty()) {
        const BoundaryResidual br = boundary_residual(u);
        diag["boundary_residual"] = {{"max", br.max_residual}, {"relative", br.relative}, {"samples", br.samples}};
        const FieldBounds fb = field_bounds(u);
        diag["field_bounds"] = {{"E", fb.E}, {"E1", fb.E1}};
    }
    run.stage("diagnostics", "ok");
    diag["manifest_hash"] = run.manifest().hash();
    const fs::path dir = run.out_dir();
    io::write_far_field_csv(dir / "far_field.csv", f);
    io::atomic_write(dir / "diagnostics.json", diag.dump(2) + "\n");
    run.finish(dir);
    return ok;
}

int cmd_chain(const Common &c, const std::vector<double> &x0v, const std::vector<double> &x1v, std::ostream &err) {
    Run run("chain", c, err);
    const Scatterer2D s = run.scene();
    const ScatterConfig cfg = run.config();
    const Vec2 x0 = x0v.empty() ? cfg.x0 : parse_point(x0v, "--x0");
    const Vec2 x1 = parse_point(x1v, "--x1");
    const double dist = s.empty() ? std::numeric_limits<double>::infinity() : s.distance(x1);
    const double d = std::isfinite(dist) ? dist : 1.0;
    const ChainBuild b = build_chain(s, x0, x1, d, cfg.chain, cfg.effective_rho0());
    const ChainCheck check = chain_is_regular(b.chain, s);
    run.stage("build_chain", std::to_string(b.chain.size()) + " balls");
    Json summary{{"balls", b.chain.size()},
                 {"corridor_balls", b.corridor_balls},
                 {"tail_balls", b.tail_balls},
                 {"rho0", b.rho0},
                 {"d", json_or_null(dist)},
                 {"s0", b.s0},
                 {"cone", b.cone},
                 {"b", b.b},
                 {"kappa", b.kappa},
                 {"kappa_prime", b.kappa_prime},
                 {"regular", check.regular},
                 {"constants", {{"a1", cfg.chain.a1}, {"a2", cfg.chain.a2}, {"a3", cfg.chain.a3}, {"a4", cfg.chain.a4}}},
                 {"manifest_hash", run.manifest().hash()}};
    const fs::path dir = run.out_dir();
    io::atomic_write(dir / "chain.json", chain_to_json(b.chain).dump(1) + "\n");
    io::atomic_write(dir / "chain_summary.json", summary.dump(2) + "\n");
    run.finish(dir);
    return ok;
}

/// Sweep files: {"mode", "magnitudes", "seeds": [..] or count, "config": {...}}.
struct SweepPlan {
    PerturbMode mode = PerturbMode::vertex_jitter;
    std::vector<double> magnitudes;
    std::vector<std::uint64_t> seeds;
    ScatterConfig cfg;
};

SweepPlan load_sweep(const std::string &path, std::uint64_t master_seed) {
    if (path.empty()) throw ValidationError("sweep: --config is required");
    const Json j = io::parse_json(io::read_text(path), "sweep");
    if (!j.is_object()) throw ValidationError("sweep: expected an object");
    for (const auto &[key, value] : j.items())
        if (key != "mode" && key != "magnitudes" && key != "seeds" && key != "config")
            throw ValidationError("sweep." + key + ": unknown field");
    SweepPlan s;
    if (j.contains("mode")) {
        if (!j.at("mode").is_string()) throw ValidationError("sweep.mode: expected a string");
        try {
            s.mode = perturb_mode_from_string(j.at("mode").get<std::string>());
        } catch (const Error &e) {
            throw ValidationError(std::string("sweep.mode: ") + e.what());
        }
    }
    if (!j.contains("magnitudes") || !j.at("magnitudes").is_array())
        throw ValidationError("sweep.magnitudes: expected an array of numbers");
    for (const Json &m : j.at("magnitudes")) {
        if (!m.is_number()) throw ValidationError("sweep.magnitudes: expected an array of numbers");
        s.magnitudes.push_back(m.get<double>());
    }
    const Json seeds = j.value("seeds", Json(1));
    if (seeds.is_number_unsigned() || seeds.is_number_integer()) {
        // A count: derive the stream seeds from --seed.
        std::mt19937_64 rng(master_seed);
        for (long i = 0; i < seeds.get<long>(); ++i) s.seeds.push_back(rng() % 1000000007ull);
    } else if (seeds.is_array()) {
        for (const Json &v : seeds) {
            if (!v.is_number_unsigned() && !v.is_number_integer())
                throw ValidationError("sweep.seeds: expected integers");
            s.seeds.push_back(v.get<std::uint64_t>());
        }
    } else {
        throw ValidationError("sweep.seeds: expected a count or an array of integers");
    }
    s.cfg = j.contains("config") ? io::config_from_json(j.at("config")) : ScatterConfig{};
    return s;
}

int cmd_sweep(const Common &c, bool svg, std::ostream &err) {
    Run run("sweep", c, err);
    const Scatterer2D base = run.scene();
    const SweepPlan plan = load_sweep(c.config, c.seed);
    run.manifest().config_hash = io::hex64(io::fnv1a(io::config_to_json(plan.cfg).dump()));
    run.manifest().seeds.insert(run.manifest().seeds.end(), plan.seeds.begin(), plan.seeds.end());
    try {
        plan.cfg.validate();
    } catch (const ParameterError &e) {
        throw ValidationError(e.what());
    }
    std::size_t done = 0;
    const auto records = sweep(base, plan.magnitudes, plan.mode, plan.seeds, plan.cfg, [&](const StabilityRecord &r) {
        ++done;
        run.progress("record " + std::to_string(done) + ": " + r.pair_id + (r.failed ? " failed: " + r.reason : ""));
    });
    run.stage("sweep", std::to_string(records.size()) + " records");
    std::optional<ModulusFit> fit;
    try {
        fit = fit_modulus(records);
        run.stage("fit_modulus", "ok");
    } catch (const FitError &e) {
        run.stage("fit_modulus", std::string("skipped: ") + e.what());
    }
    const std::string hash = run.manifest().hash();
    const fs::path dir = run.out_dir();
    io::atomic_write(dir / "records.csv", records_csv(records, hash));
    io::atomic_write(dir / "report.json", report_json(records, fit ? &*fit : nullptr, run.manifest()).dump(1) + "\n");
    if (svg) io::atomic_write(dir / "modulus.svg", modulus_svg(records, fit ? &*fit : nullptr));
    run.finish(dir);
    return ok;
}

int cmd_audit(const Common &c, const std::string &records_path, std::optional<double> C1, std::optional<double> C2,
              std::ostream &err) {
    Run run("audit", c, err);
    const std::string text = io::read_text(records_path);
    std::vector<StabilityRecord> records;
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
        const Json j = io::parse_json(text, "records");
        records = j.is_array() ? [&] {
            std::vector<StabilityRecord> rs;
            for (const Json &r : j) rs.push_back(record_from_json(r));
            return rs;
        }()
                               : records_from_report(j);
    }
    run.manifest().scene_hashes.push_back(io::hex64(io::fnv1a(text)));
    const DistanceAudit a = audit_distances(records, C1, C2);
    run.stage("audit", std::to_string(a.violations.size()) + " violations");
    Json out = audit_to_json(a);
    out["manifest_hash"] = run.manifest().hash();
    const fs::path dir = run.out_dir();
    io::atomic_write(dir / "audit.json", out.dump(2) + "\n");
    run.finish(dir);
    return ok;
}

int cmd_symmetry(const Common &c, std::ostream &err) {
    Run run("symmetry", c, err);
    const Scatterer2D s = run.scene();
    const ScatterConfig cfg = run.config();
    const SymmetryReport rep = symmetry_experiment(s, cfg);
    run.stage("symmetry", "ok");
    Json out = symmetry_to_json(rep);
    out["manifest_hash"] = run.manifest().hash();
    const fs::path dir = run.out_dir();
    io::atomic_write(dir / "symmetry.json", out.dump(2) + "\n");
    run.finish(dir);
    return ok;
}

int exit_code(const Error &e) {
    switch (e.category()) {
    case Error::Category::io: return io;
    case Error::Category::solver:
    case Error::Category::routing:
    case Error::Category::generation:
    case Error::Category::fit: return solver;
    default: return validation;
    }
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Polygonal obstacle scattering and stability experiments", "polyscat"};
    app.require_subcommand(0, 1);
    bool version = false;
    app.add_flag("--version", version, "print the version and exit");

    Common common;
    std::size_t direction = 0;
    std::vector<double> x0, x1;
    bool svg = false;
    std::string records_path;
    std::optional<double> C1, C2;

    auto *solve_cmd = app.add_subcommand("solve", "solve one scattering problem; far-field CSV and diagnostics");
    add_common(solve_cmd, common, true);
    solve_cmd->add_option("--direction", direction, "incident direction index");

    auto *chain_cmd = app.add_subcommand("chain", "build a regular chain of balls from x0 to x1");
    add_common(chain_cmd, common, true);
    chain_cmd->add_option("--x0", x0, "start point x,y (default: config x0)")->delimiter(',')->expected(2);
    chain_cmd->add_option("--x1", x1, "target point x,y")->delimiter(',')->expected(2)->required();

    auto *sweep_cmd = app.add_subcommand("sweep", "perturbation sweep with modulus fit");
    add_common(sweep_cmd, common, true);
    sweep_cmd->add_flag("--svg", svg, "also write a log-log plot");

    auto *audit_cmd = app.add_subcommand("audit", "audit distance relations over a record file");
    add_common(audit_cmd, common, false);
    audit_cmd->add_option("--records", records_path, "report JSON or record array")->required();
    audit_cmd->add_option("--C1", C1, "fixed lower constant (fitted when absent)");
    audit_cmd->add_option("--C2", C2, "fixed upper constant (fitted when absent)");

    auto *sym_cmd = app.add_subcommand("symmetry", "one-measurement symmetry degeneracy experiment");
    add_common(sym_cmd, common, true);

    std::vector<const char *> argv;
    for (const std::string &a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : validation;
    }
    if (version) {
        out << "polyscat " << version_string() << '\n';
        return ok;
    }
    if (app.get_subcommands().empty()) {
        out << app.help();
        return validation;
    }

    set_threads(common.threads);
    try {
        if (solve_cmd->parsed()) return cmd_solve(common, direction, err);
        if (chain_cmd->parsed()) return cmd_chain(common, x0, x1, err);
        if (sweep_cmd->parsed()) return cmd_sweep(common, svg, err);
        if (audit_cmd->parsed()) return cmd_audit(common, records_path, C1, C2, err);
        if (sym_cmd->parsed()) return cmd_symmetry(common, err);
    } catch (const Error &e) {
        err << "polyscat: " << e.what() << '\n';
        return exit_code(e);
    }
    return validation;
}

}  // namespace polyscat::cli
