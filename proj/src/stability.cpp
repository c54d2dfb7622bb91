#include "polyscat/stability.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

#include "parallel.hpp"
#include "polyscat/errors.hpp"
#include "polyscat/io.hpp"
#include "polyscat/propagation.hpp"

#ifndef POLYSCAT_VERSION
#define POLYSCAT_VERSION "0.0.0"
#endif

namespace polyscat {

using Json = nlohmann::json;

namespace {

const double eps_cap = 1.0 / (2.0 * std::exp(1.0));

}  // namespace

double StabilityRecord::eps_max() const {
    return eps.empty() ? 0.0 : *std::max_element(eps.begin(), eps.end());
}

bool StabilityRecord::above_cap() const { return eps_max() >= eps_cap; }

// ---- pairs and sweeps ------------------------------------------------------------

BaseSolution solve_base(const Scatterer2D &s, const ScatterConfig &cfg, kernels::Execution exec) {
    BaseSolution b{s, {}, {}};
    for (std::size_t j = 0; j < cfg.directions.size(); ++j) {
        b.fields.push_back(solve(s, cfg, j, exec));
        b.far.push_back(far_field(b.fields.back(), std::size_t(cfg.n_far)));
    }
    return b;
}

StabilityRecord run_pair(const BaseSolution &base, const Scatterer2D &sp, const ScatterConfig &cfg,
                         const std::string &pair_id, kernels::Execution exec) {
    StabilityRecord r;
    r.pair_id = pair_id;
    try {
        r.h = validate_scatterer(sp).h_actual;
        r.distances = distance_triple(base.scatterer, sp, distance_resolution);
        std::vector<WaveField> fields;
        for (std::size_t j = 0; j < cfg.directions.size(); ++j) {
            const WaveField &u = base.fields.at(j);
            fields.push_back(solve(sp, cfg, j, exec));
            const WaveField &v = fields.back();
            r.eps.push_back(near_field_error(u, v, cfg.x0, cfg.rho_tilde).value);
            r.eps1.push_back(annulus_error(u, v, cfg).value);
            r.eps0.push_back(far_field_error(base.far.at(j), far_field(v, std::size_t(cfg.n_far))));
            r.condition.push_back(u.diagnostics().condition_estimate);
            r.condition.push_back(v.diagnostics().condition_estimate);
        }
        // Flatness of the probed field along the lines carrying the reference cells.
        for (const Cell &c : base.scatterer.cells()) {
            const HyperplaneLine line = HyperplaneLine::through(c.segment.a, c.normal);
            for (const WaveField &v : fields) r.A.push_back(flatness_indicator(v, line, cfg).A);
        }
    } catch (const Error &e) {
        r.failed = true;
        r.reason = e.what();
    }
    return r;
}

StabilityRecord run_pair(const Scatterer2D &s, const Scatterer2D &sp, const ScatterConfig &cfg,
                         const std::string &pair_id, kernels::Execution exec) {
    try {
        return run_pair(solve_base(s, cfg, exec), sp, cfg, pair_id, exec);
    } catch (const Error &e) {
        StabilityRecord r;
        r.pair_id = pair_id;
        r.failed = true;
        r.reason = std::string("reference solve: ") + e.what();
        return r;
    }
}

std::vector<StabilityRecord> sweep(const Scatterer2D &base, std::span<const double> magnitudes, PerturbMode mode,
                                   std::span<const std::uint64_t> seeds, const ScatterConfig &cfg,
                                   const std::function<void(const StabilityRecord &)> &emit,
                                   kernels::Execution exec) {
    for (std::size_t i = 0; i < magnitudes.size(); ++i) {
        if (!(magnitudes[i] > 0.0)) throw ParameterError("sweep: magnitudes must be positive");
        if (i > 0 && !(magnitudes[i] < magnitudes[i - 1]))
            throw ParameterError("sweep: magnitudes must be strictly decreasing");
    }
    std::vector<StabilityRecord> out(magnitudes.size() * seeds.size());
    if (out.empty()) return out;

    std::optional<BaseSolution> ref;
    std::string ref_failure;
    try {
        ref = solve_base(base, cfg, exec);
    } catch (const Error &e) {
        ref_failure = std::string("reference solve: ") + e.what();
    }

    std::mutex emit_lock;
    // Records run concurrently; each solve inside a record is then serial.
    const auto inner = exec == kernels::Execution::parallel ? kernels::Execution::serial : exec;
    detail::for_each_index(out.size(), exec, [&](std::size_t i) {
        const double m = magnitudes[i / seeds.size()];
        const std::uint64_t seed = seeds[i % seeds.size()];
        std::ostringstream id;
        id << to_string(mode) << "-m" << io::format_double(m) << "-s" << seed;
        StabilityRecord r;
        if (!ref) {
            r.pair_id = id.str();
            r.failed = true;
            r.reason = ref_failure;
        } else {
            try {
                r = run_pair(*ref, perturb(base, m, mode, seed), cfg, id.str(), inner);
            } catch (const Error &e) {
                r.pair_id = id.str();
                r.failed = true;
                r.reason = e.what();
            }
        }
        r.mode = to_string(mode);
        r.magnitude = m;
        r.seed = seed;
        out[i] = std::move(r);
        if (emit) {
            std::lock_guard lock(emit_lock);
            emit(out[i]);
        }
    });
    return out;
}

// ---- modulus fits --------------------------------------------------------------

namespace {

/// Majorant d <= A exp(C g(eps)) with C minimising the mean log slack.
MajorantFit fit_majorant(std::span<const double> log_d, std::span<const double> g) {
    const std::size_t n = log_d.size();
    const double mean_g = std::accumulate(g.begin(), g.end(), 0.0) / double(n);
    const double mean_ld = std::accumulate(log_d.begin(), log_d.end(), 0.0) / double(n);
    auto log_A = [&](double C) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, log_d[i] - C * g[i]);
        return m;
    };
    // Mean slack is convex in C (a max of affine functions plus an affine term).
    auto mean_slack = [&](double C) { return log_A(C) + C * mean_g - mean_ld; };

    constexpr int grid = 400;
    const double lo = std::log(0.01), hi = std::log(10.0);
    auto at = [&](int i) { return std::exp(lo + (hi - lo) * i / grid); };
    int best = 0;
    for (int i = 1; i <= grid; ++i)
        if (mean_slack(at(i)) < mean_slack(at(best))) best = i;
    double a = at(std::max(0, best - 1)), b = at(std::min(grid, best + 1));
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200 && b - a > 1e-14 * b; ++it) {
        const double c = b - phi * (b - a), d = a + phi * (b - a);
        if (mean_slack(c) <= mean_slack(d)) b = d;
        else a = c;
    }
    MajorantFit f;
    f.C = 0.5 * (a + b);
    if (mean_slack(at(best)) < mean_slack(f.C)) f.C = at(best);
    const double lA = log_A(f.C);
    f.A = std::exp(lA);
    for (std::size_t i = 0; i < n; ++i) f.slack.push_back(lA + f.C * g[i] - log_d[i]);
    const auto [mn, mx] = std::minmax_element(f.slack.begin(), f.slack.end());
    f.spread = *mx - *mn;
    f.mean_slack = mean_slack(f.C);
    return f;
}

}  // namespace

double ModulusFit::bound(double e) const { return eta.A * std::pow(polyscat::eta(e), eta.C); }

ModulusFit fit_modulus_points(std::span<const ModulusPoint> points) {
    ModulusFit fit;
    std::vector<double> log_d, g_eta, g_pow;
    for (const ModulusPoint &p : points) {
        if (!(p.d > 0.0 && p.eps > 0.0 && p.eps < eps_cap)) continue;
        fit.d.push_back(p.d);
        fit.eps.push_back(p.eps);
        log_d.push_back(std::log(p.d));
        g_eta.push_back(log_eta_from_log(std::log(p.eps)));
        g_pow.push_back(std::log(p.eps));
    }
    if (fit.d.size() < 5)
        throw FitError("fit_modulus: need at least 5 records with d > 0 and 0 < eps < 1/(2e), got " +
                       std::to_string(fit.d.size()));
    fit.eta = fit_majorant(log_d, g_eta);
    fit.power = fit_majorant(log_d, g_pow);
    fit.preferred = fit.eta.spread <= fit.power.spread ? "eta" : "power";
    fit.violations = std::size_t(std::count_if(fit.eta.slack.begin(), fit.eta.slack.end(),
                                               [](double s) { return s < -1e-12; }));
    return fit;
}

ModulusFit fit_modulus(std::span<const StabilityRecord> records) {
    std::vector<ModulusPoint> pts;
    std::vector<std::string> ids;
    for (const StabilityRecord &r : records) {
        if (r.failed || r.eps.empty()) continue;
        const ModulusPoint p{r.distances.d, r.eps_max()};
        if (!(p.d > 0.0 && p.eps > 0.0 && p.eps < eps_cap)) continue;
        pts.push_back(p);
        ids.push_back(r.pair_id);
    }
    ModulusFit f = fit_modulus_points(pts);
    f.pair_ids = std::move(ids);
    return f;
}

// ---- distance audit ------------------------------------------------------------

DistanceAudit audit_distances(std::span<const StabilityRecord> records, std::optional<double> C1,
                              std::optional<double> C2) {
    DistanceAudit a;
    a.fitted = !C1 || !C2;
    std::vector<const StabilityRecord *> used;
    for (const StabilityRecord &r : records) {
        if (r.failed) continue;
        const DistanceTriple &t = r.distances;
        if (t.d == 0.0 && t.dhat == 0.0 && t.dtilde == 0.0) {
            ++a.degenerate;
            continue;
        }
        used.push_back(&r);
    }
    a.audited = used.size();
    const double inf = std::numeric_limits<double>::infinity();
    double c1 = inf, c2 = 0.0;
    for (const StabilityRecord *r : used) {
        const DistanceTriple &t = r->distances;
        if (t.dhat > 0.0) c1 = std::min(c1, t.dtilde / t.dhat);
        if (t.d > 0.0) c2 = std::max(c2, t.dtilde / t.d);
        else if (t.dtilde > 0.0) c2 = inf;
    }
    a.C1 = C1 ? *C1 : (c1 == inf ? 0.0 : c1);
    a.C2 = C2 ? *C2 : c2;
    for (const StabilityRecord *r : used) {
        const DistanceTriple &t = r->distances;
        const double lhs1 = a.C1 * t.dhat;
        if (lhs1 > t.dtilde * (1.0 + 1e-12)) a.violations.push_back({r->pair_id, "C1*dhat <= dtilde", lhs1, t.dtilde});
        const double rhs2 = a.C2 * t.d;
        if (t.dtilde > rhs2 * (1.0 + 1e-12) && a.C2 != inf)
            a.violations.push_back({r->pair_id, "dtilde <= C2*d", t.dtilde, rhs2});
    }
    return a;
}

// ---- symmetry --------------------------------------------------------------------

SymmetryReport symmetry_experiment(const Scatterer2D &s, const ScatterConfig &cfg, kernels::Execution exec) {
    SymmetryReport rep;
    rep.v = cfg.direction(0);
    rep.v2 = cfg.directions.size() > 1 ? cfg.direction(1) : perp(rep.v);
    rep.k = cfg.k;
    const auto lines = symmetry_lines(s, rep.v, 1e-9);
    if (lines.empty()) throw ParameterError("symmetry: the scatterer has no symmetry line parallel to the direction");
    rep.line = lines.front();
    rep.rotated = HyperplaneLine::through(rep.line.point, rotated(rep.line.normal, 5.0 * pi / 180.0));

    ScatterConfig c2 = cfg;
    c2.directions = {rep.v, rep.v2};
    const WaveField u1 = solve(s, c2, 0, exec);
    const WaveField u2 = solve(s, c2, 1, exec);
    rep.A_sym = flatness_indicator(u1, rep.line, c2).A;
    rep.A_rot = flatness_indicator(u1, rep.rotated, c2).A;
    rep.A2_sym = flatness_indicator(u2, rep.line, c2).A;
    for (const Cell &c : s.cells()) rep.cell_alignment = std::max(rep.cell_alignment, std::abs(dot(c.normal, rep.v)));
    const Vec2 dirs[] = {rep.v, rep.v2};
    rep.a0 = direction_independence(dirs).a0;
    return rep;
}

// ---- manifests and reports -------------------------------------------------------

std::string version_string() { return POLYSCAT_VERSION; }

Json RunManifest::to_json(bool with_clock) const {
    Json stages_j = Json::array();
    for (const StageStatus &s : stages) stages_j.push_back({{"name", s.name}, {"status", s.status}});
    Json j{{"tool_version", tool_version}, {"command", command},       {"config_hash", config_hash},
           {"scene_hashes", scene_hashes}, {"seeds", seeds},           {"stages", std::move(stages_j)}};
    if (with_clock) {
        j["started"] = started;
        j["wall_seconds"] = wall_seconds;
    }
    return j;
}

std::string RunManifest::hash() const { return io::hex64(io::fnv1a(to_json(false).dump())); }

namespace {

Json doubles(const std::vector<double> &v) { return Json(v); }

std::vector<double> doubles_from(const Json &j, const char *key) {
    if (!j.contains(key)) return {};
    return j.at(key).get<std::vector<double>>();
}

}  // namespace

Json record_to_json(const StabilityRecord &r) {
    const DistanceTriple &t = r.distances;
    return Json{{"pair_id", r.pair_id},
                {"mode", r.mode},
                {"magnitude", r.magnitude},
                {"seed", r.seed},
                {"distances", {{"d", t.d}, {"dhat", t.dhat}, {"dtilde", t.dtilde}, {"sampling_error", t.sampling_error}}},
                {"h", r.h},
                {"eps", doubles(r.eps)},
                {"eps1", doubles(r.eps1)},
                {"eps0", doubles(r.eps0)},
                {"A", doubles(r.A)},
                {"condition", doubles(r.condition)},
                {"failed", r.failed},
                {"reason", r.reason}};
}

StabilityRecord record_from_json(const Json &j) {
    try {
        StabilityRecord r;
        r.pair_id = j.at("pair_id").get<std::string>();
        r.mode = j.value("mode", std::string());
        r.magnitude = j.value("magnitude", 0.0);
        r.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("distances")) {
            const Json &t = j.at("distances");
            r.distances.d = t.at("d").get<double>();
            r.distances.dhat = t.at("dhat").get<double>();
            r.distances.dtilde = t.at("dtilde").get<double>();
            r.distances.sampling_error = t.value("sampling_error", 0.0);
        }
        r.h = j.value("h", 0.0);
        r.eps = doubles_from(j, "eps");
        r.eps1 = doubles_from(j, "eps1");
        r.eps0 = doubles_from(j, "eps0");
        r.A = doubles_from(j, "A");
        r.condition = doubles_from(j, "condition");
        r.failed = j.value("failed", false);
        r.reason = j.value("reason", std::string());
        return r;
    } catch (const Json::exception &e) {
        throw ValidationError(std::string("record: ") + e.what());
    }
}

Json fit_to_json(const ModulusFit &f) {
    auto law = [](const MajorantFit &m) {
        return Json{{"A", m.A}, {"C", m.C}, {"spread", m.spread}, {"mean_slack", m.mean_slack}, {"slack", m.slack}};
    };
    return Json{{"eta", law(f.eta)},    {"power", law(f.power)}, {"method", f.method},
                {"preferred", f.preferred}, {"pair_ids", f.pair_ids}, {"d", f.d},
                {"eps", f.eps},         {"violations", f.violations}};
}

Json audit_to_json(const DistanceAudit &a) {
    Json v = Json::array();
    for (const DistanceViolation &x : a.violations)
        v.push_back({{"pair_id", x.pair_id}, {"inequality", x.inequality}, {"lhs", x.lhs}, {"rhs", x.rhs}});
    auto finite_or_null = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
    return Json{{"C1", finite_or_null(a.C1)}, {"C2", finite_or_null(a.C2)}, {"fitted", a.fitted},
                {"audited", a.audited},       {"degenerate", a.degenerate}, {"violations", std::move(v)}};
}

Json symmetry_to_json(const SymmetryReport &r) {
    auto line = [](const HyperplaneLine &l) {
        return Json{{"point", {l.point.x, l.point.y}}, {"normal", {l.normal.x, l.normal.y}}};
    };
    return Json{{"line", line(r.line)},
                {"rotated", line(r.rotated)},
                {"v", {r.v.x, r.v.y}},
                {"v2", {r.v2.x, r.v2.y}},
                {"k", r.k},
                {"A_sym", r.A_sym},
                {"A_rot", r.A_rot},
                {"A2_sym", r.A2_sym},
                {"cell_alignment", r.cell_alignment},
                {"a0", r.a0}};
}

Json report_json(std::span<const StabilityRecord> records, const ModulusFit *fit, const RunManifest &m) {
    Json recs = Json::array();
    for (const StabilityRecord &r : records) recs.push_back(record_to_json(r));
    return Json{{"schema", "polyscat-report/1"},
                {"manifest", m.to_json(false)},
                {"manifest_hash", m.hash()},
                {"records", std::move(recs)},
                {"fit", fit ? fit_to_json(*fit) : Json(nullptr)}};
}

std::vector<StabilityRecord> records_from_report(const Json &j) {
    if (!j.is_object() || j.value("schema", std::string()) != "polyscat-report/1")
        throw ValidationError("report.schema: expected \"polyscat-report/1\"");
    if (!j.contains("records") || !j.at("records").is_array())
        throw ValidationError("report.records: expected an array");
    std::vector<StabilityRecord> out;
    for (const Json &r : j.at("records")) out.push_back(record_from_json(r));
    return out;
}

namespace {

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

}  // namespace

std::string records_csv(std::span<const StabilityRecord> records, const std::string &manifest_hash) {
    std::size_t ndir = 0;
    for (const StabilityRecord &r : records) ndir = std::max({ndir, r.eps.size(), r.eps1.size(), r.eps0.size()});
    std::string out = "# manifest=" + manifest_hash + "\n";
    out += "pair_id,mode,magnitude,seed,d,dhat,dtilde";
    for (const char *name : {"eps", "eps1", "eps0"})
        for (std::size_t j = 0; j < ndir; ++j) out += std::string(",") + name + "_" + std::to_string(j);
    out += ",A_values,failed,reason\n";
    auto column = [&](const std::vector<double> &v) {
        std::string s;
        for (std::size_t j = 0; j < ndir; ++j) s += ',' + (j < v.size() ? io::format_double(v[j]) : std::string());
        return s;
    };
    for (const StabilityRecord &r : records) {
        out += csv_field(r.pair_id) + ',' + csv_field(r.mode) + ',' + io::format_double(r.magnitude) + ',' +
               std::to_string(r.seed) + ',' + io::format_double(r.distances.d) + ',' +
               io::format_double(r.distances.dhat) + ',' + io::format_double(r.distances.dtilde);
        out += column(r.eps) + column(r.eps1) + column(r.eps0);
        std::string a;
        for (std::size_t i = 0; i < r.A.size(); ++i) a += (i ? ";" : "") + io::format_double(r.A[i]);
        out += ',' + a + ',' + (r.failed ? "true" : "false") + ',' + csv_field(r.reason) + '\n';
    }
    return out;
}

std::string modulus_svg(std::span<const StabilityRecord> records, const ModulusFit *fit) {
    std::vector<std::pair<double, double>> pts;  // (log10 eps, log10 d)
    for (const StabilityRecord &r : records)
        if (!r.failed && r.eps_max() > 0.0 && r.distances.d > 0.0)
            pts.emplace_back(std::log10(r.eps_max()), std::log10(r.distances.d));
    double x0 = -8, x1 = 0, y0 = -4, y1 = 0;
    if (!pts.empty()) {
        x0 = y0 = std::numeric_limits<double>::infinity();
        x1 = y1 = -x0;
        for (auto [x, y] : pts) {
            x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
        }
        x0 = std::floor(x0 - 0.1), x1 = std::ceil(x1 + 0.1), y0 = std::floor(y0 - 0.1), y1 = std::ceil(y1 + 0.1);
    }
    constexpr double W = 640, H = 480, M = 60;
    auto sx = [&](double x) { return M + (W - 2 * M) * (x - x0) / (x1 - x0); };
    auto sy = [&](double y) { return H - M - (H - 2 * M) * (y - y0) / (y1 - y0); };
    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect x=\"" << M << "\" y=\"" << M << "\" width=\"" << W - 2 * M << "\" height=\"" << H - 2 * M
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">log10 eps</text>\n";
    os << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2
       << ")\" text-anchor=\"middle\">log10 d</text>\n";
    for (double x = x0; x <= x1; x += 1.0)
        os << "<text x=\"" << sx(x) << "\" y=\"" << H - M + 18 << "\" text-anchor=\"middle\" font-size=\"11\">" << x
           << "</text>\n";
    for (double y = y0; y <= y1; y += 1.0)
        os << "<text x=\"" << M - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << y
           << "</text>\n";
    for (auto [x, y] : pts) os << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"steelblue\"/>\n";
    if (fit) {
        os << "<polyline fill=\"none\" stroke=\"firebrick\" points=\"";
        for (int i = 0; i <= 200; ++i) {
            const double lx = x0 + (x1 - x0) * i / 200.0;
            const double e = std::pow(10.0, lx);
            if (!(e < eps_cap)) continue;
            const double ly = std::log10(fit->bound(e));
            if (ly < y0 || ly > y1) continue;
            os << sx(lx) << ',' << sy(ly) << ' ';
        }
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace polyscat
