// atwflow: command-line driver for the ATW flow library.
//
//   atwflow run      --scenario s.json [--output dir]
//   atwflow step     --scenario s.json [--input set.atwf]
//   atwflow distance --scenario s.json
//   atwflow check    --scenario s.json --property name
//   atwflow oracle   cross|ball|square-l1|disk-family|calibration [--t T] [--x X Y] [--emit svg|csv]
//
// Exit status: 0 success, 1 a check failed, 2 usage or input error.

#include "atwflow/checks.hpp"
#include "atwflow/io.hpp"
#include "atwflow/oracles.hpp"
#include "atwflow/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

using namespace atw;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string scenario;
    std::string output;
    int workers = 0;
    std::optional<std::uint64_t> seed;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// NaN and infinities become null so the report stays valid JSON.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string fmt(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Scenario load(const Common& c)
{
    if (c.scenario.empty()) throw UsageError("--scenario is required");
    Scenario s = parse_scenario(c.scenario);
    if (c.seed) s.seed = *c.seed;
    if (c.workers > 0) {
        s.solver.workers = c.workers;
    } else if (const char* env = std::getenv("ATWFLOW_WORKERS")) {
        char* end = nullptr;
        const long w = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || w < 1) throw UsageError("ATWFLOW_WORKERS must be a positive integer");
        s.solver.workers = int(w);
    }
    return s;
}

fs::path out_dir(const Common& c, const Scenario& s)
{
    fs::path p = !c.output.empty() ? fs::path(c.output) : !s.output.empty() ? fs::path(s.output) : fs::path("out");
    fs::create_directories(p);
    return p;
}

void write_json(const fs::path& p, const json& j)
{
    std::ofstream f(p, std::ios::binary);
    f << j.dump(2) << '\n';
}

json check_json(const CheckReport& r)
{
    json v = json::object();
    for (const auto& [k, x] : r.values) v[k] = num(x);
    return {{"name", r.name}, {"pass", r.pass},       {"worst_margin", num(r.worst)},
            {"tolerance", num(r.tolerance)}, {"samples", r.samples}, {"values", v},
            {"note", r.note}};
}

json anisotropy_json(const Anisotropy& a)
{
    json j = {{"kind", a.name()}, {"dim", a.dim()}};
    if (a.kind() == Anisotropy::Kind::WeightedL1)
        j["weights"] = std::vector<double>(a.weights().data(), a.weights().data() + a.weights().size());
    if (a.kind() == Anisotropy::Kind::PNorm) j["p"] = a.p();
    return j;
}

bool is_l1(const Anisotropy& a)
{
    return a.kind() == Anisotropy::Kind::WeightedL1 && a.weights().isApproxToConstant(1.0, 0);
}

bool cross_oracle_applies(const Scenario& s)
{
    return s.shape.kind == ShapeKind::Cross && is_l1(s.phi) && is_l1(s.psi);
}

Polyline polygon_line(const Polygon& p)
{
    Polyline l;
    for (const auto& v : p) l.push_back((Vec(2) << v[0], v[1]).finished());
    return l;
}

Polyline circle_line(double cx, double cy, double r, int n = 256)
{
    Polyline l;
    for (int i = 0; i < n; ++i) {
        const double a = 2 * M_PI * i / n;
        l.push_back((Vec(2) << cx + r * std::cos(a), cy + r * std::sin(a)).finished());
    }
    return l;
}

int step_at(double t, double h) { return int(std::lround(t / h)); }

// ---------------------------------------------------------------- run

int cmd_run(const Common& c)
{
    const Scenario s = load(c);
    const fs::path dir = out_dir(c, s);
    const IndicatorField e0 = initial_set(s);
    FlowOptions opt;
    opt.t_max = s.t_max;
    opt.max_steps = s.max_steps;
    opt.require_certified = s.require_certified;
    const FlowTrace tr = run_flow(e0, s.h, s.phi, s.psi.dual(), s.solver, opt);

    {
        std::ofstream f(dir / "trace.csv", std::ios::binary);
        f << "n,t,volume,P_phi,delta_cert,residual\n";
        for (const auto& st : tr.steps)
            f << st.n << ',' << fmt(st.t) << ',' << fmt(st.volume) << ',' << fmt(st.perimeter) << ','
              << fmt(st.delta_cert) << ',' << fmt(st.residual) << '\n';
    }

    json rep;
    rep["scenario"] = s.name;
    rep["h"] = s.h;
    rep["cells"] = std::vector<int>(s.domain.cells.begin(), s.domain.cells.begin() + s.domain.dim);
    rep["phi"] = anisotropy_json(s.phi);
    rep["psi"] = anisotropy_json(s.psi);
    rep["seed"] = s.seed;
    rep["steps"] = int(tr.steps.size()) - 1;
    rep["aborted"] = tr.aborted;
    rep["abort_reason"] = tr.abort_reason;
    rep["extinct"] = tr.extinction_step.has_value();
    rep["extinction_time"] = tr.extinction_step ? json(*tr.extinction_step * s.h) : json(nullptr);
    if (cross_oracle_applies(s)) rep["oracle_extinction_time"] = cross_extinction(s.shape.L);

    std::vector<CheckReport> checks = {check_nesting(tr), check_perimeter_monotone(tr), check_isoperimetric(tr)};
    if (!std::isnan(trace_min_delta(tr))) checks.push_back(check_delta_persistence(tr));

    const TvStencil st = build_stencil(s.phi, s.domain, s.solver.stencil_radius);
    if (tr.extinction_step) {
        const ArrivalTime u = arrival_time(tr);
        write_raster((dir / "arrival.atwf").string(), to_raster(u.field));
        if (s.domain.dim == 2) write_pgm((dir / "arrival.pgm").string(), u.field);
        const double total = bv_energy(u, st);
        double coarea = 0;
        for (const auto& x : tr.steps)
            if (x.n < *tr.extinction_step) coarea += s.h * x.perimeter;
        const double scale = std::max(std::abs(total), std::abs(coarea));
        rep["bv_energy"] = {{"total", total},
                            {"coarea", coarea},
                            {"mismatch", scale > 0 ? std::abs(total - coarea) / scale : 0.0}};
    }

    json probes = json::array();
    for (double t : s.probes) {
        const int n = step_at(t, s.h);
        json p = {{"t", t}, {"step", n}};
        const IndicatorField* set = nullptr;
        IndicatorField empty(s.domain);
        if (n < int(tr.steps.size())) set = &tr.steps[n].set;
        else if (tr.extinction_step) set = &empty;
        if (!set) {
            p["reached"] = false;
            probes.push_back(p);
            continue;
        }
        p["reached"] = true;
        p["volume"] = volume(*set);
        if (s.domain.dim == 2) {
            std::vector<SvgLayer> layers;
            layers.push_back({contour_extract(*set), "black", "computed"});
            if (cross_oracle_applies(s)) {
                const Polygon poly = cross_set(t, s.shape.L);
                if (!poly.empty()) layers.push_back({{polygon_line(poly)}, "red", "oracle"});
                p["hausdorff_to_oracle"] = num(hausdorff(*set, rasterize(poly, s.domain)));
            }
            char name[64];
            std::snprintf(name, sizeof name, "contour_t%.4f.svg", t);
            write_svg((dir / name).string(), s.domain, layers);
            p["svg"] = name;
        }
        probes.push_back(p);
    }
    rep["probes"] = probes;

    bool pass = !tr.aborted;
    json cj = json::array();
    for (const auto& r : checks) {
        cj.push_back(check_json(r));
        pass = pass && r.pass;
    }
    rep["checks"] = cj;
    rep["pass"] = pass;
    write_json(dir / "report.json", rep);
    std::cout << "steps " << rep["steps"] << ", extinction "
              << (tr.extinction_step ? fmt(*tr.extinction_step * s.h) : std::string("not reached"))
              << (tr.aborted ? ", aborted: " + tr.abort_reason : std::string()) << "\n"
              << "wrote " << (dir / "report.json").string() << "\n";
    return pass ? 0 : 1;
}

// ---------------------------------------------------------------- step

int cmd_step(const Common& c, const std::string& input)
{
    const Scenario s = load(c);
    const fs::path dir = out_dir(c, s);
    IndicatorField e = input.empty() ? initial_set(s) : indicator_from_raster(read_raster(input), s.domain);
    const AtwStepResult r = atw_step(e, s.h, s.phi, s.psi.dual(), s.solver);
    write_raster((dir / "next.atwf").string(), to_raster(r.next_set));
    write_raster((dir / "w.atwf").string(), to_raster(r.w));
    write_raster((dir / "d.atwf").string(), to_raster(r.d));
    if (!r.z.v.empty()) write_raster((dir / "z.atwf").string(), to_raster(r.z));
    const json j = {{"volume_in", volume(e)},          {"volume_out", volume(r.next_set)},
                    {"energy", r.energy},             {"perimeter", r.perimeter},
                    {"residual", r.residual},         {"certified", r.certified},
                    {"iterations", r.iterations},     {"delta_cert", num(r.delta_certificate)}};
    write_json(dir / "step.json", j);
    std::cout << j.dump() << "\n";
    return 0;
}

// ---------------------------------------------------------------- distance

int cmd_distance(const Common& c)
{
    const Scenario s = load(c);
    const fs::path dir = out_dir(c, s);
    const SignedDistance d = compute_distance(initial_set(s), s.psi.dual(), s.solver);
    write_raster((dir / "distance.atwf").string(), to_raster(d.field));
    if (s.domain.dim == 2) write_pgm((dir / "distance.pgm").string(), d.field);
    const ScalarField res = eikonal_residual(d, s.psi);
    double rmax = 0, rsum = 0, lo = INFINITY, hi = -INFINITY;
    std::size_t rn = 0;
    for (std::size_t i = 0; i < res.v.size(); ++i) {
        lo = std::min(lo, d.field.v[i]);
        hi = std::max(hi, d.field.v[i]);
        if (res.v[i] > 0) {
            rmax = std::max(rmax, res.v[i]);
            rsum += res.v[i];
            ++rn;
        }
    }
    const json j = {{"min", lo}, {"max", hi}, {"eikonal_residual_max", rmax},
                    {"eikonal_residual_mean", rn ? rsum / rn : 0.0}};
    write_json(dir / "distance.json", j);
    std::cout << j.dump() << "\n";
    return 0;
}

// ---------------------------------------------------------------- check

int cmd_check(const Common& c, const std::string& property, double delta_opt, int samples)
{
    static const std::vector<std::string> known = {
        "mc-delta",  "superharmonic", "superharmonic-delta", "lipschitz",     "holder",    "nesting",
        "perimeter", "delta-persistence", "isoperimetric",   "density",       "inclusion", "distance-growth",
        "all"};
    if (std::find(known.begin(), known.end(), property) == known.end())
        throw UsageError("unknown property '" + property + "'");
    const Scenario s = load(c);
    const fs::path dir = out_dir(c, s);
    const IndicatorField e0 = initial_set(s);
    const TvStencil st = build_stencil(s.phi, s.domain, s.solver.stencil_radius);
    const Anisotropy psi_dual = s.psi.dual();
    const bool all = property == "all";
    auto want = [&](const char* p) { return all || property == p; };

    std::vector<CheckReport> reports;
    if (want("mc-delta")) reports.push_back(check_mc_delta(e0, st, std::max(0.0, delta_opt), samples, s.seed));

    const bool need_trace = all || property != "mc-delta";
    if (need_trace) {
        FlowOptions opt;
        opt.t_max = s.t_max;
        opt.max_steps = s.max_steps;
        opt.require_certified = s.require_certified;
        const FlowTrace tr = run_flow(e0, s.h, s.phi, psi_dual, s.solver, opt);
        if (tr.aborted) throw std::runtime_error("flow aborted: " + tr.abort_reason);
        const double dmin = delta_opt >= 0 ? delta_opt : trace_min_delta(tr);
        if (want("nesting")) reports.push_back(check_nesting(tr));
        if (want("perimeter")) reports.push_back(check_perimeter_monotone(tr));
        if (want("delta-persistence")) reports.push_back(check_delta_persistence(tr));
        if (want("isoperimetric")) reports.push_back(check_isoperimetric(tr));
        if (want("holder")) reports.push_back(check_holder_volume(tr));
        if (want("density") && tr.steps.size() > 1) reports.push_back(check_density(tr.steps[1].set, s.h));
        if (want("inclusion") || want("distance-growth")) {
            if (!(dmin >= 0)) throw std::runtime_error("no certified delta available for the inclusion checks");
            const ScalarField d0 = compute_distance(e0, psi_dual, s.solver).field;
            if (want("inclusion") && tr.steps.size() > 1)
                reports.push_back(check_inclusion_step(d0, tr.steps[1].set, dmin, s.h));
            if (want("distance-growth")) {
                const int n = int(tr.steps.size()) - 1 - (tr.extinction_step ? 1 : 0);
                if (n >= 1) {
                    const ScalarField dn = compute_distance(tr.steps[n].set, psi_dual, s.solver).field;
                    reports.push_back(check_distance_growth(d0, dn, n, dmin, s.h));
                }
            }
        }
        if (want("superharmonic") || want("superharmonic-delta") || want("lipschitz")) {
            if (!tr.extinction_step) throw std::runtime_error("the trace did not reach extinction within t_max");
            const ArrivalTime u = arrival_time(tr);
            if (want("superharmonic")) reports.push_back(check_superharmonic(u, st, samples, s.seed));
            if (want("superharmonic-delta") && dmin > 0)
                reports.push_back(check_superharmonic(u, st, samples, s.seed, dmin));
            if (want("lipschitz") && dmin > 0) reports.push_back(check_lipschitz(u, psi_dual, dmin, 20 * samples, s.seed));
        }
    }

    bool pass = !reports.empty();
    json arr = json::array();
    for (const auto& r : reports) {
        arr.push_back(check_json(r));
        pass = pass && r.pass;
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  worst " << fmt(r.worst) << "  tol "
                  << fmt(r.tolerance) << "  samples " << r.samples << "\n";
    }
    write_json(dir / "report.json",
               {{"scenario", s.name}, {"property", property}, {"seed", s.seed}, {"checks", arr}, {"pass", pass}});
    return pass ? 0 : 1;
}

// ---------------------------------------------------------------- oracle

int cmd_oracle(const std::string& kind, const std::optional<double>& t, const std::vector<double>& x, double L,
               double R, int n, std::uint64_t seed, int samples, const std::string& emit, const std::string& output)
{
    json j = {{"oracle", kind}};
    Polygon poly;
    std::vector<Polyline> lines;
    if (kind == "cross") {
        j["L"] = L;
        j["extinction"] = cross_extinction(L);
        if (t) {
            poly = cross_set(*t, L);
            j["t"] = *t;
            j["polygon"] = poly;
            j["volume"] = cross_volume(*t, L);
            if (!poly.empty()) lines.push_back(polygon_line(poly));
        }
        if (x.size() == 2) {
            j["x"] = x;
            j["arrival"] = cross_arrival(x[0], x[1], L);
            try {
                const Calibration cal = cross_calibration(x[0], x[1], L);
                j["calibration"] = {{"z", cal.z}, {"div", cal.div}};
            } catch (const std::invalid_argument&) {
            }
        }
    } else if (kind == "ball") {
        j["R0"] = R;
        j["extinction"] = shrinking_ball_extinction(R);
        if (t) {
            const double r = shrinking_ball(R, *t);
            j["t"] = *t;
            j["radius"] = r;
            if (r > 0) lines.push_back(circle_line(0, 0, r));
        }
    } else if (kind == "square-l1") {
        j["a0"] = R;
        j["extinction"] = R * R / 2;
        if (t) {
            const double a = shrinking_square_l1(R, *t);
            j["t"] = *t;
            j["half_side"] = a;
            if (a > 0) {
                poly = {{-a, -a}, {a, -a}, {a, a}, {-a, a}};
                j["polygon"] = poly;
                lines.push_back(polygon_line(poly));
            }
        }
    } else if (kind == "disk-family") {
        const DiskFamily f = disk_family_generate(n, seed);
        j["delta"] = f.delta;
        j["C"] = f.C;
        j["centers"] = f.centers;
        j["radii"] = f.radii;
        for (std::size_t i = 0; i < f.radii.size(); ++i)
            if (f.radii[i] > 0) lines.push_back(circle_line(f.centers[i][0], f.centers[i][1], f.radii[i]));
        if (x.size() == 2) {
            j["x"] = x;
            j["arrival"] = disk_family_arrival({x[0], x[1]}, f.centers, f.radii);
        }
    } else if (kind == "calibration") {
        const CalibrationReport r = calibration_check(samples, seed, L);
        j["samples"] = r.samples;
        j["max_dual"] = r.max_dual;
        j["max_div_error"] = r.max_div_error;
        j["max_formula_error"] = r.max_formula_error;
        j["pass"] = r.pass;
        std::cout << j.dump(2) << "\n";
        return r.pass ? 0 : 1;
    } else {
        throw UsageError("unknown oracle '" + kind + "' (cross, ball, square-l1, disk-family, calibration)");
    }

    if (!emit.empty()) {
        const fs::path p = output.empty() ? fs::path("oracle." + emit) : fs::path(output);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        if (emit == "svg") {
            GridDomain view = GridDomain::make({-2.5, -2.5}, {5, 5}, {100, 100});
            if (kind == "disk-family") view = GridDomain::make({-1.1, -1.1}, {2.2, 2.2}, {100, 100});
            write_svg(p.string(), view, {{lines, "red", kind}});
        } else if (emit == "csv") {
            std::ofstream f(p, std::ios::binary);
            f << "contour,x,y\n";
            for (std::size_t k = 0; k < lines.size(); ++k)
                for (const auto& v : lines[k]) f << k << ',' << fmt(v[0]) << ',' << fmt(v[1]) << '\n';
        } else {
            throw UsageError("--emit must be svg or csv");
        }
        j["written"] = p.string();
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Anisotropic ATW mean curvature flow"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub, bool need_scenario) {
        auto* o = sub->add_option("--scenario", common.scenario, "scenario JSON file");
        if (need_scenario) o->required();
        sub->add_option("--output", common.output, "output directory");
        sub->add_option("--workers", common.workers, "worker threads (ATWFLOW_WORKERS is the fallback)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", common.seed, "override the scenario seed");
    };

    auto* run = app.add_subcommand("run", "evolve the scenario and write trace.csv, rasters, SVGs, report.json");
    add_common(run, true);

    std::string input;
    auto* step = app.add_subcommand("step", "one ATW step from the scenario shape or a raster");
    add_common(step, true);
    step->add_option("--input", input, "indicator raster (.atwf) on the scenario grid");

    auto* dist = app.add_subcommand("distance", "signed distance of the scenario shape");
    add_common(dist, true);

    std::string property = "all";
    double delta = -1;
    int samples = 100;
    auto* check = app.add_subcommand("check", "property checks on the scenario");
    add_common(check, true);
    check->add_option("--property", property, "mc-delta, superharmonic, superharmonic-delta, lipschitz, holder, "
                                              "nesting, perimeter, delta-persistence, isoperimetric, density, "
                                              "inclusion, distance-growth, all");
    check->add_option("--delta", delta, "delta to test (default: 0 for mc-delta, trace certificate otherwise)");
    check->add_option("--samples", samples, "competitors per sampled check")->check(CLI::PositiveNumber);

    std::string okind, emit, oout;
    std::optional<double> ot;
    std::vector<double> ox;
    double oL = 2, oR = 1;
    int on = 5, osamples = 1000;
    std::uint64_t oseed = 1;
    auto* oracle = app.add_subcommand("oracle", "evaluate a closed-form solution");
    oracle->add_option("kind", okind, "cross, ball, square-l1, disk-family, calibration")->required();
    oracle->add_option("--t", ot, "time");
    oracle->add_option("--x", ox, "point (two coordinates)")->expected(2);
    oracle->add_option("--L", oL, "cross arm length");
    oracle->add_option("--R", oR, "initial radius or half-side");
    oracle->add_option("--n", on, "disk count");
    oracle->add_option("--seed", oseed, "seed");
    oracle->add_option("--samples", osamples, "calibration sample count");
    oracle->add_option("--emit", emit, "svg or csv");
    oracle->add_option("--output", oout, "file for --emit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(common);
        if (*step) return cmd_step(common, input);
        if (*dist) return cmd_distance(common);
        if (*check) {
            const bool mc_only = property == "mc-delta";
            return cmd_check(common, property, mc_only ? std::max(0.0, delta) : delta, samples);
        }
        if (*oracle) return cmd_oracle(okind, ot, ox, oL, oR, on, oseed, osamples, emit, oout);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    } catch (const FrameViolation& e) {
        std::cerr << "frame violation: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
