// Acceptance run: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number, e.g. `atwflow_acceptance 1 5 9`.

#include "atwflow/checks.hpp"
#include "atwflow/oracles.hpp"
#include "atwflow/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace atw;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string scenario_path(const std::string& name) { return std::string(ATWFLOW_SCENARIO_DIR) + "/" + name; }

struct Run {
    Scenario s;
    FlowTrace trace;
    TvStencil st;
    double seconds = 0;
    double dmin = 0;
};

// Scenario runs are shared between criteria and computed on first use.
const Run& scenario_run(const std::string& file)
{
    static std::map<std::string, Run> cache;
    auto it = cache.find(file);
    if (it != cache.end()) return it->second;
    Run r;
    r.s = parse_scenario(scenario_path(file));
    FlowOptions opt;
    opt.t_max = r.s.t_max;
    opt.max_steps = r.s.max_steps;
    opt.require_certified = r.s.require_certified && r.s.solver.set_solver == SetSolver::Rof;
    const auto t0 = Clock::now();
    r.trace = run_flow(initial_set(r.s), r.s.h, r.s.phi, r.s.psi.dual(), r.s.solver, opt);
    r.seconds = seconds_since(t0);
    r.st = build_stencil(r.s.phi, r.s.domain, r.s.solver.stencil_radius);
    r.dmin = trace_min_delta(r.trace);
    return cache.emplace(file, std::move(r)).first->second;
}

double extinction_time(const FlowTrace& tr) { return tr.extinction_step ? *tr.extinction_step * tr.h : NAN; }

int step_at(const FlowTrace& tr, double t) { return int(std::lround(t / tr.h)); }

struct Outcome {
    bool pass = true;
    std::ostringstream msg;
    void require(bool ok) { pass = pass && ok; }
};

std::string fmt(double x, int prec = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    return buf;
}

// ---------------------------------------------------------------------------

void crit_cross(Outcome& o)
{
    const Run& r = scenario_run("cross.json");
    const double sp = r.s.domain.min_spacing();
    o.msg << "hausdorff";
    for (double t : r.s.probes) {
        const int n = step_at(r.trace, t);
        const bool have = n < int(r.trace.steps.size());
        const double hd = have ? hausdorff(r.trace.steps[n].set, rasterize(cross_set(t), r.s.domain)) / sp : INFINITY;
        o.require(hd <= 5);
        o.msg << " t=" << t << ":" << fmt(hd, 3);
    }
    const double T = extinction_time(r.trace);
    o.require(std::abs(T - 1.5) <= 0.1);
    o.require(r.seconds <= 600);
    o.require(!r.trace.aborted);
    o.msg << " cells (limit 5); extinction " << fmt(T) << " (1.5 +- 0.1); runtime " << fmt(r.seconds, 3)
          << " s (limit 600)";
}

void crit_square_phase(Outcome& o)
{
    const Run& r = scenario_run("cross_fine.json");
    const double sp = r.s.domain.min_spacing();
    double worst = 0, at = 0;
    int count = 0;
    for (const auto& st : r.trace.steps) {
        // the last step before extinction is excluded: there the exact
        // half-side has infinite slope
        if (!(st.t > 1 + 1e-12 && st.t < 1.5 - r.trace.h - 1e-12)) continue;
        const double half = 0.5 * std::sqrt(st.volume);
        const double err = std::abs(half - std::sqrt(1 - 2 * (st.t - 1))) / sp;
        if (err > worst) worst = err, at = st.t;
        ++count;
    }
    o.require(count > 0 && worst <= 3 && !r.trace.aborted);
    o.msg << "max half-side error " << fmt(worst, 3) << " cells at t=" << fmt(at) << " over " << count
          << " steps in (1, 1.5 - h) (limit 3)";
}

void crit_disk(Outcome& o)
{
    const Run& r = scenario_run("disk_fine.json");
    double worst = 0, worst_abs = 0, at = 0;
    for (const auto& st : r.trace.steps) {
        if (st.n == 0 || st.t > 0.4 + 1e-12) continue;
        const double R = std::sqrt(st.volume / M_PI), ex = shrinking_ball(1, st.t);
        const double rel = std::abs(R - ex) / ex;
        if (rel > worst) worst = rel, at = st.t;
        worst_abs = std::max(worst_abs, std::abs(R - ex));
    }
    const double T = extinction_time(r.trace);
    o.require(worst <= 0.02 && std::abs(T - 0.5) <= 0.05 && !r.trace.aborted);
    o.msg << "max relative radius error " << fmt(100 * worst, 3) << "% at t=" << fmt(at) << " (limit 2%, absolute "
          << fmt(worst_abs, 3) << "); extinction " << fmt(T) << " (0.5 +- 0.05); runtime " << fmt(r.seconds, 3)
          << " s";
}

void crit_bv(Outcome& o)
{
    RefineSpec spec;
    spec.initial = [](const GridDomain& g) {
        ShapeSpec b;
        b.kind = ShapeKind::Ball;
        b.center = {0, 0};
        b.radius = 1;
        return shape(b, g);
    };
    spec.phi = spec.psi_dual = Anisotropy::euclidean(2);
    spec.cfg.set_solver = SetSolver::MinCut;
    spec.cfg.convention = DistanceConvention::Subcell;
    spec.cfg.stencil_radius = 3;
    spec.t_max = 1;
    spec.reference_energy = 2 * M_PI / 3;
    const std::vector<double> hs = {1.0 / 16, 1.0 / 32, 1.0 / 64};
    std::vector<GridDomain> grids;
    for (double h : hs) {
        const int n = int(std::lround(2.5 / (h / 4)));
        grids.push_back(GridDomain::make({-1.25, -1.25}, {2.5, 2.5}, {n, n}));
    }
    const auto t0 = Clock::now();
    const RefineStudy s = refine_study(spec, hs, grids);
    o.msg << "relative error";
    double mismatch = 0;
    for (const auto& row : s.rows) {
        o.msg << " h=1/" << int(std::lround(1 / row.h)) << ":" << fmt(100 * row.error, 3) << "%";
        mismatch = std::max(mismatch, row.coarea_mismatch);
        o.require(!row.aborted && row.extinction_time.has_value());
    }
    o.require(s.monotone_all && s.rows.back().error <= 0.05 && mismatch <= 1e-6);
    o.msg << " (strictly decreasing: " << (s.monotone_all ? "yes" : "no") << ", final limit 5%); coarea mismatch "
          << fmt(mismatch, 3) << " (limit 1e-6); runtime " << fmt(seconds_since(t0), 3) << " s";
}

void crit_inclusion(Outcome& o)
{
    for (const char* f : {"disk.json", "cross.json"}) {
        const Run& r = scenario_run(f);
        const Anisotropy psi_dual = r.s.psi.dual();
        double worst_step = INFINITY, worst_growth = INFINITY;
        const int last = int(r.trace.steps.size()) - 1 - (r.trace.extinction_step ? 1 : 0);
        const ScalarField d0 = compute_distance(r.trace.steps[0].set, psi_dual, r.s.solver).field;
        ScalarField dprev = d0;
        bool ok = std::isfinite(r.dmin) && r.dmin >= 0;
        for (int n = 1; n <= last && ok; ++n) {
            const IndicatorField& e = r.trace.steps[n].set;
            const CheckReport a = check_inclusion_step(dprev, e, r.dmin, r.s.h);
            const ScalarField dn = compute_distance(e, psi_dual, r.s.solver).field;
            const CheckReport b = check_distance_growth(d0, dn, n, r.dmin, r.s.h);
            worst_step = std::min(worst_step, a.worst);
            worst_growth = std::min(worst_growth, b.worst);
            ok = ok && a.pass && b.pass;
            dprev = dn;
        }
        o.require(ok);
        o.msg << r.s.name << ": delta " << fmt(r.dmin) << ", " << last << " steps, step margin " << fmt(worst_step, 3)
              << ", growth margin " << fmt(worst_growth, 3) << "; ";
    }
}

void crit_delta_persistence(Outcome& o)
{
    for (const char* f : {"disk.json", "square_l1.json", "cross.json"}) {
        const Run& r = scenario_run(f);
        const CheckReport c = check_delta_persistence(r.trace, 1e-3);
        o.require(c.pass && !r.trace.aborted);
        o.msg << r.s.name << ": " << (r.trace.steps.size() - 1) << " steps, worst drop margin " << fmt(c.worst, 3)
              << " (tol " << fmt(c.tolerance, 3) << "); ";
    }
}

void crit_perimeter(Outcome& o)
{
    for (const char* f : {"disk.json", "square_l1.json", "cross.json", "cross_fine.json"}) {
        const Run& r = scenario_run(f);
        const CheckReport c = check_perimeter_monotone(r.trace, 1e-6);
        o.require(c.pass);
        o.msg << r.s.name << ": worst relative margin " << fmt(c.worst, 3) << "; ";
    }
}

void crit_superharmonic(Outcome& o)
{
    for (const char* f : {"disk.json", "square_l1.json", "cross.json"}) {
        const Run& r = scenario_run(f);
        const ArrivalTime u = arrival_time(r.trace);
        const CheckReport a = check_superharmonic(u, r.st, 100, r.s.seed, 0, 1e-6);
        const CheckReport b = check_superharmonic(u, r.st, 100, r.s.seed + 1, r.dmin, 1e-6);
        o.require(a.pass && b.pass && a.samples == 100);
        o.msg << r.s.name << ": margin " << fmt(a.worst, 3) << ", with delta " << fmt(r.dmin) << " margin "
              << fmt(b.worst, 3) << "; ";
    }
}

void crit_calibration(Outcome& o)
{
    const CalibrationReport c = calibration_check(1000, 2024);
    o.require(c.pass && c.samples == 1000 && c.max_formula_error == 0 && c.max_dual <= 1 + 1e-12);
    o.msg << c.samples << " points: max psi°(z) " << fmt(c.max_dual, 17) << ", divergence formula error "
          << fmt(c.max_formula_error, 3) << ", difference-quotient error " << fmt(c.max_div_error, 3);
}

void crit_lipschitz_holder(Outcome& o)
{
    for (const char* f : {"disk.json", "square_l1.json"}) {
        const Run& r = scenario_run(f);
        const ArrivalTime u = arrival_time(r.trace);
        const CheckReport l = check_lipschitz(u, r.s.psi.dual(), r.dmin, 5000, r.s.seed);
        const CheckReport h = check_holder_volume(r.trace);
        o.require(l.pass && h.pass);
        o.msg << r.s.name << ": lipschitz margin " << fmt(l.worst, 3) << ", holder exponent " << fmt(h.worst, 3)
              << "; ";
    }
    const Run& c = scenario_run("cross.json");
    const CheckReport h = check_holder_volume(c.trace, 0.75, 1.25, 0.45);
    o.require(h.pass);
    o.msg << "cross near t=1: holder exponent " << fmt(h.worst, 3) << " (limit 0.45)";
}

void crit_disk_family(Outcome& o)
{
    const Run& r = scenario_run("disk_union.json");
    const ArrivalTime u = arrival_time(r.trace);
    std::vector<std::array<double, 2>> centers;
    for (const auto& c : r.s.shape.centers) centers.push_back({c[0], c[1]});
    double worst = 0;
    for (std::size_t i = 0; i < r.s.domain.size(); ++i) {
        const auto x = r.s.domain.center(i);
        const double ex = disk_family_arrival({x[0], x[1]}, centers, r.s.shape.radii);
        worst = std::max(worst, std::abs(u.field.v[i] - ex));
    }
    const double limit = r.s.h + 3 * r.s.domain.min_spacing();
    o.require(worst <= limit && !r.trace.aborted);
    o.msg << centers.size() << " disks: max |u_h - u| " << fmt(worst, 4) << " (limit h + 3 spacing = " << fmt(limit, 4)
          << ")";
}

}  // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
        {"cross evolution", crit_cross},
        {"crystalline square phase", crit_square_phase},
        {"isotropic disk", crit_disk},
        {"BV energy refinement", crit_bv},
        {"quantitative inclusion", crit_inclusion},
        {"delta certificate persistence", crit_delta_persistence},
        {"perimeter monotonicity", crit_perimeter},
        {"1-superharmonicity", crit_superharmonic},
        {"calibration identities", crit_calibration},
        {"Lipschitz and Holder bounds", crit_lipschitz_holder},
        {"disk family arrival time", crit_disk_family},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = int(k) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            criteria[k].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.msg << "error: " << e.what();
        }
        failed += !o.pass;
        std::string text = o.msg.str();
        while (!text.empty() && (text.back() == ' ' || text.back() == ';')) text.pop_back();
        std::printf("%s criterion %2d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                    text.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
