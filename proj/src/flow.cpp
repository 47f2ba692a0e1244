#include "atwflow/flow.hpp"

#include "atwflow/oracles.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace atw {

FlowTrace run_flow(const IndicatorField& e0, double h, const Anisotropy& phi, const Anisotropy& psi_dual,
                   const SolverConfig& cfg, double t_max)
{
    FlowOptions opt;
    opt.t_max = t_max;
    return run_flow(e0, h, phi, psi_dual, cfg, opt);
}

FlowTrace run_flow(const IndicatorField& e0, double h, const Anisotropy& phi, const Anisotropy& psi_dual,
                   const SolverConfig& cfg, const FlowOptions& opt)
{
    if (!(h > 0)) throw std::invalid_argument("run_flow: h must be positive");
    require_compact(e0, "initial set");
    const GridDomain& dom = e0.dom;
    const TvStencil st = build_stencil(phi, dom, cfg.stencil_radius);

    FlowTrace tr;
    tr.h = h;
    tr.dom = dom;
    tr.exit_step.assign(dom.size(), -1);
    for (std::size_t i = 0; i < dom.size(); ++i)
        if (!e0.m[i]) tr.exit_step[i] = 0;

    FlowStep s0;
    s0.set = opt.keep_sets ? e0 : IndicatorField();
    s0.volume = volume(e0);
    s0.perimeter = perimeter_phi(e0, st);
    s0.delta_cert = std::numeric_limits<double>::quiet_NaN();
    tr.steps.push_back(std::move(s0));
    if (e0.empty()) {
        tr.extinction_step = 0;
        return tr;
    }

    IndicatorField cur = e0;
    DualState dual;
    for (int n = 1;; ++n) {
        if (n * h > opt.t_max * (1 + 1e-12)) break;
        if (opt.max_steps >= 0 && n > opt.max_steps) break;
        AtwStepResult r;
        try {
            r = atw_step(cur, h, st, psi_dual, cfg, opt.warm_start && !dual.empty() ? &dual : nullptr);
        } catch (const FrameViolation& ex) {
            tr.aborted = true;
            tr.abort_reason = std::string("step ") + std::to_string(n) + ": " + ex.what();
            break;
        }
        FlowStep s;
        s.n = n;
        s.t = n * h;
        s.volume = volume(r.next_set);
        s.perimeter = r.perimeter;
        s.delta_cert = r.delta_certificate;
        s.residual = r.residual;
        s.iterations = r.iterations;
        s.certified = r.certified;
        for (std::size_t i = 0; i < dom.size(); ++i)
            if (tr.exit_step[i] < 0 && !r.next_set.m[i]) tr.exit_step[i] = n;
        if (opt.keep_sets) s.set = r.next_set;
        tr.steps.push_back(s);
        if (opt.on_step) opt.on_step(tr.steps.back(), r);
        if (!r.certified && opt.require_certified) {
            tr.aborted = true;
            tr.abort_reason = "step " + std::to_string(n) + ": solver not certified (residual " +
                              std::to_string(r.residual) + ")";
            break;
        }
        if (r.next_set.empty()) {
            tr.extinction_step = n;
            break;
        }
        cur = std::move(r.next_set);
        dual = std::move(r.dual);
    }
    return tr;
}

ArrivalTime arrival_time(const FlowTrace& trace)
{
    if (!trace.extinction_step) throw std::runtime_error("arrival_time: the trace did not reach extinction");
    ArrivalTime u{ScalarField(trace.dom), trace.h};
    for (std::size_t i = 0; i < u.field.v.size(); ++i) {
        if (trace.exit_step[i] < 0) throw std::runtime_error("arrival_time: cell never exits");
        u.field.v[i] = trace.h * trace.exit_step[i];
    }
    return u;
}

double bv_energy(const ArrivalTime& u, const TvStencil& st)
{
    ScalarField neg = u.field;
    for (double& v : neg.v) v = -v;
    return total_variation(neg, st);
}

double bv_energy(const ArrivalTime& u, const Anisotropy& phi, int stencil_radius)
{
    return bv_energy(u, build_stencil(phi, u.field.dom, stencil_radius));
}

BvEnergy bv_energy(const ArrivalTime& u, const FlowTrace& trace, const TvStencil& st, double tol)
{
    BvEnergy b;
    b.total = bv_energy(u, st);
    // steps with n < extinction contribute h P(T^n E0)
    for (const auto& s : trace.steps)
        if (!trace.extinction_step || s.n < *trace.extinction_step) b.coarea += trace.h * s.perimeter;
    const double scale = std::max(std::abs(b.total), std::abs(b.coarea));
    b.mismatch = scale > 0 ? std::abs(b.total - b.coarea) / scale : 0;
    if (b.mismatch > tol)
        throw std::runtime_error("bv_energy: coarea mismatch " + std::to_string(b.mismatch) +
                                 " (sets are not nested?)");
    return b;
}

RefineStudy refine_study(const RefineSpec& spec, const std::vector<double>& h_list,
                         const std::vector<GridDomain>& grids)
{
    if (h_list.size() != grids.size()) throw std::invalid_argument("refine_study: one grid per h");
    for (std::size_t i = 1; i < h_list.size(); ++i)
        if (!(h_list[i] < h_list[i - 1])) throw std::invalid_argument("refine_study: h_list must decrease");
    RefineStudy study;
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        RefineRow row;
        row.h = h_list[i];
        row.dom = grids[i];
        FlowOptions opt;
        opt.t_max = spec.t_max;
        opt.require_certified = spec.cfg.set_solver == SetSolver::Rof;
        const FlowTrace tr = run_flow(spec.initial(grids[i]), row.h, spec.phi, spec.psi_dual, spec.cfg, opt);
        row.aborted = tr.aborted;
        if (tr.extinction_step) {
            row.extinction_time = *tr.extinction_step * row.h;
            const TvStencil st = build_stencil(spec.phi, grids[i], spec.cfg.stencil_radius);
            const BvEnergy b = bv_energy(arrival_time(tr), tr, st, std::numeric_limits<double>::infinity());
            row.bv_energy = b.total;
            row.coarea_mismatch = b.mismatch;
        }
        double worst = 0;
        if (spec.oracle)
            for (double t : spec.probes) {
                const std::size_t n = std::size_t(std::llround(t / row.h));
                IndicatorField set(grids[i]);
                if (n < tr.steps.size()) set = tr.steps[n].set;
                const double hd = hausdorff(set, spec.oracle(t, grids[i]));
                row.hausdorff.push_back(hd);
                worst = std::max(worst, hd);
            }
        row.error = std::isfinite(spec.reference_energy)
                        ? std::abs(row.bv_energy - spec.reference_energy) / std::abs(spec.reference_energy)
                        : worst;
        if (!tr.extinction_step && std::isfinite(spec.reference_energy))
            row.error = std::numeric_limits<double>::infinity();
        study.rows.push_back(std::move(row));
    }
    const auto& r = study.rows;
    study.monotone_all = r.size() >= 2;
    for (std::size_t i = 1; i < r.size(); ++i)
        if (!(r[i].error < r[i - 1].error)) study.monotone_all = false;
    study.monotone_last = r.size() >= 2 && r.back().error < r[r.size() - 2].error;
    return study;
}

}  // namespace atw
