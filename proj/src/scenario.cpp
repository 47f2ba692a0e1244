#include "atwflow/scenario.hpp"

#include "atwflow/oracles.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace atw {

namespace {

using json = nlohmann::json;

class Reader {
public:
    Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    // Line of the key path, searched in order through the raw text.
    int line_of(const std::vector<std::string>& path) const
    {
        std::size_t pos = 0;
        for (const auto& k : path) {
            const std::size_t p = text_.find('"' + k + '"', pos);
            if (p == std::string::npos) break;
            pos = p + 1;
        }
        if (pos == 0) return 0;
        return 1 + int(std::count(text_.begin(), text_.begin() + (pos - 1), '\n'));
    }

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const
    {
        std::string where;
        for (const auto& k : path) where += (where.empty() ? "" : ".") + k;
        const int line = line_of(path);
        std::ostringstream os;
        os << source_;
        if (line > 0) os << ":" << line;
        os << ": " << (where.empty() ? "" : where + ": ") << msg;
        throw ScenarioError(os.str(), line);
    }

    void only(const json& obj, const std::vector<std::string>& path, const std::set<std::string>& allowed) const
    {
        if (!obj.is_object()) fail(path, "expected an object");
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key())) {
                auto p = path;
                p.push_back(it.key());
                fail(p, "unknown key");
            }
    }

    double number(const json& v, const std::vector<std::string>& path) const
    {
        if (!v.is_number()) fail(path, "expected a number");
        return v.get<double>();
    }

    std::vector<double> numbers(const json& v, const std::vector<std::string>& path) const
    {
        if (!v.is_array()) fail(path, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) out.push_back(number(x, path));
        return out;
    }

    Vec vec(const json& v, const std::vector<std::string>& path, int dim) const
    {
        const auto a = numbers(v, path);
        if (int(a.size()) != dim) fail(path, "expected " + std::to_string(dim) + " entries");
        return Eigen::Map<const Vec>(a.data(), dim);
    }

    std::string string(const json& v, const std::vector<std::string>& path) const
    {
        if (!v.is_string()) fail(path, "expected a string");
        return v.get<std::string>();
    }

    Anisotropy anisotropy(const json& v, const std::vector<std::string>& path, int dim) const
    {
        only(v, path, {"kind", "weights", "p", "matrix", "directions", "base", "offset"});
        if (!v.contains("kind")) fail(path, "kind required");
        const std::string kind = string(v["kind"], sub(path, "kind"));
        auto need = [&](const char* key) -> const json& {
            if (!v.contains(key)) fail(path, std::string(key) + " required for " + kind);
            return v[key];
        };
        try {
            if (kind == "euclidean") return Anisotropy::euclidean(dim);
            if (kind == "weighted-l1") {
                if (!v.contains("weights")) return Anisotropy::weighted_l1(Vec::Ones(dim));
                return Anisotropy::weighted_l1(vec(v["weights"], sub(path, "weights"), dim));
            }
            if (kind == "l-infinity") return Anisotropy::l_infinity(dim);
            if (kind == "p-norm") return Anisotropy::p_norm(number(need("p"), sub(path, "p")), dim);
            if (kind == "ellipse") {
                const json& m = need("matrix");
                if (!m.is_array() || int(m.size()) != dim) fail(sub(path, "matrix"), "expected a square matrix");
                Mat A(dim, dim);
                for (int i = 0; i < dim; ++i) A.row(i) = vec(m[i], sub(path, "matrix"), dim).transpose();
                return Anisotropy::ellipse(A);
            }
            if (kind == "polyhedral") {
                const json& d = need("directions");
                if (!d.is_array() || d.empty()) fail(sub(path, "directions"), "expected a list of vectors");
                std::vector<Vec> dirs;
                for (const auto& x : d) dirs.push_back(vec(x, sub(path, "directions"), dim));
                Vec w = Vec::Ones(int(dirs.size()));
                if (v.contains("weights")) w = vec(v["weights"], sub(path, "weights"), int(dirs.size()));
                return Anisotropy::polyhedral(dirs, w);
            }
            if (kind == "shifted") {
                const Anisotropy base = anisotropy(need("base"), sub(path, "base"), dim);
                return Anisotropy::shifted(base, vec(need("offset"), sub(path, "offset"), dim));
            }
        } catch (const std::invalid_argument& e) {
            fail(path, e.what());
        }
        fail(sub(path, "kind"), "unknown anisotropy kind '" + kind + "'");
    }

    static std::vector<std::string> sub(std::vector<std::string> p, const std::string& k)
    {
        p.push_back(k);
        return p;
    }

private:
    const std::string& text_;
    std::string source_;
};

template <class E>
E pick(const Reader& rd, const json& v, const std::vector<std::string>& path,
       const std::vector<std::pair<std::string, E>>& table)
{
    const std::string s = rd.string(v, path);
    for (const auto& [k, e] : table)
        if (k == s) return e;
    rd.fail(path, "unknown value '" + s + "'");
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& source)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line
        const std::size_t off = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + int(std::count(text.begin(), text.begin() + off, '\n'));
        throw ScenarioError(source + ":" + std::to_string(line) + ": invalid JSON: " + e.what(), line);
    }
    const Reader rd(text, source);
    using P = std::vector<std::string>;
    rd.only(j, {}, {"name", "domain", "shape", "phi", "psi", "h", "t_max", "solver", "probes", "output", "seed"});

    Scenario s;
    if (j.contains("name")) s.name = rd.string(j["name"], {"name"});

    if (!j.contains("domain")) rd.fail({}, "domain required");
    const json& dj = j["domain"];
    rd.only(dj, {"domain"}, {"origin", "extent", "cells"});
    for (const char* k : {"origin", "extent", "cells"})
        if (!dj.contains(k)) rd.fail({"domain"}, std::string(k) + " required");
    {
        const auto cells_d = rd.numbers(dj["cells"], {"domain", "cells"});
        std::vector<int> cells;
        for (double c : cells_d) {
            if (c != std::floor(c)) rd.fail({"domain", "cells"}, "cell counts must be integers");
            cells.push_back(int(c));
        }
        try {
            s.domain = GridDomain::make(rd.numbers(dj["origin"], {"domain", "origin"}),
                                        rd.numbers(dj["extent"], {"domain", "extent"}), cells);
        } catch (const std::invalid_argument& e) {
            rd.fail({"domain"}, e.what());
        }
    }
    const int dim = s.domain.dim;

    if (!j.contains("h")) rd.fail({}, "h required");
    s.h = rd.number(j["h"], {"h"});
    if (!(s.h > 0)) rd.fail({"h"}, "h must be positive");
    if (!j.contains("t_max")) rd.fail({}, "t_max required");
    s.t_max = rd.number(j["t_max"], {"t_max"});
    if (!(s.t_max > 0)) rd.fail({"t_max"}, "t_max must be positive");

    if (!j.contains("phi")) rd.fail({}, "phi required");
    s.phi = rd.anisotropy(j["phi"], {"phi"}, dim);
    s.psi = j.contains("psi") ? rd.anisotropy(j["psi"], {"psi"}, dim) : s.phi;

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
            rd.fail({"seed"}, "expected a nonnegative integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }

    if (!j.contains("shape")) rd.fail({}, "shape required");
    const json& sj = j["shape"];
    rd.only(sj, {"shape"}, {"kind", "center", "radius", "lo", "hi", "L", "phi", "centers", "radii", "n", "seed"});
    if (!sj.contains("kind")) rd.fail({"shape"}, "kind required");
    const std::string kind = rd.string(sj["kind"], {"shape", "kind"});
    auto need = [&](const char* k) -> const json& {
        if (!sj.contains(k)) rd.fail({"shape"}, std::string(k) + " required for " + kind);
        return sj[k];
    };
    auto as_std = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    ShapeSpec& sh = s.shape;
    if (kind == "ball") {
        sh.kind = ShapeKind::Ball;
        sh.center = as_std(rd.vec(need("center"), {"shape", "center"}, dim));
        sh.radius = rd.number(need("radius"), {"shape", "radius"});
    } else if (kind == "rectangle") {
        sh.kind = ShapeKind::Rectangle;
        sh.lo = as_std(rd.vec(need("lo"), {"shape", "lo"}, dim));
        sh.hi = as_std(rd.vec(need("hi"), {"shape", "hi"}, dim));
    } else if (kind == "cross") {
        sh.kind = ShapeKind::Cross;
        if (sj.contains("L")) sh.L = rd.number(sj["L"], {"shape", "L"});
    } else if (kind == "wulff") {
        sh.kind = ShapeKind::Wulff;
        sh.center = as_std(rd.vec(need("center"), {"shape", "center"}, dim));
        sh.radius = rd.number(need("radius"), {"shape", "radius"});
        sh.phi = sj.contains("phi") ? rd.anisotropy(sj["phi"], {"shape", "phi"}, dim) : s.phi;
    } else if (kind == "disk_union") {
        sh.kind = ShapeKind::DiskUnion;
        const json& c = need("centers");
        if (!c.is_array()) rd.fail({"shape", "centers"}, "expected a list of points");
        for (const auto& x : c) sh.centers.push_back(as_std(rd.vec(x, {"shape", "centers"}, dim)));
        sh.radii = rd.numbers(need("radii"), {"shape", "radii"});
    } else if (kind == "disk_family") {
        if (dim != 2) rd.fail({"shape", "kind"}, "disk_family is two-dimensional");
        const double n = rd.number(need("n"), {"shape", "n"});
        if (n < 1 || n != std::floor(n)) rd.fail({"shape", "n"}, "expected a positive integer");
        std::uint64_t seed = s.seed;
        if (sj.contains("seed")) seed = sj["seed"].get<std::uint64_t>();
        const DiskFamily f = disk_family_generate(int(n), seed);
        sh.kind = ShapeKind::DiskUnion;
        for (std::size_t i = 0; i < f.centers.size(); ++i) {
            sh.centers.push_back({f.centers[i][0], f.centers[i][1]});
            sh.radii.push_back(f.radii[i]);
        }
    } else {
        rd.fail({"shape", "kind"}, "unknown shape kind '" + kind + "'");
    }

    if (j.contains("solver")) {
        const json& cj = j["solver"];
        const P base{"solver"};
        rd.only(cj, base,
                {"method", "distance", "convention", "stencil_radius", "tol_gap", "max_iters", "level_tol",
                 "smallest_minimizer", "crop_margin", "band_cells", "truncate_distance", "check_every",
                 "require_certified", "max_steps", "workers"});
        SolverConfig& c = s.solver;
        auto integer = [&](const char* k) {
            const double v = rd.number(cj[k], Reader::sub(base, k));
            if (v != std::floor(v)) rd.fail(Reader::sub(base, k), "expected an integer");
            return int(v);
        };
        auto boolean = [&](const char* k) {
            if (!cj[k].is_boolean()) rd.fail(Reader::sub(base, k), "expected true or false");
            return cj[k].get<bool>();
        };
        if (cj.contains("method"))
            c.set_solver = pick<SetSolver>(rd, cj["method"], Reader::sub(base, "method"),
                                           {{"rof", SetSolver::Rof}, {"mincut", SetSolver::MinCut}});
        if (cj.contains("distance"))
            c.distance = pick<DistanceMethod>(rd, cj["distance"], Reader::sub(base, "distance"),
                                              {{"sweep", DistanceMethod::Sweep},
                                               {"bruteforce", DistanceMethod::BruteForce}});
        if (cj.contains("convention"))
            c.convention = pick<DistanceConvention>(rd, cj["convention"], Reader::sub(base, "convention"),
                                                    {{"cell_center", DistanceConvention::CellCenter},
                                                     {"half_cell", DistanceConvention::HalfCell},
                                                     {"subcell", DistanceConvention::Subcell}});
        if (cj.contains("stencil_radius")) c.stencil_radius = integer("stencil_radius");
        if (cj.contains("tol_gap")) c.tol_gap = rd.number(cj["tol_gap"], Reader::sub(base, "tol_gap"));
        if (cj.contains("max_iters")) c.max_iters = integer("max_iters");
        if (cj.contains("level_tol")) c.level_tol = rd.number(cj["level_tol"], Reader::sub(base, "level_tol"));
        if (cj.contains("smallest_minimizer")) c.smallest_minimizer = boolean("smallest_minimizer");
        if (cj.contains("crop_margin")) c.crop_margin = integer("crop_margin");
        if (cj.contains("band_cells")) c.band_cells = rd.number(cj["band_cells"], Reader::sub(base, "band_cells"));
        if (cj.contains("truncate_distance")) c.truncate_distance = boolean("truncate_distance");
        if (cj.contains("check_every")) c.check_every = integer("check_every");
        if (cj.contains("workers")) c.workers = integer("workers");
        if (cj.contains("require_certified")) s.require_certified = boolean("require_certified");
        if (cj.contains("max_steps")) s.max_steps = integer("max_steps");
        if (c.stencil_radius < 1) rd.fail(Reader::sub(base, "stencil_radius"), "must be at least 1");
        if (c.workers < 1) rd.fail(Reader::sub(base, "workers"), "must be at least 1");
    }

    if (j.contains("probes")) {
        s.probes = rd.numbers(j["probes"], {"probes"});
        for (double t : s.probes)
            if (t < 0 || t > s.t_max) rd.fail({"probes"}, "probe times must lie in [0, t_max]");
    }
    if (j.contains("output")) s.output = rd.string(j["output"], {"output"});

    try {
        const IndicatorField e = shape(s.shape, s.domain);
        require_compact(e, "initial shape");
    } catch (const std::invalid_argument& e) {
        rd.fail({"shape"}, e.what());
    } catch (const FrameViolation& e) {
        throw FrameViolation(source + ":" + std::to_string(rd.line_of({"shape"})) + ": " + e.what());
    }
    return s;
}

Scenario parse_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ScenarioError(path + ": cannot open scenario file", 0);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path);
}

IndicatorField initial_set(const Scenario& s) { return shape(s.shape, s.domain); }

}  // namespace atw
