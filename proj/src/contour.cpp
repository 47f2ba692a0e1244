#include "atwflow/io.hpp"

#include <map>
#include <utility>

namespace atw {

// Marching squares on the dual lattice whose nodes are cell centers.
// Crossing points sit at edge midpoints, so they are stored in doubled
// integer coordinates (2*i+1 between nodes i and i+1) and linked exactly.
std::vector<Polyline> contour_extract(const IndicatorField& e)
{
    if (e.dom.dim != 2) throw std::invalid_argument("contour_extract needs a 2D set");
    const auto& d = e.dom;
    const int nx = d.cells[0], ny = d.cells[1];
    auto val = [&](int i, int j) { return i >= 0 && j >= 0 && i < nx && j < ny && e.m[d.index(i, j)]; };

    using P = std::pair<int, int>;
    // Directed segments with members on the right; next[start] = end.
    std::map<P, std::vector<P>> next;
    auto seg = [&](P a, P b) { next[a].push_back(b); };

    for (int j = -1; j < ny; ++j)
        for (int i = -1; i < nx; ++i) {
            const bool v00 = val(i, j), v10 = val(i + 1, j), v11 = val(i + 1, j + 1), v01 = val(i, j + 1);
            const int code = v00 | (v10 << 1) | (v11 << 2) | (v01 << 3);
            if (code == 0 || code == 15) continue;
            // midpoints in doubled coords: bottom, right, top, left
            const P B{2 * i + 3, 2 * j + 2}, R{2 * i + 4, 2 * j + 3}, T{2 * i + 3, 2 * j + 4}, L{2 * i + 2, 2 * j + 3};
            switch (code) {
            case 1: seg(L, B); break;
            case 2: seg(B, R); break;
            case 3: seg(L, R); break;
            case 4: seg(R, T); break;
            case 5: seg(L, B); seg(R, T); break;  // saddle: members kept apart
            case 6: seg(B, T); break;
            case 7: seg(L, T); break;
            case 8: seg(T, L); break;
            case 9: seg(T, B); break;
            case 10: seg(B, R); seg(T, L); break;
            case 11: seg(T, R); break;
            case 12: seg(R, L); break;
            case 13: seg(R, B); break;
            case 14: seg(B, L); break;
            default: break;
            }
        }

    // Coordinates of a doubled-lattice point: node index i sits at 2*i+2.
    auto pos = [&](const P& p) {
        Vec x(2);
        x[0] = d.origin[0] + (0.5 * (p.first - 2) + 0.5) * d.spacing(0);
        x[1] = d.origin[1] + (0.5 * (p.second - 2) + 0.5) * d.spacing(1);
        return x;
    };

    std::vector<Polyline> out;
    while (!next.empty()) {
        auto it = next.begin();
        const P start = it->first;
        std::vector<P> loop{start};
        P cur = start;
        while (true) {
            auto f = next.find(cur);
            if (f == next.end()) break;
            P nxt = f->second.back();
            f->second.pop_back();
            if (f->second.empty()) next.erase(f);
            if (nxt == start) break;
            loop.push_back(nxt);
            cur = nxt;
        }
        // merge collinear vertices
        std::vector<P> corners;
        const std::size_t n = loop.size();
        for (std::size_t k = 0; k < n; ++k) {
            const P& a = loop[(k + n - 1) % n];
            const P& b = loop[k];
            const P& c = loop[(k + 1) % n];
            long cross = long(b.first - a.first) * (c.second - b.second) - long(b.second - a.second) * (c.first - b.first);
            if (cross != 0 || n <= 2) corners.push_back(b);
        }
        Polyline pl;
        for (const auto& p : corners) pl.push_back(pos(p));
        out.push_back(std::move(pl));
    }
    return out;
}

double polyline_length(const Polyline& p)
{
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += (p[(i + 1) % p.size()] - p[i]).norm();
    return s;
}

}  // namespace atw
