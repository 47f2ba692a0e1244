#include "atwflow/mincut.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace atw {

namespace {

// Boykov-Kolmogorov augmenting paths with search trees reused between
// augmentations. Arcs come in sister pairs stored side by side.
class MaxFlow {
public:
    explicit MaxFlow(int n) : nodes_(n) {}

    void add_terminal(int i, double to_source, double to_sink)
    {
        double delta = nodes_[i].tr;
        if (delta > 0) to_source += delta;
        else to_sink -= delta;
        flow_ += std::min(to_source, to_sink);
        nodes_[i].tr = to_source - to_sink;
    }

    void add_pair(int i, int j, double cap, double rev_cap)
    {
        const int a = int(arcs_.size());
        arcs_.push_back({j, nodes_[i].first, cap});
        nodes_[i].first = a;
        arcs_.push_back({i, nodes_[j].first, rev_cap});
        nodes_[j].first = a + 1;
    }

    double solve();

    // Nodes reachable from the source in the residual graph.
    std::vector<std::uint8_t> source_reachable() const;
    // Nodes that can reach the sink in the residual graph.
    std::vector<std::uint8_t> sink_reaching() const;

private:
    static constexpr int kNone = -1, kTerminal = -2, kOrphan = -3;
    static constexpr int kInfD = std::numeric_limits<int>::max();

    struct Node {
        int first = -1;
        int parent = kNone;
        int next = -1;  // active queue link; self at the tail
        int ts = 0, dist = 0;
        bool sink = false;
        double tr = 0;
    };
    struct Arc {
        int head, next;
        double cap;  // residual
    };
    static int sister(int a) { return a ^ 1; }

    void set_active(int i)
    {
        if (nodes_[i].next >= 0) return;
        if (qtail_ >= 0) nodes_[qtail_].next = i;
        else qhead_ = i;
        qtail_ = i;
        nodes_[i].next = i;
    }
    int next_active()
    {
        while (qhead_ >= 0) {
            int i = qhead_;
            qhead_ = nodes_[i].next == i ? -1 : nodes_[i].next;
            if (qhead_ < 0) qtail_ = -1;
            nodes_[i].next = -1;
            if (nodes_[i].parent != kNone) return i;
        }
        return -1;
    }
    void augment(int middle);
    void adopt_source(int i);
    void adopt_sink(int i);

    std::vector<Node> nodes_;
    std::vector<Arc> arcs_;
    std::deque<int> orphans_;
    int qhead_ = -1, qtail_ = -1;
    int time_ = 0;
    double flow_ = 0;
};

double MaxFlow::solve()
{
    for (int i = 0; i < int(nodes_.size()); ++i) {
        Node& n = nodes_[i];
        if (n.tr > 0) {
            n.sink = false;
            n.parent = kTerminal;
            set_active(i);
            n.dist = 1;
        } else if (n.tr < 0) {
            n.sink = true;
            n.parent = kTerminal;
            set_active(i);
            n.dist = 1;
        }
    }
    int current = -1;
    while (true) {
        int i = current;
        if (i >= 0) {
            nodes_[i].next = -1;
            if (nodes_[i].parent == kNone) i = -1;
        }
        if (i < 0) {
            i = next_active();
            if (i < 0) break;
        }
        int middle = -1;
        Node& ni = nodes_[i];
        for (int a = ni.first; a >= 0; a = arcs_[a].next) {
            const bool open = ni.sink ? arcs_[sister(a)].cap > 0 : arcs_[a].cap > 0;
            if (!open) continue;
            const int j = arcs_[a].head;
            Node& nj = nodes_[j];
            if (nj.parent == kNone) {
                nj.sink = ni.sink;
                nj.parent = sister(a);
                nj.ts = ni.ts;
                nj.dist = ni.dist + 1;
                set_active(j);
            } else if (nj.sink != ni.sink) {
                middle = ni.sink ? sister(a) : a;
                break;
            } else if (nj.ts <= ni.ts && nj.dist > ni.dist) {
                nj.parent = sister(a);
                nj.ts = ni.ts;
                nj.dist = ni.dist + 1;
            }
        }
        ++time_;
        if (middle >= 0) {
            ni.next = i;  // keep i active while it is processed again
            current = i;
            augment(middle);
            while (!orphans_.empty()) {
                int o = orphans_.front();
                orphans_.pop_front();
                if (nodes_[o].sink) adopt_sink(o);
                else adopt_source(o);
            }
        } else {
            current = -1;
        }
    }
    return flow_;
}

void MaxFlow::augment(int middle)
{
    double bottleneck = arcs_[middle].cap;
    int i;
    for (i = arcs_[sister(middle)].head;;) {
        int a = nodes_[i].parent;
        if (a == kTerminal) break;
        bottleneck = std::min(bottleneck, arcs_[sister(a)].cap);
        i = arcs_[a].head;
    }
    bottleneck = std::min(bottleneck, nodes_[i].tr);
    for (i = arcs_[middle].head;;) {
        int a = nodes_[i].parent;
        if (a == kTerminal) break;
        bottleneck = std::min(bottleneck, arcs_[a].cap);
        i = arcs_[a].head;
    }
    bottleneck = std::min(bottleneck, -nodes_[i].tr);

    arcs_[sister(middle)].cap += bottleneck;
    arcs_[middle].cap -= bottleneck;
    for (i = arcs_[sister(middle)].head;;) {
        int a = nodes_[i].parent;
        if (a == kTerminal) break;
        arcs_[a].cap += bottleneck;
        arcs_[sister(a)].cap -= bottleneck;
        if (arcs_[sister(a)].cap <= 0) {
            arcs_[sister(a)].cap = 0;
            nodes_[i].parent = kOrphan;
            orphans_.push_front(i);
        }
        i = arcs_[a].head;
    }
    nodes_[i].tr -= bottleneck;
    if (nodes_[i].tr <= 0) {
        nodes_[i].tr = 0;
        nodes_[i].parent = kOrphan;
        orphans_.push_front(i);
    }
    for (i = arcs_[middle].head;;) {
        int a = nodes_[i].parent;
        if (a == kTerminal) break;
        arcs_[sister(a)].cap += bottleneck;
        arcs_[a].cap -= bottleneck;
        if (arcs_[a].cap <= 0) {
            arcs_[a].cap = 0;
            nodes_[i].parent = kOrphan;
            orphans_.push_front(i);
        }
        i = arcs_[a].head;
    }
    nodes_[i].tr += bottleneck;
    if (nodes_[i].tr >= 0) {
        nodes_[i].tr = 0;
        nodes_[i].parent = kOrphan;
        orphans_.push_front(i);
    }
    flow_ += bottleneck;
}

void MaxFlow::adopt_source(int i)
{
    int best = kNone, dmin = kInfD;
    for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
        if (arcs_[sister(a0)].cap <= 0) continue;
        int j = arcs_[a0].head;
        if (nodes_[j].sink || nodes_[j].parent == kNone) continue;
        int d = 0;
        while (true) {
            if (nodes_[j].ts == time_) {
                d += nodes_[j].dist;
                break;
            }
            int a = nodes_[j].parent;
            ++d;
            if (a == kTerminal) {
                nodes_[j].ts = time_;
                nodes_[j].dist = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInfD;
                break;
            }
            j = arcs_[a].head;
        }
        if (d < kInfD) {
            if (d < dmin) {
                best = a0;
                dmin = d;
            }
            for (j = arcs_[a0].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
                nodes_[j].ts = time_;
                nodes_[j].dist = d--;
            }
        }
    }
    nodes_[i].parent = best;
    if (best != kNone) {
        nodes_[i].ts = time_;
        nodes_[i].dist = dmin + 1;
        return;
    }
    for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
        int j = arcs_[a0].head;
        int a = nodes_[j].parent;
        if (nodes_[j].sink || a == kNone) continue;
        if (arcs_[sister(a0)].cap > 0) set_active(j);
        if (a != kTerminal && a != kOrphan && arcs_[a].head == i) {
            nodes_[j].parent = kOrphan;
            orphans_.push_back(j);
        }
    }
}

void MaxFlow::adopt_sink(int i)
{
    int best = kNone, dmin = kInfD;
    for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
        if (arcs_[a0].cap <= 0) continue;
        int j = arcs_[a0].head;
        if (!nodes_[j].sink || nodes_[j].parent == kNone) continue;
        int d = 0;
        while (true) {
            if (nodes_[j].ts == time_) {
                d += nodes_[j].dist;
                break;
            }
            int a = nodes_[j].parent;
            ++d;
            if (a == kTerminal) {
                nodes_[j].ts = time_;
                nodes_[j].dist = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInfD;
                break;
            }
            j = arcs_[a].head;
        }
        if (d < kInfD) {
            if (d < dmin) {
                best = a0;
                dmin = d;
            }
            for (j = arcs_[a0].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
                nodes_[j].ts = time_;
                nodes_[j].dist = d--;
            }
        }
    }
    nodes_[i].parent = best;
    if (best != kNone) {
        nodes_[i].ts = time_;
        nodes_[i].dist = dmin + 1;
        return;
    }
    for (int a0 = nodes_[i].first; a0 >= 0; a0 = arcs_[a0].next) {
        int j = arcs_[a0].head;
        int a = nodes_[j].parent;
        if (!nodes_[j].sink || a == kNone) continue;
        if (arcs_[a0].cap > 0) set_active(j);
        if (a != kTerminal && a != kOrphan && arcs_[a].head == i) {
            nodes_[j].parent = kOrphan;
            orphans_.push_back(j);
        }
    }
}

std::vector<std::uint8_t> MaxFlow::source_reachable() const
{
    std::vector<std::uint8_t> seen(nodes_.size(), 0);
    std::vector<int> stack;
    for (int i = 0; i < int(nodes_.size()); ++i)
        if (nodes_[i].tr > 0) {
            seen[i] = 1;
            stack.push_back(i);
        }
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        for (int a = nodes_[i].first; a >= 0; a = arcs_[a].next) {
            int j = arcs_[a].head;
            if (!seen[j] && arcs_[a].cap > 0) {
                seen[j] = 1;
                stack.push_back(j);
            }
        }
    }
    return seen;
}

std::vector<std::uint8_t> MaxFlow::sink_reaching() const
{
    std::vector<std::uint8_t> seen(nodes_.size(), 0);
    std::vector<int> stack;
    for (int i = 0; i < int(nodes_.size()); ++i)
        if (nodes_[i].tr < 0) {
            seen[i] = 1;
            stack.push_back(i);
        }
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        for (int a = nodes_[i].first; a >= 0; a = arcs_[a].next) {
            int j = arcs_[a].head;
            if (!seen[j] && arcs_[sister(a)].cap > 0) {
                seen[j] = 1;
                stack.push_back(j);
            }
        }
    }
    return seen;
}

}  // namespace

CutResult min_cut_set(const ScalarField& d, double h, const TvStencil& st, double band, bool smallest)
{
    const GridDomain& dom = d.dom;
    if (!(st.dom == dom)) throw std::invalid_argument("min_cut_set: stencil built for another grid");
    if (!(h > 0)) throw std::invalid_argument("min_cut_set: h must be positive");
    double dmax = 0;
    for (double v : d.v) dmax = std::max(dmax, std::abs(v));
    band = std::max(band, 1e-300);

    auto held_member = [&](std::size_t i) { return smallest ? d.v[i] < 0 : d.v[i] <= 0; };

    while (true) {
        // free cells: inside the band and off the frame
        std::vector<int> node(dom.size(), -1);
        std::vector<std::size_t> cell;
        for (int k = 0; k < dom.cells[2]; ++k)
            for (int j = 0; j < dom.cells[1]; ++j)
                for (int i = 0; i < dom.cells[0]; ++i) {
                    const std::size_t c = dom.index(i, j, k);
                    if (dom.in_frame(i, j, k) || std::abs(d.v[c]) > band) continue;
                    node[c] = int(cell.size());
                    cell.push_back(c);
                }

        MaxFlow g(int(cell.size()));
        for (std::size_t n = 0; n < cell.size(); ++n) {
            const double u = d.v[cell[n]] / h;
            if (u > 0) g.add_terminal(int(n), 0, u);
            else g.add_terminal(int(n), -u, 0);
        }
        for (std::size_t n = 0; n < cell.size(); ++n) {
            const auto c = dom.coords(cell[n]);
            for (const auto& e : st.edges) {
                for (int sgn : {1, -1}) {
                    const int i = c[0] + sgn * e.off[0], j = c[1] + sgn * e.off[1], k = c[2] + sgn * e.off[2];
                    if (!dom.contains(i, j, k)) continue;
                    const std::size_t q = dom.index(i, j, k);
                    // Cost of (member, non-member) across the edge is a when the
                    // member sits at the tail of off, b at the head.
                    const double out_cost = sgn > 0 ? e.a : e.b;  // this cell member, q not
                    const double in_cost = sgn > 0 ? e.b : e.a;   // q member, this cell not
                    if (node[q] >= 0) {
                        if (sgn > 0) g.add_pair(int(n), node[q], out_cost, in_cost);
                    } else if (held_member(q)) {
                        g.add_terminal(int(n), in_cost, 0);
                    } else {
                        g.add_terminal(int(n), 0, out_cost);
                    }
                }
            }
        }
        CutResult r;
        r.flow = g.solve();
        r.free_cells = cell.size();
        r.band = band;
        r.set = IndicatorField(dom);
        for (std::size_t i = 0; i < dom.size(); ++i) r.set.m[i] = node[i] < 0 && held_member(i);
        if (smallest) {
            auto s = g.source_reachable();
            for (std::size_t n = 0; n < cell.size(); ++n) r.set.m[cell[n]] = s[n];
        } else {
            auto t = g.sink_reaching();
            for (std::size_t n = 0; n < cell.size(); ++n) r.set.m[cell[n]] = !t[n];
        }

        // cut value of the returned set, restricted to terms involving free cells
        double cut = 0;
        for (std::size_t n = 0; n < cell.size(); ++n) {
            const std::size_t c0 = cell[n];
            const double u = d.v[c0] / h;
            if (r.set.m[c0]) cut += std::max(u, 0.0);
            else cut += std::max(-u, 0.0);
            const auto c = dom.coords(c0);
            for (const auto& e : st.edges)
                for (int sgn : {1, -1}) {
                    const int i = c[0] + sgn * e.off[0], j = c[1] + sgn * e.off[1], k = c[2] + sgn * e.off[2];
                    if (!dom.contains(i, j, k)) continue;
                    const std::size_t q = dom.index(i, j, k);
                    if (node[q] >= 0 && sgn < 0) continue;
                    if (r.set.m[c0] && !r.set.m[q]) cut += sgn > 0 ? e.a : e.b;
                    if (!r.set.m[c0] && r.set.m[q]) cut += sgn > 0 ? e.b : e.a;
                }
        }
        r.cut = cut;

        // The cut must stay clear of held cells that are not on the frame.
        bool clear = true;
        for (std::size_t n = 0; n < cell.size() && clear; ++n) {
            const auto c = dom.coords(cell[n]);
            for (const auto& e : st.edges) {
                for (int sgn : {1, -1}) {
                    const int i = c[0] + sgn * e.off[0], j = c[1] + sgn * e.off[1], k = c[2] + sgn * e.off[2];
                    if (!dom.contains(i, j, k) || dom.in_frame(i, j, k)) continue;
                    const std::size_t q = dom.index(i, j, k);
                    if (node[q] < 0 && r.set.m[q] != r.set.m[cell[n]]) clear = false;
                }
            }
        }
        if (clear || band >= dmax) return r;
        band *= 2;
    }
}

}  // namespace atw
