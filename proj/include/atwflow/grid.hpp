#pragma once

#include "atwflow/anisotropy.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace atw {

// Raised when a set has member cells in the two outermost layers.
struct FrameViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Uniform Cartesian box of cells. Axis 0 varies fastest in linear indices.
struct GridDomain {
    int dim = 2;
    std::array<double, 3> origin{0, 0, 0};
    std::array<double, 3> extent{1, 1, 1};
    std::array<int, 3> cells{4, 4, 1};

    static GridDomain make(const std::vector<double>& origin, const std::vector<double>& extent,
                           const std::vector<int>& cells);

    double spacing(int axis) const { return extent[axis] / cells[axis]; }
    double min_spacing() const;
    double cell_volume() const;
    std::size_t size() const { return std::size_t(cells[0]) * cells[1] * cells[2]; }
    std::size_t index(int i, int j, int k = 0) const
    {
        return (std::size_t(k) * cells[1] + j) * cells[0] + i;
    }
    std::array<int, 3> coords(std::size_t idx) const;
    bool contains(int i, int j, int k) const
    {
        return i >= 0 && j >= 0 && k >= 0 && i < cells[0] && j < cells[1] && k < cells[2];
    }
    Vec center(std::size_t idx) const;
    Vec center(int i, int j, int k = 0) const;
    // Linear stride of an integer offset.
    std::ptrdiff_t stride(const std::array<int, 3>& off) const
    {
        return (std::ptrdiff_t(off[2]) * cells[1] + off[1]) * cells[0] + off[0];
    }
    // True for cells in the two outermost layers along any active axis.
    bool in_frame(int i, int j, int k) const;
    bool operator==(const GridDomain& o) const;
};

struct ScalarField {
    GridDomain dom;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const GridDomain& d, double fill = 0) : dom(d), v(d.size(), fill) {}
    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
};

struct IndicatorField {
    GridDomain dom;
    std::vector<std::uint8_t> m;

    IndicatorField() = default;
    explicit IndicatorField(const GridDomain& d, bool fill = false) : dom(d), m(d.size(), fill ? 1 : 0) {}
    bool operator[](std::size_t i) const { return m[i] != 0; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
    bool operator==(const IndicatorField& o) const { return dom == o.dom && m == o.m; }
};

// dim components per cell, interleaved.
struct VectorField {
    GridDomain dom;
    std::vector<double> v;

    VectorField() = default;
    explicit VectorField(const GridDomain& d) : dom(d), v(d.size() * d.dim, 0.0) {}
    double& at(std::size_t cell, int c) { return v[cell * dom.dim + c]; }
    double at(std::size_t cell, int c) const { return v[cell * dom.dim + c]; }
    Vec get(std::size_t cell) const;
};

// Half-open box of cell indices.
struct Box {
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{0, 0, 0};
    bool valid() const { return hi[0] > lo[0] && hi[1] > lo[1] && hi[2] > lo[2]; }
    std::size_t size() const
    {
        return valid() ? std::size_t(hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]) : 0;
    }
    bool operator==(const Box& o) const { return lo == o.lo && hi == o.hi; }
};

Box full_box(const GridDomain& dom);
// Bounding box of member cells; invalid when empty.
Box bounding_box(const IndicatorField& e);
Box grow(const Box& b, int margin, const GridDomain& dom);

// Throws FrameViolation if any member lies in the two outer layers.
void require_compact(const IndicatorField& e, const std::string& what = "set");
bool touches_frame(const IndicatorField& e);

double volume(const IndicatorField& e);
IndicatorField set_union(const IndicatorField& a, const IndicatorField& b);
IndicatorField set_intersection(const IndicatorField& a, const IndicatorField& b);
IndicatorField set_difference(const IndicatorField& a, const IndicatorField& b);
bool is_subset(const IndicatorField& a, const IndicatorField& b);
// Shift by whole cells; cells shifted out of the grid are dropped.
IndicatorField shift(const IndicatorField& e, const std::array<int, 3>& by);
// Members whose whole max-norm neighbourhood of the given radius is inside e.
IndicatorField erode(const IndicatorField& e, int radius);
// Members having a non-member among their 3^d neighbours.
IndicatorField boundary_cells(const IndicatorField& e);

VectorField grad_forward(const ScalarField& f);
ScalarField div_backward(const VectorField& p);

enum class ShapeKind { Ball, Rectangle, Cross, Wulff, DiskUnion };

struct ShapeSpec {
    ShapeKind kind = ShapeKind::Ball;
    std::vector<double> center;               // ball, wulff
    double radius = 0;                        // ball, wulff
    std::vector<double> lo, hi;               // rectangle
    double L = 2;                             // cross: arms reach +-L, half-width 1
    Anisotropy phi;                           // wulff
    std::vector<std::vector<double>> centers;  // disk union
    std::vector<double> radii;
};

// Cell is a member iff its center lies in the closed shape.
IndicatorField shape(const ShapeSpec& spec, const GridDomain& dom);

}  // namespace atw
