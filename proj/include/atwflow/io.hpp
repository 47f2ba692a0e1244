#pragma once

#include "atwflow/grid.hpp"

#include <string>
#include <vector>

namespace atw {

// Binary raster: 32-byte header then little-endian f64 values, row-major
// (axis 0 fastest), components interleaved for vector fields.
//   bytes 0-3   "ATWF"
//   bytes 4-15  uint32 nx, ny, nz
//   bytes 16-19 uint32 components
//   bytes 20-23 uint32 reserved (0)
//   bytes 24-31 f64 spacing along axis 0
struct Raster {
    std::array<std::uint32_t, 3> n{0, 0, 1};
    std::uint32_t components = 1;
    double spacing = 1;
    std::vector<double> values;
};

void write_raster(const std::string& path, const Raster& r);
Raster read_raster(const std::string& path);

Raster to_raster(const ScalarField& f);
Raster to_raster(const IndicatorField& e);
Raster to_raster(const VectorField& z);
// Rebuilds fields on a known domain; throws if the sizes disagree.
ScalarField scalar_from_raster(const Raster& r, const GridDomain& dom);
IndicatorField indicator_from_raster(const Raster& r, const GridDomain& dom);

// ASCII PGM (P2) of a 2D field, values mapped linearly to 0..255, top row = largest y.
void write_pgm(const std::string& path, const ScalarField& f);

using Polyline = std::vector<Vec>;

// Closed contours of a 2D set by marching squares on cell centers
// (threshold 1/2, midpoint crossings). Saddles separate diagonal members.
// Collinear consecutive segments are merged.
std::vector<Polyline> contour_extract(const IndicatorField& e);
double polyline_length(const Polyline& p);

// Minimal SVG with one path per layer; each layer is a list of closed polylines.
struct SvgLayer {
    std::vector<Polyline> lines;
    std::string stroke = "black";
    std::string label;
};
void write_svg(const std::string& path, const GridDomain& dom, const std::vector<SvgLayer>& layers);

}  // namespace atw
