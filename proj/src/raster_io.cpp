#include "atwflow/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace atw {

namespace {

static_assert(std::endian::native == std::endian::little, "raster I/O assumes a little-endian host");

template <class T>
void put(std::ofstream& f, T v)
{
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& f)
{
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

Raster header_for(const GridDomain& d, std::uint32_t comps)
{
    Raster r;
    r.n = {static_cast<std::uint32_t>(d.cells[0]), static_cast<std::uint32_t>(d.cells[1]),
           static_cast<std::uint32_t>(d.cells[2])};
    r.components = comps;
    r.spacing = d.spacing(0);
    return r;
}

void check_shape(const Raster& r, const GridDomain& dom)
{
    if (r.n[0] != std::uint32_t(dom.cells[0]) || r.n[1] != std::uint32_t(dom.cells[1]) ||
        r.n[2] != std::uint32_t(dom.cells[2]) || r.components != 1)
        throw std::runtime_error("raster does not match the scenario domain");
}

}  // namespace

void write_raster(const std::string& path, const Raster& r)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write("ATWF", 4);
    for (auto n : r.n) put<std::uint32_t>(f, n);
    put<std::uint32_t>(f, r.components);
    put<std::uint32_t>(f, 0);
    put<double>(f, r.spacing);
    f.write(reinterpret_cast<const char*>(r.values.data()), std::streamsize(r.values.size() * sizeof(double)));
    if (!f) throw std::runtime_error("write failed: " + path);
}

Raster read_raster(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "ATWF", 4) != 0) throw std::runtime_error(path + ": not an ATWF raster");
    Raster r;
    for (auto& n : r.n) n = get<std::uint32_t>(f);
    r.components = get<std::uint32_t>(f);
    get<std::uint32_t>(f);
    r.spacing = get<double>(f);
    const std::size_t count = std::size_t(r.n[0]) * r.n[1] * r.n[2] * r.components;
    r.values.resize(count);
    f.read(reinterpret_cast<char*>(r.values.data()), std::streamsize(count * sizeof(double)));
    if (!f) throw std::runtime_error(path + ": truncated raster");
    return r;
}

Raster to_raster(const ScalarField& s)
{
    Raster r = header_for(s.dom, 1);
    r.values = s.v;
    return r;
}

Raster to_raster(const IndicatorField& e)
{
    Raster r = header_for(e.dom, 1);
    r.values.assign(e.m.begin(), e.m.end());
    return r;
}

Raster to_raster(const VectorField& z)
{
    Raster r = header_for(z.dom, static_cast<std::uint32_t>(z.dom.dim));
    r.values = z.v;
    return r;
}

ScalarField scalar_from_raster(const Raster& r, const GridDomain& dom)
{
    check_shape(r, dom);
    ScalarField s(dom);
    s.v = r.values;
    return s;
}

IndicatorField indicator_from_raster(const Raster& r, const GridDomain& dom)
{
    check_shape(r, dom);
    IndicatorField e(dom);
    for (std::size_t i = 0; i < e.m.size(); ++i) e.m[i] = r.values[i] > 0.5;
    return e;
}

void write_pgm(const std::string& path, const ScalarField& f)
{
    if (f.dom.dim != 2) throw std::invalid_argument("pgm export needs a 2D field");
    std::ofstream o(path);
    if (!o) throw std::runtime_error("cannot write " + path);
    auto [lo, hi] = std::minmax_element(f.v.begin(), f.v.end());
    const double a = *lo, span = *hi > *lo ? *hi - *lo : 1.0;
    const int nx = f.dom.cells[0], ny = f.dom.cells[1];
    o << "P2\n" << nx << ' ' << ny << "\n255\n";
    for (int j = ny - 1; j >= 0; --j) {
        for (int i = 0; i < nx; ++i) {
            int g = static_cast<int>(std::lround(255.0 * (f.v[f.dom.index(i, j)] - a) / span));
            o << g << (i + 1 < nx ? ' ' : '\n');
        }
    }
}

void write_svg(const std::string& path, const GridDomain& dom, const std::vector<SvgLayer>& layers)
{
    std::ofstream o(path);
    if (!o) throw std::runtime_error("cannot write " + path);
    const double x0 = dom.origin[0], y0 = dom.origin[1], w = dom.extent[0], h = dom.extent[1];
    const double stroke = 0.5 * dom.min_spacing();
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << x0 << ' ' << -(y0 + h) << ' ' << w << ' ' << h
      << "\">\n";
    o << "<rect x=\"" << x0 << "\" y=\"" << -(y0 + h) << "\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"white\"/>\n";
    o.precision(10);
    for (const auto& layer : layers) {
        o << "<path";
        if (!layer.label.empty()) o << " id=\"" << layer.label << "\"";
        o << " fill=\"none\" stroke=\"" << layer.stroke << "\" stroke-width=\"" << stroke << "\" d=\"";
        for (const auto& pl : layer.lines) {
            for (std::size_t i = 0; i < pl.size(); ++i)
                o << (i == 0 ? "M" : "L") << pl[i][0] << ' ' << -pl[i][1] << ' ';
            o << "Z ";
        }
        o << "\"/>\n";
    }
    o << "</svg>\n";
}

}  // namespace atw
