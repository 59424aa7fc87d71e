#ifndef ARCTIC_IO_HPP
#define ARCTIC_IO_HPP

#include <functional>
#include <string>
#include <vector>

#include "arctic/limitshape.hpp"
#include "arctic/tiling.hpp"

namespace arctic {

// Writes via a temporary file and an atomic rename; no partial files are
// left behind on failure.
void atomic_write_file(const std::string& path, const std::string& content);

std::string height_to_csv(const HeightFunction& h);
std::string continuum_to_csv(const ContinuumHeight& hc);

// Lozenge rendering with the three types in three fill shades.
std::string tiling_to_svg(const Tiling& t);

// Arctic polyline over the scaled polygon, with an optional reference
// conic overlay.
std::string arctic_overlay_svg(const ContinuumHeight& hc, const LiquidRegion& liq,
                               const Conic* reference = nullptr);

// Histogram of samples against the reference CDF's density.
std::string histogram_svg(const std::vector<double>& samples, double lo, double hi, int bins,
                          const std::function<double(double)>& cdf);

// Domain specs as JSON: {"polygon": [[x,y],...], "n": k} or
// {"hexagon": [a,b,c], "n": k}.
std::string domain_spec_to_json(const PolygonSpec& spec, long long n);
void domain_spec_from_json(const std::string& text, PolygonSpec& spec, long long& n);

}  // namespace arctic

#endif
