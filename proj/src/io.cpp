#include "arctic/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "arctic/errors.hpp"

namespace arctic {

void atomic_write_file(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw error("cannot open " + tmp + " for writing");
        out << content;
        if (!out) throw error("write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw error("rename failed for " + path);
    }
}

std::string height_to_csv(const HeightFunction& h) {
    std::ostringstream out;
    out << "x,y,H\n";
    for (const Vertex& v : h.domain()->vertices())
        out << v.x << "," << v.y << "," << h.at(v.x, v.y) << "\n";
    return out.str();
}

std::string continuum_to_csv(const ContinuumHeight& hc) {
    std::ostringstream out;
    out << "x,y,H\n";
    const LatticeDomain& d = *hc.grid();
    const double m = hc.mesh();
    for (const Vertex& v : d.vertices())
        out << v.x * m << "," << v.y * m << "," << hc.at_node(v.x, v.y) << "\n";
    return out.str();
}

namespace {

// The lattice is drawn in sheared plane coordinates so lozenges render as
// actual rhombi: (x, y) -> (x - y/2, y * sqrt(3)/2).
void shear_point(double x, double y, double& px, double& py) {
    px = x - 0.5 * y;
    py = y * 0.8660254037844386;
}

void svg_polygon(std::ostringstream& out, const std::vector<std::pair<double, double>>& pts,
                 const char* fill) {
    out << "<polygon points=\"";
    for (auto [x, y] : pts) {
        double px, py;
        shear_point(x, y, px, py);
        out << px << "," << -py << " ";
    }
    out << "\" fill=\"" << fill << "\" stroke=\"#333\" stroke-width=\"0.03\"/>\n";
}

}  // namespace

std::string tiling_to_svg(const Tiling& t) {
    const LatticeDomain& d = *t.domain();
    std::ostringstream out;
    double w = d.width() + d.height();
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << d.x0() - d.y1() - 1 << " "
        << -(d.y1() + 1) << " " << w + 2 << " " << d.height() + 2 << "\">\n";
    for (const Lozenge& l : t.lozenges()) {
        double x = l.x, y = l.y;
        std::vector<std::pair<double, double>> pts;
        const char* fill = "#cccccc";
        switch (l.type) {
            case LozengeType::kType1:
                pts = {{x, y - 1}, {x, y}, {x + 1, y + 1}, {x + 1, y}};
                fill = "#9ecae1";
                break;
            case LozengeType::kType2:
                pts = {{x, y}, {x + 1, y}, {x + 2, y + 1}, {x + 1, y + 1}};
                fill = "#fdae6b";
                break;
            case LozengeType::kType3:
                pts = {{x, y}, {x + 1, y}, {x + 1, y + 1}, {x, y + 1}};
                fill = "#a1d99b";
                break;
        }
        svg_polygon(out, pts, fill);
    }
    out << "</svg>\n";
    return out.str();
}

std::string arctic_overlay_svg(const ContinuumHeight& hc, const LiquidRegion& liq,
                               const Conic* reference) {
    const LatticeDomain& d = *hc.grid();
    const double m = hc.mesh();
    std::ostringstream out;
    double x0 = d.x0() * m, y0 = d.y0() * m, x1 = d.x1() * m, y1 = d.y1() * m;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << x0 - 0.1 << " "
        << -(y1 + 0.1) << " " << (x1 - x0) + 0.2 << " " << (y1 - y0) + 0.2 << "\">\n";
    // Domain outline.
    out << "<polygon points=\"";
    for (auto [px, py] : d.scaled_polygon()) out << px * m << "," << -py * m << " ";
    out << "\" fill=\"none\" stroke=\"#000\" stroke-width=\"0.01\"/>\n";
    // Arctic polyline.
    out << "<polyline points=\"";
    for (const auto& p : liq.arctic_polyline) out << p[0] << "," << -p[1] << " ";
    out << "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"0.012\"/>\n";
    if (reference) {
        out << "<polyline points=\"";
        for (int k = 0; k <= 720; ++k) {
            double y = y0 + (y1 - y0) * k / 720.0;
            auto xs = reference->solve_x(y);
            if (xs.size() == 2) out << xs[0] << "," << -y << " ";
        }
        for (int k = 720; k >= 0; --k) {
            double y = y0 + (y1 - y0) * k / 720.0;
            auto xs = reference->solve_x(y);
            if (xs.size() == 2) out << xs[1] << "," << -y << " ";
        }
        out << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"0.008\" stroke-dasharray=\"0.03\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string histogram_svg(const std::vector<double>& samples, double lo, double hi, int bins,
                          const std::function<double(double)>& cdf) {
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    double width = (hi - lo) / bins;
    for (double s : samples) {
        int b = static_cast<int>((s - lo) / width);
        if (b >= 0 && b < bins) counts[static_cast<std::size_t>(b)] += 1.0;
    }
    double norm = samples.empty() ? 1.0 : static_cast<double>(samples.size()) * width;
    double peak = 1e-9;
    for (double& c : counts) {
        c /= norm;
        peak = std::max(peak, c);
    }
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 360\">\n";
    auto px = [&](double x) { return 40.0 + 560.0 * (x - lo) / (hi - lo); };
    auto py = [&](double y) { return 330.0 - 300.0 * y / (1.2 * peak); };
    for (int b = 0; b < bins; ++b) {
        double x = lo + b * width;
        out << "<rect x=\"" << px(x) << "\" y=\"" << py(counts[static_cast<std::size_t>(b)])
            << "\" width=\"" << 560.0 * width / (hi - lo) << "\" height=\""
            << 330.0 - py(counts[static_cast<std::size_t>(b)])
            << "\" fill=\"#9ecae1\" stroke=\"#333\" stroke-width=\"0.5\"/>\n";
    }
    out << "<polyline points=\"";
    for (int k = 0; k <= 256; ++k) {
        double x = lo + (hi - lo) * k / 256.0;
        double h = 1e-4 * (hi - lo);
        double dens = (cdf(std::min(x + h, hi)) - cdf(std::max(x - h, lo))) / (2 * h);
        out << px(x) << "," << py(dens) << " ";
    }
    out << "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
    out << "</svg>\n";
    return out.str();
}

std::string domain_spec_to_json(const PolygonSpec& spec, long long n) {
    nlohmann::json j;
    j["format"] = 1;
    j["polygon"] = nlohmann::json::array();
    for (const auto& v : spec.vertices)
        j["polygon"].push_back(nlohmann::json::array({v.x.as_double(), v.y.as_double()}));
    j["n"] = n;
    return j.dump(2);
}

void domain_spec_from_json(const std::string& text, PolygonSpec& spec, long long& n) {
    nlohmann::json j = nlohmann::json::parse(text);
    n = j.at("n").get<long long>();
    spec.vertices.clear();
    if (j.contains("hexagon")) {
        auto arr = j.at("hexagon");
        auto rat = [](const nlohmann::json& x) {
            if (x.is_number_integer()) return Rational(x.get<long long>());
            double v = x.get<double>();
            long long den = 720720;  // clears every denominator up to 16
            return Rational(static_cast<long long>(std::llround(v * den)), den);
        };
        spec = hexagon_spec(rat(arr.at(0)), rat(arr.at(1)), rat(arr.at(2)));
        return;
    }
    for (const auto& v : j.at("polygon")) {
        auto rat = [](const nlohmann::json& x) {
            if (x.is_number_integer()) return Rational(x.get<long long>());
            double val = x.get<double>();
            long long den = 720720;
            return Rational(static_cast<long long>(std::llround(val * den)), den);
        };
        spec.vertices.push_back({rat(v.at(0)), rat(v.at(1))});
    }
    spec.validate();
}

}  // namespace arctic
