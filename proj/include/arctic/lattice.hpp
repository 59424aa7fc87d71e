#ifndef ARCTIC_LATTICE_HPP
#define ARCTIC_LATTICE_HPP

#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "arctic/errors.hpp"

namespace arctic {

// Exact rational, used only for polygon vertex coordinates.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n) : num(n), den(1) {}  // NOLINT
    Rational(long long n, long long d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw invalid_argument_error("Rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    double as_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool positive() const { return num > 0; }

    // n * this, exact; throws scale_mismatch_error if not an integer.
    long long scaled_integer(long long n) const {
        long long p = n * num;
        if (p % den != 0)
            throw scale_mismatch_error("vertex coordinate " + std::to_string(num) + "/" +
                                       std::to_string(den) + " does not scale to an integer at n=" +
                                       std::to_string(n));
        return p / den;
    }

    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

struct RationalPoint {
    Rational x, y;
};

// Simple closed polygon, counterclockwise, every edge parallel to one of
// the three lattice axes (horizontal, vertical, or main diagonal), with
// the first vertex at the origin.
struct PolygonSpec {
    std::vector<RationalPoint> vertices;

    void validate() const;
};

struct HexagonSpec {
    Rational a, b, c;
};

// Six-vertex polygon (0,0),(a,0),(a+c,c),(a+c,b+c),(c,b+c),(0,b).
PolygonSpec hexagon_spec(const Rational& a, const Rational& b, const Rational& c);
inline PolygonSpec hexagon_spec(const HexagonSpec& h) { return hexagon_spec(h.a, h.b, h.c); }

// Integer point of the plane.
struct Vertex {
    int x = 0;
    int y = 0;
    bool operator==(const Vertex& o) const { return x == o.x && y == o.y; }
};

// The six lattice neighbors of (x, y):
// (x+1,y), (x-1,y), (x,y+1), (x,y-1), (x+1,y+1), (x-1,y-1).
inline constexpr int kNeighborDx[6] = {1, -1, 0, 0, 1, -1};
inline constexpr int kNeighborDy[6] = {0, 0, 1, -1, 1, -1};

// Finite simply connected induced subgraph of the triangular lattice
// obtained as the integer points of a scaled polygon.  Vertex membership
// is stored as a mask over the bounding box, so neighbor queries are O(1).
class LatticeDomain {
public:
    // All integer points of n * closure(spec).
    LatticeDomain(const PolygonSpec& spec, long long n);

    long long scale() const { return n_; }
    const std::vector<std::pair<long long, long long>>& scaled_polygon() const {
        return poly_;
    }

    int x0() const { return x0_; }
    int y0() const { return y0_; }
    int x1() const { return x1_; }
    int y1() const { return y1_; }
    int width() const { return x1_ - x0_ + 1; }
    int height() const { return y1_ - y0_ + 1; }

    bool contains(int x, int y) const {
        if (x < x0_ || x > x1_ || y < y0_ || y > y1_) return false;
        return in_[index(x, y)] != 0;
    }
    bool is_boundary(int x, int y) const {
        return contains(x, y) && boundary_[index(x, y)] != 0;
    }
    bool is_interior(int x, int y) const {
        return contains(x, y) && boundary_[index(x, y)] == 0;
    }

    // Unit triangle faces; an "up" face at (x,y) has corners
    // (x,y),(x+1,y),(x+1,y+1) and a "down" face (x,y),(x,y+1),(x+1,y+1).
    bool has_up_face(int x, int y) const {
        if (x < x0_ || x >= x1_ || y < y0_ || y >= y1_) return false;
        return up_face_[index(x, y)] != 0;
    }
    bool has_down_face(int x, int y) const {
        if (x < x0_ || x >= x1_ || y < y0_ || y >= y1_) return false;
        return down_face_[index(x, y)] != 0;
    }

    // Flat index inside the bounding box, valid for any point of the box.
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y - y0_) * static_cast<std::size_t>(width()) +
               static_cast<std::size_t>(x - x0_);
    }
    std::size_t box_size() const {
        return static_cast<std::size_t>(width()) * static_cast<std::size_t>(height());
    }

    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Vertex>& boundary_vertices() const { return boundary_vertices_; }
    const std::vector<Vertex>& interior_vertices() const { return interior_vertices_; }
    std::size_t face_count() const { return face_count_; }

    // Euclidean diameter of the vertex set.
    double diameter() const;

private:
    long long n_;
    std::vector<std::pair<long long, long long>> poly_;  // scaled integer vertices
    int x0_, y0_, x1_, y1_;
    std::vector<std::uint8_t> in_, boundary_, up_face_, down_face_;
    std::vector<Vertex> vertices_, boundary_vertices_, interior_vertices_;
    std::size_t face_count_ = 0;
};

using DomainPtr = std::shared_ptr<const LatticeDomain>;

// Boundary vertex labels, normalized to 0 at the origin.
class BoundaryHeightFn {
public:
    BoundaryHeightFn() = default;
    BoundaryHeightFn(DomainPtr domain, std::vector<int> values_by_box_index)
        : domain_(std::move(domain)), values_(std::move(values_by_box_index)) {}

    const DomainPtr& domain() const { return domain_; }
    int at(int x, int y) const { return values_[domain_->index(x, y)]; }
    const std::vector<int>& raw() const { return values_; }

private:
    DomainPtr domain_;
    std::vector<int> values_;  // only boundary entries are meaningful
};

DomainPtr build_domain(const PolygonSpec& spec, long long n);

// The unique boundary height function with value 0 at the origin.  Along
// each side of the domain the increment per step is forced by the side's
// frozen slope.  Throws untileable_error if the forced increments clash.
BoundaryHeightFn boundary_height(const DomainPtr& domain);

class HeightFunction;  // tiling.hpp

// Pointwise minimal and maximal extensions of the boundary data.
std::pair<HeightFunction, HeightFunction> extremal_heights(const DomainPtr& domain,
                                                           const BoundaryHeightFn& bh);

bool is_tileable(const DomainPtr& domain, const BoundaryHeightFn& bh);

}  // namespace arctic

#endif
