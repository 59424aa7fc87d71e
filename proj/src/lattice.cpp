#include "arctic/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "arctic/tiling.hpp"

namespace arctic {

namespace {

// Orientation of the edge direction: 0 horizontal, 1 vertical, 2 diagonal.
int edge_axis(long long dx, long long dy) {
    if (dy == 0 && dx != 0) return 0;
    if (dx == 0 && dy != 0) return 1;
    if (dx == dy && dx != 0) return 2;
    return -1;
}

// Exact point-in-closed-polygon test for integer points and integer
// polygon vertices.  Boundary points count as inside.
bool point_in_polygon(long long px, long long py,
                      const std::vector<std::pair<long long, long long>>& poly) {
    const std::size_t n = poly.size();
    bool inside = false;
    for (std::size_t i = 0; i < n; ++i) {
        auto [ax, ay] = poly[i];
        auto [bx, by] = poly[(i + 1) % n];
        // On-segment check (edges are axis or diagonal aligned, but the
        // test below is general).
        long long cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
        if (cross == 0 && std::min(ax, bx) <= px && px <= std::max(ax, bx) &&
            std::min(ay, by) <= py && py <= std::max(ay, by))
            return true;
        // Ray casting towards +x with half-open vertical ranges.
        if ((ay > py) != (by > py)) {
            // px < ax + (py-ay)*(bx-ax)/(by-ay), exactly.
            long long lhs = (px - ax) * (by - ay);
            long long rhs = (py - ay) * (bx - ax);
            if (by - ay < 0) std::swap(lhs, rhs);
            if (lhs < rhs) inside = !inside;
        }
    }
    return inside;
}

}  // namespace

void PolygonSpec::validate() const {
    if (vertices.size() < 3)
        throw invalid_argument_error("polygon needs at least 3 vertices");
    if (!(vertices.front().x == Rational(0) && vertices.front().y == Rational(0)))
        throw invalid_argument_error("polygon must start at the origin");
    // Edge directions restricted to the three lattice axes.
    const std::size_t n = vertices.size();
    long long den = 1;
    for (const auto& v : vertices) den = std::lcm(den, std::lcm(v.x.den, v.y.den));
    std::vector<std::pair<long long, long long>> ipoly(n);
    for (std::size_t i = 0; i < n; ++i)
        ipoly[i] = {vertices[i].x.num * (den / vertices[i].x.den),
                    vertices[i].y.num * (den / vertices[i].y.den)};
    double area2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto [ax, ay] = ipoly[i];
        auto [bx, by] = ipoly[(i + 1) % n];
        if (edge_axis(bx - ax, by - ay) < 0)
            throw invalid_argument_error(
                "polygon edge " + std::to_string(i) +
                " is not parallel to a lattice axis (slope 0, inf, or 1)");
        area2 += static_cast<double>(ax) * by - static_cast<double>(bx) * ay;
    }
    if (area2 <= 0)
        throw invalid_argument_error("polygon must be counterclockwise and non-degenerate");
    // Simplicity: no two non-adjacent edges may intersect.  Edge count is
    // small, so the quadratic check is fine.
    auto seg_intersect = [](std::pair<long long, long long> a, std::pair<long long, long long> b,
                            std::pair<long long, long long> c, std::pair<long long, long long> d) {
        auto cross = [](long long ox, long long oy, long long px, long long py, long long qx,
                        long long qy) { return (px - ox) * (qy - oy) - (py - oy) * (qx - ox); };
        long long d1 = cross(c.first, c.second, d.first, d.second, a.first, a.second);
        long long d2 = cross(c.first, c.second, d.first, d.second, b.first, b.second);
        long long d3 = cross(a.first, a.second, b.first, b.second, c.first, c.second);
        long long d4 = cross(a.first, a.second, b.first, b.second, d.first, d.second);
        return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (seg_intersect(ipoly[i], ipoly[(i + 1) % n], ipoly[j], ipoly[(j + 1) % n]))
                throw invalid_argument_error("polygon is self-intersecting");
        }
    }
}

PolygonSpec hexagon_spec(const Rational& a, const Rational& b, const Rational& c) {
    if (!a.positive() || !b.positive() || !c.positive())
        throw invalid_argument_error("hexagon sides must be positive");
    auto add = [](const Rational& p, const Rational& q) {
        return Rational(p.num * q.den + q.num * p.den, p.den * q.den);
    };
    PolygonSpec s;
    s.vertices = {
        {Rational(0), Rational(0)}, {a, Rational(0)},  {add(a, c), c},
        {add(a, c), add(b, c)},     {c, add(b, c)},    {Rational(0), b},
    };
    s.validate();
    return s;
}

LatticeDomain::LatticeDomain(const PolygonSpec& spec, long long n) {
    spec.validate();
    if (n <= 0) throw invalid_argument_error("scale must be positive");
    n_ = n;
    poly_.reserve(spec.vertices.size());
    for (const auto& v : spec.vertices)
        poly_.emplace_back(v.x.scaled_integer(n), v.y.scaled_integer(n));

    long long bx0 = std::numeric_limits<long long>::max(), bx1 = std::numeric_limits<long long>::min();
    long long by0 = bx0, by1 = bx1;
    for (auto [x, y] : poly_) {
        bx0 = std::min(bx0, x);
        bx1 = std::max(bx1, x);
        by0 = std::min(by0, y);
        by1 = std::max(by1, y);
    }
    x0_ = static_cast<int>(bx0);
    x1_ = static_cast<int>(bx1);
    y0_ = static_cast<int>(by0);
    y1_ = static_cast<int>(by1);

    const std::size_t sz = box_size();
    in_.assign(sz, 0);
    boundary_.assign(sz, 0);
    up_face_.assign(sz, 0);
    down_face_.assign(sz, 0);

    for (int y = y0_; y <= y1_; ++y)
        for (int x = x0_; x <= x1_; ++x)
            if (point_in_polygon(x, y, poly_)) in_[index(x, y)] = 1;

    // A face belongs to the domain iff its three corners are vertices and
    // its centroid lies inside the closed polygon (3x-scaled for exactness).
    std::vector<std::pair<long long, long long>> poly3 = poly_;
    for (auto& p : poly3) {
        p.first *= 3;
        p.second *= 3;
    }
    for (int y = y0_; y < y1_; ++y) {
        for (int x = x0_; x < x1_; ++x) {
            if (contains(x, y) && contains(x + 1, y) && contains(x + 1, y + 1) &&
                point_in_polygon(3 * x + 2, 3 * y + 1, poly3)) {
                up_face_[index(x, y)] = 1;
                ++face_count_;
            }
            if (contains(x, y) && contains(x, y + 1) && contains(x + 1, y + 1) &&
                point_in_polygon(3 * x + 1, 3 * y + 2, poly3)) {
                down_face_[index(x, y)] = 1;
                ++face_count_;
            }
        }
    }

    for (int y = y0_; y <= y1_; ++y) {
        for (int x = x0_; x <= x1_; ++x) {
            if (!contains(x, y)) continue;
            vertices_.push_back({x, y});
            bool bdry = false;
            for (int k = 0; k < 6 && !bdry; ++k)
                if (!contains(x + kNeighborDx[k], y + kNeighborDy[k])) bdry = true;
            if (bdry) {
                boundary_[index(x, y)] = 1;
                boundary_vertices_.push_back({x, y});
            } else {
                interior_vertices_.push_back({x, y});
            }
        }
    }
    if (!contains(0, 0))
        throw invalid_argument_error("domain does not contain the origin");
}

double LatticeDomain::diameter() const {
    // The diameter of a lattice polygon is attained at polygon vertices.
    double d2 = 0;
    for (auto [ax, ay] : poly_)
        for (auto [bx, by] : poly_) {
            double dx = static_cast<double>(ax - bx), dy = static_cast<double>(ay - by);
            d2 = std::max(d2, dx * dx + dy * dy);
        }
    return std::sqrt(d2);
}

DomainPtr build_domain(const PolygonSpec& spec, long long n) {
    return std::make_shared<LatticeDomain>(spec, n);
}

namespace {

// Forced increment across a lattice edge, when one of the two adjacent
// faces is missing:
//   horizontal (x,y)->(x+1,y): +1 unless interior to a vertical lozenge,
//   vertical   (x,y)->(x,y+1):  0 unless interior to a right-jump lozenge,
//   diagonal   (x,y)->(x+1,y+1): 0 unless interior to a square lozenge.
// Returns true and sets `delta` if the edge increment is forced.
bool forced_increment(const LatticeDomain& d, int x, int y, int axis, int& delta) {
    switch (axis) {
        case 0:  // (x,y) -> (x+1,y)
            if (!d.has_down_face(x, y - 1) || !d.has_up_face(x, y)) {
                delta = 1;
                return true;
            }
            return false;
        case 1:  // (x,y) -> (x,y+1)
            if (!d.has_up_face(x - 1, y) || !d.has_down_face(x, y)) {
                delta = 0;
                return true;
            }
            return false;
        default:  // (x,y) -> (x+1,y+1)
            if (!d.has_up_face(x, y) || !d.has_down_face(x, y)) {
                delta = 0;
                return true;
            }
            return false;
    }
}

}  // namespace

BoundaryHeightFn boundary_height(const DomainPtr& domain) {
    const LatticeDomain& d = *domain;
    const int unset = std::numeric_limits<int>::min();
    std::vector<int> h(d.box_size(), unset);
    h[d.index(0, 0)] = 0;

    // Propagate over forced edges from the origin.
    std::deque<Vertex> queue;
    queue.push_back({0, 0});
    static constexpr int ex[3] = {1, 0, 1};
    static constexpr int ey[3] = {0, 1, 1};
    while (!queue.empty()) {
        Vertex v = queue.front();
        queue.pop_front();
        int hv = h[d.index(v.x, v.y)];
        for (int axis = 0; axis < 3; ++axis) {
            for (int dir = 0; dir < 2; ++dir) {
                int ax = dir == 0 ? v.x : v.x - ex[axis];
                int ay = dir == 0 ? v.y : v.y - ey[axis];
                int bx = ax + ex[axis], by = ay + ey[axis];
                if (!d.contains(ax, ay) || !d.contains(bx, by)) continue;
                int delta;
                if (!forced_increment(d, ax, ay, axis, delta)) continue;
                int& ha = h[d.index(ax, ay)];
                int& hb = h[d.index(bx, by)];
                int want_a = dir == 0 ? hv : hv - delta;
                int want_b = want_a + delta;
                if (ha == unset) {
                    ha = want_a;
                    queue.push_back({ax, ay});
                } else if (ha != want_a) {
                    throw untileable_error("inconsistent forced boundary increments");
                }
                if (hb == unset) {
                    hb = want_b;
                    queue.push_back({bx, by});
                } else if (hb != want_b) {
                    throw untileable_error("inconsistent forced boundary increments");
                }
            }
        }
    }

    for (const Vertex& v : d.boundary_vertices())
        if (h[d.index(v.x, v.y)] == unset)
            throw untileable_error("boundary vertex not reachable by forced increments");
    return BoundaryHeightFn(domain, std::move(h));
}

std::pair<HeightFunction, HeightFunction> extremal_heights(const DomainPtr& domain,
                                                           const BoundaryHeightFn& bh) {
    const LatticeDomain& d = *domain;
    static constexpr int ex[3] = {1, 0, 1};
    static constexpr int ey[3] = {0, 1, 1};
    // Edge rule H(b) - H(a) in {0,1} along (x,y)->(x+1,y) and (x,y)->(x+1,y+1);
    // along (x,y)->(x,y+1) the rule is H(a) - H(b) in {0,1}.  Normalize each
    // edge a->b to the window H(b) - H(a) in [lo, hi] = [0,1] or [-1,0].
    auto window = [](int axis) { return axis == 1 ? std::pair<int, int>{-1, 0} : std::pair<int, int>{0, 1}; };

    const int inf = std::numeric_limits<int>::max() / 2;
    std::vector<int> hmax(d.box_size(), inf), hmin(d.box_size(), -inf);

    // Max extension: shortest paths downward from boundary values, arcs
    // a->b cost hi, b->a cost -lo.  All costs are 0 or 1 after orientation,
    // so a 0-1 BFS suffices.
    std::deque<Vertex> dq;
    for (const Vertex& v : d.boundary_vertices()) {
        hmax[d.index(v.x, v.y)] = bh.at(v.x, v.y);
        dq.push_back(v);
    }
    auto relax_max = [&](Vertex from, Vertex to, int cost) {
        std::size_t i = d.index(to.x, to.y);
        int cand = hmax[d.index(from.x, from.y)] + cost;
        if (cand < hmax[i]) {
            hmax[i] = cand;
            if (cost == 0)
                dq.push_front(to);
            else
                dq.push_back(to);
        }
    };
    while (!dq.empty()) {
        Vertex v = dq.front();
        dq.pop_front();
        for (int axis = 0; axis < 3; ++axis) {
            auto [lo, hi] = window(axis);
            Vertex fwd{v.x + ex[axis], v.y + ey[axis]};
            Vertex bwd{v.x - ex[axis], v.y - ey[axis]};
            if (d.contains(fwd.x, fwd.y)) relax_max(v, fwd, hi);
            if (d.contains(bwd.x, bwd.y)) relax_max(v, bwd, -lo);
        }
    }
    // Min extension, symmetric (longest lower bounds).
    for (const Vertex& v : d.boundary_vertices()) {
        hmin[d.index(v.x, v.y)] = bh.at(v.x, v.y);
        dq.push_back(v);
    }
    auto relax_min = [&](Vertex from, Vertex to, int gain) {
        std::size_t i = d.index(to.x, to.y);
        int cand = hmin[d.index(from.x, from.y)] - gain;
        if (cand > hmin[i]) {
            hmin[i] = cand;
            if (gain == 0)
                dq.push_front(to);
            else
                dq.push_back(to);
        }
    };
    while (!dq.empty()) {
        Vertex v = dq.front();
        dq.pop_front();
        for (int axis = 0; axis < 3; ++axis) {
            auto [lo, hi] = window(axis);
            Vertex fwd{v.x + ex[axis], v.y + ey[axis]};
            Vertex bwd{v.x - ex[axis], v.y - ey[axis]};
            if (d.contains(fwd.x, fwd.y)) relax_min(v, fwd, -lo);
            if (d.contains(bwd.x, bwd.y)) relax_min(v, bwd, hi);
        }
    }

    HeightFunction hi_f(domain, std::move(hmax));
    HeightFunction lo_f(domain, std::move(hmin));
    for (const Vertex& v : d.vertices()) {
        int a = lo_f.at(v.x, v.y), b = hi_f.at(v.x, v.y);
        if (a > b || b >= inf || a <= -inf)
            throw untileable_error("boundary data admits no height extension");
    }
    for (const Vertex& v : d.boundary_vertices()) {
        if (hi_f.at(v.x, v.y) != bh.at(v.x, v.y) || lo_f.at(v.x, v.y) != bh.at(v.x, v.y))
            throw untileable_error("boundary data incompatible with increment rules");
    }
    if (!validate_height(hi_f).empty() || !validate_height(lo_f).empty())
        throw untileable_error("extremal extension violates increment rules");
    return {std::move(lo_f), std::move(hi_f)};
}

bool is_tileable(const DomainPtr& domain, const BoundaryHeightFn& bh) {
    try {
        auto [lo, hi] = extremal_heights(domain, bh);
        // A height extension corresponds to a tiling iff every face finds
        // its lozenge partner inside the domain.
        height_to_tiling(lo);
        return true;
    } catch (const error&) {
        return false;
    }
}

}  // namespace arctic
