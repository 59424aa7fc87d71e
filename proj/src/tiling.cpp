#include "arctic/tiling.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace arctic {

bool HeightFunction::same_values(const HeightFunction& o) const {
    if (domain_.get() != o.domain_.get()) return false;
    for (const Vertex& v : domain_->vertices())
        if (at(v.x, v.y) != o.at(v.x, v.y)) return false;
    return true;
}

const WalkEnsemble::Slice& WalkEnsemble::slice_at(int t) const {
    for (const auto& s : slices_)
        if (s.t == t) return s;
    throw not_found_error("no walk slice at t=" + std::to_string(t));
}

bool WalkEnsemble::has_walk(int walk_index, int t) const {
    const Slice& s = slice_at(t);
    int k = walk_index - s.first_index;
    return k >= 0 && k < static_cast<int>(s.positions.size());
}

int WalkEnsemble::position(int walk_index, int t) const {
    const Slice& s = slice_at(t);
    int k = walk_index - s.first_index;
    if (k < 0 || k >= static_cast<int>(s.positions.size()))
        throw not_found_error("walk " + std::to_string(walk_index) + " absent at t=" +
                              std::to_string(t));
    return s.positions[static_cast<std::size_t>(k)];
}

std::vector<HeightViolation> validate_height(const HeightFunction& h) {
    std::vector<HeightViolation> out;
    const LatticeDomain& d = *h.domain();
    for (const Vertex& v : d.vertices()) {
        int hv = h.at(v.x, v.y);
        if (d.contains(v.x + 1, v.y)) {
            int dlt = h.at(v.x + 1, v.y) - hv;
            if (dlt < 0 || dlt > 1)
                out.push_back({v.x, v.y, v.x + 1, v.y, "horizontal increment not in {0,1}"});
        }
        if (d.contains(v.x, v.y - 1)) {
            int dlt = h.at(v.x, v.y - 1) - hv;
            if (dlt < 0 || dlt > 1)
                out.push_back({v.x, v.y, v.x, v.y - 1, "downward increment not in {0,1}"});
        }
        if (d.contains(v.x + 1, v.y + 1)) {
            int dlt = h.at(v.x + 1, v.y + 1) - hv;
            if (dlt < 0 || dlt > 1)
                out.push_back({v.x, v.y, v.x + 1, v.y + 1, "diagonal increment not in {0,1}"});
        }
    }
    return out;
}

std::vector<HeightViolation> validate_height(const HeightFunction& h,
                                             const BoundaryHeightFn& bh) {
    std::vector<HeightViolation> out = validate_height(h);
    for (const Vertex& v : h.domain()->boundary_vertices())
        if (h.at(v.x, v.y) != bh.at(v.x, v.y))
            out.push_back({v.x, v.y, v.x, v.y, "boundary value mismatch"});
    return out;
}

Tiling height_to_tiling(const HeightFunction& h) {
    const LatticeDomain& d = *h.domain();
    {
        auto bad = validate_height(h);
        if (!bad.empty())
            throw validation_error("invalid height function at edge (" +
                                   std::to_string(bad[0].x1) + "," + std::to_string(bad[0].y1) +
                                   ")-(" + std::to_string(bad[0].x2) + "," +
                                   std::to_string(bad[0].y2) + "): " + bad[0].rule);
    }
    std::vector<Lozenge> lozenges;
    std::vector<std::uint8_t> down_used(d.box_size(), 0);
    std::size_t up_count = 0;
    for (int y = d.y0(); y < d.y1(); ++y) {
        for (int x = d.x0(); x < d.x1(); ++x) {
            if (!d.has_up_face(x, y)) continue;
            ++up_count;
            // Increments around the up face (x,y),(x+1,y),(x+1,y+1).
            int a = h.at(x + 1, y) - h.at(x, y);          // horizontal
            int c = h.at(x + 1, y) - h.at(x + 1, y + 1);  // downward
            Lozenge loz{x, y, LozengeType::kType3};
            int px = x, py = y;  // partner down-face anchor
            if (a == 0) {
                loz.type = LozengeType::kType1;
                py = y - 1;
            } else if (c == 1) {
                loz.type = LozengeType::kType2;
                px = x + 1;
            } else {
                loz.type = LozengeType::kType3;
            }
            if (!d.has_down_face(px, py))
                throw validation_error("face at (" + std::to_string(x) + "," + std::to_string(y) +
                                       ") has no partner inside the domain");
            std::size_t pi = d.index(px, py);
            if (down_used[pi])
                throw validation_error("two faces claim the same partner at (" +
                                       std::to_string(px) + "," + std::to_string(py) + ")");
            down_used[pi] = 1;
            lozenges.push_back(loz);
        }
    }
    if (2 * up_count != d.face_count())
        throw validation_error("face counts do not match a perfect matching");
    return Tiling(h.domain(), std::move(lozenges));
}

HeightFunction tiling_to_height(const Tiling& t, Vertex anchor, int value) {
    const LatticeDomain& d = *t.domain();
    if (!d.contains(anchor.x, anchor.y))
        throw invalid_argument_error("anchor vertex outside the domain");

    // Mark interior edges of the lozenges; every other edge has the
    // default increment of its direction.
    std::vector<std::uint8_t> t1_h(d.box_size(), 0);  // horizontal edge inside type 1
    std::vector<std::uint8_t> t2_v(d.box_size(), 0);  // vertical edge inside type 2
    std::vector<std::uint8_t> t3_d(d.box_size(), 0);  // diagonal edge inside type 3
    std::vector<std::uint8_t> up_used(d.box_size(), 0), down_used(d.box_size(), 0);
    for (const Lozenge& l : t.lozenges()) {
        if (!d.has_up_face(l.x, l.y)) throw validation_error("lozenge anchors a missing up face");
        if (up_used[d.index(l.x, l.y)]) throw validation_error("up face covered twice");
        up_used[d.index(l.x, l.y)] = 1;
        int px = l.x, py = l.y;
        switch (l.type) {
            case LozengeType::kType1:
                py = l.y - 1;
                t1_h[d.index(l.x, l.y)] = 1;  // edge (x,y)-(x+1,y)
                break;
            case LozengeType::kType2:
                px = l.x + 1;
                t2_v[d.index(l.x + 1, l.y)] = 1;  // edge (x+1,y)-(x+1,y+1)
                break;
            case LozengeType::kType3:
                t3_d[d.index(l.x, l.y)] = 1;  // edge (x,y)-(x+1,y+1)
                break;
        }
        if (!d.has_down_face(px, py)) throw validation_error("lozenge partner face missing");
        if (down_used[d.index(px, py)]) throw validation_error("down face covered twice");
        down_used[d.index(px, py)] = 1;
    }
    for (int y = d.y0(); y < d.y1(); ++y)
        for (int x = d.x0(); x < d.x1(); ++x) {
            if (d.has_up_face(x, y) && !up_used[d.index(x, y)])
                throw validation_error("up face left uncovered");
            if (d.has_down_face(x, y) && !down_used[d.index(x, y)])
                throw validation_error("down face left uncovered");
        }

    const int unset = std::numeric_limits<int>::min();
    std::vector<int> h(d.box_size(), unset);
    h[d.index(anchor.x, anchor.y)] = value;
    std::deque<Vertex> queue{anchor};
    auto edge_delta = [&](int x, int y, int axis) {
        // Increment along (x,y)->(x+ex,y+ey).
        switch (axis) {
            case 0:
                return t1_h[d.index(x, y)] ? 0 : 1;
            case 1:
                return t2_v[d.index(x, y)] ? -1 : 0;
            default:
                return t3_d[d.index(x, y)] ? 1 : 0;
        }
    };
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
                if (!d.contains(ax, ay) || !d.contains(ax + ex[axis], ay + ey[axis])) continue;
                int delta = edge_delta(ax, ay, axis);
                int want = dir == 0 ? hv + delta : hv - delta;
                Vertex w = dir == 0 ? Vertex{v.x + ex[axis], v.y + ey[axis]}
                                    : Vertex{v.x - ex[axis], v.y - ey[axis]};
                int& hw = h[d.index(w.x, w.y)];
                if (hw == unset) {
                    hw = want;
                    queue.push_back(w);
                } else if (hw != want) {
                    throw validation_error("tiling induces inconsistent heights");
                }
            }
        }
    }
    for (const Vertex& v : d.vertices())
        if (h[d.index(v.x, v.y)] == unset)
            throw validation_error("tiling leaves vertices unlabeled");
    HeightFunction out(t.domain(), std::move(h));
    if (!validate_height(out).empty())
        throw validation_error("tiling induces an invalid height function");
    return out;
}

WalkEnsemble height_to_walks(const HeightFunction& h) {
    const LatticeDomain& d = *h.domain();
    std::vector<WalkEnsemble::Slice> slices;
    for (int t = d.y0(); t <= d.y1(); ++t) {
        WalkEnsemble::Slice s;
        s.t = t;
        bool first = true;
        for (int x = d.x0(); x < d.x1(); ++x) {
            if (!d.contains(x, t) || !d.contains(x + 1, t)) continue;
            if (h.at(x + 1, t) == h.at(x, t) + 1) {
                if (first) {
                    s.first_index = h.at(x + 1, t);
                    first = false;
                }
                s.positions.push_back(x);
            }
        }
        if (!s.positions.empty()) slices.push_back(std::move(s));
    }
    return WalkEnsemble(h.domain(), std::move(slices));
}

HeightFunction walks_to_height(const WalkEnsemble& w, const DomainPtr& domain,
                               const BoundaryHeightFn& bh) {
    const LatticeDomain& d = *domain;
    std::vector<int> h(d.box_size(), 0);
    for (int t = d.y0(); t <= d.y1(); ++t) {
        // Left end of the row carries the boundary value.
        int xl = d.x1() + 1;
        for (int x = d.x0(); x <= d.x1(); ++x)
            if (d.contains(x, t)) {
                xl = x;
                break;
            }
        if (xl > d.x1()) continue;
        const WalkEnsemble::Slice* s = nullptr;
        for (const auto& sl : w.slices())
            if (sl.t == t) {
                s = &sl;
                break;
            }
        if (s != nullptr) {
            for (std::size_t i = 0; i + 1 < s->positions.size(); ++i)
                if (s->positions[i] >= s->positions[i + 1])
                    throw validation_error("walk positions not strictly increasing at t=" +
                                           std::to_string(t));
        }
        int base = s != nullptr ? s->first_index - 1 : bh.at(xl, t);
        for (int x = xl; x <= d.x1(); ++x) {
            if (!d.contains(x, t)) continue;
            int count = 0;
            if (s != nullptr)
                count = static_cast<int>(
                    std::upper_bound(s->positions.begin(), s->positions.end(), x - 1) -
                    s->positions.begin());
            h[d.index(x, t)] = base + count;
        }
    }
    HeightFunction out(domain, std::move(h));
    auto bad = validate_height(out, bh);
    if (!bad.empty())
        throw validation_error("walk ensemble does not reconstruct a valid height function: " +
                               bad[0].rule);
    // Bernoulli step check where an index persists across rows.
    for (std::size_t i = 0; i + 1 < w.slices().size(); ++i) {
        const auto& s0 = w.slices()[i];
        const auto& s1 = w.slices()[i + 1];
        if (s1.t != s0.t + 1) continue;
        int lo = std::max(s0.first_index, s1.first_index);
        int hi = std::min(s0.first_index + static_cast<int>(s0.positions.size()),
                          s1.first_index + static_cast<int>(s1.positions.size()));
        for (int idx = lo; idx < hi; ++idx) {
            int step = s1.positions[static_cast<std::size_t>(idx - s1.first_index)] -
                       s0.positions[static_cast<std::size_t>(idx - s0.first_index)];
            if (step < 0 || step > 1)
                throw validation_error("walk " + std::to_string(idx) +
                                       " makes a non-Bernoulli step at t=" + std::to_string(s0.t));
        }
    }
    return out;
}

}  // namespace arctic
