#include "arctic/enumeration.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

#include "arctic/errors.hpp"
#include "arctic/stats.hpp"

namespace arctic {

namespace {

constexpr std::uint8_t kNonMember = 0xFF;
constexpr int kInf = std::numeric_limits<int>::max() / 2;

// Pointwise extremal extensions of the fixed values over the member set.
// Infeasible data leaves some hmin > hmax.
void member_bounds(const LatticeDomain& d, const std::vector<std::uint8_t>& member,
                   const std::vector<std::uint8_t>& fixed, const std::vector<int>& value,
                   std::vector<int>& hmin, std::vector<int>& hmax, bool& feasible) {
    hmax.assign(d.box_size(), kInf);
    hmin.assign(d.box_size(), -kInf);
    feasible = true;
    static constexpr int ex[3] = {1, 0, 1};
    static constexpr int ey[3] = {0, 1, 1};
    auto window_hi = [](int axis) { return axis == 1 ? 0 : 1; };
    auto window_lo = [](int axis) { return axis == 1 ? -1 : 0; };

    std::deque<Vertex> dq;
    for (const Vertex& v : d.vertices()) {
        std::size_t i = d.index(v.x, v.y);
        if (member[i] && fixed[i]) {
            hmax[i] = value[i];
            dq.push_back(v);
        }
    }
    auto ok = [&](int x, int y) {
        return d.contains(x, y) && member[d.index(x, y)];
    };
    while (!dq.empty()) {
        Vertex v = dq.front();
        dq.pop_front();
        int hv = hmax[d.index(v.x, v.y)];
        for (int axis = 0; axis < 3; ++axis) {
            Vertex f{v.x + ex[axis], v.y + ey[axis]}, b{v.x - ex[axis], v.y - ey[axis]};
            if (ok(f.x, f.y) && hv + window_hi(axis) < hmax[d.index(f.x, f.y)]) {
                hmax[d.index(f.x, f.y)] = hv + window_hi(axis);
                if (window_hi(axis) == 0) dq.push_front(f); else dq.push_back(f);
            }
            if (ok(b.x, b.y) && hv - window_lo(axis) < hmax[d.index(b.x, b.y)]) {
                hmax[d.index(b.x, b.y)] = hv - window_lo(axis);
                if (window_lo(axis) == 0) dq.push_front(b); else dq.push_back(b);
            }
        }
    }
    for (const Vertex& v : d.vertices()) {
        std::size_t i = d.index(v.x, v.y);
        if (member[i] && fixed[i]) {
            hmin[i] = value[i];
            dq.push_back(v);
        }
    }
    while (!dq.empty()) {
        Vertex v = dq.front();
        dq.pop_front();
        int hv = hmin[d.index(v.x, v.y)];
        for (int axis = 0; axis < 3; ++axis) {
            Vertex f{v.x + ex[axis], v.y + ey[axis]}, b{v.x - ex[axis], v.y - ey[axis]};
            if (ok(f.x, f.y) && hv + window_lo(axis) > hmin[d.index(f.x, f.y)]) {
                hmin[d.index(f.x, f.y)] = hv + window_lo(axis);
                if (window_lo(axis) == 0) dq.push_front(f); else dq.push_back(f);
            }
            if (ok(b.x, b.y) && hv - window_hi(axis) > hmin[d.index(b.x, b.y)]) {
                hmin[d.index(b.x, b.y)] = hv - window_hi(axis);
                if (window_hi(axis) == 0) dq.push_front(b); else dq.push_back(b);
            }
        }
    }
    for (const Vertex& v : d.vertices()) {
        std::size_t i = d.index(v.x, v.y);
        if (!member[i]) continue;
        if (hmin[i] > hmax[i] || hmax[i] >= kInf || hmin[i] <= -kInf) feasible = false;
        if (fixed[i] && (hmin[i] != value[i] || hmax[i] != value[i])) feasible = false;
    }
}

}  // namespace

ProfileDp::ProfileDp(DomainPtr domain, const BoundaryHeightFn& bh, DpConfig cfg)
    : ProfileDp(domain,
                [&] {
                    std::vector<std::uint8_t> m(domain->box_size(), 0);
                    for (const Vertex& v : domain->vertices()) m[domain->index(v.x, v.y)] = 1;
                    return m;
                }(),
                [&] {
                    std::vector<std::uint8_t> f(domain->box_size(), 0);
                    for (const Vertex& v : domain->boundary_vertices())
                        f[domain->index(v.x, v.y)] = 1;
                    return f;
                }(),
                bh.raw(), cfg) {}

ProfileDp::ProfileDp(DomainPtr domain, std::vector<std::uint8_t> member,
                     std::vector<std::uint8_t> fixed, std::vector<int> value, DpConfig cfg)
    : domain_(std::move(domain)),
      cfg_(cfg),
      member_(std::move(member)),
      fixed_(std::move(fixed)),
      value_(std::move(value)) {
    build();
}

void ProfileDp::build() {
    const LatticeDomain& d = *domain_;
    bool feasible = true;
    member_bounds(d, member_, fixed_, value_, hmin_, hmax_, feasible);
    if (!feasible) {
        total_ = BigUint(0);
        return;
    }
    // Bounding subbox of the member set.
    int mx0 = d.x1() + 1, mx1 = d.x0() - 1, my0 = d.y1() + 1, my1 = d.y0() - 1;
    for (const Vertex& v : d.vertices()) {
        if (!member_[d.index(v.x, v.y)]) continue;
        mx0 = std::min(mx0, v.x);
        mx1 = std::max(mx1, v.x);
        my0 = std::min(my0, v.y);
        my1 = std::max(my1, v.y);
    }
    if (mx0 > mx1) {  // empty problem
        total_ = BigUint(1);
        layers_.clear();
        return;
    }
    int w = mx1 - mx0 + 1, h = my1 - my0 + 1;
    transposed_ = h < w;
    sx0_ = mx0;
    sy0_ = my0;
    sw_ = transposed_ ? h : w;  // inner span
    sh_ = transposed_ ? w : h;
    span_ = sw_;
    if (span_ + 1 > cfg_.width_cap + 1)
        throw capacity_error("profile width " + std::to_string(span_) + " exceeds cap " +
                             std::to_string(cfg_.width_cap));
    for (const Vertex& v : d.vertices()) {
        std::size_t i = d.index(v.x, v.y);
        if (member_[i] && hmax_[i] - hmin_[i] > 250)
            throw capacity_error("height range too large for profile encoding");
    }

    const int cells = sw_ * sh_;
    layers_.assign(static_cast<std::size_t>(cells) + 1, Layer{});
    layers_[0].states.emplace(std::string(static_cast<std::size_t>(span_ + 1), char(kNonMember)),
                              BigUint(1));
    std::string next;
    for (int p = 0; p < cells; ++p) {
        auto& cur = layers_[static_cast<std::size_t>(p)].states;
        auto& nxt = layers_[static_cast<std::size_t>(p) + 1].states;
        int x = transposed_ ? sx0_ + p / sw_ : sx0_ + p % sw_;
        int y = transposed_ ? sy0_ + p % sw_ : sy0_ + p / sw_;
        bool mem = d.contains(x, y) && member_[d.index(x, y)];
        for (const auto& [state, cnt] : cur) {
            if (!mem) {
                if (transition(state, p, kNonMember, next)) {
                    auto it = nxt.find(next);
                    if (it == nxt.end())
                        nxt.emplace(next, cnt);
                    else
                        it->second += cnt;
                }
                continue;
            }
            std::size_t bi = d.index(x, y);
            int lo = fixed_[bi] ? value_[bi] : hmin_[bi];
            int hi = fixed_[bi] ? value_[bi] : hmax_[bi];
            for (int val = lo; val <= hi; ++val) {
                if (!transition(state, p, val - hmin_[bi], next)) continue;
                auto it = nxt.find(next);
                if (it == nxt.end())
                    nxt.emplace(next, cnt);
                else
                    it->second += cnt;
            }
        }
        if (nxt.size() > cfg_.state_cap)
            throw capacity_error("profile state count exceeds cap");
    }
    total_ = BigUint(0);
    for (const auto& [state, cnt] : layers_.back().states) total_ += cnt;
}

// Applies the three increment rules against the window and, on success,
// writes the shifted window.  `offset_value` is kNonMember for cells
// outside the member set.
bool ProfileDp::transition(const std::string& state, int p, int offset_value,
                           std::string& next) const {
    const LatticeDomain& d = *domain_;
    int u = p % sw_, v = p / sw_;
    if (offset_value != kNonMember) {
        int x = transposed_ ? sx0_ + v : sx0_ + u;
        int y = transposed_ ? sy0_ + u : sy0_ + v;
        int val = offset_value + hmin_[d.index(x, y)];
        // Window partner at scan offset k (0-based in `state`), with its
        // absolute value recovered through that cell's own base.
        auto partner = [&](int k, int& out) {
            std::uint8_t raw = static_cast<std::uint8_t>(state[static_cast<std::size_t>(k)]);
            if (raw == kNonMember) return false;
            int pp = p - 1 - k;
            int px = transposed_ ? sx0_ + pp / sw_ : sx0_ + pp % sw_;
            int py = transposed_ ? sy0_ + pp % sw_ : sy0_ + pp / sw_;
            out = static_cast<int>(raw) + hmin_[d.index(px, py)];
            return true;
        };
        int pv;
        // offset -1: same inner line.
        if (u > 0 && partner(0, pv)) {
            if (transposed_) {
                // previous cell is (x, y-1): downward rule.
                int dlt = pv - val;
                if (dlt < 0 || dlt > 1) return false;
            } else {
                // previous cell is (x-1, y): horizontal rule.
                int dlt = val - pv;
                if (dlt < 0 || dlt > 1) return false;
            }
        }
        // offset -span: previous outer line, same inner position.
        if (v > 0 && partner(span_ - 1, pv)) {
            if (transposed_) {
                int dlt = val - pv;  // (x-1, y): horizontal rule
                if (dlt < 0 || dlt > 1) return false;
            } else {
                int dlt = pv - val;  // (x, y-1): downward rule
                if (dlt < 0 || dlt > 1) return false;
            }
        }
        // offset -span-1: previous outer line, previous inner position = SW.
        if (u > 0 && v > 0 && partner(span_, pv)) {
            int dlt = val - pv;  // diagonal rule
            if (dlt < 0 || dlt > 1) return false;
        }
    }
    next.assign(state.begin(), state.end() - 1);
    next.insert(next.begin(), static_cast<char>(offset_value));
    return true;
}

std::vector<int> ProfileDp::sample(RngStream& rng) const {
    if (total_.is_zero()) throw untileable_error("empty state space");
    const LatticeDomain& d = *domain_;
    std::vector<int> out(d.box_size(), 0);
    if (layers_.empty()) return out;

    // Choose the final state proportionally to its count.
    const auto& final_states = layers_.back().states;
    BigUint pick = BigUint::uniform_below(total_, rng);
    std::string cur;
    BigUint acc(0);
    for (const auto& [state, cnt] : final_states) {
        acc += cnt;
        if (pick < acc) {
            cur = state;
            break;
        }
    }
    // Walk the layers backwards; the newest window entry is the value
    // assigned at that step.
    std::string cand, shifted;
    for (int p = static_cast<int>(layers_.size()) - 2; p >= 0; --p) {
        std::uint8_t newest = static_cast<std::uint8_t>(cur[0]);
        int x = transposed_ ? sx0_ + p / sw_ : sx0_ + p % sw_;
        int y = transposed_ ? sy0_ + p % sw_ : sy0_ + p / sw_;
        if (newest != kNonMember) out[d.index(x, y)] = static_cast<int>(newest) + hmin_[d.index(x, y)];

        // Predecessor windows differ only in the entry that slid out.
        const auto& prev_states = layers_[static_cast<std::size_t>(p)].states;
        std::vector<std::pair<const std::string*, const BigUint*>> preds;
        BigUint wsum(0);
        cand.assign(cur.begin() + 1, cur.end());
        cand.push_back(char(kNonMember));
        for (int dropped = 0; dropped <= 256; ++dropped) {
            if (dropped == 256) break;
            std::uint8_t dv = static_cast<std::uint8_t>(dropped);
            // Only kNonMember and plausible offsets can occur.
            cand.back() = static_cast<char>(dv);
            auto it = prev_states.find(cand);
            if (it == prev_states.end()) continue;
            if (!transition(it->first, p, newest == kNonMember ? kNonMember : newest, shifted))
                continue;
            if (shifted != cur) continue;
            preds.emplace_back(&it->first, &it->second);
            wsum += it->second;
        }
        BigUint r = BigUint::uniform_below(wsum, rng);
        BigUint a(0);
        for (auto& [st, cnt] : preds) {
            a += *cnt;
            if (r < a) {
                cur = *st;
                break;
            }
        }
    }
    return out;
}

std::vector<std::vector<int>> ProfileDp::enumerate(std::uint64_t cap) const {
    if (!total_.fits_u64() || total_.as_u64() > cap)
        throw capacity_error("enumeration larger than cap");
    const LatticeDomain& d = *domain_;
    std::vector<std::vector<int>> out;
    if (total_.is_zero()) return out;
    const int cells = sw_ * sh_;
    std::vector<int> assignment(d.box_size(), 0);

    // Depth-first over the same transitions as the forward pass.
    std::string next;
    std::function<void(int, const std::string&)> rec = [&](int p, const std::string& state) {
        if (p == cells) {
            out.push_back(assignment);
            return;
        }
        int x = transposed_ ? sx0_ + p / sw_ : sx0_ + p % sw_;
        int y = transposed_ ? sy0_ + p % sw_ : sy0_ + p / sw_;
        bool mem = d.contains(x, y) && member_[d.index(x, y)];
        if (!mem) {
            std::string nx;
            if (transition(state, p, kNonMember, nx)) rec(p + 1, nx);
            return;
        }
        std::size_t bi = d.index(x, y);
        int lo = fixed_[bi] ? value_[bi] : hmin_[bi];
        int hi = fixed_[bi] ? value_[bi] : hmax_[bi];
        for (int val = lo; val <= hi; ++val) {
            std::string nx;
            if (!transition(state, p, val - hmin_[bi], nx)) continue;
            assignment[bi] = val;
            rec(p + 1, nx);
        }
    };
    rec(0, std::string(static_cast<std::size_t>(span_ + 1), char(kNonMember)));
    return out;
}

BigUint count_tilings(const DomainPtr& domain, const BoundaryHeightFn& bh,
                      DpConfig cfg) {
    return ProfileDp(domain, bh, cfg).total();
}

namespace {

// Direct matching recursion over faces; partner order: vertical lozenge,
// right-jump lozenge, square lozenge.
std::uint64_t match_rec(const LatticeDomain& d, std::vector<std::uint8_t>& up_used,
                        std::vector<std::uint8_t>& down_used, std::size_t from,
                        const std::vector<std::pair<int, int>>& ups, std::uint64_t cap,
                        std::uint64_t& calls) {
    if (++calls > 50u * cap) throw capacity_error("matching recursion exceeded work cap");
    std::size_t i = from;
    while (i < ups.size() && up_used[d.index(ups[i].first, ups[i].second)]) ++i;
    if (i == ups.size()) {
        // All up faces matched; every down face must be used too, which
        // holds automatically when their counts are equal.
        return 1;
    }
    auto [x, y] = ups[i];
    up_used[d.index(x, y)] = 1;
    std::uint64_t total = 0;
    const int pdx[3] = {0, 1, 0};
    const int pdy[3] = {-1, 0, 0};
    for (int k = 0; k < 3; ++k) {
        int px = x + pdx[k], py = y + pdy[k];
        if (!d.has_down_face(px, py)) continue;
        std::size_t pi = d.index(px, py);
        if (down_used[pi]) continue;
        down_used[pi] = 1;
        total += match_rec(d, up_used, down_used, i + 1, ups, cap, calls);
        down_used[pi] = 0;
        if (total > cap) throw capacity_error("matching count exceeded cap");
    }
    up_used[d.index(x, y)] = 0;
    return total;
}

}  // namespace

std::uint64_t count_tilings_recursive(const DomainPtr& domain, std::uint64_t cap) {
    const LatticeDomain& d = *domain;
    std::vector<std::pair<int, int>> ups;
    std::size_t downs = 0;
    for (int y = d.y0(); y < d.y1(); ++y)
        for (int x = d.x0(); x < d.x1(); ++x) {
            if (d.has_up_face(x, y)) ups.emplace_back(x, y);
            if (d.has_down_face(x, y)) ++downs;
        }
    if (ups.size() != downs) return 0;
    std::vector<std::uint8_t> up_used(d.box_size(), 0), down_used(d.box_size(), 0);
    std::uint64_t calls = 0;
    return match_rec(d, up_used, down_used, 0, ups, cap, calls);
}

std::vector<HeightFunction> enumerate_all(const DomainPtr& domain, const BoundaryHeightFn& bh,
                                          std::uint64_t cap) {
    ProfileDp dp(domain, bh);
    std::vector<HeightFunction> out;
    for (auto& vals : dp.enumerate(cap)) out.emplace_back(domain, std::move(vals));
    return out;
}

HeightFunction exact_sample(const DomainPtr& domain, const BoundaryHeightFn& bh, RngStream& rng) {
    ProfileDp dp(domain, bh);
    return HeightFunction(domain, dp.sample(rng));
}

namespace {

std::string state_key(const HeightFunction& h) {
    std::string key;
    const LatticeDomain& d = *h.domain();
    key.reserve(d.vertices().size());
    for (const Vertex& v : d.vertices())
        key.push_back(static_cast<char>(h.at(v.x, v.y) & 0xFF));
    return key;
}

}  // namespace

double stationary_tv(const DomainPtr& domain, const BoundaryHeightFn& bh,
                     const std::function<HeightFunction()>& sampler, std::uint64_t n_draws) {
    if (n_draws == 0) throw invalid_argument_error("stationary_tv: need at least one draw");
    auto states = enumerate_all(domain, bh, 1000000);
    if (states.empty()) throw untileable_error("stationary_tv: empty state space");
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& s : states) counts.emplace(state_key(s), 0);
    for (std::uint64_t i = 0; i < n_draws; ++i) {
        auto it = counts.find(state_key(sampler()));
        if (it == counts.end())
            throw validation_error("sampler produced a state outside the enumerated space");
        ++it->second;
    }
    const double uniform = 1.0 / static_cast<double>(states.size());
    double tv = 0;
    for (const auto& [key, c] : counts)
        tv += std::fabs(static_cast<double>(c) / static_cast<double>(n_draws) - uniform);
    return 0.5 * tv;
}

GibbsReport conditional_gibbs_check(const DomainPtr& domain, const BoundaryHeightFn& bh,
                                    int strip_y_lo, int strip_y_hi, std::uint64_t n_draws,
                                    RngStream& rng, std::uint64_t min_group_draws) {
    const LatticeDomain& d = *domain;
    if (strip_y_lo > strip_y_hi) throw invalid_argument_error("bad strip bounds");
    ExactSampler sampler(domain, bh);

    // Strip membership and the conditioning frame.
    std::vector<std::uint8_t> member(d.box_size(), 0), fixed(d.box_size(), 0);
    std::vector<Vertex> free_cells, frame_cells;
    for (const Vertex& v : d.vertices()) {
        if (v.y < strip_y_lo || v.y > strip_y_hi) continue;
        std::size_t i = d.index(v.x, v.y);
        member[i] = 1;
        bool free_cell = d.is_interior(v.x, v.y) && v.y > strip_y_lo && v.y < strip_y_hi;
        if (free_cell)
            free_cells.push_back(v);
        else {
            fixed[i] = 1;
            frame_cells.push_back(v);
        }
    }

    struct Group {
        std::uint64_t draws = 0;
        std::unordered_map<std::string, std::uint64_t> fill_counts;
        std::vector<int> frame_values;  // box-indexed sparse copy source
    };
    std::unordered_map<std::string, Group> groups;
    for (std::uint64_t i = 0; i < n_draws; ++i) {
        HeightFunction h = sampler.sample(rng);
        std::string out_key, in_key;
        for (const Vertex& v : d.vertices())
            if (!(v.y > strip_y_lo && v.y < strip_y_hi && d.is_interior(v.x, v.y)))
                out_key.push_back(static_cast<char>(h.at(v.x, v.y) & 0xFF));
        for (const Vertex& v : free_cells) in_key.push_back(static_cast<char>(h.at(v.x, v.y) & 0xFF));
        Group& g = groups[out_key];
        if (g.draws == 0) {
            g.frame_values.assign(d.box_size(), 0);
            for (const Vertex& v : frame_cells) g.frame_values[d.index(v.x, v.y)] = h.at(v.x, v.y);
        }
        ++g.draws;
        ++g.fill_counts[in_key];
    }

    GibbsReport report;
    for (auto& [key, g] : groups) {
        GibbsGroupResult r;
        r.outside_key = key;
        r.draws = g.draws;
        ProfileDp conditional(domain, member, fixed, g.frame_values);
        if (!conditional.total().fits_u64())
            throw capacity_error("conditional space too large");
        std::uint64_t k = conditional.total().as_u64();
        r.conditional_states = k;
        if (k <= 1 || g.draws < std::max<std::uint64_t>(min_group_draws, 5 * k)) {
            r.tested = false;
            report.groups.push_back(std::move(r));
            continue;
        }
        // Chi-squared against the uniform conditional law.  Fillings never
        // seen still contribute their expected count.
        double expected = static_cast<double>(g.draws) / static_cast<double>(k);
        double stat = 0;
        std::uint64_t seen_states = 0;
        for (const auto& [fill, c] : g.fill_counts) {
            double diff = static_cast<double>(c) - expected;
            stat += diff * diff / expected;
            ++seen_states;
        }
        if (seen_states > k)
            throw validation_error("observed more conditional fillings than enumerated");
        stat += static_cast<double>(k - seen_states) * expected;
        r.p_value = chi2_sf(stat, static_cast<int>(k) - 1);
        r.tested = true;
        report.min_p_value = std::min(report.min_p_value, r.p_value);
        ++report.tested_groups;
        report.groups.push_back(std::move(r));
    }
    return report;
}

}  // namespace arctic
