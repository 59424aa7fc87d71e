#include "arctic/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>

#include "arctic/errors.hpp"
#include "arctic/lattice.hpp"

namespace arctic {

namespace {

// Box-index offsets of the six neighbors, given the box stride.
struct NeighborOffsets {
    std::ptrdiff_t e, w, n, s, ne, sw;
    explicit NeighborOffsets(std::ptrdiff_t stride)
        : e(1), w(-1), n(stride), s(-stride), ne(stride + 1), sw(-stride - 1) {}
};

inline FlipKind classify(const int* v, const NeighborOffsets& o) {
    const int h = *v;
    // Raised neighbors sit east, northeast and below; level neighbors sit
    // west, north and southwest.
    if (v[o.e] == h + 1 && v[o.ne] == h + 1 && v[o.s] == h + 1 && v[o.w] == h &&
        v[o.n] == h && v[o.sw] == h)
        return FlipKind::kUp;
    if (v[o.e] == h && v[o.ne] == h && v[o.s] == h && v[o.w] == h - 1 && v[o.n] == h - 1 &&
        v[o.sw] == h - 1)
        return FlipKind::kDown;
    return FlipKind::kNone;
}

}  // namespace

FlipKind flip_candidates(const HeightFunction& h, Vertex v) {
    const LatticeDomain& d = *h.domain();
    if (!d.is_interior(v.x, v.y))
        throw invalid_argument_error("flip_candidates: vertex not interior");
    NeighborOffsets o(d.width());
    return classify(h.raw().data() + d.index(v.x, v.y), o);
}

void random_flip(HeightFunction& h, Vertex v, bool raise_dir) {
    const LatticeDomain& d = *h.domain();
    NeighborOffsets o(d.width());
    int* p = h.raw().data() + d.index(v.x, v.y);
    FlipKind k = classify(p, o);
    if (k == FlipKind::kUp && raise_dir) ++*p;
    else if (k == FlipKind::kDown && !raise_dir) --*p;
}

void run_flip_dynamics(HeightFunction& h, std::uint64_t steps, RngStream& rng) {
    const LatticeDomain& d = *h.domain();
    const auto& interior = d.interior_vertices();
    if (interior.empty()) return;
    NeighborOffsets o(d.width());
    int* base = h.raw().data();
    std::vector<std::size_t> idx(interior.size());
    for (std::size_t i = 0; i < interior.size(); ++i)
        idx[i] = d.index(interior[i].x, interior[i].y);
    const std::uint64_t n = interior.size();
    // One draw per step: the top bit is the direction, the rest select
    // the vertex by multiply-shift (bias below 2^-63 per step).
    for (std::uint64_t s = 0; s < steps; ++s) {
        std::uint64_t u = rng.next_u64();
        bool up = (u & 1) != 0;
        std::uint64_t pick = static_cast<std::uint64_t>(
            (static_cast<__uint128_t>(u >> 1) * n) >> 63);
        int* p = base + idx[pick];
        FlipKind k = classify(p, o);
        if (k == FlipKind::kUp && up) ++*p;
        else if (k == FlipKind::kDown && !up) --*p;
    }
}

RegionDecomposition::RegionDecomposition(DomainPtr parent,
                                         std::vector<std::vector<std::uint8_t>> masks)
    : parent_(std::move(parent)) {
    const LatticeDomain& d = *parent_;
    if (masks.empty()) throw invalid_argument_error("decomposition needs at least one region");
    std::vector<std::uint8_t> covered(d.box_size(), 0);
    std::vector<std::uint8_t> interior_covered(d.box_size(), 0);
    for (auto& mask : masks) {
        if (mask.size() != d.box_size())
            throw invalid_argument_error("region mask size mismatch");
        Region r;
        r.mask = std::move(mask);
        double dx0 = 1e300, dx1 = -1e300, dy0 = 1e300, dy1 = -1e300;
        for (const Vertex& v : d.vertices()) {
            std::size_t i = d.index(v.x, v.y);
            if (!r.mask[i]) continue;
            covered[i] = 1;
            bool inner = true;
            for (int k = 0; k < 6 && inner; ++k) {
                int nx = v.x + kNeighborDx[k], ny = v.y + kNeighborDy[k];
                if (!d.contains(nx, ny) || !r.mask[d.index(nx, ny)]) inner = false;
            }
            // Region-interior additionally requires the vertex itself to be
            // surrounded within the lattice, which holds when all six
            // neighbors are members.
            if (inner) {
                r.interior.push_back(v);
                interior_covered[i] = 1;
            }
            dx0 = std::min(dx0, double(v.x));
            dx1 = std::max(dx1, double(v.x));
            dy0 = std::min(dy0, double(v.y));
            dy1 = std::max(dy1, double(v.y));
        }
        if (r.interior.empty())
            throw invalid_argument_error("region has empty interior");
        double w = dx1 - dx0, hgt = dy1 - dy0;
        r.diameter = std::sqrt(w * w + hgt * hgt);
        regions_.push_back(std::move(r));
    }
    for (const Vertex& v : d.vertices())
        if (!covered[d.index(v.x, v.y)])
            throw invalid_argument_error("regions do not cover the parent domain");
    for (const Vertex& v : d.interior_vertices())
        if (!interior_covered[d.index(v.x, v.y)])
            throw invalid_argument_error(
                "parent interior vertex interior to no region");
}

std::vector<double> RegionDecomposition::interior_fractions() const {
    double total = static_cast<double>(parent_->interior_vertices().size());
    std::vector<double> p;
    p.reserve(regions_.size());
    double sum = 0;
    for (const Region& r : regions_) {
        p.push_back(static_cast<double>(r.interior.size()) / total);
        sum += p.back();
    }
    // Overlaps make the raw fractions sum above one; normalize.
    for (double& x : p) x /= sum;
    return p;
}

RegionDecomposition horizontal_bands(const DomainPtr& parent, int k, int overlap) {
    const LatticeDomain& d = *parent;
    if (k < 1) throw invalid_argument_error("need k >= 1 bands");
    std::vector<std::vector<std::uint8_t>> masks;
    int ylo = d.y0(), yhi = d.y1();
    int band = (yhi - ylo + 1 + k - 1) / k;
    for (int i = 0; i < k; ++i) {
        int lo = ylo + i * band - overlap;
        int hi = ylo + (i + 1) * band - 1 + overlap;
        std::vector<std::uint8_t> mask(d.box_size(), 0);
        for (const Vertex& v : d.vertices())
            if (v.y >= lo && v.y <= hi) mask[d.index(v.x, v.y)] = 1;
        masks.push_back(std::move(mask));
    }
    return RegionDecomposition(parent, std::move(masks));
}

void run_region_flip(HeightFunction& h, const RegionDecomposition& regions,
                     std::uint64_t block_len, std::uint64_t total, RngStream& rng) {
    if (block_len == 0) throw invalid_argument_error("block length must be positive");
    const LatticeDomain& d = *h.domain();
    NeighborOffsets o(d.width());
    int* base = h.raw().data();
    const std::size_t k = regions.size();
    for (std::uint64_t t = 1; t <= total; ++t) {
        std::uint64_t s = (t - 1) / block_len;       // block number, from 0
        const Region& r = regions.regions()[s % k];  // block s targets region s mod k
        std::uint64_t u = rng.next_u64();
        bool up = (u & 1) != 0;
        std::uint64_t pick = static_cast<std::uint64_t>(
            (static_cast<__uint128_t>(u >> 1) * r.interior.size()) >> 63);
        const Vertex v = r.interior[pick];
        int* p = base + d.index(v.x, v.y);
        FlipKind kind = classify(p, o);
        if (kind == FlipKind::kUp && up) ++*p;
        else if (kind == FlipKind::kDown && !up) --*p;
    }
}

CensorSchedule censor_sequence(const std::vector<double>& p, std::uint64_t length,
                               RngStream& rng) {
    if (p.empty()) throw invalid_argument_error("empty probability vector");
    double sum = 0;
    for (double x : p) {
        if (x < 0) throw invalid_argument_error("negative probability");
        sum += x;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw invalid_argument_error("probabilities must sum to 1");
    for (double x : p)
        if (x == 0) throw invalid_argument_error("region with zero interior fraction");

    const std::size_t k = p.size();
    CensorSchedule sched;
    sched.probabilities = p;
    auto draw_class = [&]() {
        double u = rng.next_double();
        double acc = 0;
        for (std::size_t j = 0; j < k; ++j) {
            acc += p[j];
            if (u < acc) return j;
        }
        return k - 1;
    };
    // X_1 = j+1 lands in class j; afterwards the increment from X_r is the
    // unique i in [1,k] with X_r + i in the drawn residue class (mod k).
    std::uint64_t x = draw_class() + 1;
    while (x <= length) {
        sched.scheduled_blocks.push_back(x);
        std::size_t cls = draw_class();  // target residue class j = cls+1 (1-based)
        std::uint64_t current = x % k;   // residue of X_r, classes 1..k taken mod k
        std::uint64_t target = (cls + 1) % k;
        std::uint64_t inc = (target + k - current) % k;
        if (inc == 0) inc = k;
        x += inc;
    }
    return sched;
}

void run_censored(HeightFunction& h, const RegionDecomposition& regions,
                  const CensorSchedule& schedule, RngStream& rng) {
    const LatticeDomain& d = *h.domain();
    NeighborOffsets o(d.width());
    int* base = h.raw().data();
    const std::size_t k = regions.size();
    for (std::uint64_t s : schedule.scheduled_blocks) {
        // Block s targets region i with i = s (mod k), 1-based.
        std::size_t i = static_cast<std::size_t>((s - 1) % k);
        const Region& r = regions.regions()[i];
        std::uint64_t pick = rng.uniform_below(r.interior.size());
        bool up = rng.next_bit();
        const Vertex v = r.interior[pick];
        int* p = base + d.index(v.x, v.y);
        FlipKind kind = classify(p, o);
        if (kind == FlipKind::kUp && up) ++*p;
        else if (kind == FlipKind::kDown && !up) --*p;
    }
}

void alternating_step(HeightFunction& h, const RegionDecomposition& regions, std::size_t i,
                      RngStream& rng, const AlternatingConfig& cfg) {
    const LatticeDomain& d = *h.domain();
    const Region& r = regions.regions().at(i);

    // Fixed frame: region members that are not region-interior.
    std::vector<std::uint8_t> fixed(d.box_size(), 0);
    std::vector<int> values(d.box_size(), 0);
    std::vector<std::uint8_t> is_inner(d.box_size(), 0);
    for (const Vertex& v : r.interior) is_inner[d.index(v.x, v.y)] = 1;
    for (const Vertex& v : d.vertices()) {
        std::size_t bi = d.index(v.x, v.y);
        if (!r.mask[bi]) continue;
        if (!is_inner[bi]) {
            fixed[bi] = 1;
            values[bi] = h.at(v.x, v.y);
        }
    }
    // Exact resampling when the profile fits; otherwise long single-flip
    // runs inside the region.
    int mx0 = d.x1() + 1, mx1 = d.x0() - 1, my0 = d.y1() + 1, my1 = d.y0() - 1;
    for (const Vertex& v : d.vertices()) {
        if (!r.mask[d.index(v.x, v.y)]) continue;
        mx0 = std::min(mx0, v.x);
        mx1 = std::max(mx1, v.x);
        my0 = std::min(my0, v.y);
        my1 = std::max(my1, v.y);
    }
    int span = std::min(mx1 - mx0, my1 - my0) + 1;
    if (span <= cfg.dp_width_cap) {
        // Identical frames recur constantly on small domains; memoize the
        // built transfer matrix per (region, frame values).
        thread_local std::unordered_map<std::string, std::shared_ptr<ProfileDp>> cache;
        std::string key;
        key.reserve(16 + d.box_size() / 4);
        key.append(reinterpret_cast<const char*>(&i), sizeof(i));
        const void* domain_tag = static_cast<const void*>(&d);
        key.append(reinterpret_cast<const char*>(&domain_tag), sizeof(domain_tag));
        for (const Vertex& v : d.vertices()) {
            std::size_t bi = d.index(v.x, v.y);
            if (r.mask[bi] && fixed[bi])
                key.push_back(static_cast<char>(values[bi] & 0xFF));
        }
        auto it = cache.find(key);
        if (it == cache.end()) {
            if (cache.size() > 4096) cache.clear();
            DpConfig dpc;
            dpc.width_cap = cfg.dp_width_cap;
            it = cache.emplace(key, std::make_shared<ProfileDp>(h.domain(), r.mask, fixed,
                                                                values, dpc))
                     .first;
        }
        std::vector<int> sampled = it->second->sample(rng);
        for (const Vertex& v : r.interior) h.at(v.x, v.y) = sampled[d.index(v.x, v.y)];
        return;
    }
    std::uint64_t steps;
    if (cfg.fallback_steps) {
        steps = *cfg.fallback_steps;
    } else {
        double scale = static_cast<double>(d.scale());
        steps = flip_mixing_budget_for(r.diameter, 1.0 / (scale * scale * scale));
    }
    NeighborOffsets o(d.width());
    int* base = h.raw().data();
    for (std::uint64_t s = 0; s < steps; ++s) {
        std::uint64_t pick = rng.uniform_below(r.interior.size());
        bool up = rng.next_bit();
        const Vertex v = r.interior[pick];
        int* p = base + d.index(v.x, v.y);
        FlipKind kind = classify(p, o);
        if (kind == FlipKind::kUp && up) ++*p;
        else if (kind == FlipKind::kDown && !up) --*p;
    }
}

void run_alternating(HeightFunction& h, const RegionDecomposition& regions,
                     std::uint64_t steps, RngStream& rng, const AlternatingConfig& cfg) {
    const std::size_t k = regions.size();
    for (std::uint64_t t = 1; t <= steps; ++t)
        alternating_step(h, regions, static_cast<std::size_t>((t - 1) % k), rng, cfg);
}

void grand_coupling_run(std::vector<HeightFunction>& copies, std::uint64_t steps,
                        RngStream& rng) {
    if (copies.empty()) return;
    const LatticeDomain& d = *copies[0].domain();
    for (std::size_t c = 1; c < copies.size(); ++c) {
        if (copies[c].domain().get() != &d)
            throw invalid_argument_error("coupled copies must share a domain");
        for (const Vertex& v : d.vertices())
            if (copies[c - 1].at(v.x, v.y) < copies[c].at(v.x, v.y))
                throw invalid_argument_error("initial copies not pointwise ordered");
    }
    NeighborOffsets o(d.width());
    const auto& interior = d.interior_vertices();
    for (std::uint64_t s = 0; s < steps; ++s) {
        std::uint64_t pick = rng.uniform_below(interior.size());
        bool up = rng.next_bit();
        const Vertex v = interior[pick];
        std::size_t bi = d.index(v.x, v.y);
        for (auto& h : copies) {
            int* p = h.raw().data() + bi;
            FlipKind kind = classify(p, o);
            if (kind == FlipKind::kUp && up) ++*p;
            else if (kind == FlipKind::kDown && !up) --*p;
        }
        for (std::size_t c = 1; c < copies.size(); ++c)
            if (copies[c - 1].raw()[bi] < copies[c].raw()[bi])
                throw validation_error("grand coupling order violated");
    }
}

std::uint64_t flip_mixing_budget_for(double diameter, double eps, double c) {
    if (!(eps > 0 && eps < 1)) throw invalid_argument_error("eps must lie in (0,1)");
    // Lattice diameters square to integers; guard the round trip through
    // the square root.
    double a = std::ceil(diameter * diameter - 1e-9);
    long double la = std::log(static_cast<long double>(a));
    long double budget = static_cast<long double>(c) * std::pow(static_cast<long double>(a), 4) * la +
                         static_cast<long double>(c) * std::pow(static_cast<long double>(a), 3) * la *
                             std::log(1.0L / static_cast<long double>(eps));
    if (budget > static_cast<long double>(std::numeric_limits<std::uint64_t>::max()))
        throw range_error("flip mixing budget exceeds 64-bit range");
    return static_cast<std::uint64_t>(std::ceil(static_cast<double>(budget)));
}

std::uint64_t flip_mixing_budget(const LatticeDomain& domain, double eps, double c) {
    return flip_mixing_budget_for(domain.diameter(), eps, c);
}

BigUint alternating_mixing_budget(const LatticeDomain& domain) {
    double diam = domain.diameter();
    std::uint64_t a = static_cast<std::uint64_t>(std::ceil(diam * diam - 1e-9));
    BigUint b(1);
    for (int i = 0; i < 6; ++i) b.mul_small(a);
    return b;
}

namespace {

struct CoupledPair {
    std::vector<int> top, bottom;
    std::size_t diff = 0;

    void count_diff(const std::vector<std::size_t>& idx) {
        diff = 0;
        for (std::size_t i : idx)
            if (top[i] != bottom[i]) ++diff;
    }
};

}  // namespace

CftpResult perfect_sample_cftp(const DomainPtr& domain, const BoundaryHeightFn& bh,
                               RngStream rng, std::uint64_t initial_epoch,
                               std::uint64_t max_updates) {
    auto [lo, hi] = extremal_heights(domain, bh);
    const LatticeDomain& d = *domain;
    const auto& interior = d.interior_vertices();
    if (interior.empty() || lo.same_values(hi))
        return {lo, 0, 0};

    std::vector<std::size_t> idx(interior.size());
    for (std::size_t i = 0; i < interior.size(); ++i)
        idx[i] = d.index(interior[i].x, interior[i].y);
    NeighborOffsets o(d.width());
    const std::uint64_t n = interior.size();

    // Update at past time -k, a pure function of the stream.
    auto update = [&](std::vector<int>& top, std::vector<int>& bottom, std::uint64_t k,
                      std::size_t& diff) {
        std::uint64_t u0 = rng.at(2 * k);
        std::uint64_t u1 = rng.at(2 * k + 1);
        std::size_t pick = static_cast<std::size_t>(
            (static_cast<__uint128_t>(u0) * n) >> 64);
        bool up = (u1 >> 63) != 0;
        std::size_t bi = idx[pick];
        bool was_equal = top[bi] == bottom[bi];
        {
            int* p = top.data() + bi;
            FlipKind kind = classify(p, o);
            if (kind == FlipKind::kUp && up) ++*p;
            else if (kind == FlipKind::kDown && !up) --*p;
        }
        {
            int* p = bottom.data() + bi;
            FlipKind kind = classify(p, o);
            if (kind == FlipKind::kUp && up) ++*p;
            else if (kind == FlipKind::kDown && !up) --*p;
        }
        bool is_equal = top[bi] == bottom[bi];
        if (was_equal && !is_equal) ++diff;
        if (!was_equal && is_equal) --diff;
    };

    std::uint64_t epoch = initial_epoch ? initial_epoch : std::max<std::uint64_t>(1024, 4 * n);
    std::uint64_t total_updates = 0;
    for (;;) {
        CoupledPair pair;
        pair.top = hi.raw();
        pair.bottom = lo.raw();
        pair.count_diff(idx);
        for (std::uint64_t k = epoch; k >= 1; --k) {
            update(pair.top, pair.bottom, k, pair.diff);
            ++total_updates;
        }
        if (pair.diff == 0)
            return {HeightFunction(domain, std::move(pair.top)), epoch, total_updates};
        if (total_updates > max_updates)
            throw convergence_error("coupling from the past exceeded the update cap");
        epoch *= 2;
    }
}

std::uint64_t coalescence_time(const DomainPtr& domain, const BoundaryHeightFn& bh,
                               RngStream& rng, std::uint64_t max_steps) {
    auto [lo, hi] = extremal_heights(domain, bh);
    const LatticeDomain& d = *domain;
    const auto& interior = d.interior_vertices();
    if (interior.empty() || lo.same_values(hi)) return 0;
    std::vector<std::size_t> idx(interior.size());
    for (std::size_t i = 0; i < interior.size(); ++i)
        idx[i] = d.index(interior[i].x, interior[i].y);
    NeighborOffsets o(d.width());
    std::vector<int> top = hi.raw(), bottom = lo.raw();
    std::size_t diff = 0;
    for (std::size_t i : idx)
        if (top[i] != bottom[i]) ++diff;
    for (std::uint64_t s = 1; s <= max_steps; ++s) {
        std::uint64_t pick = rng.uniform_below(interior.size());
        bool up = rng.next_bit();
        std::size_t bi = idx[pick];
        bool was_equal = top[bi] == bottom[bi];
        {
            int* p = top.data() + bi;
            FlipKind kind = classify(p, o);
            if (kind == FlipKind::kUp && up) ++*p;
            else if (kind == FlipKind::kDown && !up) --*p;
        }
        {
            int* p = bottom.data() + bi;
            FlipKind kind = classify(p, o);
            if (kind == FlipKind::kUp && up) ++*p;
            else if (kind == FlipKind::kDown && !up) --*p;
        }
        bool is_equal = top[bi] == bottom[bi];
        if (was_equal && !is_equal) ++diff;
        if (!was_equal && is_equal) --diff;
        if (diff == 0) return s;
    }
    throw convergence_error("extremal chains did not meet within the step cap");
}

}  // namespace arctic
