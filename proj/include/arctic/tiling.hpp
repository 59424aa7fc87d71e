#ifndef ARCTIC_TILING_HPP
#define ARCTIC_TILING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "arctic/lattice.hpp"

namespace arctic {

// Integer vertex labels obeying
//   H(v) - H(u) in {0, 1}  for u = (x,y), v in {(x+1,y), (x,y-1), (x+1,y+1)}.
// Stored as a flat array over the domain's bounding box; cloning is cheap.
class HeightFunction {
public:
    HeightFunction() = default;
    HeightFunction(DomainPtr domain, std::vector<int> values_by_box_index)
        : domain_(std::move(domain)), values_(std::move(values_by_box_index)) {}

    const DomainPtr& domain() const { return domain_; }
    int at(int x, int y) const { return values_[domain_->index(x, y)]; }
    int& at(int x, int y) { return values_[domain_->index(x, y)]; }
    const std::vector<int>& raw() const { return values_; }
    std::vector<int>& raw() { return values_; }

    bool operator==(const HeightFunction& o) const { return same_values(o); }

    // Values agree on every domain vertex (box values outside the domain
    // are ignored).
    bool same_values(const HeightFunction& o) const;

private:
    DomainPtr domain_;
    std::vector<int> values_;
};

enum class LozengeType : std::uint8_t { kType1 = 1, kType2 = 2, kType3 = 3 };

// A lozenge is an up face glued to one of its three down-face partners:
//   type 1: up(x,y) + down(x,y-1)   across the horizontal edge below,
//   type 2: up(x,y) + down(x+1,y)   across the vertical edge right,
//   type 3: up(x,y) + down(x,y)     across the main diagonal.
struct Lozenge {
    int x = 0;  // anchor of the up face
    int y = 0;
    LozengeType type = LozengeType::kType3;
};

// Perfect matching of the faces, indexed by the up-face anchors.
class Tiling {
public:
    Tiling() = default;
    Tiling(DomainPtr domain, std::vector<Lozenge> lozenges)
        : domain_(std::move(domain)), lozenges_(std::move(lozenges)) {}

    const DomainPtr& domain() const { return domain_; }
    const std::vector<Lozenge>& lozenges() const { return lozenges_; }

private:
    DomainPtr domain_;
    std::vector<Lozenge> lozenges_;
};

// Non-intersecting Bernoulli walks, stored slice-by-slice: on row t the
// walk positions are the x with H(x+1,t) = H(x,t)+1, sorted increasing,
// and the walk through position x carries index H(x+1,t).
class WalkEnsemble {
public:
    struct Slice {
        int t = 0;
        int first_index = 0;          // index of the leftmost walk
        std::vector<int> positions;   // strictly increasing
    };

    WalkEnsemble() = default;
    WalkEnsemble(DomainPtr domain, std::vector<Slice> slices)
        : domain_(std::move(domain)), slices_(std::move(slices)) {}

    const DomainPtr& domain() const { return domain_; }
    const std::vector<Slice>& slices() const { return slices_; }
    const Slice& slice_at(int t) const;

    // Position of walk i at time t; throws not_found_error if absent.
    int position(int walk_index, int t) const;
    bool has_walk(int walk_index, int t) const;

private:
    DomainPtr domain_;
    std::vector<Slice> slices_;  // ordered by t
};

struct HeightViolation {
    int x1, y1, x2, y2;  // offending edge
    std::string rule;
};

// Empty result iff H is a valid height function whose boundary restriction
// matches the domain's boundary height function.
std::vector<HeightViolation> validate_height(const HeightFunction& h,
                                             const BoundaryHeightFn& bh);
std::vector<HeightViolation> validate_height(const HeightFunction& h);

Tiling height_to_tiling(const HeightFunction& h);
HeightFunction tiling_to_height(const Tiling& t, Vertex anchor, int value);
WalkEnsemble height_to_walks(const HeightFunction& h);
HeightFunction walks_to_height(const WalkEnsemble& w, const DomainPtr& domain,
                               const BoundaryHeightFn& bh);

}  // namespace arctic

#endif
