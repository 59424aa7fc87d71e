#ifndef ARCTIC_ENUMERATION_HPP
#define ARCTIC_ENUMERATION_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "arctic/bigint.hpp"
#include "arctic/rng.hpp"
#include "arctic/tiling.hpp"

namespace arctic {

// Transfer-matrix enumeration of height functions with fixed values on a
// subset of vertices.  The scan sweeps the bounding box of the free set
// along its shorter axis; the state is the window of the last (span+1)
// assigned values, stored as offsets above the pointwise minimum.
struct DpConfig {
    int width_cap = 20;                // maximal frontier span
    std::size_t state_cap = 1u << 22;  // safety cap on states per layer
};

class ProfileDp {
public:
    using Config = DpConfig;

    // Whole-domain problem: fixed values = boundary heights.
    ProfileDp(DomainPtr domain, const BoundaryHeightFn& bh, DpConfig cfg = DpConfig());

    // Sub-problem: `member` marks the vertices involved (box mask over the
    // domain bounding box); vertices with fixed[i] != 0 carry value[i].
    ProfileDp(DomainPtr domain, std::vector<std::uint8_t> member,
              std::vector<std::uint8_t> fixed, std::vector<int> value,
              DpConfig cfg = DpConfig());

    const BigUint& total() const { return total_; }

    // Exactly uniform draw over the admissible completions.  Values are
    // written into a fresh box array (non-member cells are zero).
    std::vector<int> sample(RngStream& rng) const;

    // All completions; throws capacity_error if more than `cap`.
    std::vector<std::vector<int>> enumerate(std::uint64_t cap) const;

private:
    struct Layer {
        std::unordered_map<std::string, BigUint> states;
    };

    void build();
    bool transition(const std::string& state, int cell, int offset_value,
                    std::string& next) const;
    int cell_x(int p) const { return sx0_ + p % sw_; }
    int cell_y(int p) const { return sy0_ + p / sw_; }

    DomainPtr domain_;
    Config cfg_;
    std::vector<std::uint8_t> member_, fixed_;
    std::vector<int> value_;
    std::vector<int> hmin_, hmax_;
    bool transposed_ = false;
    int sx0_ = 0, sy0_ = 0, sw_ = 0, sh_ = 0;  // scan subbox (post-transpose)
    int span_ = 0;
    std::vector<Layer> layers_;
    BigUint total_;
};

// Number of height functions extending the boundary data (equivalently,
// of lozenge tilings for these domains).
BigUint count_tilings(const DomainPtr& domain, const BoundaryHeightFn& bh,
                      DpConfig cfg = DpConfig());

// Secondary oracle: counts perfect matchings of the face-adjacency graph
// by direct recursion.  Independent of the transfer-matrix path.
std::uint64_t count_tilings_recursive(const DomainPtr& domain, std::uint64_t cap = 100000000);

std::vector<HeightFunction> enumerate_all(const DomainPtr& domain, const BoundaryHeightFn& bh,
                                          std::uint64_t cap = 1000000);

HeightFunction exact_sample(const DomainPtr& domain, const BoundaryHeightFn& bh, RngStream& rng);

// Reusable exact sampler (builds the DP once).
class ExactSampler {
public:
    ExactSampler(DomainPtr domain, const BoundaryHeightFn& bh)
        : domain_(domain), dp_(domain, bh) {}
    HeightFunction sample(RngStream& rng) const {
        return HeightFunction(domain_, dp_.sample(rng));
    }
    const BigUint& total() const { return dp_.total(); }

private:
    DomainPtr domain_;
    ProfileDp dp_;
};

// Empirical total-variation distance between N draws of `sampler` and the
// exact uniform distribution on the enumerated state space.
double stationary_tv(const DomainPtr& domain, const BoundaryHeightFn& bh,
                     const std::function<HeightFunction()>& sampler, std::uint64_t n_draws);

struct GibbsGroupResult {
    std::string outside_key;
    std::uint64_t draws = 0;
    std::uint64_t conditional_states = 0;
    double p_value = 1.0;
    bool tested = false;  // groups with too few draws or one state are skipped
};

struct GibbsReport {
    std::vector<GibbsGroupResult> groups;
    double min_p_value = 1.0;
    std::uint64_t tested_groups = 0;
    bool pass(double alpha) const { return min_p_value > alpha; }
};

// Draws N exact samples, groups them by the configuration outside the
// given strip, and chi-squared-tests uniformity over the compatible strip
// fillings within each group.
GibbsReport conditional_gibbs_check(const DomainPtr& domain, const BoundaryHeightFn& bh,
                                    int strip_y_lo, int strip_y_hi, std::uint64_t n_draws,
                                    RngStream& rng, std::uint64_t min_group_draws = 40);

}  // namespace arctic

#endif
