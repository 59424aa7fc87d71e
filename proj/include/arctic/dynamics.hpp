#ifndef ARCTIC_DYNAMICS_HPP
#define ARCTIC_DYNAMICS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "arctic/bigint.hpp"
#include "arctic/enumeration.hpp"
#include "arctic/rng.hpp"
#include "arctic/tiling.hpp"

namespace arctic {

enum class FlipKind { kNone, kUp, kDown };

// Whether the unit bump at an interior vertex stays a height function.
// A vertex is never both increasable and decreasable.
FlipKind flip_candidates(const HeightFunction& h, Vertex v);

// One random flip: with the direction bit set, an increasable vertex is
// raised; with it clear, a decreasable vertex is lowered; otherwise the
// state is unchanged.  Each case fires with probability 1/2 under a fair
// direction bit, and sharing (vertex, bit) across coupled copies
// preserves pointwise order.
void random_flip(HeightFunction& h, Vertex v, bool raise_dir);

// Single-site dynamics: each step picks a uniform interior vertex and a
// fair direction bit.  Stationary distribution is uniform.
void run_flip_dynamics(HeightFunction& h, std::uint64_t steps, RngStream& rng);

// One sub-domain of a decomposition, given as a vertex mask over the
// parent bounding box.
struct Region {
    std::vector<std::uint8_t> mask;       // box-indexed membership
    std::vector<Vertex> interior;         // vertices with all 6 neighbors in the region
    double diameter = 0;
};

class RegionDecomposition {
public:
    RegionDecomposition(DomainPtr parent, std::vector<std::vector<std::uint8_t>> masks);

    const DomainPtr& parent() const { return parent_; }
    const std::vector<Region>& regions() const { return regions_; }
    std::size_t size() const { return regions_.size(); }

    // p_i = |interior of R_i| / |interior of R|.
    std::vector<double> interior_fractions() const;

private:
    DomainPtr parent_;
    std::vector<Region> regions_;
};

// Convenience: split the parent into k overlapping horizontal bands.
RegionDecomposition horizontal_bands(const DomainPtr& parent, int k, int overlap);

// Block dynamics driven by single flips: during block s (of length
// `block_len`), flips target uniform interior vertices of region
// (s-1) mod k.  Runs `total` single-flip steps.
void run_region_flip(HeightFunction& h, const RegionDecomposition& regions,
                     std::uint64_t block_len, std::uint64_t total, RngStream& rng);

struct CensorSchedule {
    std::vector<double> probabilities;
    std::vector<std::uint64_t> scheduled_blocks;  // strictly increasing block indices
};

// Random increasing block sequence: the first entry lands on block i with
// probability p_i, and each increment from X_r lands on residue class j
// (mod k) with probability p_j.
CensorSchedule censor_sequence(const std::vector<double>& p, std::uint64_t length,
                               RngStream& rng);

// Censored block dynamics: scheduled blocks perform exactly one random
// flip in their region at the first step of the block; all other steps
// idle.
void run_censored(HeightFunction& h, const RegionDecomposition& regions,
                  const CensorSchedule& schedule, RngStream& rng);

struct AlternatingConfig {
    int dp_width_cap = 20;
    // Fallback budget for regions too wide for exact resampling:
    // single-flip dynamics with accuracy eps = 1 / scale^3.
    std::optional<std::uint64_t> fallback_steps;  // overrides the formula budget
};

// Replaces H inside region i by a uniform sample given the induced
// boundary; the rest of H is untouched.
void alternating_step(HeightFunction& h, const RegionDecomposition& regions, std::size_t i,
                      RngStream& rng, const AlternatingConfig& cfg = {});

// Rounds of the alternating dynamics, cycling over the regions.
void run_alternating(HeightFunction& h, const RegionDecomposition& regions,
                     std::uint64_t steps, RngStream& rng, const AlternatingConfig& cfg = {});

// Runs all copies under shared (vertex, direction) updates.  Requires the
// copies pointwise ordered decreasingly; order is asserted after every
// step and a validation_error is thrown on any violation.
void grand_coupling_run(std::vector<HeightFunction>& ordered_copies, std::uint64_t steps,
                        RngStream& rng);

// C*A^4*log(A) + C*A^3*log(A)*log(1/eps), A = ceil(diameter^2).
std::uint64_t flip_mixing_budget(const LatticeDomain& domain, double eps, double c = 8.0);
std::uint64_t flip_mixing_budget_for(double diameter, double eps, double c = 8.0);

// ceil(A^6) with A = ceil(diameter^2); exact integer.
BigUint alternating_mixing_budget(const LatticeDomain& domain);

struct CftpResult {
    HeightFunction sample;
    std::uint64_t epoch = 0;        // updates in the final (successful) epoch
    std::uint64_t total_updates = 0;
};

// Perfect simulation by monotone coupling from the past: extremal states
// coupled under the shared updates of epochs T, 2T, 4T, ... until they
// meet at time zero.  Counter-based draws make re-runs of earlier epochs
// consistent without storing updates.
CftpResult perfect_sample_cftp(const DomainPtr& domain, const BoundaryHeightFn& bh,
                               RngStream rng, std::uint64_t initial_epoch = 0,
                               std::uint64_t max_updates = ~0ull);

// Forward coalescence time of the extremal pair under shared updates
// (diagnostic for budget calibration).
std::uint64_t coalescence_time(const DomainPtr& domain, const BoundaryHeightFn& bh,
                               RngStream& rng, std::uint64_t max_steps);

}  // namespace arctic

#endif
