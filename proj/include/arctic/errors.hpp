#ifndef ARCTIC_ERRORS_HPP
#define ARCTIC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace arctic {

// Base class for all library errors.
struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Bad argument values (non-positive sides, invalid probabilities, ...).
struct invalid_argument_error : error {
    explicit invalid_argument_error(const std::string& what) : error(what) {}
};

// Scaling a polygon produced non-integer lattice vertices.
struct scale_mismatch_error : error {
    explicit scale_mismatch_error(const std::string& what) : error(what) {}
};

// The domain admits no tiling compatible with its boundary data.
struct untileable_error : error {
    explicit untileable_error(const std::string& what) : error(what) {}
};

// A height function, tiling or walk ensemble violates a structural rule.
struct validation_error : error {
    explicit validation_error(const std::string& what) : error(what) {}
};

// A resource cap was exceeded (DP width, enumeration size, ...).
struct capacity_error : error {
    explicit capacity_error(const std::string& what) : error(what) {}
};

// Argument outside the supported numerical range.
struct range_error : error {
    explicit range_error(const std::string& what) : error(what) {}
};

// Evaluation at an excluded point of the slope triangle or arctic curve.
struct domain_error : error {
    explicit domain_error(const std::string& what) : error(what) {}
};

// Arctic-curve tangent slope in {0, 1, inf}; local expansion undefined.
struct tangency_error : error {
    explicit tangency_error(const std::string& what) : error(what) {}
};

// Requested level/location does not exist.
struct not_found_error : error {
    explicit not_found_error(const std::string& what) : error(what) {}
};

// An iterative solve failed to converge; message carries diagnostics.
struct convergence_error : error {
    explicit convergence_error(const std::string& what) : error(what) {}
};

// Requested data is infeasible (barrier/entrance constraints, ...).
struct infeasible_error : error {
    explicit infeasible_error(const std::string& what) : error(what) {}
};

}  // namespace arctic

#endif
