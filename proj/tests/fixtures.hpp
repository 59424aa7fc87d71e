// Shared solved limit shapes; the variational solves dominate test time,
// so every test file draws on one program-wide cache.
#ifndef ARCTIC_TESTS_FIXTURES_HPP
#define ARCTIC_TESTS_FIXTURES_HPP

#include <map>
#include <memory>

#include "arctic/limitshape.hpp"

namespace fixtures {

inline const arctic::ContinuumHeight& solved_unit_hexagon(double mesh) {
    static std::map<long long, std::shared_ptr<arctic::ContinuumHeight>> cache;
    long long key = std::llround(1.0 / mesh);
    auto it = cache.find(key);
    if (it == cache.end()) {
        auto spec = arctic::hexagon_spec(arctic::Rational(1), arctic::Rational(1),
                                         arctic::Rational(1));
        it = cache
                 .emplace(key, std::make_shared<arctic::ContinuumHeight>(
                                   arctic::solve_limit_shape(spec, mesh)))
                 .first;
    }
    return *it->second;
}

inline const arctic::LiquidRegion& unit_hexagon_liquid(double mesh) {
    static std::map<long long, std::shared_ptr<arctic::LiquidRegion>> cache;
    long long key = std::llround(1.0 / mesh);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache
                 .emplace(key, std::make_shared<arctic::LiquidRegion>(
                                   arctic::extract_liquid_region(solved_unit_hexagon(mesh))))
                 .first;
    }
    return *it->second;
}

}  // namespace fixtures

#endif
