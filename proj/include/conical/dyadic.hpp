#pragma once

// Dyadic grid on (-1,1) and the exact integer helpers used to classify
// slopes. Interval endpoints are dyadic rationals, so membership and slope
// tests are integer comparisons, never float tolerance checks.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace conical {

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
    std::int64_t r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) r += b;
    return r;
}

}  // namespace detail

/// Open dyadic interval (index*2^-level, (index+1)*2^-level). Intervals of
/// the grid on (-1,1) have index in [-2^level, 2^level).
struct DyadicInterval {
    int level = 0;
    std::int64_t index = 0;

    double left() const { return std::ldexp(static_cast<double>(index), -level); }
    double right() const { return std::ldexp(static_cast<double>(index + 1), -level); }
    double mid() const { return 0.5 * (left() + right()); }
    double length() const { return std::ldexp(1.0, -level); }

    bool contains(double t) const { return t > left() && t < right(); }

    /// Ancestor at a coarser level.
    DyadicInterval ancestor(int coarser_level) const {
        if (coarser_level > level)
            throw std::invalid_argument("ancestor level must be <= interval level");
        return {coarser_level, detail::floor_div(index, std::int64_t{1} << (level - coarser_level))};
    }

    bool valid_in_unit() const {
        std::int64_t n = std::int64_t{1} << level;
        return index >= -n && index < n;
    }

    friend bool operator==(const DyadicInterval& a, const DyadicInterval& b) {
        return a.level == b.level && a.index == b.index;
    }
};

}  // namespace conical
