#pragma once

#include <compare>

namespace vcr {

// Thin tagged wrapper so hours and rates cannot be swapped at call sites.
template <class Tag>
class Quantity {
public:
    constexpr Quantity() = default;
    constexpr explicit Quantity(double v) : v_(v) {}
    [[nodiscard]] constexpr double value() const { return v_; }
    constexpr auto operator<=>(const Quantity&) const = default;

private:
    double v_ = 0.0;
};

using Hours = Quantity<struct HoursTag>;
using Rate = Quantity<struct RateTag>;  // events per hour

}  // namespace vcr
