#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "vcr/rng.hpp"
#include "vcr/units.hpp"

namespace vcr {

namespace law {
struct Exponential {
    double rate;
};
struct Deterministic {
    double value;
};
struct Uniform {
    double lo, hi;
};
struct Erlang {
    int shape;
    double rate;
};
// Recruitment that never completes; the partner is on its own.
struct Never {};
}  // namespace law

// Distribution of a recruitment duration U.
class RecruitmentLaw {
public:
    using Variant =
        std::variant<law::Exponential, law::Deterministic, law::Uniform, law::Erlang, law::Never>;

    RecruitmentLaw() : v_(law::Exponential{6.0}) {}
    RecruitmentLaw(Variant v);  // validates parameters
    static RecruitmentLaw exponential(Rate r) { return RecruitmentLaw(law::Exponential{r.value()}); }

    // Grammar: exp:RATE | det:HOURS | uniform:LO,HI | erlang:K,RATE | never
    static RecruitmentLaw parse(std::string_view spec);

    [[nodiscard]] double sample(Stream& s) const;
    [[nodiscard]] double cdf(double t) const;
    [[nodiscard]] double mean() const;  // +inf for Never
    [[nodiscard]] bool is_exponential() const {
        return std::holds_alternative<law::Exponential>(v_);
    }
    [[nodiscard]] double exponential_rate() const;  // throws unless exponential
    [[nodiscard]] std::string spec() const;          // round-trips through parse
    [[nodiscard]] const Variant& variant() const { return v_; }

private:
    Variant v_;
};

}  // namespace vcr
