#include "vcr/recruitment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <vector>

#include "vcr/csv.hpp"
#include "vcr/errors.hpp"

namespace vcr {

double Stream::exponential(double rate) { return -std::log(uniform01()) / rate; }

namespace {

template <class... F>
struct overloaded : F... {
    using F::operator()...;
};

std::vector<double> parse_numbers(std::string_view text, std::string_view spec) {
    std::vector<double> out;
    while (!text.empty()) {
        auto comma = text.find(',');
        auto tok = text.substr(0, comma);
        double v{};
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || p != tok.data() + tok.size())
            throw ConfigError("recruitment law '" + std::string(spec) + "': bad number '" +
                              std::string(tok) + "'");
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace

RecruitmentLaw::RecruitmentLaw(Variant v) : v_(v) {
    std::visit(overloaded{
                   [](const law::Exponential& e) {
                       if (!(e.rate > 0) || !std::isfinite(e.rate))
                           throw ConfigError("exponential recruitment rate must be positive");
                   },
                   [](const law::Deterministic& d) {
                       if (!(d.value >= 0) || !std::isfinite(d.value))
                           throw ConfigError("deterministic recruitment must be >= 0");
                   },
                   [](const law::Uniform& u) {
                       if (!(u.lo >= 0) || !(u.hi >= u.lo))
                           throw ConfigError("uniform recruitment needs 0 <= lo <= hi");
                   },
                   [](const law::Erlang& g) {
                       if (g.shape < 1 || !(g.rate > 0))
                           throw ConfigError("erlang recruitment needs k >= 1 and rate > 0");
                   },
                   [](const law::Never&) {},
               },
               v_);
}

RecruitmentLaw RecruitmentLaw::parse(std::string_view spec) {
    auto colon = spec.find(':');
    auto kind = spec.substr(0, colon);
    auto args = colon == std::string_view::npos ? std::vector<double>{}
                                                : parse_numbers(spec.substr(colon + 1), spec);
    auto need = [&](std::size_t k) {
        if (args.size() != k)
            throw ConfigError("recruitment law '" + std::string(spec) + "' expects " +
                              std::to_string(k) + " parameter(s)");
    };
    if (kind == "exp") {
        need(1);
        return RecruitmentLaw(law::Exponential{args[0]});
    }
    if (kind == "det") {
        need(1);
        return RecruitmentLaw(law::Deterministic{args[0]});
    }
    if (kind == "uniform") {
        need(2);
        return RecruitmentLaw(law::Uniform{args[0], args[1]});
    }
    if (kind == "erlang") {
        need(2);
        if (args[0] != std::floor(args[0])) throw ConfigError("erlang shape must be an integer");
        return RecruitmentLaw(law::Erlang{static_cast<int>(args[0]), args[1]});
    }
    if (kind == "never") {
        need(0);
        return RecruitmentLaw(law::Never{});
    }
    throw ConfigError("unknown recruitment law '" + std::string(spec) + "'");
}

double RecruitmentLaw::sample(Stream& s) const {
    return std::visit(overloaded{
                          [&](const law::Exponential& e) { return s.exponential(e.rate); },
                          [](const law::Deterministic& d) { return d.value; },
                          [&](const law::Uniform& u) { return s.uniform(u.lo, u.hi); },
                          [&](const law::Erlang& g) {
                              double t = 0;
                              for (int k = 0; k < g.shape; ++k) t += s.exponential(g.rate);
                              return t;
                          },
                          [](const law::Never&) { return std::numeric_limits<double>::infinity(); },
                      },
                      v_);
}

double RecruitmentLaw::cdf(double t) const {
    if (t < 0) return 0.0;
    return std::visit(overloaded{
                          [&](const law::Exponential& e) { return -std::expm1(-e.rate * t); },
                          [&](const law::Deterministic& d) { return t >= d.value ? 1.0 : 0.0; },
                          [&](const law::Uniform& u) {
                              if (u.hi == u.lo) return t >= u.lo ? 1.0 : 0.0;
                              return std::clamp((t - u.lo) / (u.hi - u.lo), 0.0, 1.0);
                          },
                          [&](const law::Erlang& g) {
                              // 1 - sum_{k<shape} e^{-x} x^k / k!
                              double x = g.rate * t, term = std::exp(-x), sum = 0;
                              for (int k = 0; k < g.shape; ++k) {
                                  sum += term;
                                  term *= x / (k + 1);
                              }
                              return 1.0 - sum;
                          },
                          [](const law::Never&) { return 0.0; },
                      },
                      v_);
}

double RecruitmentLaw::mean() const {
    return std::visit(overloaded{
                          [](const law::Exponential& e) { return 1.0 / e.rate; },
                          [](const law::Deterministic& d) { return d.value; },
                          [](const law::Uniform& u) { return 0.5 * (u.lo + u.hi); },
                          [](const law::Erlang& g) { return g.shape / g.rate; },
                          [](const law::Never&) { return std::numeric_limits<double>::infinity(); },
                      },
                      v_);
}

double RecruitmentLaw::exponential_rate() const {
    if (auto* e = std::get_if<law::Exponential>(&v_)) return e->rate;
    throw ConfigError("recruitment law " + spec() + " is not exponential");
}

std::string RecruitmentLaw::spec() const {
    return std::visit(
        overloaded{
            [](const law::Exponential& e) { return "exp:" + format_number(e.rate); },
            [](const law::Deterministic& d) { return "det:" + format_number(d.value); },
            [](const law::Uniform& u) {
                return "uniform:" + format_number(u.lo) + "," + format_number(u.hi);
            },
            [](const law::Erlang& g) {
                return "erlang:" + std::to_string(g.shape) + "," + format_number(g.rate);
            },
            [](const law::Never&) { return std::string("never"); },
        },
        v_);
}

}  // namespace vcr
