#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace vcr {

// Welford accumulator; merge() is order-sensitive in the last bits, so callers
// that need bit-identical results merge partials in a fixed order.
class Accumulator {
public:
    void add(double x);
    void merge(const Accumulator& o);
    [[nodiscard]] std::uint64_t count() const { return n_; }
    [[nodiscard]] double mean() const { return mean_; }
    [[nodiscard]] double variance() const;  // sample variance, 0 when n < 2
    [[nodiscard]] double stderr_of_mean() const;

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct KsResult {
    double statistic;
    double threshold;
    bool pass;
};

// Two-sample Kolmogorov-Smirnov. Sorts copies of its inputs.
double ks_statistic(std::vector<double> a, std::vector<double> b);
// Asymptotic critical value c(alpha) * sqrt((n1 + n2) / (n1 n2)).
double ks_threshold(double significance, std::size_t n1, std::size_t n2);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double significance);

// One-sided upper quantile of Student's t.
double student_t_quantile(double p, double dof);

// Lower end of a one-sided confidence bound on the mean of paired differences.
double paired_lower_bound(std::span<const double> diffs, double confidence);

}  // namespace vcr
