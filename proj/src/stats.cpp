#include "vcr/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "vcr/errors.hpp"

namespace vcr {

void Accumulator::add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

void Accumulator::merge(const Accumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
    double d = o.mean_ - mean_;
    double n = na + nb;
    mean_ += d * nb / n;
    m2_ += o.m2_ + d * d * na * nb / n;
    n_ += o.n_;
}

double Accumulator::variance() const {
    return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double Accumulator::stderr_of_mean() const {
    return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error("ks_statistic needs two non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    // Step through the merged order; ties advance both sides together.
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_threshold(double significance, std::size_t n1, std::size_t n2) {
    double c = std::sqrt(-0.5 * std::log(significance / 2.0));
    double a = static_cast<double>(n1), b = static_cast<double>(n2);
    return c * std::sqrt((a + b) / (a * b));
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double significance) {
    auto n1 = a.size(), n2 = b.size();
    double d = ks_statistic(std::move(a), std::move(b));
    double thr = ks_threshold(significance, n1, n2);
    return {d, thr, d < thr};
}

double student_t_quantile(double p, double dof) {
    boost::math::students_t dist(dof);
    return boost::math::quantile(dist, p);
}

double paired_lower_bound(std::span<const double> diffs, double confidence) {
    Accumulator acc;
    for (double d : diffs) acc.add(d);
    if (acc.count() < 2) throw Error("paired_lower_bound needs at least two pairs");
    double t = student_t_quantile(confidence, static_cast<double>(acc.count() - 1));
    return acc.mean() - t * acc.stderr_of_mean();
}

}  // namespace vcr
