#pragma once

#include <cstddef>
#include <span>

namespace sikv::harness {

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two points.
double stddev(std::span<const double> x);

struct PairedTest {
    std::size_t n = 0;
    double mean_diff = 0.0;
    double sd_diff = 0.0;
    double t = 0.0;
    double p_value = 1.0;  // one-sided, H1: mean(a - b) > 0

    bool significant(double alpha = 0.05) const noexcept { return p_value < alpha; }
};

/// Paired one-sided Student t-test of a against b. With zero spread in the
/// differences the p-value is 0 when every difference is positive and 1 otherwise.
PairedTest paired_t_test(std::span<const double> a, std::span<const double> b);

/// Standard deviation of the fraction of successes among n Bernoulli(p) trials.
double binomial_fraction_sigma(std::size_t n, double p);

}  // namespace sikv::harness
