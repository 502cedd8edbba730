#include "sikv/harness/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "sikv/common.hpp"

namespace sikv::harness {

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

PairedTest paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionError("paired_t_test: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + " samples");
    }
    if (a.size() < 2) throw ValidationError("paired_t_test: need at least two pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];

    PairedTest r;
    r.n = d.size();
    r.mean_diff = mean(d);
    r.sd_diff = stddev(d);
    if (r.sd_diff == 0.0) {
        r.t = r.mean_diff > 0.0 ? INFINITY : (r.mean_diff < 0.0 ? -INFINITY : 0.0);
        r.p_value = r.mean_diff > 0.0 ? 0.0 : 1.0;
        return r;
    }
    r.t = r.mean_diff / (r.sd_diff / std::sqrt(static_cast<double>(r.n)));
    boost::math::students_t dist(static_cast<double>(r.n - 1));
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.t));
    return r;
}

double binomial_fraction_sigma(std::size_t n, double p) {
    if (n == 0) return 0.0;
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace sikv::harness
