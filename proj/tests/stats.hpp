#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdint>
#include <vector>

namespace seco::test {

// Upper-tail p-value of Pearson's chi-square statistic against equal expected counts.
inline double chi_square_uniform_p(const std::vector<uint64_t>& counts) {
    double total = 0;
    for (auto c : counts) total += double(c);
    double expected = total / counts.size(), stat = 0;
    for (auto c : counts) {
        double d = double(c) - expected;
        stat += d * d / expected;
    }
    boost::math::chi_squared dist(double(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

// Two-sample chi-square homogeneity test over shared bins.
inline double chi_square_two_sample_p(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
    double na = 0, nb = 0;
    for (auto c : a) na += double(c);
    for (auto c : b) nb += double(c);
    double stat = 0;
    size_t bins = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double tot = double(a[i]) + double(b[i]);
        if (tot == 0) continue;
        ++bins;
        double ea = tot * na / (na + nb), eb = tot * nb / (na + nb);
        stat += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
    }
    boost::math::chi_squared dist(double(bins - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace seco::test
