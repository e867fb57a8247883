#include "lirf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lirf {

double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / double(xs.size());
}

double stderr_mean(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / double(n - 1)) / std::sqrt(double(n));
}

double stderr_fraction(double p, std::size_t n) {
    if (n == 0) return 0.0;
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / double(n));
}

double t_critical_05(std::size_t df) {
    // One-sided 95% quantiles of the Student t distribution.
    static const double table[] = {6.314, 2.920, 2.353, 2.132, 2.015, 1.943, 1.895,
                                   1.860, 1.833, 1.812, 1.796, 1.782, 1.771, 1.761,
                                   1.753, 1.746, 1.740, 1.734, 1.729, 1.725, 1.721,
                                   1.717, 1.714, 1.711, 1.708, 1.706, 1.703, 1.701,
                                   1.699, 1.697};
    if (df == 0) return 6.314;
    if (df <= 30) return table[df - 1];
    return 1.645;
}

bool paired_greater(const std::vector<double>& a, const std::vector<double>& b,
                    double gap, double* t_out) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("paired test needs matched nonempty samples");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i] - gap;
    return mean_greater(d, 0.0, t_out);
}

bool mean_greater(const std::vector<double>& xs, double threshold, double* t_out) {
    const double m = mean(xs) - threshold;
    const double se = stderr_mean(xs);
    if (se == 0.0) {
        if (t_out) *t_out = m > 0 ? 1e9 : -1e9;
        // Degenerate sample: decide on the margin itself.
        return m > 0.0 || std::all_of(xs.begin(), xs.end(),
                                      [&](double x) { return x - threshold > 0.0; });
    }
    const double t = m / se;
    if (t_out) *t_out = t;
    return t > t_critical_05(xs.size() - 1);
}

bool stderr_intervals_overlap(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a), mb = mean(b);
    const double sa = stderr_mean(a), sb = stderr_mean(b);
    return ma - sa <= mb + sb && mb - sb <= ma + sa;
}

}  // namespace lirf
