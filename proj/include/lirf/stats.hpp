#pragma once

#include <cstddef>
#include <vector>

namespace lirf {

double mean(const std::vector<double>& xs);
// Standard error of the mean (sample stddev / sqrt(n)); 0 for n < 2.
double stderr_mean(const std::vector<double>& xs);
// Binomial standard error for a success fraction over n trials.
double stderr_fraction(double p, std::size_t n);

// One-sided paired test that mean(a - b) > gap at the 5% level (Student t,
// df = n-1). Zero-variance batches pass when every difference clears the gap.
bool paired_greater(const std::vector<double>& a, const std::vector<double>& b,
                    double gap, double* t_out = nullptr);
// One-sided one-sample test that mean(x) > threshold at the 5% level.
bool mean_greater(const std::vector<double>& xs, double threshold,
                  double* t_out = nullptr);

// Critical value of the one-sided Student t at alpha = 0.05.
double t_critical_05(std::size_t df);

// Interval overlap of mean +- stderr.
bool stderr_intervals_overlap(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace lirf
