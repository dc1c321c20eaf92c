//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
// Measurement statistics: percentile bootstrap of the mean, the
// Shapiro-Wilk normality test, and order-statistic confidence intervals.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace edgeplan {

struct BootstrapResult {
    std::vector<double> means; // one per resample, in draw order
    double grand_mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    uint32_t resample_size = 0;
    uint32_t reps = 0;
    uint64_t seed = 0;
};

struct ShapiroWilk {
    double w = 0.0;
    double p_value = 0.0;
};

double mean_of(const std::vector<double>& v);
double sample_stddev(const std::vector<double>& v);

// Draws `reps` resamples of `resample_size` with replacement, records each
// resample mean, and reports the 95% percentile interval over the means.
// Resample j uses its own substream of `seed`, so results do not depend on
// evaluation order.
BootstrapResult bootstrap_mean(const std::vector<double>& samples, uint32_t resample_size,
                               uint32_t reps, uint64_t seed);

// W statistic and p-value for 3 <= n <= 5000 using the standard polynomial
// approximation. Rejects degenerate (zero-range) input.
ShapiroWilk shapiro_wilk(const std::vector<double>& samples);

// Percentile interval over `values` at the given level, with linear
// interpolation between order statistics (quantile h = (n-1)p).
std::pair<double, double> confidence_interval(const std::vector<double>& values, double level);

// Single quantile with the same interpolation rule; p in [0, 1].
double quantile(const std::vector<double>& sorted_values, double p);

// One value per line, optional "value" header line.
std::vector<double> load_samples_csv(const std::string& path);
void save_samples_csv(const std::string& path, const std::vector<double>& values);

} // namespace edgeplan
