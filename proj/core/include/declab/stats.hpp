#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace declab::stats {

enum class IntervalMethod { wilson, normal_mean };

std::string to_string(IntervalMethod method);

struct IntervalEstimate {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double confidence = 0.95;
    IntervalMethod method = IntervalMethod::wilson;
};

struct ZTestResult {
    double z = 0.0;
    double p_two_sided = 1.0;
    double pooled_proportion = 0.0;
    bool degenerate = false; // pooled proportion was 0 or 1
};

struct ScoreSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation, n-1 denominator
    IntervalEstimate interval;
    double min = 0.0;
    double max = 0.0;
};

// Standard normal CDF, internally implemented rational approximation,
// |error| < 1e-10 over the real line.
double normal_cdf(double x);

// Inverse of normal_cdf on (0,1). Refined to near machine precision.
double normal_quantile(double q);

// Wilson score interval for a binomial proportion. Throws Error(data) when
// n < 1, successes out of range, or confidence outside (0,1).
IntervalEstimate wilson_interval(long successes, long n, double confidence = 0.95);

// mean +/- z * sd / sqrt(n). Throws on n < 1 or sd < 0.
IntervalEstimate normal_mean_ci(double mean, double sd, long n, double confidence = 0.95);

// Pooled two-proportion z-test, two-sided p via the normal CDF.
// Degenerate pooled proportions (0 or 1) give z=0, p=1 with the flag set.
ZTestResult two_proportion_z(long s1, long n1, long s2, long n2,
                             bool continuity_correction = false);

// Mean, sample SD, normal CI, min and max of a non-empty score sequence.
ScoreSummary aggregate_scores(std::span<const double> scores, double confidence = 0.95);

} // namespace declab::stats
