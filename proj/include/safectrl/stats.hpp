#ifndef SAFECTRL_STATS_HPP
#define SAFECTRL_STATS_HPP

#include <Eigen/Dense>
#include <vector>

#include "safectrl/rng.hpp"

namespace safectrl {

double mean_of(const std::vector<double>& xs);

/// Sample standard error of the mean (0 for a single value).
double std_error_of(const std::vector<double>& xs);

/// One-sided paired bootstrap: resamples the per-pair differences a_i - b_i
/// and returns the fraction of resampled means that are <= 0, i.e. the
/// bootstrap confidence that mean(a) <= mean(b).
double bootstrap_confidence_leq(const std::vector<double>& a, const std::vector<double>& b,
                                int resamples, Rng& rng);

/// Average per-iteration decrease of `series` over (from, to], i.e.
/// (series[from] - series[to]) / (to - from).
double average_decline(const Eigen::VectorXd& series, int from, int to);

} // namespace safectrl

#endif
