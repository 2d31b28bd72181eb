#include "safectrl/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace safectrl {

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean_of: empty input");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / xs.size();
}

double std_error_of(const std::vector<double>& xs) {
    const int n = static_cast<int>(xs.size());
    if (n <= 1) return 0.0;
    const double m = mean_of(xs);
    double var = 0.0;
    for (double x : xs) var += (x - m) * (x - m);
    var /= (n - 1);
    return std::sqrt(var / n);
}

double bootstrap_confidence_leq(const std::vector<double>& a, const std::vector<double>& b,
                                int resamples, Rng& rng) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("bootstrap_confidence_leq: paired samples required");
    const int n = static_cast<int>(a.size());
    std::vector<double> diff(n);
    for (int i = 0; i < n; ++i) diff[i] = a[i] - b[i];
    std::uniform_int_distribution<int> pick(0, n - 1);
    int leq = 0;
    for (int r = 0; r < resamples; ++r) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += diff[pick(rng)];
        if (s / n <= 0.0) ++leq;
    }
    return static_cast<double>(leq) / resamples;
}

double average_decline(const Eigen::VectorXd& series, int from, int to) {
    if (from < 0 || to <= from || to >= series.size())
        throw std::invalid_argument("average_decline: window out of range");
    return (series[from] - series[to]) / static_cast<double>(to - from);
}

} // namespace safectrl
