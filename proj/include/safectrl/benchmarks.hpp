#ifndef SAFECTRL_BENCHMARKS_HPP
#define SAFECTRL_BENCHMARKS_HPP

#include <string>
#include <vector>

#include "safectrl/problem.hpp"

namespace safectrl {

/// One of the three synthetic safety-thresholded benchmarks. All three are
/// the negated standard test functions, so larger is better and the safe
/// optimum sits above the threshold.
struct BenchmarkProblem {
    std::string name;
    BoxDomain domain;
    double true_optimum_value = 0.0;
    double safety_threshold = 0.0;
    int iteration_budget = 0;
    int stage_switch_default = 0;

    Problem to_problem() const;
    double eval(const ParamPoint& raw) const;
};

/// Negated six-hump camelback on [-2,2] x [-1,1]; maximum ~= 1.0316.
double camelback_eval(const ParamPoint& x);

/// Negated Hartmann-6 on [0,1]^6 with the canonical constants; max ~= 3.32237.
double hartmann6_eval(const ParamPoint& x);

/// exp(-4 ||x||^2) on [-1,1]^10; maximum 1 at the origin.
double gaussian10_eval(const ParamPoint& x);

BenchmarkProblem make_benchmark(const std::string& name);
std::vector<std::string> benchmark_names();

struct SeedNotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SafeSeed {
    ParamPoint point; // raw coordinates
    double value = 0.0;
    long long attempts = 0;
};

/// Rejection-sample uniform raw points until the true value clears the
/// threshold. Throws SeedNotFoundError past `max_attempts`.
SafeSeed sample_safe_seed(const BenchmarkProblem& problem, Rng& rng,
                          long long max_attempts = 1000000);

struct RegretCurve {
    Eigen::VectorXd mean;
    Eigen::VectorXd std_error;
    int repetitions = 0;
};

/// Per-iteration mean and standard error of simple regret across repetitions.
/// All series must share one iteration budget.
RegretCurve aggregate_regret(const std::vector<Eigen::VectorXd>& regret_series);

} // namespace safectrl

#endif
