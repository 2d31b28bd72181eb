#ifndef SAFECTRL_PROBLEM_HPP
#define SAFECTRL_PROBLEM_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "safectrl/domain.hpp"
#include "safectrl/rng.hpp"

namespace safectrl {

/// A tuning task: one performance function (index 0) plus optional further
/// functions, some of which carry safety thresholds. Evaluators take raw
/// (denormalized) points and, for stochastic plants, an RNG.
struct Problem {
    std::string name;
    BoxDomain domain;

    /// True (noise-free) values of all functions at a raw-coordinate point.
    std::function<std::vector<double>(const ParamPoint&, Rng&)> evaluate_true;

    int num_functions = 1;
    /// (function index, threshold h) pairs; the safe set is defined on these.
    std::vector<std::pair<int, double>> constraints;

    /// Known optimum of the performance function, for regret accounting.
    std::optional<double> true_optimum_value;

    /// Raw-coordinate safe seed, if the problem supplies one (control tuning
    /// uses its default gains; benchmarks sample one instead).
    std::optional<ParamPoint> fixed_seed;

    /// Draws a raw-coordinate safe seed when no fixed seed exists.
    std::function<ParamPoint(Rng&)> sample_seed;
};

} // namespace safectrl

#endif
