#include "safectrl/benchmarks.hpp"

#include <cmath>

namespace safectrl {

double camelback_eval(const ParamPoint& x) {
    if (x.size() != 2) throw DomainError("camelback_eval: expects a 2-vector");
    static const BoxDomain box{Eigen::Vector2d(-2.0, -1.0), Eigen::Vector2d(2.0, 1.0)};
    if (!box.contains(x)) throw DomainError("camelback_eval: point outside [-2,2]x[-1,1]");
    const double a = x[0], b = x[1];
    const double a2 = a * a;
    const double value = (4.0 - 2.1 * a2 + a2 * a2 / 3.0) * a2 + a * b +
                         (-4.0 + 4.0 * b * b) * b * b;
    return -value;
}

namespace {

// Canonical Hartmann-6 parameterization.
constexpr double kHartmannAlpha[4] = {1.0, 1.2, 3.0, 3.2};
constexpr double kHartmannA[4][6] = {
    {10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
    {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
    {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
    {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}};
constexpr double kHartmannP[4][6] = {
    {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
    {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
    {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
    {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};

} // namespace

double hartmann6_eval(const ParamPoint& x) {
    if (x.size() != 6) throw DomainError("hartmann6_eval: expects a 6-vector");
    for (int i = 0; i < 6; ++i)
        if (x[i] < -1e-12 || x[i] > 1.0 + 1e-12)
            throw DomainError("hartmann6_eval: point outside [0,1]^6");
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (int j = 0; j < 6; ++j) {
            const double d = x[j] - kHartmannP[i][j];
            inner += kHartmannA[i][j] * d * d;
        }
        total += kHartmannAlpha[i] * std::exp(-inner);
    }
    return total;
}

double gaussian10_eval(const ParamPoint& x) {
    if (x.size() != 10) throw DomainError("gaussian10_eval: expects a 10-vector");
    for (int i = 0; i < 10; ++i)
        if (x[i] < -1.0 - 1e-12 || x[i] > 1.0 + 1e-12)
            throw DomainError("gaussian10_eval: point outside [-1,1]^10");
    return std::exp(-4.0 * x.squaredNorm());
}

BenchmarkProblem make_benchmark(const std::string& name) {
    BenchmarkProblem p;
    if (name == "camelback2d") {
        p.name = name;
        p.domain = BoxDomain(Eigen::Vector2d(-2.0, -1.0), Eigen::Vector2d(2.0, 1.0));
        p.true_optimum_value = 1.0316;
        p.safety_threshold = 0.0;
        p.iteration_budget = 150;
        p.stage_switch_default = 15;
    } else if (name == "hartmann6d") {
        p.name = name;
        p.domain = BoxDomain(Eigen::VectorXd::Zero(6), Eigen::VectorXd::Ones(6));
        p.true_optimum_value = 3.32237;
        p.safety_threshold = 0.3;
        p.iteration_budget = 200;
        p.stage_switch_default = 50;
    } else if (name == "gaussian10d") {
        p.name = name;
        p.domain = BoxDomain(Eigen::VectorXd::Constant(10, -1.0), Eigen::VectorXd::Ones(10));
        p.true_optimum_value = 1.0;
        p.safety_threshold = 0.1;
        p.iteration_budget = 200;
        p.stage_switch_default = 50;
    } else {
        throw ConfigError("unknown benchmark: " + name);
    }
    return p;
}

std::vector<std::string> benchmark_names() {
    return {"camelback2d", "hartmann6d", "gaussian10d"};
}

double BenchmarkProblem::eval(const ParamPoint& raw) const {
    if (name == "camelback2d") return camelback_eval(raw);
    if (name == "hartmann6d") return hartmann6_eval(raw);
    if (name == "gaussian10d") return gaussian10_eval(raw);
    throw ConfigError("BenchmarkProblem::eval: unknown benchmark " + name);
}

Problem BenchmarkProblem::to_problem() const {
    Problem prob;
    prob.name = name;
    prob.domain = domain;
    prob.num_functions = 1;
    prob.constraints = {{0, safety_threshold}};
    prob.true_optimum_value = true_optimum_value;
    const BenchmarkProblem self = *this;
    prob.evaluate_true = [self](const ParamPoint& raw, Rng&) {
        return std::vector<double>{self.eval(raw)};
    };
    prob.sample_seed = [self](Rng& rng) { return sample_safe_seed(self, rng).point; };
    return prob;
}

SafeSeed sample_safe_seed(const BenchmarkProblem& problem, Rng& rng, long long max_attempts) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int d = problem.domain.dim();
    SafeSeed seed;
    for (seed.attempts = 1; seed.attempts <= max_attempts; ++seed.attempts) {
        ParamPoint u(d);
        for (int i = 0; i < d; ++i) u[i] = unit(rng);
        ParamPoint raw = problem.domain.denormalize(u);
        const double v = problem.eval(raw);
        if (v > problem.safety_threshold) {
            seed.point = raw;
            seed.value = v;
            return seed;
        }
    }
    throw SeedNotFoundError("sample_safe_seed: no safe point within attempt cap on " +
                            problem.name);
}

RegretCurve aggregate_regret(const std::vector<Eigen::VectorXd>& regret_series) {
    if (regret_series.empty())
        throw ConfigError("aggregate_regret: no series");
    const int T = static_cast<int>(regret_series[0].size());
    for (const auto& s : regret_series)
        if (s.size() != T)
            throw ConfigError("aggregate_regret: repetitions have mixed iteration budgets");
    const int R = static_cast<int>(regret_series.size());
    RegretCurve out;
    out.repetitions = R;
    out.mean.resize(T);
    out.std_error.resize(T);
    for (int t = 0; t < T; ++t) {
        double m = 0.0;
        for (const auto& s : regret_series) m += s[t];
        m /= R;
        double var = 0.0;
        if (R > 1) {
            for (const auto& s : regret_series) var += (s[t] - m) * (s[t] - m);
            var /= (R - 1);
        }
        out.mean[t] = m;
        out.std_error[t] = R > 1 ? std::sqrt(var / R) : 0.0;
    }
    return out;
}

} // namespace safectrl
