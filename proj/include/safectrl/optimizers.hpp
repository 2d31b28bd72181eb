#ifndef SAFECTRL_OPTIMIZERS_HPP
#define SAFECTRL_OPTIMIZERS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "safectrl/gp.hpp"
#include "safectrl/problem.hpp"
#include "safectrl/safe_sets.hpp"
#include "safectrl/swarm.hpp"

namespace safectrl {

enum class Method { SafeCtrlBO, SafeOpt, StageOpt, AblationBoundaryRBF };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct BetaConfig {
    enum class Mode { Constant, Theoretical };
    Mode mode = Mode::Constant;
    double value = 2.0;                      // Constant
    double B = 1.0, R = 0.1, delta = 0.05;   // Theoretical
};

struct CandidateConfig {
    enum class Strategy { Grid, Cloud };
    Strategy strategy = Strategy::Grid;
    int grid_per_axis = 100;
    int cloud_initial_local = 600;
    int cloud_initial_uniform = 200;
    int cloud_per_iteration = 60;
    std::vector<double> cloud_scales = {0.02, 0.05, 0.15, 0.4};
};

struct BoundaryConfig {
    double tolerance_band = 0.05;
    int fallback_count = 10;
};

struct SwarmConfig {
    bool refine_maximization = false;
    SwarmParams params;
};

struct OptimizerConfig {
    Method method = Method::SafeCtrlBO;
    int stage_switch_T0 = 15;
    int total_iterations = 150;
    BetaConfig beta;
    std::vector<KernelSpec> kernels;    // one per function
    std::vector<double> noise_std;      // observation + GP noise, per function
    std::vector<PriorShift> prior_shift;// per function
    CandidateConfig candidates;
    BoundaryConfig boundary;
    ExpanderRule expander_rule = ExpanderRule::AllConstraints;
    int max_expander_checks = 256;      // lazy-scan bound in the hot loop
    SwarmConfig swarm;
    std::uint64_t rng_seed = 0;

    void validate(const Problem& problem) const;
};

enum class Stage { Expansion, Maximization };

struct IterationRecord {
    int iteration = 0;              // 0 is the seed evaluation
    ParamPoint chosen_point;        // raw coordinates
    std::vector<double> noisy_values;
    std::vector<double> true_values;
    Stage stage = Stage::Expansion;
    std::vector<bool> violation_flags; // per constraint, true value below threshold
    double simple_regret = 0.0;        // NaN when the problem has no known optimum
    double wall_time_ms = 0.0;         // excluded from CSV bodies
};

struct CampaignResult {
    std::vector<IterationRecord> records;
    ParamPoint best_point;  // raw coordinates
    double best_value = 0.0;
    int total_violations = 0;
    bool aborted = false;
    std::string abort_reason;
    Method method = Method::SafeCtrlBO;
    std::uint64_t rng_seed = 0;

    Eigen::VectorXd regret_series() const;
};

/// Per-iteration view handed to the --trace-sets sink.
struct IterationTrace {
    int iteration = 0;
    const Eigen::MatrixXd* candidates = nullptr; // normalized
    const SafeSetSnapshot* snapshot = nullptr;
};
using TraceSink = std::function<void(const IterationTrace&)>;

/// Full two-stage campaign: seed evaluation, T_0 expansion iterations, then
/// maximization until the budget. All randomness comes from config.rng_seed.
/// When a trace sink is set, full expander/maximizer masks are computed each
/// iteration (slow; diagnostics only).
CampaignResult run_campaign(const Problem& problem, const OptimizerConfig& config,
                            const TraceSink& trace = nullptr);

/// Independent repetitions fanned out over a small worker pool. Repetition r
/// uses derive_seed(master_seed, r) for every method, so paired comparisons
/// share initial safe points.
std::vector<CampaignResult> run_repetitions(const Problem& problem,
                                            const OptimizerConfig& config, int repetitions,
                                            std::uint64_t master_seed, int threads);

/// Single-step acquisition rules, exposed for tests and the verify suite.
/// `states` holds one GP per function; bounds/masks are precomputed by the
/// caller from the same states.
struct StepInputs {
    const Eigen::MatrixXd* candidates = nullptr;      // normalized, N x d
    std::vector<const GPState*> states;               // per function
    std::vector<const BatchPosterior*> posteriors;    // per function, synced
    std::vector<double> thresholds;                   // per constraint
    std::vector<int> constraint_functions;            // function index per constraint
    double beta = 2.0;
    const std::vector<bool>* safe_mask = nullptr;
    const Eigen::VectorXd* min_margins = nullptr;
    const std::vector<int>* tie_perm = nullptr;
};

int safectrlbo_step(const StepInputs& in, const OptimizerConfig& config, int iteration);
int safeopt_step(const StepInputs& in, const OptimizerConfig& config);
int stageopt_step(const StepInputs& in, const OptimizerConfig& config, int iteration);
int ablation_step(const StepInputs& in, const OptimizerConfig& config, int iteration);

} // namespace safectrl

#endif
