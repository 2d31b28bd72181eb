#ifndef SAFECTRL_GP_HPP
#define SAFECTRL_GP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "safectrl/domain.hpp"
#include "safectrl/kernels.hpp"

namespace safectrl {

struct Observation {
    ParamPoint point;
    double value = 0.0;
    int function_index = 0; // 0 = performance J, 1.. = safety functions
};

struct ConfidenceBounds {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double beta = 0.0;
};

/// How the constant prior-mean shift of a GP is resolved. The GP models
/// (observation - shift) with a zero-mean prior and adds the shift back on
/// prediction, so unexplored regions revert to the shift value.
struct PriorShift {
    enum class Mode { None, FirstObservation, Fixed };
    Mode mode = Mode::FirstObservation;
    double value = 0.0;

    static PriorShift none() { return {Mode::None, 0.0}; }
    static PriorShift first_observation() { return {Mode::FirstObservation, 0.0}; }
    static PriorShift fixed(double v) { return {Mode::Fixed, v}; }
};

/// Exact GP posterior over one scalar function. Immutable-after-update: an
/// update returns a new state, queries are read-only. The Cholesky factor of
/// (K_n + jitter I + noise^2 I) is extended one row per observation and
/// rebuilt from scratch every `kRefactorInterval` updates to bound drift.
class GPState {
public:
    static constexpr int kRefactorInterval = 32;

    GPState() = default;
    GPState(KernelSpec spec, double noise_std, PriorShift shift = PriorShift::first_observation());

    /// New state incorporating (x, y).
    GPState with_observation(const ParamPoint& x, double y) const;

    /// Posterior mean/variance at query rows. With no observations this is
    /// the prior: mean = shift, variance = k(a,a). Variances are clamped to
    /// [0, k(a,a)]; the negative excursions clamped away stay below 1e-9.
    void posterior(const Eigen::MatrixXd& queries,
                   Eigen::VectorXd& mean, Eigen::VectorXd& variance) const;

    ConfidenceBounds confidence_bounds(const Eigen::MatrixXd& queries, double beta) const;

    /// 0.5 * ln det(I + noise^-2 K_n), from the existing factorization.
    double empirical_information_gain() const;

    int num_observations() const { return static_cast<int>(points_.rows()); }
    const Eigen::MatrixXd& points() const { return points_; }
    const Eigen::VectorXd& values() const { return values_; }
    const KernelSpec& kernel() const { return spec_; }
    double noise_std() const { return noise_std_; }
    double prior_diag() const { return prior_diag_; }
    double resolved_shift() const { return shift_value_; }

    /// Increments every time the factor is rebuilt from scratch; lets batch
    /// caches detect when an incremental column append is no longer valid.
    std::uint64_t refactor_epoch() const { return refactor_epoch_; }

    const Eigen::MatrixXd& cholesky_factor() const { return chol_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    double jitter() const { return jitter_; }

private:
    void refactor();
    void recompute_alpha();

    KernelSpec spec_;
    double noise_std_ = 0.0;
    PriorShift shift_{};
    double shift_value_ = 0.0;
    double prior_diag_ = 0.0;
    double jitter_ = 0.0;

    Eigen::MatrixXd points_; // n x d
    Eigen::VectorXd values_; // raw observations
    Eigen::MatrixXd chol_;   // lower-triangular factor of K + (jitter + noise^2) I
    Eigen::VectorXd alpha_;  // (K + ...)^-1 (values - shift)
    int updates_since_refactor_ = 0;
    std::uint64_t refactor_epoch_ = 0;
};

/// beta_t = B + R * sqrt(2 (gamma_{t-1} + 1 + ln(1/delta))).
double beta_schedule(int t, double rkhs_bound_B, double noise_R, double delta,
                     double gamma_prev);

struct StageIterationBounds {
    long long t_star = 0;
    long long T_star = 0;
};

struct BoundSearchOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Smallest iteration counts satisfying the stage-convergence inequalities,
/// by ascending search with gamma_t modeled as C_gamma * d * ln t. Diagnostic
/// only; never gates the optimizer.
StageIterationBounds stage_iteration_bounds(double epsilon, double zeta, int d,
                                            double B, double R, double delta,
                                            double C, double C_gamma,
                                            long long cap = 1000000000LL);

/// Incrementally maintained posterior of one GP over a growing candidate set.
/// Appending an observation costs O(nN); appending candidates costs O(n^2 dN).
/// Mean/variance match GPState::posterior to factorization accuracy.
class BatchPosterior {
public:
    BatchPosterior() = default;
    BatchPosterior(const GPState& state, Eigen::MatrixXd candidates);

    /// Adopt `next`, which must extend the tracked state by zero or more
    /// observations (rebuilds internally if the factor was refactored).
    void sync(const GPState& next);

    void append_candidates(const Eigen::MatrixXd& more);

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::VectorXd& variance() const { return variance_; }
    Eigen::VectorXd stddev() const { return variance_.cwiseSqrt(); }
    int num_candidates() const { return static_cast<int>(candidates_.rows()); }
    const Eigen::MatrixXd& candidates() const { return candidates_; }

    /// Posterior covariance between candidates i and j.
    double cross_covariance(int i, int j) const;

    /// Posterior covariance between candidate i and every listed candidate.
    Eigen::VectorXd cross_covariance_row(int i, const std::vector<int>& js) const;

private:
    void rebuild();
    void finalize_stats();

    const GPState* state_ = nullptr;
    Eigen::MatrixXd candidates_; // N x d
    Eigen::MatrixXd v_;          // n x N solve of L v = K(points, candidates)
    Eigen::VectorXd mean_, variance_;
    std::uint64_t epoch_ = 0;
    int obs_count_ = 0;
};

} // namespace safectrl

#endif
