#ifndef SAFECTRL_SAFE_SETS_HPP
#define SAFECTRL_SAFE_SETS_HPP

#include <Eigen/Dense>
#include <vector>

#include "safectrl/gp.hpp"

namespace safectrl {

enum class CandidateSource { Grid, Swarm, RandomUniform };

/// Discretization of the continuous domain over which the set partitions are
/// computed. Points live in normalized [0,1]^d coordinates.
struct CandidateSet {
    Eigen::MatrixXd points; // N x d
    CandidateSource source = CandidateSource::Grid;

    int size() const { return static_cast<int>(points.rows()); }
};

/// Per-iteration partition of the candidate set: safe set S_n, safe-boundary
/// set B_n, and (for the baselines) potential expanders E_n and maximizers
/// M_n. margins(i, c) = l_n^(c)(a_i) - h_c.
struct SafeSetSnapshot {
    std::vector<bool> safe_mask;
    std::vector<bool> boundary_mask;
    std::vector<bool> expander_mask;  // optional, baselines only
    std::vector<bool> maximizer_mask; // optional
    Eigen::MatrixXd margins;          // N x num_constraints

    Eigen::VectorXd min_margins() const { return margins.rowwise().minCoeff(); }
};

/// Rule for when a hypothetical observation certifies an unsafe candidate:
/// the paper's set definition quantifies over every constraint; the
/// any-constraint variant is kept as a switch.
enum class ExpanderRule { AllConstraints, AnyConstraint };

/// safe_mask[i] <=> every constraint's lower bound at candidate i clears its
/// threshold. One ConfidenceBounds per constraint, thresholds aligned.
std::vector<bool> compute_safe_set(const std::vector<ConfidenceBounds>& bounds,
                                   const std::vector<double>& thresholds,
                                   Eigen::MatrixXd* margins_out = nullptr);

/// Boundary = safe candidates whose minimum margin lies in [0, tolerance_band].
/// If the band is empty, the `fallback_count` safe candidates with smallest
/// minimum margin are marked instead (a discretized safe set always has an
/// outermost rim while unexplored domain remains).
std::vector<bool> compute_boundary_set(const std::vector<bool>& safe_mask,
                                       const Eigen::VectorXd& min_margins,
                                       double tolerance_band, int fallback_count);

/// Potential expanders via clone-then-update: for each safe candidate a,
/// hypothetically observe (a, u_n(a)) in every constraint GP and mark a if
/// some currently-unsafe candidate becomes safe. The real states are never
/// mutated. O(|S|) GP clones; meant for the baselines and diagnostics.
std::vector<bool> compute_expander_set(const std::vector<const GPState*>& constraint_states,
                                       const CandidateSet& candidates,
                                       const std::vector<bool>& safe_mask,
                                       const std::vector<ConfidenceBounds>& bounds,
                                       const std::vector<double>& thresholds,
                                       double beta,
                                       ExpanderRule rule = ExpanderRule::AllConstraints);

/// Rank-1 check for a single safe candidate, using cached batch posteriors.
/// Algebraically identical to the clone-then-update path (property-tested);
/// this is what the optimizer hot loop uses.
bool expander_check_rank1(const std::vector<const BatchPosterior*>& constraint_posteriors,
                          const std::vector<const GPState*>& constraint_states,
                          int candidate_index,
                          const std::vector<int>& unsafe_indices,
                          const std::vector<double>& thresholds,
                          double beta,
                          ExpanderRule rule = ExpanderRule::AllConstraints);

/// Maximizers = safe candidates whose performance upper bound reaches the
/// best performance lower bound over the safe set.
std::vector<bool> compute_maximizer_set(const ConfidenceBounds& performance_bounds,
                                        const std::vector<bool>& safe_mask);

/// Index of the eligible candidate maximizing `score`; ties broken by the
/// position in `perm` (a campaign-seeded shuffle), so every selection in an
/// iteration resolves ties identically. Returns -1 if nothing is eligible.
int argmax_masked(const Eigen::VectorXd& score, const std::vector<bool>& mask,
                  const std::vector<int>& perm);

} // namespace safectrl

#endif
