#include "safectrl/safe_sets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace safectrl {

std::vector<bool> compute_safe_set(const std::vector<ConfidenceBounds>& bounds,
                                   const std::vector<double>& thresholds,
                                   Eigen::MatrixXd* margins_out) {
    if (bounds.size() != thresholds.size() || bounds.empty())
        throw ConfigError("compute_safe_set: one bounds object per constraint required");
    const int n = static_cast<int>(bounds[0].lower.size());
    for (const auto& b : bounds)
        if (b.lower.size() != n)
            throw ConfigError("compute_safe_set: bounds sized inconsistently");

    Eigen::MatrixXd margins(n, bounds.size());
    for (std::size_t c = 0; c < bounds.size(); ++c)
        margins.col(c) = bounds[c].lower.array() - thresholds[c];

    std::vector<bool> mask(n);
    for (int i = 0; i < n; ++i)
        mask[i] = margins.row(i).minCoeff() >= 0.0;
    if (margins_out) *margins_out = std::move(margins);
    return mask;
}

std::vector<bool> compute_boundary_set(const std::vector<bool>& safe_mask,
                                       const Eigen::VectorXd& min_margins,
                                       double tolerance_band, int fallback_count) {
    const int n = static_cast<int>(safe_mask.size());
    std::vector<bool> boundary(n, false);
    bool any = false;
    for (int i = 0; i < n; ++i) {
        if (safe_mask[i] && min_margins[i] >= 0.0 && min_margins[i] <= tolerance_band) {
            boundary[i] = true;
            any = true;
        }
    }
    if (any || fallback_count <= 0) return boundary;

    // No candidate sits in the band: mark the safe candidates with the
    // smallest margins instead.
    std::vector<int> safe_idx;
    for (int i = 0; i < n; ++i)
        if (safe_mask[i]) safe_idx.push_back(i);
    const int take = std::min<int>(fallback_count, static_cast<int>(safe_idx.size()));
    std::partial_sort(safe_idx.begin(), safe_idx.begin() + take, safe_idx.end(),
                      [&](int a, int b) {
                          if (min_margins[a] != min_margins[b])
                              return min_margins[a] < min_margins[b];
                          return a < b;
                      });
    for (int t = 0; t < take; ++t) boundary[safe_idx[t]] = true;
    return boundary;
}

namespace {

bool certifies(const Eigen::VectorXd& hypothetical_lower_by_constraint,
               const std::vector<double>& thresholds, ExpanderRule rule) {
    int ok = 0;
    for (int c = 0; c < hypothetical_lower_by_constraint.size(); ++c)
        if (hypothetical_lower_by_constraint[c] >= thresholds[c]) ++ok;
    if (rule == ExpanderRule::AllConstraints)
        return ok == hypothetical_lower_by_constraint.size();
    return ok > 0;
}

} // namespace

std::vector<bool> compute_expander_set(const std::vector<const GPState*>& constraint_states,
                                       const CandidateSet& candidates,
                                       const std::vector<bool>& safe_mask,
                                       const std::vector<ConfidenceBounds>& bounds,
                                       const std::vector<double>& thresholds,
                                       double beta, ExpanderRule rule) {
    const int n = candidates.size();
    const int m = static_cast<int>(constraint_states.size());
    std::vector<bool> expander(n, false);

    std::vector<int> unsafe_idx;
    for (int i = 0; i < n; ++i)
        if (!safe_mask[i]) unsafe_idx.push_back(i);
    if (unsafe_idx.empty()) return expander;

    Eigen::MatrixXd unsafe_pts(unsafe_idx.size(), candidates.points.cols());
    for (std::size_t t = 0; t < unsafe_idx.size(); ++t)
        unsafe_pts.row(t) = candidates.points.row(unsafe_idx[t]);

    for (int i = 0; i < n; ++i) {
        if (!safe_mask[i]) continue;
        // Hypothetical lower bounds at the unsafe candidates after observing
        // the optimistic value u_n(a) in each constraint GP.
        Eigen::MatrixXd lower(unsafe_idx.size(), m);
        for (int c = 0; c < m; ++c) {
            GPState hypothetical =
                constraint_states[c]->with_observation(candidates.points.row(i),
                                                       bounds[c].upper[i]);
            Eigen::VectorXd mean, var;
            hypothetical.posterior(unsafe_pts, mean, var);
            lower.col(c) = mean - beta * var.cwiseSqrt();
        }
        for (std::size_t t = 0; t < unsafe_idx.size() && !expander[i]; ++t)
            if (certifies(lower.row(t), thresholds, rule)) expander[i] = true;
    }
    return expander;
}

bool expander_check_rank1(const std::vector<const BatchPosterior*>& constraint_posteriors,
                          const std::vector<const GPState*>& constraint_states,
                          int candidate_index,
                          const std::vector<int>& unsafe_indices,
                          const std::vector<double>& thresholds,
                          double beta, ExpanderRule rule) {
    if (unsafe_indices.empty()) return false;
    const int m = static_cast<int>(constraint_posteriors.size());
    Eigen::MatrixXd lower(unsafe_indices.size(), m);
    for (int c = 0; c < m; ++c) {
        const BatchPosterior& post = *constraint_posteriors[c];
        const double noise = constraint_states[c]->noise_std();
        const double jitter = constraint_states[c]->jitter();
        const double mu_a = post.mean()[candidate_index];
        const double var_a = post.variance()[candidate_index];
        const double u_a = mu_a + beta * std::sqrt(var_a);
        // Rank-1 posterior update after observing (a, u_a) with the model's
        // noise: mu'(x) = mu(x) + q (u_a - mu_a) / s, var'(x) = var(x) - q^2/s
        // with q = cov(a, x) and s = var(a) + jitter + noise^2.
        const double s = var_a + jitter + noise * noise;
        Eigen::VectorXd q = post.cross_covariance_row(candidate_index, unsafe_indices);
        for (std::size_t t = 0; t < unsafe_indices.size(); ++t) {
            const int j = unsafe_indices[t];
            const double mu = post.mean()[j] + q[t] * (u_a - mu_a) / s;
            const double var = std::max(0.0, post.variance()[j] - q[t] * q[t] / s);
            lower(t, c) = mu - beta * std::sqrt(var);
        }
    }
    for (std::size_t t = 0; t < unsafe_indices.size(); ++t)
        if (certifies(lower.row(t), thresholds, rule)) return true;
    return false;
}

std::vector<bool> compute_maximizer_set(const ConfidenceBounds& performance_bounds,
                                        const std::vector<bool>& safe_mask) {
    const int n = static_cast<int>(safe_mask.size());
    double best_lower = -std::numeric_limits<double>::infinity();
    bool any_safe = false;
    for (int i = 0; i < n; ++i) {
        if (!safe_mask[i]) continue;
        any_safe = true;
        best_lower = std::max(best_lower, performance_bounds.lower[i]);
    }
    if (!any_safe) throw EmptySafeSetError("compute_maximizer_set: empty safe set");
    std::vector<bool> maximizer(n, false);
    for (int i = 0; i < n; ++i)
        if (safe_mask[i] && performance_bounds.upper[i] >= best_lower)
            maximizer[i] = true;
    return maximizer;
}

int argmax_masked(const Eigen::VectorXd& score, const std::vector<bool>& mask,
                  const std::vector<int>& perm) {
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int p : perm) {
        if (!mask[p]) continue;
        if (score[p] > best_score) {
            best_score = score[p];
            best = p;
        }
    }
    return best;
}

} // namespace safectrl
