#ifndef SAFECTRL_SWARM_HPP
#define SAFECTRL_SWARM_HPP

#include <functional>

#include "safectrl/domain.hpp"
#include "safectrl/rng.hpp"

namespace safectrl {

struct SwarmParams {
    int particles = 50;
    int sweeps = 20;
    double inertia = 0.7;
    double cognitive = 1.5;
    double social = 1.5;
};

/// Particle-swarm refinement of a scalar acquisition over the continuous
/// unit box, constrained to a feasibility predicate (the safe-set check).
/// Particles that step outside the feasible region keep their previous best
/// and contribute nothing that round. Falls back to the best seed candidate
/// when no particle ever lands feasible.
ParamPoint swarm_refine(const std::function<double(const ParamPoint&)>& acquisition,
                        const std::function<bool(const ParamPoint&)>& feasible,
                        const Eigen::MatrixXd& seed_candidates,
                        const SwarmParams& params, Rng& rng);

} // namespace safectrl

#endif
