#include "safectrl/swarm.hpp"

#include <limits>

namespace safectrl {

ParamPoint swarm_refine(const std::function<double(const ParamPoint&)>& acquisition,
                        const std::function<bool(const ParamPoint&)>& feasible,
                        const Eigen::MatrixXd& seed_candidates,
                        const SwarmParams& params, Rng& rng) {
    const int n_seeds = static_cast<int>(seed_candidates.rows());
    if (n_seeds == 0)
        throw ConfigError("swarm_refine: seed candidates must be nonempty");
    const int d = static_cast<int>(seed_candidates.cols());
    const int P = std::max(1, params.particles);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double neg_inf = -std::numeric_limits<double>::infinity();

    // Best feasible seed; the guaranteed fallback.
    int best_seed = -1;
    double best_seed_val = neg_inf;
    for (int i = 0; i < n_seeds; ++i) {
        ParamPoint x = seed_candidates.row(i);
        if (!feasible(x)) continue;
        const double v = acquisition(x);
        if (v > best_seed_val) {
            best_seed_val = v;
            best_seed = i;
        }
    }

    Eigen::MatrixXd pos(P, d), vel = Eigen::MatrixXd::Zero(P, d), pbest(P, d);
    Eigen::VectorXd pbest_val = Eigen::VectorXd::Constant(P, neg_inf);
    for (int p = 0; p < P; ++p) {
        ParamPoint x = seed_candidates.row(p % n_seeds);
        if (p >= n_seeds)
            for (int j = 0; j < d; ++j) x[j] += 0.02 * gauss(rng);
        for (int j = 0; j < d; ++j) x[j] = std::clamp(x[j], 0.0, 1.0);
        pos.row(p) = x.transpose();
        pbest.row(p) = x.transpose();
        if (feasible(x)) pbest_val[p] = acquisition(x);
    }

    int gbest = -1;
    double gbest_val = best_seed_val;
    ParamPoint gbest_pos = best_seed >= 0 ? ParamPoint(seed_candidates.row(best_seed))
                                          : ParamPoint(seed_candidates.row(0));
    for (int p = 0; p < P; ++p)
        if (pbest_val[p] > gbest_val) {
            gbest_val = pbest_val[p];
            gbest_pos = pbest.row(p);
            gbest = p;
        }
    (void)gbest;

    bool any_feasible = gbest_val > neg_inf;

    for (int sweep = 0; sweep < params.sweeps; ++sweep) {
        for (int p = 0; p < P; ++p) {
            for (int j = 0; j < d; ++j) {
                const double r1 = unit(rng), r2 = unit(rng);
                vel(p, j) = params.inertia * vel(p, j) +
                            params.cognitive * r1 * (pbest(p, j) - pos(p, j)) +
                            params.social * r2 * (gbest_pos[j] - pos(p, j));
                pos(p, j) = std::clamp(pos(p, j) + vel(p, j), 0.0, 1.0);
            }
            ParamPoint x = pos.row(p);
            if (!feasible(x)) continue;
            const double v = acquisition(x);
            any_feasible = true;
            if (v > pbest_val[p]) {
                pbest_val[p] = v;
                pbest.row(p) = x.transpose();
            }
            if (v > gbest_val) {
                gbest_val = v;
                gbest_pos = x;
            }
        }
    }

    if (!any_feasible && best_seed < 0) {
        // Nothing feasible anywhere: hand back the best raw seed candidate.
        int fallback = 0;
        double fv = neg_inf;
        for (int i = 0; i < n_seeds; ++i) {
            const double v = acquisition(seed_candidates.row(i));
            if (v > fv) {
                fv = v;
                fallback = i;
            }
        }
        return seed_candidates.row(fallback);
    }
    return gbest_pos;
}

} // namespace safectrl
