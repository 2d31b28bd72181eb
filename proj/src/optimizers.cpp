#include "safectrl/optimizers.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

namespace safectrl {

std::string method_name(Method m) {
    switch (m) {
        case Method::SafeCtrlBO: return "safectrlbo";
        case Method::SafeOpt: return "safeopt";
        case Method::StageOpt: return "stageopt";
        case Method::AblationBoundaryRBF: return "ablation";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "safectrlbo") return Method::SafeCtrlBO;
    if (name == "safeopt") return Method::SafeOpt;
    if (name == "stageopt") return Method::StageOpt;
    if (name == "ablation") return Method::AblationBoundaryRBF;
    throw ConfigError("unknown method: " + name);
}

void OptimizerConfig::validate(const Problem& problem) const {
    const int m = problem.num_functions;
    if (static_cast<int>(kernels.size()) != m || static_cast<int>(noise_std.size()) != m ||
        static_cast<int>(prior_shift.size()) != m)
        throw ConfigError("optimizer config: kernels/noise/shift must have one entry per function");
    for (const auto& k : kernels) {
        k.validate();
        if (k.dim() != problem.domain.dim())
            throw ConfigError("optimizer config: kernel dimension does not match the domain");
    }
    for (double s : noise_std)
        if (s < 0.0) throw ConfigError("optimizer config: noise_std must be nonnegative");
    if (total_iterations < 1)
        throw ConfigError("optimizer config: total_iterations must be >= 1");
    const bool stagewise = method != Method::SafeOpt;
    if (stagewise && (stage_switch_T0 < 1 || stage_switch_T0 > total_iterations))
        throw ConfigError("optimizer config: need 0 < stage_switch_T0 <= total_iterations");
    if (boundary.fallback_count < 1)
        throw ConfigError("optimizer config: boundary fallback_count must be >= 1");
    if (problem.constraints.empty())
        throw ConfigError("optimizer config: problem defines no safety constraints");
}

Eigen::VectorXd CampaignResult::regret_series() const {
    Eigen::VectorXd r(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) r[i] = records[i].simple_regret;
    return r;
}

namespace {

struct ScoredScan {
    std::vector<int> order; // candidate indices by (score desc, perm-rank asc)
};

ScoredScan scan_order(const Eigen::VectorXd& score, const std::vector<bool>& mask,
                      const std::vector<int>& perm) {
    ScoredScan s;
    std::vector<int> rank(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) rank[perm[i]] = static_cast<int>(i);
    for (int i : perm)
        if (mask[i]) s.order.push_back(i);
    std::stable_sort(s.order.begin(), s.order.end(), [&](int a, int b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return rank[a] < rank[b];
    });
    return s;
}

// Max posterior std across all function GPs, per candidate.
Eigen::VectorXd max_std_over_functions(const std::vector<const BatchPosterior*>& posts) {
    Eigen::VectorXd s = posts[0]->variance();
    for (std::size_t f = 1; f < posts.size(); ++f)
        s = s.cwiseMax(posts[f]->variance());
    return s.cwiseSqrt();
}

std::vector<int> unsafe_indices_of(const std::vector<bool>& safe_mask) {
    std::vector<int> u;
    for (std::size_t i = 0; i < safe_mask.size(); ++i)
        if (!safe_mask[i]) u.push_back(static_cast<int>(i));
    return u;
}

std::vector<const BatchPosterior*> constraint_posteriors(const StepInputs& in) {
    std::vector<const BatchPosterior*> out;
    for (int f : in.constraint_functions) out.push_back(in.posteriors[f]);
    return out;
}

std::vector<const GPState*> constraint_states(const StepInputs& in) {
    std::vector<const GPState*> out;
    for (int f : in.constraint_functions) out.push_back(in.states[f]);
    return out;
}

int boundary_variance_argmax(const StepInputs& in, const OptimizerConfig& config) {
    std::vector<bool> boundary = compute_boundary_set(*in.safe_mask, *in.min_margins,
                                                      config.boundary.tolerance_band,
                                                      config.boundary.fallback_count);
    const Eigen::VectorXd sd = in.posteriors[0]->stddev();
    return argmax_masked(sd, boundary, *in.tie_perm);
}

int ucb_argmax(const StepInputs& in) {
    const BatchPosterior& perf = *in.posteriors[0];
    Eigen::VectorXd ucb = perf.mean() + in.beta * perf.stddev();
    return argmax_masked(ucb, *in.safe_mask, *in.tie_perm);
}

// First candidate in descending-score order that is an expander; -1 when the
// scan budget runs out or nothing qualifies.
int lazy_expander_argmax(const StepInputs& in, const OptimizerConfig& config,
                         const Eigen::VectorXd& score) {
    const std::vector<int> unsafe = unsafe_indices_of(*in.safe_mask);
    if (unsafe.empty()) return -1;
    ScoredScan scan = scan_order(score, *in.safe_mask, *in.tie_perm);
    const auto posts = constraint_posteriors(in);
    const auto states = constraint_states(in);
    int checked = 0;
    for (int i : scan.order) {
        if (checked++ >= config.max_expander_checks) break;
        if (expander_check_rank1(posts, states, i, unsafe, in.thresholds, in.beta,
                                 config.expander_rule))
            return i;
    }
    return -1;
}

} // namespace

int safectrlbo_step(const StepInputs& in, const OptimizerConfig& config, int iteration) {
    int pick = -1;
    if (iteration <= config.stage_switch_T0)
        pick = boundary_variance_argmax(in, config);
    else
        pick = ucb_argmax(in);
    if (pick < 0)
        throw EmptySafeSetError("safectrlbo_step: no eligible safe candidate");
    return pick;
}

int ablation_step(const StepInputs& in, const OptimizerConfig& config, int iteration) {
    // Same staging and acquisition as safectrlbo; the kernel swap to FullRBF
    // happens in the config layer.
    return safectrlbo_step(in, config, iteration);
}

int safeopt_step(const StepInputs& in, const OptimizerConfig& config) {
    const Eigen::VectorXd score = max_std_over_functions(in.posteriors);
    ScoredScan scan = scan_order(score, *in.safe_mask, *in.tie_perm);
    if (scan.order.empty())
        throw EmptySafeSetError("safeopt_step: empty safe set");

    // Maximizer membership: u_perf >= best safe lower bound.
    const BatchPosterior& perf = *in.posteriors[0];
    Eigen::VectorXd sd0 = perf.stddev();
    double best_lower = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < in.safe_mask->size(); ++i)
        if ((*in.safe_mask)[i])
            best_lower = std::max(best_lower, perf.mean()[i] - in.beta * sd0[i]);

    const std::vector<int> unsafe = unsafe_indices_of(*in.safe_mask);
    const auto posts = constraint_posteriors(in);
    const auto states = constraint_states(in);
    int checked = 0;
    for (int i : scan.order) {
        if (perf.mean()[i] + in.beta * sd0[i] >= best_lower) return i; // in M_n
        if (!unsafe.empty() && checked < config.max_expander_checks) {
            ++checked;
            if (expander_check_rank1(posts, states, i, unsafe, in.thresholds, in.beta,
                                     config.expander_rule))
                return i; // in E_n
        }
    }
    return scan.order.front(); // unreachable in practice: M_n is never empty
}

int stageopt_step(const StepInputs& in, const OptimizerConfig& config, int iteration) {
    if (iteration <= config.stage_switch_T0) {
        const Eigen::VectorXd score = max_std_over_functions(in.posteriors);
        int pick = lazy_expander_argmax(in, config, score);
        if (pick >= 0) return pick;
        // Fully expanded (or scan exhausted): fall back to the most uncertain
        // safe candidate.
        pick = argmax_masked(score, *in.safe_mask, *in.tie_perm);
        if (pick < 0) throw EmptySafeSetError("stageopt_step: empty safe set");
        return pick;
    }
    return safectrlbo_step(in, config, iteration);
}

namespace {

class CandidatePool {
public:
    CandidatePool(const Problem& problem, const OptimizerConfig& config,
                  const ParamPoint& seed_unit, Rng& rng)
        : config_(config), dim_(problem.domain.dim()) {
        if (config.candidates.strategy == CandidateConfig::Strategy::Grid) {
            points_ = build_grid(seed_unit);
        } else {
            points_ = build_initial_cloud(seed_unit, rng);
        }
    }

    // Fresh candidates for this iteration (empty for grids). `recent` is the
    // last evaluated point; `evaluated` all evaluated points so far.
    Eigen::MatrixXd iteration_batch(const ParamPoint& recent,
                                    const Eigen::MatrixXd& evaluated, Rng& rng) {
        if (config_.candidates.strategy == CandidateConfig::Strategy::Grid)
            return Eigen::MatrixXd(0, dim_);
        const int count = config_.candidates.cloud_per_iteration;
        Eigen::MatrixXd out(count, dim_);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const auto& scales = config_.candidates.cloud_scales;
        std::uniform_int_distribution<int> pick_eval(0, static_cast<int>(evaluated.rows()) - 1);
        for (int i = 0; i < count; ++i) {
            ParamPoint x(dim_);
            const double mode = static_cast<double>(i) / count;
            if (mode < 0.6) {
                const double s = scales[i % scales.size()];
                for (int j = 0; j < dim_; ++j) x[j] = recent[j] + s * gauss(rng);
            } else if (mode < 0.8) {
                const ParamPoint base = evaluated.row(pick_eval(rng));
                const double s = scales[i % scales.size()];
                for (int j = 0; j < dim_; ++j) x[j] = base[j] + s * gauss(rng);
            } else {
                for (int j = 0; j < dim_; ++j) x[j] = unit(rng);
            }
            for (int j = 0; j < dim_; ++j) x[j] = std::clamp(x[j], 0.0, 1.0);
            out.row(i) = x.transpose();
        }
        return out;
    }

    const Eigen::MatrixXd& initial() const { return points_; }

private:
    Eigen::MatrixXd build_grid(const ParamPoint& seed_unit) const {
        const int per_axis = config_.candidates.grid_per_axis;
        long long total = 1;
        for (int j = 0; j < dim_; ++j) {
            total *= per_axis;
            if (total > 2000000)
                throw ConfigError("grid candidate strategy: grid too large; use cloud for d >= 4");
        }
        Eigen::MatrixXd pts(total + 1, dim_);
        pts.row(0) = seed_unit.transpose(); // row 0 is always the seed
        for (long long idx = 0; idx < total; ++idx) {
            long long rem = idx;
            for (int j = 0; j < dim_; ++j) {
                const int pos = static_cast<int>(rem % per_axis);
                rem /= per_axis;
                pts(idx + 1, j) =
                    per_axis == 1 ? 0.5 : static_cast<double>(pos) / (per_axis - 1);
            }
        }
        return pts;
    }

    Eigen::MatrixXd build_initial_cloud(const ParamPoint& seed_unit, Rng& rng) const {
        const int local = config_.candidates.cloud_initial_local;
        const int uniform = config_.candidates.cloud_initial_uniform;
        Eigen::MatrixXd pts(1 + local + uniform, dim_);
        pts.row(0) = seed_unit.transpose();
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const auto& scales = config_.candidates.cloud_scales;
        for (int i = 0; i < local; ++i) {
            const double s = scales[i % scales.size()];
            for (int j = 0; j < dim_; ++j)
                pts(1 + i, j) = std::clamp(seed_unit[j] + s * gauss(rng), 0.0, 1.0);
        }
        for (int i = 0; i < uniform; ++i)
            for (int j = 0; j < dim_; ++j) pts(1 + local + i, j) = unit(rng);
        return pts;
    }

    const OptimizerConfig& config_;
    int dim_;
    Eigen::MatrixXd points_;
};

double beta_for(const OptimizerConfig& config, const GPState& state, int iteration) {
    if (config.beta.mode == BetaConfig::Mode::Constant) return config.beta.value;
    const double gamma = state.num_observations() == 0 || state.noise_std() == 0.0
                             ? 0.0
                             : state.empirical_information_gain();
    return beta_schedule(iteration, config.beta.B, config.beta.R, config.beta.delta, gamma);
}

} // namespace

CampaignResult run_campaign(const Problem& problem, const OptimizerConfig& config,
                            const TraceSink& trace) {
    config.validate(problem);
    CampaignResult result;
    result.method = config.method;
    result.rng_seed = config.rng_seed;

    Rng rng = make_rng(config.rng_seed);
    const int d = problem.domain.dim();
    const int m = problem.num_functions;
    const int num_constraints = static_cast<int>(problem.constraints.size());

    std::vector<double> thresholds;
    std::vector<int> constraint_fn;
    for (auto& [fn, h] : problem.constraints) {
        constraint_fn.push_back(fn);
        thresholds.push_back(h);
    }

    // Seed: fixed if the problem supplies one, otherwise sampled.
    ParamPoint seed_raw;
    if (problem.fixed_seed) {
        seed_raw = *problem.fixed_seed;
    } else if (problem.sample_seed) {
        seed_raw = problem.sample_seed(rng);
    } else {
        throw ConfigError("run_campaign: problem provides neither a seed nor a seed sampler");
    }
    const ParamPoint seed_unit = problem.domain.normalize(seed_raw);

    std::normal_distribution<double> gauss(0.0, 1.0);
    auto observe = [&](const ParamPoint& unit_pt) {
        const ParamPoint raw = problem.domain.denormalize(unit_pt);
        std::vector<double> truth = problem.evaluate_true(raw, rng);
        std::vector<double> noisy(truth.size());
        for (int f = 0; f < m; ++f) noisy[f] = truth[f] + config.noise_std[f] * gauss(rng);
        return std::make_pair(truth, noisy);
    };

    const double opt = problem.true_optimum_value.value_or(
        std::numeric_limits<double>::quiet_NaN());
    double best_true_any = -std::numeric_limits<double>::infinity(); // feeds regret
    double best_true_safe = -std::numeric_limits<double>::infinity();
    int best_record = -1; // best among violation-free evaluations
    int cumulative_violations = 0;

    auto push_record = [&](int iteration, const ParamPoint& unit_pt,
                           const std::vector<double>& truth, const std::vector<double>& noisy,
                           Stage stage, double wall_ms) {
        IterationRecord rec;
        rec.iteration = iteration;
        rec.chosen_point = problem.domain.denormalize(unit_pt);
        rec.true_values = truth;
        rec.noisy_values = noisy;
        rec.stage = stage;
        rec.violation_flags.resize(num_constraints);
        bool violated = false;
        for (int c = 0; c < num_constraints; ++c) {
            rec.violation_flags[c] = truth[constraint_fn[c]] < thresholds[c];
            if (rec.violation_flags[c]) {
                ++cumulative_violations;
                violated = true;
            }
        }
        best_true_any = std::max(best_true_any, truth[0]);
        if (!violated && truth[0] > best_true_safe) {
            best_true_safe = truth[0];
            best_record = static_cast<int>(result.records.size());
        }
        rec.simple_regret = std::isnan(opt) ? opt : opt - best_true_any;
        rec.wall_time_ms = wall_ms;
        result.records.push_back(std::move(rec));
    };

    // Seed evaluation grounds every GP (the safe set cannot start otherwise).
    auto [seed_truth, seed_noisy] = observe(seed_unit);
    push_record(0, seed_unit, seed_truth, seed_noisy, Stage::Expansion, 0.0);

    std::vector<GPState> states;
    states.reserve(m);
    for (int f = 0; f < m; ++f)
        states.emplace_back(config.kernels[f], config.noise_std[f], config.prior_shift[f]);
    for (int f = 0; f < m; ++f)
        states[f] = states[f].with_observation(seed_unit, seed_noisy[f]);

    CandidatePool pool(problem, config, seed_unit, rng);
    std::vector<BatchPosterior> posteriors;
    posteriors.reserve(m);
    for (int f = 0; f < m; ++f) posteriors.emplace_back(states[f], pool.initial());

    Eigen::MatrixXd evaluated(1, d);
    evaluated.row(0) = seed_unit.transpose();
    ParamPoint last_eval = seed_unit;

    try {
        for (int n = 1; n <= config.total_iterations; ++n) {
            const auto tic = std::chrono::steady_clock::now();

            Eigen::MatrixXd fresh = pool.iteration_batch(last_eval, evaluated, rng);
            if (fresh.rows() > 0)
                for (int f = 0; f < m; ++f) posteriors[f].append_candidates(fresh);

            const int N = posteriors[0].num_candidates();
            const double beta = beta_for(config, states[0], n);

            // Confidence bounds per constraint, safe mask, margins.
            std::vector<ConfidenceBounds> cb(num_constraints);
            for (int c = 0; c < num_constraints; ++c) {
                const BatchPosterior& post = posteriors[constraint_fn[c]];
                const double beta_c = beta_for(config, states[constraint_fn[c]], n);
                ConfidenceBounds b;
                b.beta = beta_c;
                Eigen::VectorXd sd = post.stddev();
                b.lower = post.mean() - beta_c * sd;
                b.upper = post.mean() + beta_c * sd;
                cb[c] = std::move(b);
            }
            Eigen::MatrixXd margins;
            std::vector<bool> safe = compute_safe_set(cb, thresholds, &margins);
            // The seed (candidate 0) was verified safe before the campaign;
            // Algorithm inputs assume it stays available.
            safe[0] = true;
            Eigen::VectorXd min_margins = margins.rowwise().minCoeff();

            std::vector<int> perm(N);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);

            StepInputs in;
            in.candidates = &posteriors[0].candidates();
            for (int f = 0; f < m; ++f) {
                in.states.push_back(&states[f]);
                in.posteriors.push_back(&posteriors[f]);
            }
            in.thresholds = thresholds;
            in.constraint_functions = constraint_fn;
            in.beta = beta;
            in.safe_mask = &safe;
            in.min_margins = &min_margins;
            in.tie_perm = &perm;

            const bool stagewise = config.method != Method::SafeOpt;
            const Stage stage =
                (stagewise && n <= config.stage_switch_T0) ? Stage::Expansion
                                                           : Stage::Maximization;

            int pick = -1;
            switch (config.method) {
                case Method::SafeCtrlBO: pick = safectrlbo_step(in, config, n); break;
                case Method::AblationBoundaryRBF: pick = ablation_step(in, config, n); break;
                case Method::SafeOpt: pick = safeopt_step(in, config); break;
                case Method::StageOpt: pick = stageopt_step(in, config, n); break;
            }
            if (pick < 0) throw EmptySafeSetError("run_campaign: no candidate selected");

            ParamPoint chosen = posteriors[0].candidates().row(pick);

            // Optional continuous polish of the UCB stage, feasibility-checked
            // against the same confidence bounds.
            if (config.swarm.refine_maximization && stage == Stage::Maximization) {
                auto acquisition = [&](const ParamPoint& x) {
                    Eigen::VectorXd mu, var;
                    Eigen::MatrixXd q(1, d);
                    q.row(0) = x.transpose();
                    states[0].posterior(q, mu, var);
                    return mu[0] + beta * std::sqrt(var[0]);
                };
                auto feasible = [&](const ParamPoint& x) {
                    Eigen::MatrixXd q(1, d);
                    q.row(0) = x.transpose();
                    for (int c = 0; c < num_constraints; ++c) {
                        Eigen::VectorXd mu, var;
                        states[constraint_fn[c]].posterior(q, mu, var);
                        if (mu[0] - cb[c].beta * std::sqrt(var[0]) < thresholds[c]) return false;
                    }
                    return true;
                };
                Eigen::MatrixXd seeds(1, d);
                seeds.row(0) = chosen.transpose();
                chosen = swarm_refine(acquisition, feasible, seeds, config.swarm.params, rng);
            }

            if (trace) {
                SafeSetSnapshot snap;
                snap.safe_mask = safe;
                snap.margins = margins;
                snap.boundary_mask = compute_boundary_set(safe, min_margins,
                                                          config.boundary.tolerance_band,
                                                          config.boundary.fallback_count);
                std::vector<const GPState*> cstates;
                for (int f : constraint_fn) cstates.push_back(&states[f]);
                CandidateSet cs{posteriors[0].candidates(),
                                config.candidates.strategy == CandidateConfig::Strategy::Grid
                                    ? CandidateSource::Grid
                                    : CandidateSource::RandomUniform};
                snap.expander_mask = compute_expander_set(cstates, cs, safe, cb, thresholds,
                                                          beta, config.expander_rule);
                snap.maximizer_mask = compute_maximizer_set(
                    ConfidenceBounds{posteriors[0].mean() - beta * posteriors[0].stddev(),
                                     posteriors[0].mean() + beta * posteriors[0].stddev(), beta},
                    safe);
                IterationTrace t;
                t.iteration = n;
                t.candidates = &posteriors[0].candidates();
                t.snapshot = &snap;
                trace(t);
            }

            auto [truth, noisy] = observe(chosen);
            for (int f = 0; f < m; ++f) {
                states[f] = states[f].with_observation(chosen, noisy[f]);
                posteriors[f].sync(states[f]);
            }
            evaluated.conservativeResize(evaluated.rows() + 1, d);
            evaluated.row(evaluated.rows() - 1) = chosen.transpose();
            last_eval = chosen;

            const auto toc = std::chrono::steady_clock::now();
            const double ms =
                std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(toc - tic)
                    .count();
            push_record(n, chosen, truth, noisy, stage, ms);
        }
    } catch (const EmptySafeSetError& err) {
        result.aborted = true;
        result.abort_reason = err.what();
    }

    result.total_violations = cumulative_violations;
    if (best_record >= 0) {
        result.best_point = result.records[best_record].chosen_point;
        result.best_value = result.records[best_record].true_values[0];
    } else if (!result.records.empty()) {
        result.best_point = result.records.front().chosen_point;
        result.best_value = result.records.front().true_values[0];
    }
    return result;
}

std::vector<CampaignResult> run_repetitions(const Problem& problem,
                                            const OptimizerConfig& config, int repetitions,
                                            std::uint64_t master_seed, int threads) {
    std::vector<CampaignResult> results(repetitions);
    if (threads <= 0)
        threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, repetitions));

    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= repetitions) return;
            OptimizerConfig cfg = config;
            cfg.rng_seed = derive_seed(master_seed, static_cast<std::uint64_t>(r));
            results[r] = run_campaign(problem, cfg);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

} // namespace safectrl
