#include "safectrl/gp.hpp"

#include <cmath>

namespace safectrl {

GPState::GPState(KernelSpec spec, double noise_std, PriorShift shift)
    : spec_(std::move(spec)), noise_std_(noise_std), shift_(shift) {
    spec_.validate();
    if (noise_std_ < 0.0 || !std::isfinite(noise_std_))
        throw InvalidHyperparameter("GPState: noise_std must be nonnegative");
    prior_diag_ = spec_.diag_value();
    jitter_ = 1e-8 * prior_diag_;
    shift_value_ = (shift_.mode == PriorShift::Mode::Fixed) ? shift_.value : 0.0;
}

GPState GPState::with_observation(const ParamPoint& x, double y) const {
    if (!std::isfinite(y))
        throw std::invalid_argument("gp_update: non-finite observation value");
    GPState next = *this;
    const int n = num_observations();
    if (n == 0 && shift_.mode == PriorShift::Mode::FirstObservation)
        next.shift_value_ = y;

    next.points_.conservativeResize(n + 1, x.size());
    next.points_.row(n) = x.transpose();
    next.values_.conservativeResize(n + 1);
    next.values_[n] = y;

    if (next.updates_since_refactor_ + 1 >= kRefactorInterval || n == 0) {
        next.refactor();
    } else {
        // Extend the Cholesky factor by one row: L w = k_new, new pivot
        // sqrt(diag + noise^2 + jitter - |w|^2). Falls back to a full
        // refactorization if the pivot loses positivity.
        Eigen::VectorXd k_new = kernel_vector(x, points_, spec_);
        Eigen::VectorXd w = chol_.triangularView<Eigen::Lower>().solve(k_new);
        const double d = prior_diag_ + jitter_ + noise_std_ * noise_std_ - w.squaredNorm();
        if (d <= 0.0) {
            next.refactor();
        } else {
            next.chol_.conservativeResize(n + 1, n + 1);
            next.chol_.block(0, n, n, 1).setZero();
            next.chol_.block(n, 0, 1, n) = w.transpose();
            next.chol_(n, n) = std::sqrt(d);
            next.updates_since_refactor_ = updates_since_refactor_ + 1;
            next.recompute_alpha();
        }
    }
    return next;
}

void GPState::refactor() {
    const int n = num_observations();
    GramMatrix g = gram_matrix(points_, spec_);
    jitter_ = g.jitter;
    Eigen::MatrixXd A = g.regularized();
    A.diagonal().array() += noise_std_ * noise_std_;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
        // Escalate the jitter until the factorization succeeds.
        double extra = std::max(jitter_, 1e-12);
        for (int attempt = 0; attempt < 12 && llt.info() != Eigen::Success; ++attempt) {
            extra *= 10.0;
            Eigen::MatrixXd B = A;
            B.diagonal().array() += extra;
            llt.compute(B);
        }
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("GPState: Gram factorization failed");
        jitter_ += extra;
    }
    chol_ = llt.matrixL();
    updates_since_refactor_ = 0;
    ++refactor_epoch_;
    (void)n;
    recompute_alpha();
}

void GPState::recompute_alpha() {
    Eigen::VectorXd y = values_.array() - shift_value_;
    alpha_ = chol_.triangularView<Eigen::Lower>().solve(y);
    alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(alpha_);
}

void GPState::posterior(const Eigen::MatrixXd& queries,
                        Eigen::VectorXd& mean, Eigen::VectorXd& variance) const {
    const int m = static_cast<int>(queries.rows());
    mean.resize(m);
    variance.resize(m);
    if (num_observations() == 0) {
        mean.setConstant(shift_value_);
        variance.setConstant(prior_diag_);
        return;
    }
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd k = kernel_vector(queries.row(i), points_, spec_);
        Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
        mean[i] = shift_value_ + k.dot(alpha_);
        double var = prior_diag_ - v.squaredNorm();
        variance[i] = std::min(std::max(var, 0.0), prior_diag_);
    }
}

ConfidenceBounds GPState::confidence_bounds(const Eigen::MatrixXd& queries, double beta) const {
    if (!(beta > 0.0))
        throw std::invalid_argument("confidence_bounds: beta must be positive");
    Eigen::VectorXd mean, var;
    posterior(queries, mean, var);
    ConfidenceBounds b;
    b.beta = beta;
    Eigen::VectorXd sd = var.cwiseSqrt();
    b.lower = mean - beta * sd;
    b.upper = mean + beta * sd;
    return b;
}

double GPState::empirical_information_gain() const {
    if (!(noise_std_ > 0.0))
        throw std::invalid_argument("empirical_information_gain: undefined for noise_std = 0");
    const int n = num_observations();
    if (n == 0) return 0.0;
    // det(I + s^-2 K) = det(K + s^2 I) / s^(2n) = prod L_ii^2 / s^(2n)
    double log_det = 0.0;
    for (int i = 0; i < n; ++i) log_det += std::log(chol_(i, i));
    return log_det - n * std::log(noise_std_);
}

double beta_schedule(int t, double rkhs_bound_B, double noise_R, double delta,
                     double gamma_prev) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("beta_schedule: delta must lie in (0,1)");
    if (t < 1 || rkhs_bound_B < 0.0 || noise_R < 0.0 || gamma_prev < 0.0)
        throw std::invalid_argument("beta_schedule: invalid argument");
    return rkhs_bound_B + noise_R * std::sqrt(2.0 * (gamma_prev + 1.0 + std::log(1.0 / delta)));
}

StageIterationBounds stage_iteration_bounds(double epsilon, double zeta, int d,
                                            double B, double R, double delta,
                                            double C, double C_gamma, long long cap) {
    if (!(epsilon > 0.0) || !(zeta > 0.0))
        throw std::invalid_argument("stage_iteration_bounds: epsilon and zeta must be positive");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("stage_iteration_bounds: delta must lie in (0,1)");

    auto gamma_model = [&](long long t) {
        return t <= 1 ? 0.0 : C_gamma * d * std::log(static_cast<double>(t));
    };

    StageIterationBounds out;

    // t* : smallest t with t >= C (beta_t sqrt(d) / eps)^d, beta_t fed by
    // gamma_{t-1}. The right side grows polylogarithmically, so the first
    // crossing is final.
    out.t_star = -1;
    for (long long t = 1; t <= cap; ++t) {
        const double beta = beta_schedule(static_cast<int>(std::min<long long>(t, 1 << 30)),
                                          B, R, delta, gamma_model(t - 1));
        const double rhs = C * std::pow(beta * std::sqrt(static_cast<double>(d)) / epsilon,
                                        static_cast<double>(d));
        if (static_cast<double>(t) >= rhs) {
            out.t_star = t;
            break;
        }
    }
    if (out.t_star < 0)
        throw BoundSearchOverflow("stage_iteration_bounds: no t* below cap");

    // T* : the left side rises to a single peak then decays like ln(T)^(3/2)/T,
    // so require the inequality to hold at T and T+1 to skip the degenerate
    // T = 1 solution (ln 1 = 0).
    auto lhs = [&](long long T) {
        const double g = C_gamma * d * std::log(static_cast<double>(T));
        const double bracket = B + R * std::sqrt(2.0 * (g + 1.0 + std::log(1.0 / delta)));
        return g / static_cast<double>(T) * bracket * bracket;
    };
    const double target = zeta * zeta / 4.0;
    out.T_star = -1;
    for (long long T = 2; T <= cap; ++T) {
        if (lhs(T) <= target && lhs(T + 1) <= target) {
            out.T_star = T;
            break;
        }
    }
    if (out.T_star < 0)
        throw BoundSearchOverflow("stage_iteration_bounds: no T* below cap");
    return out;
}

BatchPosterior::BatchPosterior(const GPState& state, Eigen::MatrixXd candidates)
    : state_(&state), candidates_(std::move(candidates)) {
    rebuild();
}

void BatchPosterior::rebuild() {
    const int n = state_->num_observations();
    const int N = num_candidates();
    if (n == 0) {
        v_.resize(0, N);
    } else {
        Eigen::MatrixXd K = kernel_cross(state_->points(), candidates_, state_->kernel());
        v_ = state_->cholesky_factor().triangularView<Eigen::Lower>().solve(K);
    }
    epoch_ = state_->refactor_epoch();
    obs_count_ = n;
    finalize_stats();
}

void BatchPosterior::sync(const GPState& next) {
    const bool extended = next.num_observations() >= obs_count_ &&
                          next.refactor_epoch() == epoch_;
    state_ = &next;
    if (!extended) {
        rebuild();
        return;
    }
    // Append one solve row per new observation: v_new = (k_x(X) - w^T V) / l_nn.
    const auto& L = next.cholesky_factor();
    const int N = num_candidates();
    while (obs_count_ < next.num_observations()) {
        const int n = obs_count_;
        Eigen::VectorXd kx = kernel_vector(next.points().row(n), candidates_, next.kernel());
        Eigen::RowVectorXd row;
        if (n == 0)
            row = kx.transpose() / L(0, 0);
        else
            row = (kx.transpose() - L.row(n).head(n) * v_.topRows(n)) / L(n, n);
        v_.conservativeResize(n + 1, N);
        v_.row(n) = row;
        ++obs_count_;
    }
    finalize_stats();
}

void BatchPosterior::append_candidates(const Eigen::MatrixXd& more) {
    const int N0 = num_candidates();
    const int add = static_cast<int>(more.rows());
    candidates_.conservativeResize(N0 + add, more.cols());
    candidates_.bottomRows(add) = more;
    const int n = obs_count_;
    v_.conservativeResize(n, N0 + add);
    if (n > 0) {
        Eigen::MatrixXd K = kernel_cross(state_->points(), more, state_->kernel());
        v_.rightCols(add) = state_->cholesky_factor().triangularView<Eigen::Lower>().solve(K);
    }
    finalize_stats();
}

void BatchPosterior::finalize_stats() {
    const int N = num_candidates();
    const double diag = state_->prior_diag();
    if (obs_count_ == 0) {
        mean_ = Eigen::VectorXd::Constant(N, state_->resolved_shift());
        variance_ = Eigen::VectorXd::Constant(N, diag);
        return;
    }
    // mean = K_Xn alpha + shift = V^T (L^T alpha) + shift
    Eigen::VectorXd c = state_->cholesky_factor().transpose() * state_->alpha();
    mean_ = (v_.transpose() * c).array() + state_->resolved_shift();
    variance_ = (diag - v_.colwise().squaredNorm().transpose().array())
                    .max(0.0)
                    .min(diag)
                    .matrix();
}

double BatchPosterior::cross_covariance(int i, int j) const {
    double k = state_->kernel().eval(candidates_.row(i), candidates_.row(j));
    if (obs_count_ == 0) return k;
    return k - v_.col(i).dot(v_.col(j));
}

Eigen::VectorXd BatchPosterior::cross_covariance_row(int i, const std::vector<int>& js) const {
    Eigen::VectorXd out(js.size());
    for (std::size_t t = 0; t < js.size(); ++t)
        out[t] = cross_covariance(i, js[t]);
    return out;
}

} // namespace safectrl
