#include "safectrl/kernels.hpp"

#include <cmath>

namespace safectrl {

void BaseKernelParams::validate() const {
    if (lengthscales.size() == 0 || lengthscales.size() != signal_variances.size())
        throw InvalidHyperparameter("base kernel: lengthscale/variance vectors must be nonempty and equal length");
    for (int i = 0; i < lengthscales.size(); ++i) {
        if (!(lengthscales[i] > 0.0) || !std::isfinite(lengthscales[i]))
            throw InvalidHyperparameter("base kernel: lengthscales must be strictly positive");
        if (!(signal_variances[i] > 0.0) || !std::isfinite(signal_variances[i]))
            throw InvalidHyperparameter("base kernel: signal variances must be strictly positive");
    }
}

BaseKernelParams BaseKernelParams::uniform(int dim, double lengthscale, double variance) {
    BaseKernelParams p;
    p.lengthscales = Eigen::VectorXd::Constant(dim, lengthscale);
    p.signal_variances = Eigen::VectorXd::Constant(dim, variance);
    p.validate();
    return p;
}

void KernelSpec::validate() const {
    base.validate();
    if (kind == KernelKind::Additive) {
        if (max_order < 1 || max_order > dim())
            throw InvalidHyperparameter("additive kernel: max_order must lie in [1, d]");
        if (order_weights.size() != max_order)
            throw InvalidHyperparameter("additive kernel: one order weight per order 1..max_order");
        for (int i = 0; i < order_weights.size(); ++i)
            if (order_weights[i] < 0.0 || !std::isfinite(order_weights[i]))
                throw InvalidHyperparameter("additive kernel: order weights must be nonnegative");
    }
}

KernelSpec KernelSpec::additive(BaseKernelParams base_params, int max_order,
                                Eigen::VectorXd order_weights) {
    KernelSpec s;
    s.kind = KernelKind::Additive;
    s.base = std::move(base_params);
    s.max_order = max_order;
    s.order_weights = order_weights.size() > 0 ? std::move(order_weights)
                                               : Eigen::VectorXd::Ones(max_order);
    s.validate();
    return s;
}

KernelSpec KernelSpec::full_rbf(int dim, double lengthscale, double variance) {
    KernelSpec s;
    s.kind = KernelKind::FullRBF;
    s.base = BaseKernelParams::uniform(dim, lengthscale, variance);
    s.max_order = 1;
    s.order_weights = Eigen::VectorXd::Ones(1);
    s.validate();
    return s;
}

double base_kernel_eval(double x_i, double x_j, double lengthscale, double variance) {
    if (!(lengthscale > 0.0) || !(variance > 0.0))
        throw InvalidHyperparameter("base_kernel_eval: hyperparameters must be positive");
    const double d = x_i - x_j;
    return variance * std::exp(-d * d / (2.0 * lengthscale * lengthscale));
}

double full_rbf_kernel(const ParamPoint& a, const ParamPoint& b,
                       double lengthscale, double variance) {
    if (!(lengthscale > 0.0) || !(variance > 0.0))
        throw InvalidHyperparameter("full_rbf_kernel: hyperparameters must be positive");
    const double sq = (a - b).squaredNorm();
    return variance * std::exp(-sq / (2.0 * lengthscale * lengthscale));
}

namespace {

// Per-dimension base-kernel values z_i for a point pair.
Eigen::VectorXd base_values(const ParamPoint& a, const ParamPoint& b,
                            const BaseKernelParams& base) {
    const int d = base.dim();
    if (a.size() != d || b.size() != d)
        throw DomainError("kernel: point dimension does not match hyperparameters");
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) {
        const double diff = a[i] - b[i];
        const double ell = base.lengthscales[i];
        z[i] = base.signal_variances[i] * std::exp(-diff * diff / (2.0 * ell * ell));
    }
    return z;
}

} // namespace

double additive_order_kernel_bruteforce(const ParamPoint& a, const ParamPoint& b,
                                        int order, const BaseKernelParams& base) {
    base.validate();
    const int d = base.dim();
    if (order < 1 || order > d)
        throw InvalidHyperparameter("additive_order_kernel_bruteforce: order outside [1, d]");
    const Eigen::VectorXd z = base_values(a, b, base);

    // Enumerate all size-`order` index subsets 1 <= i_1 < ... < i_n <= d.
    std::vector<int> idx(order);
    for (int i = 0; i < order; ++i) idx[i] = i;
    double total = 0.0;
    while (true) {
        double prod = 1.0;
        for (int i : idx) prod *= z[i];
        total += prod;
        int k = order - 1;
        while (k >= 0 && idx[k] == d - order + k) --k;
        if (k < 0) break;
        ++idx[k];
        for (int j = k + 1; j < order; ++j) idx[j] = idx[j - 1] + 1;
    }
    return total;
}

Eigen::VectorXd elementary_symmetric(const Eigen::VectorXd& z, int max_order) {
    const int d = static_cast<int>(z.size());
    Eigen::VectorXd p = Eigen::VectorXd::Zero(max_order); // power sums p_k = sum_i z_i^k
    for (int i = 0; i < d; ++i) {
        double zp = z[i];
        for (int k = 0; k < max_order; ++k) {
            p[k] += zp;
            zp *= z[i];
        }
    }
    Eigen::VectorXd e(max_order);
    for (int n = 1; n <= max_order; ++n) {
        double acc = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double e_prev = (n - k == 0) ? 1.0 : e[n - k - 1];
            acc += (k % 2 == 1 ? 1.0 : -1.0) * e_prev * p[k - 1];
        }
        e[n - 1] = acc / n;
    }
    return e;
}

double additive_kernel_all_orders(const ParamPoint& a, const ParamPoint& b,
                                  const KernelSpec& spec) {
    if (spec.kind != KernelKind::Additive)
        throw InvalidHyperparameter("additive_kernel_all_orders: spec must be Additive");
    const Eigen::VectorXd z = base_values(a, b, spec.base);
    const Eigen::VectorXd e = elementary_symmetric(z, spec.max_order);
    return spec.order_weights.dot(e);
}

double KernelSpec::eval(const ParamPoint& a, const ParamPoint& b) const {
    if (kind == KernelKind::FullRBF)
        return full_rbf_kernel(a, b, base.lengthscales[0], base.signal_variances[0]);
    return additive_kernel_all_orders(a, b, *this);
}

double KernelSpec::diag_value() const {
    if (kind == KernelKind::FullRBF) return base.signal_variances[0];
    const Eigen::VectorXd e = elementary_symmetric(base.signal_variances, max_order);
    return order_weights.dot(e);
}

Eigen::MatrixXd GramMatrix::regularized() const {
    Eigen::MatrixXd m = entries;
    m.diagonal().array() += jitter;
    return m;
}

GramMatrix gram_matrix(const Eigen::MatrixXd& points, const KernelSpec& spec) {
    spec.validate();
    const int n = static_cast<int>(points.rows());
    if (n == 0) throw DomainError("gram_matrix: empty point list");
    GramMatrix g;
    g.point_count = n;
    g.entries.resize(n, n);
    const double diag = spec.diag_value();
    for (int i = 0; i < n; ++i) {
        g.entries(i, i) = diag;
        for (int j = 0; j < i; ++j) {
            const double v = spec.eval(points.row(i), points.row(j));
            g.entries(i, j) = v;
            g.entries(j, i) = v;
        }
    }
    g.jitter = 1e-8 * g.entries.diagonal().mean();
    return g;
}

Eigen::VectorXd kernel_vector(const ParamPoint& x, const Eigen::MatrixXd& points,
                              const KernelSpec& spec) {
    const int n = static_cast<int>(points.rows());
    Eigen::VectorXd k(n);
    for (int i = 0; i < n; ++i) k[i] = spec.eval(x, points.row(i));
    return k;
}

Eigen::MatrixXd kernel_cross(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& points,
                             const KernelSpec& spec) {
    Eigen::MatrixXd K(queries.rows(), points.rows());
    for (int i = 0; i < queries.rows(); ++i)
        for (int j = 0; j < points.rows(); ++j)
            K(i, j) = spec.eval(queries.row(i), points.row(j));
    return K;
}

double lipschitz_bound(const KernelSpec& spec) {
    spec.validate();
    const double inv_sqrt_e = 1.0 / std::sqrt(std::exp(1.0));
    double sum = 0.0;
    for (int i = 0; i < spec.dim(); ++i)
        sum += spec.base.signal_variances[i] / spec.base.lengthscales[i] * inv_sqrt_e;
    return sum * std::sqrt(static_cast<double>(spec.dim()));
}

} // namespace safectrl
