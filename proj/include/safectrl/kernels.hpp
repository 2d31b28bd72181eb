#ifndef SAFECTRL_KERNELS_HPP
#define SAFECTRL_KERNELS_HPP

#include <Eigen/Dense>
#include <vector>

#include "safectrl/domain.hpp"

namespace safectrl {

/// Per-dimension hyperparameters of the one-dimensional Gaussian base kernels
///   z_i(x, y) = variance_i * exp(-(x_i - y_i)^2 / (2 * lengthscale_i^2)).
struct BaseKernelParams {
    Eigen::VectorXd lengthscales;
    Eigen::VectorXd signal_variances;

    int dim() const { return static_cast<int>(lengthscales.size()); }
    void validate() const;

    static BaseKernelParams uniform(int dim, double lengthscale, double variance);
};

enum class KernelKind { FullRBF, Additive };

/// Covariance-function specification. Additive kernels sum the elementary
/// symmetric polynomials of the per-dimension base-kernel values, one term
/// per interaction order, each order scaled by its weight. FullRBF is the
/// standard isotropic squared-exponential used by the baselines.
struct KernelSpec {
    KernelKind kind = KernelKind::Additive;
    BaseKernelParams base;
    Eigen::VectorXd order_weights; // Additive only; length max_order
    int max_order = 1;

    int dim() const { return base.dim(); }
    void validate() const;

    /// k(a, b) under this spec.
    double eval(const ParamPoint& a, const ParamPoint& b) const;

    /// k(a, a); constant over a (both kinds are stationary).
    double diag_value() const;

    static KernelSpec additive(BaseKernelParams base, int max_order,
                               Eigen::VectorXd order_weights = Eigen::VectorXd());
    static KernelSpec full_rbf(int dim, double lengthscale, double variance);
};

/// One-dimensional Gaussian base kernel.
double base_kernel_eval(double x_i, double x_j, double lengthscale, double variance);

/// Full-dimensional squared-exponential kernel with scalar hyperparameters.
double full_rbf_kernel(const ParamPoint& a, const ParamPoint& b,
                       double lengthscale, double variance);

/// Degree-`order` elementary symmetric polynomial of the base-kernel values,
/// by explicit subset enumeration. Exponential in d; this is the correctness
/// oracle for the Newton-Girard fast path.
double additive_order_kernel_bruteforce(const ParamPoint& a, const ParamPoint& b,
                                        int order, const BaseKernelParams& base);

/// Weighted sum over orders 1..max_order of the elementary symmetric
/// polynomials e_n(z_1..z_d), via the Newton-Girard recursion
///   n e_n = sum_{k=1..n} (-1)^{k-1} e_{n-k} p_k,  p_k = sum_i z_i^k.
double additive_kernel_all_orders(const ParamPoint& a, const ParamPoint& b,
                                  const KernelSpec& spec);

/// Elementary symmetric polynomials e_1..e_max_order of the entries of z.
Eigen::VectorXd elementary_symmetric(const Eigen::VectorXd& z, int max_order);

struct GramMatrix {
    Eigen::MatrixXd entries; // raw kernel evaluations, symmetric
    double jitter = 0.0;     // 1e-8 * mean(diagonal), applied before factorization
    int point_count = 0;

    /// entries + jitter * I; the matrix actually factorized downstream.
    Eigen::MatrixXd regularized() const;
};

/// Kernel matrix over a point list (rows of `points`).
GramMatrix gram_matrix(const Eigen::MatrixXd& points, const KernelSpec& spec);

/// Kernel vector k(x, points_i) for one query against rows of `points`.
Eigen::VectorXd kernel_vector(const ParamPoint& x, const Eigen::MatrixXd& points,
                              const KernelSpec& spec);

/// Kernel block K[i][j] = k(queries_i, points_j).
Eigen::MatrixXd kernel_cross(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& points,
                             const KernelSpec& spec);

/// Lipschitz constant (sum_i L_i) * sqrt(d) with L_i = variance_i /
/// (lengthscale_i * sqrt(e)), the peak derivative magnitude of the i-th
/// one-dimensional Gaussian kernel. Covers the first-order additive kernel;
/// see the property tests for the sampled check.
double lipschitz_bound(const KernelSpec& spec);

} // namespace safectrl

#endif
