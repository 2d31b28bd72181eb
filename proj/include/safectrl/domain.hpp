#ifndef SAFECTRL_DOMAIN_HPP
#define SAFECTRL_DOMAIN_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace safectrl {

/// A point in the controller-parameter space. Campaign internals work in
/// normalized [0,1]^d coordinates; BoxDomain maps to and from raw units.
using ParamPoint = Eigen::VectorXd;

struct InvalidHyperparameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptySafeSetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Axis-aligned box bounds of the parameter space A.
class BoxDomain {
public:
    BoxDomain() = default;
    BoxDomain(Eigen::VectorXd lo, Eigen::VectorXd hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
        if (lo_.size() != hi_.size() || lo_.size() == 0)
            throw DomainError("BoxDomain: bounds must be nonempty and of equal length");
        for (int i = 0; i < lo_.size(); ++i)
            if (!(lo_[i] < hi_[i]))
                throw DomainError("BoxDomain: lower bound must be strictly below upper in every dimension");
    }

    static BoxDomain unit(int dim) {
        return BoxDomain(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim));
    }

    int dim() const { return static_cast<int>(lo_.size()); }
    const Eigen::VectorXd& lo() const { return lo_; }
    const Eigen::VectorXd& hi() const { return hi_; }

    bool contains(const ParamPoint& x, double tol = 1e-12) const {
        if (x.size() != lo_.size()) return false;
        for (int i = 0; i < x.size(); ++i)
            if (x[i] < lo_[i] - tol || x[i] > hi_[i] + tol) return false;
        return true;
    }

    /// Map a raw point into [0,1]^d.
    ParamPoint normalize(const ParamPoint& x) const {
        return (x - lo_).cwiseQuotient(hi_ - lo_);
    }

    /// Map a [0,1]^d point back to raw units.
    ParamPoint denormalize(const ParamPoint& u) const {
        return lo_ + u.cwiseProduct(hi_ - lo_);
    }

    ParamPoint clamp(const ParamPoint& x) const {
        return x.cwiseMax(lo_).cwiseMin(hi_);
    }

private:
    Eigen::VectorXd lo_, hi_;
};

} // namespace safectrl

#endif
