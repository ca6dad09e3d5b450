#pragma once

#include <Eigen/Core>
#include <functional>

namespace qjspec {

// Residual function: fills r (fixed size) from parameters x.
using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;

struct LmOptions {
    int max_iterations = 200;
    double ftol = 1e-12;  // relative cost decrease
    double xtol = 1e-12;  // relative step size
    double lambda0 = 1e-3;
    Eigen::VectorXd x_scale;  // typical parameter magnitudes for jacobian steps
};

struct LmResult {
    Eigen::VectorXd x;
    Eigen::MatrixXd covariance;  // (J^T J)^-1 at the solution
    double cost = 0.0;           // 0.5 * ||r||^2
    int iterations = 0;
    bool converged = false;
    bool covariance_ok = false;
};

// Levenberg-Marquardt with forward-difference Jacobian and box projection.
// Residuals are expected pre-weighted (unit variance), so the returned
// covariance is directly the parameter covariance.
LmResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x0,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                             int n_residuals, const LmOptions& opts = {});

}  // namespace qjspec
