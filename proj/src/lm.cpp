#include "qjspec/lm.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace qjspec {

namespace {

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x0,
                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                             int n_residuals, const LmOptions& opts) {
    const Eigen::Index np = x0.size();
    Eigen::VectorXd scale = opts.x_scale.size() == np
                                ? opts.x_scale
                                : Eigen::VectorXd::Ones(np);

    Eigen::VectorXd x = clamp(std::move(x0), lower, upper);
    Eigen::VectorXd r(n_residuals), r_trial(n_residuals), r_step(n_residuals);
    fn(x, r);
    double cost = 0.5 * r.squaredNorm();

    Eigen::MatrixXd jac(n_residuals, np);
    double lambda = opts.lambda0;

    LmResult res;
    res.converged = false;

    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        // forward-difference Jacobian at x
        for (Eigen::Index j = 0; j < np; ++j) {
            const double h = 1e-7 * std::max(std::abs(x[j]), std::abs(scale[j])) + 1e-14;
            Eigen::VectorXd xj = x;
            xj[j] = std::min(x[j] + h, upper[j]);
            const double dh = xj[j] - x[j];
            if (dh == 0.0) {
                xj[j] = x[j] - h;
                fn(xj, r_step);
                jac.col(j) = (r - r_step) / h;
            } else {
                fn(xj, r_step);
                jac.col(j) = (r_step - r) / dh;
            }
        }

        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;

        bool stepped = false;
        for (int tries = 0; tries < 24; ++tries) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-30);
            const Eigen::VectorXd step = a.ldlt().solve(-jtr);
            const Eigen::VectorXd x_trial = clamp(x + step, lower, upper);
            fn(x_trial, r_trial);
            const double cost_trial = 0.5 * r_trial.squaredNorm();
            if (cost_trial < cost) {
                const double rel_f = (cost - cost_trial) / std::max(cost, 1e-300);
                const double rel_x = (x_trial - x).norm() /
                                     std::max(x.norm(), scale.norm());
                x = x_trial;
                r = r_trial;
                cost = cost_trial;
                lambda = std::max(lambda * 0.33, 1e-12);
                stepped = true;
                if (rel_f < opts.ftol || rel_x < opts.xtol) {
                    res.converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if (res.converged || !stepped) {
            if (!stepped) res.converged = true;  // no descent direction left
            ++it;
            break;
        }
    }

    res.x = x;
    res.cost = cost;
    res.iterations = it;

    // covariance from the final Jacobian
    for (Eigen::Index j = 0; j < np; ++j) {
        const double h = 1e-7 * std::max(std::abs(x[j]), std::abs(scale[j])) + 1e-14;
        Eigen::VectorXd xj = x;
        xj[j] = x[j] + h;
        fn(xj, r_step);
        jac.col(j) = (r_step - r) / h;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (lu.isInvertible()) {
        res.covariance = lu.inverse();
        res.covariance_ok = (res.covariance.diagonal().array() >= 0.0).all();
    } else {
        res.covariance = Eigen::MatrixXd::Zero(np, np);
        res.covariance_ok = false;
    }
    return res;
}

}  // namespace qjspec
