#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace sbt {

struct LmOptions {
    int max_iterations = 500;
    double rel_tol = 1e-8;  // converged when every |step_i| <= rel_tol * max(|x_i|, 1)
    double lambda0 = 1e-3;
};

struct LmResult {
    Eigen::VectorXd x;
    double cost = 0.0;  // 0.5 * |r|^2
    int iterations = 0;
    bool converged = false;
};

// Levenberg-Marquardt with Marquardt diagonal scaling. Problem must provide
//   void evaluate(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) const;
// filling residuals r and, when J is non-null, the Jacobian dr/dx.
template <class Problem>
LmResult levenberg_marquardt(const Problem& problem, Eigen::VectorXd x, const LmOptions& opt = {}) {
    Eigen::VectorXd r, r_new;
    Eigen::MatrixXd J;
    problem.evaluate(x, r, &J);
    double cost = 0.5 * r.squaredNorm();
    double lambda = opt.lambda0;

    auto small_step = [&](const Eigen::VectorXd& step, const Eigen::VectorXd& at) {
        for (Eigen::Index i = 0; i < step.size(); ++i)
            if (!(std::abs(step[i]) <= opt.rel_tol * std::max(std::abs(at[i]), 1.0))) return false;
        return true;
    };

    LmResult res;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        res.iterations = it;
        if (cost == 0.0) {
            res.converged = true;
            break;
        }
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        Eigen::VectorXd d = A.diagonal();
        const double dmax = std::max(d.maxCoeff(), 1e-300);
        for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::max(d[i], 1e-12 * dmax);

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd M = A;
            M.diagonal() += lambda * d;
            const Eigen::VectorXd step = -M.ldlt().solve(g);
            if (!step.allFinite()) {
                lambda *= 10.0;
                if (lambda > 1e30) break;
                continue;
            }
            const Eigen::VectorXd x_new = x + step;
            problem.evaluate(x_new, r_new, nullptr);
            const double cost_new = r_new.allFinite() ? 0.5 * r_new.squaredNorm() : HUGE_VAL;
            if (cost_new < cost) {
                x = x_new;
                cost = cost_new;
                problem.evaluate(x, r, &J);
                lambda = std::max(lambda * 0.1, 1e-15);
                accepted = true;
                if (small_step(step, x)) res.converged = true;
            } else {
                // No decrease possible at the current precision.
                if (small_step(step, x)) {
                    res.converged = true;
                    break;
                }
                lambda *= 10.0;
                if (lambda > 1e30) break;
            }
        }
        if (res.converged) break;
        if (!accepted) break;
    }
    res.x = x;
    res.cost = cost;
    return res;
}

}  // namespace sbt
