#pragma once

#include <vector>

#include <Eigen/Core>

namespace pgsrhb {

// One fit of  1/2 ||y - X a||^2 + lambda * sum_l sqrt(p_l) ||a_l||_2  where
// the a_l are the coefficient blocks named by column_groups (p_l = block
// size). An optional unpenalized intercept enters the residual term.
struct GroupedProblem {
    Eigen::VectorXd y;
    Eigen::MatrixXd design;
    std::vector<std::vector<int>> column_groups;
    double lambda = 0.0;
};

struct SolverSettings {
    double tol = 1e-8;
    int max_sweeps = 10000;
    // Scale each design column to unit l2 norm internally (reported
    // coefficients are always on the original scale). Off means the penalty
    // applies to the raw columns exactly as written above.
    bool standardize = true;
    bool fit_intercept = true;
};

struct Solution {
    Eigen::VectorXd coefficients;  // original scale
    double intercept = 0.0;
    double objective = 0.0;  // objective_value at the returned point
    bool converged = false;
    int sweeps_used = 0;
    // Max block optimality violation of the problem actually solved (the
    // standardized one when standardize is on).
    double kkt_residual = 0.0;
};

double objective_value(const GroupedProblem& p, const Eigen::VectorXd& coefficients,
                       double intercept = 0.0);

// Block coordinate descent with exact soft-threshold updates on orthogonal
// blocks and an inner proximal-gradient loop otherwise. Converged means the
// largest coefficient move in a sweep fell below tol and the block
// optimality conditions hold within tol.
Solution solve(const GroupedProblem& p, const SolverSettings& s = {});

// Plain lasso: every column its own group.
Solution solve_lasso(const Eigen::VectorXd& y, const Eigen::MatrixXd& design, double lambda,
                     const SolverSettings& s = {});

}  // namespace pgsrhb
