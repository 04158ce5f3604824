#include "pgsrhb/group_lasso.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace pgsrhb {

namespace {

void validate(const GroupedProblem& p) {
    if (p.y.size() == 0) throw std::invalid_argument("problem has no observations");
    if (p.design.rows() != p.y.size())
        throw std::invalid_argument("design rows do not match response length");
    if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda))
        throw std::invalid_argument("lambda must be finite and nonnegative");
    if (!p.y.allFinite() || !p.design.allFinite())
        throw std::invalid_argument("problem contains non-finite entries");

    std::vector<char> seen(std::size_t(p.design.cols()), 0);
    for (const auto& g : p.column_groups) {
        if (g.empty()) throw std::invalid_argument("empty column group");
        for (int c : g) {
            if (c < 0 || c >= int(p.design.cols()))
                throw std::invalid_argument("column index out of range");
            if (seen[std::size_t(c)]++) throw std::invalid_argument("column in two groups");
        }
    }
    for (char s : seen)
        if (!s) throw std::invalid_argument("column not covered by any group");
}

struct Block {
    std::vector<int> cols;
    Eigen::MatrixXd X;     // gathered standardized columns
    Eigen::MatrixXd gram;  // X^T X
    double weight = 1.0;   // sqrt(block size)
    bool orthogonal = false;
    double diag = 0.0;       // common Gram diagonal when orthogonal
    double lipschitz = 0.0;  // largest Gram eigenvalue
};

// Group soft-threshold step for min_v 1/2 v^T G v - u^T v + lam ||v||_2,
// iterated to a fixed point (plain ISTA keeps every step a descent step, so
// the sweep objective stays monotone).
Eigen::VectorXd prox_descent(const Block& b, const Eigen::VectorXd& u, double lam,
                             Eigen::VectorXd v, double tol) {
    const double step = 1.0 / b.lipschitz;
    for (int it = 0; it < 5000; ++it) {
        Eigen::VectorXd w = v - step * (b.gram * v - u);
        double norm = w.norm();
        double shrink = std::max(0.0, 1.0 - lam * step / norm);
        if (norm == 0.0) shrink = 0.0;
        Eigen::VectorXd next = shrink * w;
        double move = (next - v).lpNorm<Eigen::Infinity>();
        v = std::move(next);
        if (move <= tol) break;
    }
    return v;
}

}  // namespace

double objective_value(const GroupedProblem& p, const Eigen::VectorXd& coefficients,
                       double intercept) {
    if (coefficients.size() != p.design.cols())
        throw std::invalid_argument("coefficient length does not match design");
    Eigen::VectorXd r = p.y - p.design * coefficients;
    r.array() -= intercept;
    double penalty = 0.0;
    for (const auto& g : p.column_groups) {
        double ss = 0.0;
        for (int c : g) ss += coefficients[c] * coefficients[c];
        penalty += std::sqrt(double(g.size())) * std::sqrt(ss);
    }
    return 0.5 * r.squaredNorm() + p.lambda * penalty;
}

Solution solve(const GroupedProblem& p, const SolverSettings& s) {
    validate(p);
    const Eigen::Index m = p.y.size();
    const Eigen::Index cols = p.design.cols();

    Eigen::VectorXd scale = Eigen::VectorXd::Ones(cols);
    if (s.standardize) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            double n = p.design.col(j).norm();
            if (n > 0.0) scale[j] = n;
        }
    }

    std::vector<Block> blocks(p.column_groups.size());
    for (std::size_t l = 0; l < blocks.size(); ++l) {
        Block& b = blocks[l];
        b.cols = p.column_groups[l];
        b.X.resize(m, Eigen::Index(b.cols.size()));
        for (std::size_t j = 0; j < b.cols.size(); ++j)
            b.X.col(Eigen::Index(j)) = p.design.col(b.cols[j]) / scale[b.cols[j]];
        b.gram = b.X.transpose() * b.X;
        b.weight = std::sqrt(double(b.cols.size()));
        b.diag = b.gram(0, 0);
        double off = (b.gram - b.diag * Eigen::MatrixXd::Identity(b.gram.rows(), b.gram.cols()))
                         .cwiseAbs()
                         .maxCoeff();
        b.orthogonal = off <= 1e-12 * std::max(1.0, std::abs(b.diag));
        if (!b.orthogonal) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.gram, Eigen::EigenvaluesOnly);
            b.lipschitz = std::max(es.eigenvalues().maxCoeff(),
                                   std::numeric_limits<double>::min());
        }
    }

    std::vector<Eigen::VectorXd> a(blocks.size());
    for (std::size_t l = 0; l < blocks.size(); ++l)
        a[l] = Eigen::VectorXd::Zero(Eigen::Index(blocks[l].cols.size()));

    double beta0 = 0.0;
    Eigen::VectorXd r = p.y;
    if (s.fit_intercept) {
        beta0 = p.y.mean();
        r.array() -= beta0;
    }

    auto kkt_residual = [&]() {
        double worst = 0.0;
        for (std::size_t l = 0; l < blocks.size(); ++l) {
            const Block& b = blocks[l];
            Eigen::VectorXd g = b.X.transpose() * r;
            double lam = p.lambda * b.weight;
            double an = a[l].norm();
            if (an > 0.0)
                worst = std::max(worst, (g - lam / an * a[l]).lpNorm<Eigen::Infinity>());
            else
                worst = std::max(worst, std::max(0.0, g.norm() - lam));
        }
        if (s.fit_intercept && m > 0) worst = std::max(worst, std::abs(r.mean()));
        return worst;
    };

    Solution sol;
    double prev_obj = std::numeric_limits<double>::infinity();
    double kkt = std::numeric_limits<double>::infinity();
    int sweep = 0;
    for (; sweep < s.max_sweeps; ++sweep) {
        if (s.fit_intercept) {
            double mu = r.mean();
            beta0 += mu;
            r.array() -= mu;
        }

        double max_change = 0.0;
        for (std::size_t l = 0; l < blocks.size(); ++l) {
            Block& b = blocks[l];
            double lam = p.lambda * b.weight;
            Eigen::VectorXd u = b.X.transpose() * r + b.gram * a[l];
            Eigen::VectorXd next;
            double un = u.norm();
            if (un <= lam) {
                next = Eigen::VectorXd::Zero(u.size());
            } else if (b.orthogonal) {
                next = (1.0 - lam / un) / b.diag * u;
            } else {
                next = prox_descent(b, u, lam, a[l], std::max(s.tol * 1e-2, 1e-15));
            }
            Eigen::VectorXd delta = next - a[l];
            double move = delta.lpNorm<Eigen::Infinity>();
            if (move > 0.0) r -= b.X * delta;
            a[l] = std::move(next);
            max_change = std::max(max_change, move);
        }

        double obj = 0.5 * r.squaredNorm();
        for (std::size_t l = 0; l < blocks.size(); ++l)
            obj += p.lambda * blocks[l].weight * a[l].norm();
        assert(obj <= prev_obj + 1e-9 * (1.0 + std::abs(prev_obj)));
        prev_obj = obj;

        if (max_change < s.tol) {
            kkt = kkt_residual();
            if (kkt <= s.tol) {
                sol.converged = true;
                ++sweep;
                break;
            }
        }
    }

    if (!std::isfinite(kkt)) kkt = kkt_residual();

    sol.coefficients = Eigen::VectorXd::Zero(cols);
    for (std::size_t l = 0; l < blocks.size(); ++l)
        for (std::size_t j = 0; j < blocks[l].cols.size(); ++j)
            sol.coefficients[blocks[l].cols[j]] = a[l][Eigen::Index(j)] / scale[blocks[l].cols[j]];
    sol.intercept = beta0;
    sol.objective = objective_value(p, sol.coefficients, beta0);
    sol.sweeps_used = sweep;
    sol.kkt_residual = kkt;
    return sol;
}

Solution solve_lasso(const Eigen::VectorXd& y, const Eigen::MatrixXd& design, double lambda,
                     const SolverSettings& s) {
    GroupedProblem p;
    p.y = y;
    p.design = design;
    p.lambda = lambda;
    p.column_groups.reserve(std::size_t(design.cols()));
    for (int j = 0; j < int(design.cols()); ++j) p.column_groups.push_back({j});
    return solve(p, s);
}

}  // namespace pgsrhb
