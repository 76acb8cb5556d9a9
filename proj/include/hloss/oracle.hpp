#pragma once

#include <optional>

#include <Eigen/Core>

#include "hloss/weighting.hpp"

namespace hloss::oracle {

/// Euclidean projection onto the probability simplex (sort-based).
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

struct SimplexMinOptions {
    double tol = 1e-8;
    long max_iterations = 1000000;
    /// Starting point on the simplex; uniform when absent.
    std::optional<Eigen::VectorXd> start;
};

struct SimplexMinResult {
    Eigen::VectorXd minimizer;
    double value = 0.0;
    /// Norm of the unit-step projected gradient f - P(f - grad) at the solution.
    double gradient_norm_at_solution = 0.0;
    long iterations = 0;
    bool converged = false;
};

/// Minimizes the expected loss f -> E_{Y~pi}[loss(f, Y)] over the simplex by
/// projected gradient with spectral step lengths and Armijo backtracking.
/// Any nonnegative weighting is accepted (unit weights give the naive loss).
/// Requires K <= 8 and strictly positive pi. Non-convergence is reported
/// through `converged`, not thrown.
SimplexMinResult minimize_expected_loss(const WeightedHierarchy& wh, const Eigen::VectorXd& pi,
                                        const SimplexMinOptions& options = {});

/// Exact optimal-transport cost between two class distributions under the
/// leaf metric tree_distance, solved as a transportation problem by
/// successive shortest augmenting paths. Limited to K <= 8.
double ot_lp(const WeightedHierarchy& wh, const Eigen::VectorXd& mu, const Eigen::VectorXd& nu);

/// Weighted shortest-path length between two nodes, treating w_j as the
/// length of the edge into node j. Computed by graph search, not via lca.
double bfs_distance(const WeightedHierarchy& wh, NodeId a, NodeId b);

inline constexpr int kMaxOracleClasses = 8;

} // namespace hloss::oracle
