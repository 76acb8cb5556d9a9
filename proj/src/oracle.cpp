#include "hloss/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "hloss/errors.hpp"
#include "hloss/loss.hpp"

namespace hloss::oracle {

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double running = 0.0;
    double theta = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        running += sorted[i];
        const double candidate = (running - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - candidate > 0.0) theta = candidate;
    }
    return (v.array() - theta).max(0.0).matrix();
}

namespace {

void check_oracle_size(const WeightedHierarchy& wh) {
    if (wh.tree().leaf_count() > kMaxOracleClasses) {
        throw InputError("oracle size cap exceeded: at most " +
                         std::to_string(kMaxOracleClasses) + " classes");
    }
}

} // namespace

SimplexMinResult minimize_expected_loss(const WeightedHierarchy& wh, const Eigen::VectorXd& pi,
                                        const SimplexMinOptions& options) {
    check_oracle_size(wh);
    const int K = wh.tree().leaf_count();
    detail::check_simplex(pi, K, 1e-9, "label distribution");
    if ((pi.array() <= 0.0).any()) {
        throw InputError("the minimization oracle needs a strictly positive distribution");
    }

    Eigen::VectorXd f = options.start ? project_to_simplex(*options.start)
                                      : Eigen::VectorXd::Constant(K, 1.0 / K);
    auto objective = [&](const Eigen::VectorXd& x) { return expected_loss(wh, x, pi); };
    auto gradient = [&](const Eigen::VectorXd& x) { return expected_loss_gradient(wh, x, pi); };

    double value = objective(f);
    Eigen::VectorXd g = gradient(f);
    double step = 1.0;

    SimplexMinResult result;
    long it = 0;
    for (; it < options.max_iterations; ++it) {
        const double mapping = (project_to_simplex(f - g) - f).norm();
        if (mapping < options.tol) {
            result.converged = true;
            break;
        }
        const Eigen::VectorXd direction = project_to_simplex(f - step * g) - f;
        const double slope = g.dot(direction);
        // Near the optimum the decrease drops below rounding in the value, so
        // the sufficient-decrease test gets a few ulps of slack.
        const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(value);
        double lambda = 1.0;
        Eigen::VectorXd candidate = f + direction;
        double candidate_value = objective(candidate);
        while (!(candidate_value <= value + 1e-4 * lambda * slope + slack) && lambda > 1e-20) {
            lambda *= 0.5;
            candidate = f + lambda * direction;
            candidate_value = objective(candidate);
        }
        const Eigen::VectorXd candidate_grad = gradient(candidate);
        const Eigen::VectorXd s = candidate - f;
        const double sy = s.dot(candidate_grad - g);
        step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e10) : 1e10;
        if (s.squaredNorm() == 0.0) step = 1.0;
        f = candidate;
        g = candidate_grad;
        value = candidate_value;
    }
    result.minimizer = f;
    result.value = value;
    result.gradient_norm_at_solution = (project_to_simplex(f - g) - f).norm();
    result.iterations = it;
    return result;
}

double ot_lp(const WeightedHierarchy& wh, const Eigen::VectorXd& mu, const Eigen::VectorXd& nu) {
    check_oracle_size(wh);
    const int K = wh.tree().leaf_count();
    detail::check_simplex(mu, K, 1e-9, "source distribution");
    detail::check_simplex(nu, K, 1e-9, "target distribution");

    // Graph: source 0, supplies 1..K, demands K+1..2K, sink 2K+1.
    struct Arc {
        int to;
        double capacity;
        double cost;
        int reverse;
    };
    const int nodes = 2 * K + 2;
    const int source = 0, sink = 2 * K + 1;
    std::vector<std::vector<Arc>> graph(nodes);
    auto add_arc = [&](int from, int to, double capacity, double cost) {
        graph[from].push_back({to, capacity, cost, static_cast<int>(graph[to].size())});
        graph[to].push_back({from, 0.0, -cost, static_cast<int>(graph[from].size()) - 1});
    };
    const double unbounded = 2.0;
    for (int i = 0; i < K; ++i) {
        add_arc(source, 1 + i, std::max(mu[i], 0.0), 0.0);
        add_arc(1 + K + i, sink, std::max(nu[i], 0.0), 0.0);
        for (int j = 0; j < K; ++j) {
            add_arc(1 + i, 1 + K + j, unbounded, tree_distance(wh, i + 1, j + 1));
        }
    }

    constexpr double kEps = 1e-15;
    const double inf = std::numeric_limits<double>::infinity();
    double cost = 0.0;
    double shipped = 0.0;
    const double total = std::min(mu.cwiseMax(0.0).sum(), nu.cwiseMax(0.0).sum());
    while (shipped < total - kEps) {
        // Bellman-Ford on the residual graph (reverse arcs carry negative cost).
        std::vector<double> dist(nodes, inf);
        std::vector<int> prev_node(nodes, -1), prev_arc(nodes, -1);
        dist[source] = 0.0;
        for (int round = 0; round < nodes - 1; ++round) {
            bool relaxed = false;
            for (int u = 0; u < nodes; ++u) {
                if (dist[u] == inf) continue;
                for (int a = 0; a < static_cast<int>(graph[u].size()); ++a) {
                    const Arc& arc = graph[u][a];
                    if (arc.capacity > kEps && dist[u] + arc.cost < dist[arc.to] - 1e-18) {
                        dist[arc.to] = dist[u] + arc.cost;
                        prev_node[arc.to] = u;
                        prev_arc[arc.to] = a;
                        relaxed = true;
                    }
                }
            }
            if (!relaxed) break;
        }
        if (dist[sink] == inf) break;
        double push = total - shipped;
        for (int v = sink; v != source; v = prev_node[v]) {
            push = std::min(push, graph[prev_node[v]][prev_arc[v]].capacity);
        }
        for (int v = sink; v != source; v = prev_node[v]) {
            Arc& arc = graph[prev_node[v]][prev_arc[v]];
            arc.capacity -= push;
            graph[v][arc.reverse].capacity += push;
        }
        shipped += push;
        cost += push * dist[sink];
    }
    return cost;
}

double bfs_distance(const WeightedHierarchy& wh, NodeId a, NodeId b) {
    const Hierarchy& h = wh.tree();
    h.check_node(a);
    h.check_node(b);
    std::vector<double> dist(h.node_count(), -1.0);
    std::vector<NodeId> frontier{a};
    dist[a] = 0.0;
    while (!frontier.empty()) {
        const NodeId u = frontier.back();
        frontier.pop_back();
        if (u == b) break;
        auto visit = [&](NodeId v, double length) {
            if (dist[v] < 0.0) {
                dist[v] = dist[u] + length;
                frontier.push_back(v);
            }
        };
        if (u != kRoot) visit(h.parent(u), wh.weight(u));
        for (NodeId c : h.children(u)) visit(c, wh.weight(c));
    }
    return dist[b];
}

} // namespace hloss::oracle
