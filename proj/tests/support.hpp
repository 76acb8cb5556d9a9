#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hloss/hierarchy.hpp"
#include "hloss/random.hpp"

namespace test {

inline std::string data_path(const std::string& name) { return std::string(HLOSS_TEST_DATA) + "/" + name; }

inline Eigen::VectorXd random_logits(hloss::Rng& rng, int K, double scale = 2.0) {
    Eigen::VectorXd z(K);
    for (int k = 0; k < K; ++k) z[k] = scale * rng.normal();
    return z;
}

inline Eigen::VectorXd random_simplex(hloss::Rng& rng, int K) {
    Eigen::VectorXd p(K);
    for (int k = 0; k < K; ++k) p[k] = -std::log(1.0 - rng.uniform());
    return p / p.sum();
}

inline Eigen::VectorXd one_hot(int K, hloss::NodeId y) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(K);
    p[y - 1] = 1.0;
    return p;
}

// Perfect binary tree of the given height, built level by level.
inline hloss::Hierarchy perfect_binary_tree(int height) {
    std::vector<int> parents{-1};
    std::vector<int> level{0};
    for (int d = 0; d < height; ++d) {
        std::vector<int> next;
        for (int p : level) {
            for (int c = 0; c < 2; ++c) {
                next.push_back(static_cast<int>(parents.size()));
                parents.push_back(p);
            }
        }
        level = next;
    }
    return hloss::Hierarchy::from_parents(parents);
}

} // namespace test
