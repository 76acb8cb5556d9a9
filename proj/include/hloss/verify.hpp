#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hloss/random.hpp"

namespace hloss::verify {

/// Outcome of one property check. `worst` is the largest observed error
/// measure (its meaning is check-specific, see `detail`).
struct CheckResult {
    std::string name;
    bool passed = false;
    double worst = 0.0;
    std::string detail;
};

/// Sample counts for the randomized checks.
struct Scale {
    int random_trees = 200;   // balance
    int draws = 100;          // hxe equivalence, flat reduction, gradient
    int pi_draws = 20;        // proper scoring, per tree shape and scheme
    int ot_trees = 5;
    int ot_pairs = 50;
    int metric_random_trees = 20;

    static Scale full() { return {}; }
    static Scale quick() { return {40, 30, 4, 5, 15, 8}; }
};

inline constexpr double kBalanceTol = 1e-12;
inline constexpr double kReferenceWeightTol = 1e-12;
inline constexpr double kProperScoringTol = 1e-4;
inline constexpr double kNaiveTol = 1e-4;
inline constexpr double kHxeLossTol = 1e-10;
inline constexpr double kFlatTol = 1e-12;
inline constexpr double kGradientTol = 1e-5;
inline constexpr double kFiniteDifferenceStep = 1e-5;
inline constexpr double kClosedFormTol = 1e-12;
inline constexpr double kTransportTol = 1e-8;
inline constexpr double kMetricTol = 1e-12;

/// Root-to-leaf sums of exponential weights on random trees (<= 50 nodes)
/// for q in {0.25, 0.5, 0.9, 1, 1.2, 2, 5}. `corrupt` perturbs one weight
/// so the check must fail.
CheckResult check_balance(const Scale& scale, Rng rng, bool corrupt = false);

/// Exponential weights on the seven-leaf taxonomy against their closed forms
/// at q in {0.9, 1, 1.2}.
CheckResult check_reference_weights();

/// The simplex minimizer of the expected loss recovers the label
/// distribution, for every tree shape with <= 6 nodes and <= 4 classes plus
/// the seven-leaf taxonomy, under q in {0.9, 1.2} and HXE alpha in {0.1, 0.5}.
/// Also restarts from 5 random interior points once per shape and scheme.
CheckResult check_proper_scoring(const Scale& scale, Rng rng);

/// Unit weights on the three-class tree {1}, {2, 3} with uniform labels: the
/// minimizer is (0.2, 0.4, 0.4), not the label distribution.
CheckResult check_naive_counterexample();

/// Conditional-form HXE equals the weighted loss with HXE weights, and those
/// weights are balanced to exp(-alpha).
CheckResult check_hxe_equivalence(const Scale& scale, Rng rng);

/// On flat trees the weighted loss is half the cross-entropy.
CheckResult check_flat_reduction(const Scale& scale, Rng rng);

/// Analytic gradient against central finite differences (relative l2 error),
/// including near-one-hot logits.
CheckResult check_gradient(const Scale& scale, Rng rng);

/// Point-mass closed form vs subtree form vs LP transport, and subtree form vs
/// LP on general pairs.
CheckResult check_wasserstein(const Scale& scale, Rng rng);

/// The four algebraic forms of the tree metric vs graph shortest paths on all
/// leaf pairs; leaf-to-root distance 1/2.
CheckResult check_tree_metric(const Scale& scale, Rng rng);

struct Options {
    bool full_scale = false;
    bool include_naive = false;
    bool corrupt_weights = false;
    std::uint64_t seed = 20240601;
};

std::vector<CheckResult> run_verification(const Options& options);

/// `PASS name: detail` / `FAIL name: detail`.
std::string format_check(const CheckResult& result);

} // namespace hloss::verify
