#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace mipgcn {

inline constexpr double kGapEpsilon = 1e-10;
/// Display cap for gaps blown up by the epsilon guard.
inline constexpr double kGapCap = 1e6;

/// Average precision of scores against 0/1 labels. Ranking is by score,
/// descending, ties broken by index. Throws std::invalid_argument without positives.
double average_precision(const Eigen::VectorXd& scores, const std::vector<int>& labels);

/// Percent.
double primal_gap(double obj, double best_obj);
/// Percent, capped at kGapCap.
double optimality_gap(double obj, double lb);

/// For each fraction f, accuracy of rounded predictions (z >= 0.5 means 1) on
/// the ceil(f n) most predictable entries by max(z, 1 - z); at least one entry
/// is always taken.
std::vector<std::pair<double, double>> accuracy_at_fraction(const Eigen::VectorXd& z, const std::vector<int>& labels,
                                                            const std::vector<double>& fractions);

/// Constant score equal to the positive fraction.
Eigen::VectorXd prevalence_baseline(const std::vector<int>& labels);

}  // namespace mipgcn
