#include "mipgcn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mipgcn {

namespace {

std::vector<int> order_by(const Eigen::VectorXd& key) {
  std::vector<int> idx(static_cast<std::size_t>(key.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return key[a] > key[b]; });
  return idx;
}

}  // namespace

double average_precision(const Eigen::VectorXd& scores, const std::vector<int>& labels) {
  if (scores.size() != static_cast<Eigen::Index>(labels.size())) throw std::invalid_argument("AP: size mismatch");
  const long positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0) throw std::invalid_argument("AP: no positive labels");
  double ap = 0.0;
  long hits = 0, k = 0;
  for (int i : order_by(scores)) {
    ++k;
    if (labels[i] != 1) continue;
    ++hits;
    ap += static_cast<double>(hits) / static_cast<double>(k);
  }
  return ap / static_cast<double>(positives);
}

double primal_gap(double obj, double best_obj) {
  return std::abs(obj - best_obj) / (std::max(std::abs(obj), std::abs(best_obj)) + kGapEpsilon) * 100.0;
}

double optimality_gap(double obj, double lb) {
  return std::min(std::abs(obj - lb) / (std::abs(obj) + kGapEpsilon) * 100.0, kGapCap);
}

std::vector<std::pair<double, double>> accuracy_at_fraction(const Eigen::VectorXd& z, const std::vector<int>& labels,
                                                            const std::vector<double>& fractions) {
  const auto n = static_cast<long>(labels.size());
  if (z.size() != n) throw std::invalid_argument("accuracy: size mismatch");
  if (n == 0) throw std::invalid_argument("accuracy: no labels");
  const Eigen::VectorXd confidence = z.cwiseMax(Eigen::VectorXd::Ones(n) - z);
  const auto order = order_by(confidence);
  std::vector<std::pair<double, double>> out;
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("accuracy: fraction outside [0,1]");
    const long k = std::max(1L, static_cast<long>(std::ceil(f * static_cast<double>(n) - 1e-12)));
    long correct = 0;
    for (long t = 0; t < k; ++t) {
      const int i = order[static_cast<std::size_t>(t)];
      correct += (z[i] >= 0.5 ? 1 : 0) == labels[i];
    }
    out.emplace_back(f, static_cast<double>(correct) / static_cast<double>(k));
  }
  return out;
}

Eigen::VectorXd prevalence_baseline(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("baseline: no labels");
  const double p = static_cast<double>(std::count(labels.begin(), labels.end(), 1)) / static_cast<double>(labels.size());
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(labels.size()), p);
}

}  // namespace mipgcn
