#pragma once

#include "mipgcn/bnb.hpp"
#include "mipgcn/mip.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace mipgcn {

inline constexpr int kVarFeatures = 57;
inline constexpr int kConsFeatures = 26;
inline constexpr int kObjFeatures = 2;
inline constexpr int kEdgeFeatures = 2;
/// Stand-in for infinite row sides, applied before scaling.
inline constexpr double kInfSentinel = 1e10;

const std::array<const char*, kVarFeatures>& variable_feature_names();
const std::array<const char*, kConsFeatures>& constraint_feature_names();

/// Row-type one-hot slots, in feature order.
enum class RowType {
  Singleton,
  Aggregation,
  Precedence,
  Knapsack,
  Logicor,
  GeneralLinear,
  And,
  Or,
  Xor,
  Linking,
  Cardinality,
  VariableBound,
};

struct VcEdge {
  int var = 0;   // variable node
  int cons = 0;  // constraint node
  Eigen::Vector2d features = Eigen::Vector2d::Zero();
};

/// Variable nodes are the binaries of the presolved canonical instance,
/// constraint nodes its rows. Every variable and every constraint node has
/// exactly one edge to the objective node; their features are rows of
/// vo_features / co_features.
struct TriGraph {
  std::string instance;
  std::vector<std::string> var_names;
  std::vector<std::string> cons_names;
  Eigen::MatrixXd var_features;   // n_var x kVarFeatures
  Eigen::MatrixXd cons_features;  // n_cons x kConsFeatures
  Eigen::VectorXd obj_features = Eigen::VectorXd::Zero(kObjFeatures);
  std::vector<VcEdge> vc_edges;
  Eigen::MatrixXd vo_features;  // n_var x kEdgeFeatures
  Eigen::MatrixXd co_features;  // n_cons x kEdgeFeatures

  int num_vars() const { return static_cast<int>(var_names.size()); }
  int num_cons() const { return static_cast<int>(cons_names.size()); }
  int num_edges() const { return static_cast<int>(vc_edges.size()) + num_vars() + num_cons(); }

  /// Indices into vc_edges incident to each variable / constraint node.
  std::vector<std::vector<int>> var_adjacency() const;
  std::vector<std::vector<int>> cons_adjacency() const;
};

RowType classify_row(const MipInstance& inst, const Constraint& row);

Eigen::VectorXd variable_features(const RootInfo& root, int j);
Eigen::VectorXd constraint_features(const RootInfo& root, int i);

/// Throws std::runtime_error when the root LP is not optimal.
TriGraph build_trigraph(const RootInfo& root);
TriGraph build_trigraph(const MipInstance& inst);

struct Standardizer {
  Eigen::VectorXd shift, scale;

  /// Row-wise standardization of a node-by-feature matrix.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const;
};

/// Per-feature standardization fitted on training graphs.
struct FeatureScaler {
  Standardizer var, cons, obj, vc, vo, co;
};

/// Pools nodes (or edges) of all graphs per feature. Constant columns get
/// scale 1 and are centered to zero, so a constant sentinel cannot leak into
/// the network at 1e10.
FeatureScaler fit_scaler(const std::vector<TriGraph>& graphs);
TriGraph apply_scaler(const TriGraph& g, const FeatureScaler& scaler);

std::string graph_to_json_text(const TriGraph& g);
TriGraph graph_from_json_text(const std::string& text);
std::string scaler_to_json_text(const FeatureScaler& s);
FeatureScaler scaler_from_json_text(const std::string& text);

}  // namespace mipgcn
