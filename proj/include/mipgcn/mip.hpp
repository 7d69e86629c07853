#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mipgcn {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kFeasTol = 1e-6;
inline constexpr double kIntTol = 1e-6;

enum class Sense { Minimize, Maximize };
enum class VarType { Binary, Integer, Continuous };

struct Term {
  int var = 0;
  double coef = 0.0;

  bool operator==(const Term&) const = default;
};

struct Variable {
  std::string name;
  VarType vtype = VarType::Continuous;
  double lb = 0.0;
  double ub = kInf;

  bool is_integral() const { return vtype != VarType::Continuous; }
  bool operator==(const Variable&) const = default;
};

/// Ranged row lhs <= a.x <= rhs. Terms are kept sorted by variable index.
struct Constraint {
  std::string name;
  std::vector<Term> coeffs;
  double lhs = -kInf;
  double rhs = kInf;

  bool operator==(const Constraint&) const = default;
};

struct MipInstance {
  std::string name;
  Sense sense = Sense::Minimize;
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<Term> objective;

  int num_vars() const { return static_cast<int>(variables.size()); }
  int num_rows() const { return static_cast<int>(constraints.size()); }

  /// Dense objective vector in the instance's own sense.
  Eigen::VectorXd objective_dense() const;
  std::vector<int> binary_indices() const;
  /// -1 when absent.
  int find_variable(const std::string& name) const;

  bool operator==(const MipInstance&) const = default;
};

struct Solution {
  Eigen::VectorXd values;
  double objective = 0.0;
  bool feasible = false;
  double max_violation = 0.0;
};

/// Result of canonicalization; `negated` is set when a maximization was turned
/// into a minimization so that reported objectives can be flipped back.
struct CanonicalMip {
  MipInstance instance;
  bool negated = false;

  double to_original(double canonical_objective) const {
    return negated ? -canonical_objective : canonical_objective;
  }
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> validate_instance(const MipInstance& inst);
CanonicalMip canonicalize(const MipInstance& inst);
Solution evaluate_solution(const MipInstance& inst, const Eigen::VectorXd& x);

/// Sorts terms by variable index and merges duplicates; zero coefficients are dropped.
void normalize_terms(std::vector<Term>& terms);

MipInstance instance_from_json_text(const std::string& text);
std::string instance_to_json_text(const MipInstance& inst);
MipInstance read_instance(const std::filesystem::path& path);
void write_instance(const MipInstance& inst, const std::filesystem::path& path);

const char* to_string(VarType t);
const char* to_string(Sense s);

}  // namespace mipgcn
