#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace mipgcn::ad {

using Mat = Eigen::MatrixXd;

/// Reverse-mode tape over dense matrices. Nodes are referred to by index and
/// live until the tape is destroyed.
class Tape {
 public:
  using Id = int;

  Id input(Mat value);
  const Mat& value(Id id) const { return nodes_[id].value; }
  /// Valid after backward(); zero for nodes the loss does not depend on.
  const Mat& grad(Id id) const { return nodes_[id].grad; }

  /// x W^T + 1 b^T  with W (out x in) and b (out x 1).
  Id linear(Id x, Id w, Id b);
  Id relu(Id x);
  Id sigmoid(Id x);
  Id concat_cols(Id a, Id b);
  /// n copies of a 1 x d row.
  Id repeat_rows(Id row, int n);
  /// 1 x d column means; zeros when x has no rows.
  Id mean_rows(Id x);
  Id row(Id x, int i);
  Id stack_rows(const std::vector<Id>& rows);

  /// Attention-weighted neighbor sum. Edge e carries send[send_idx[e]] into
  /// receiver recv_idx[e] with weight softmax_e(sigmoid(w . [recv, feats_e, send])),
  /// normalized over the edges of each receiver. Receivers without edges get
  /// a zero row. With attention off the weights are uniform.
  Id attend(Id recv, Id send, Id w, const Mat& edge_feats, const std::vector<int>& recv_idx,
            const std::vector<int>& send_idx, bool attention);

  /// Mean binary cross-entropy over entries with target 0 or 1; targets < 0
  /// are ignored. z is clipped to [1e-7, 1 - 1e-7] inside the logarithm only.
  Id bce(Id z, const std::vector<int>& targets);

  /// Seeds d(out)/d(out) = 1 for a 1 x 1 node and propagates.
  void backward(Id out);

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void()> back;
  };

  Id push(Mat value, std::function<void()> back = {});
  Mat& g(Id id);

  std::vector<Node> nodes_;
};

}  // namespace mipgcn::ad
