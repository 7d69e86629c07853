#include "mipgcn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mipgcn::ad {

Tape::Id Tape::push(Mat value, std::function<void()> back) {
  nodes_.push_back({std::move(value), Mat(), std::move(back)});
  return static_cast<Id>(nodes_.size()) - 1;
}

Mat& Tape::g(Id id) {
  auto& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Tape::Id Tape::input(Mat value) { return push(std::move(value)); }

Tape::Id Tape::linear(Id x, Id w, Id b) {
  const Mat& X = value(x);
  const Mat& W = value(w);
  if (X.cols() != W.cols() || value(b).rows() != W.rows() || value(b).cols() != 1)
    throw std::invalid_argument("linear: dimension mismatch");
  Mat out = X * W.transpose();
  out.rowwise() += value(b).transpose().row(0);
  const Id id = push(std::move(out));
  nodes_[id].back = [this, id, x, w, b] {
    const Mat& G = nodes_[id].grad;
    g(x).noalias() += G * value(w);
    g(w).noalias() += G.transpose() * value(x);
    g(b) += G.colwise().sum().transpose();
  };
  return id;
}

Tape::Id Tape::relu(Id x) {
  const Id id = push(value(x).cwiseMax(0.0));
  nodes_[id].back = [this, id, x] {
    g(x) += (value(x).array() > 0.0).cast<double>().matrix().cwiseProduct(nodes_[id].grad);
  };
  return id;
}

Tape::Id Tape::sigmoid(Id x) {
  const Id id = push((1.0 / (1.0 + (-value(x).array()).exp())).matrix());
  nodes_[id].back = [this, id, x] {
    const auto& s = value(id).array();
    g(x) += (nodes_[id].grad.array() * s * (1.0 - s)).matrix();
  };
  return id;
}

Tape::Id Tape::concat_cols(Id a, Id b) {
  const Mat& A = value(a);
  const Mat& B = value(b);
  if (A.rows() != B.rows()) throw std::invalid_argument("concat: row mismatch");
  Mat out(A.rows(), A.cols() + B.cols());
  out << A, B;
  const Id id = push(std::move(out));
  nodes_[id].back = [this, id, a, b] {
    const Mat& G = nodes_[id].grad;
    const auto ca = value(a).cols();
    g(a) += G.leftCols(ca);
    g(b) += G.rightCols(G.cols() - ca);
  };
  return id;
}

Tape::Id Tape::repeat_rows(Id r, int n) {
  const Id id = push(value(r).replicate(n, 1));
  nodes_[id].back = [this, id, r] { g(r) += nodes_[id].grad.colwise().sum(); };
  return id;
}

Tape::Id Tape::mean_rows(Id x) {
  const Mat& X = value(x);
  const auto n = X.rows();
  Mat out = n > 0 ? Mat(X.colwise().mean()) : Mat::Zero(1, X.cols());
  const Id id = push(std::move(out));
  nodes_[id].back = [this, id, x, n] {
    if (n > 0) g(x).rowwise() += nodes_[id].grad.row(0) / static_cast<double>(n);
  };
  return id;
}

Tape::Id Tape::row(Id x, int i) {
  const Id id = push(value(x).row(i));
  nodes_[id].back = [this, id, x, i] { g(x).row(i) += nodes_[id].grad; };
  return id;
}

Tape::Id Tape::stack_rows(const std::vector<Id>& rows) {
  const auto cols = rows.empty() ? 0 : value(rows.front()).cols();
  Mat out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = value(rows[k]);
  const Id id = push(std::move(out));
  nodes_[id].back = [this, id, rows] {
    for (std::size_t k = 0; k < rows.size(); ++k) g(rows[k]) += nodes_[id].grad.row(static_cast<Eigen::Index>(k));
  };
  return id;
}

Tape::Id Tape::attend(Id recv, Id send, Id w, const Mat& edge_feats, const std::vector<int>& recv_idx,
                      const std::vector<int>& send_idx, bool attention) {
  const Mat& R = value(recv);
  const Mat& S = value(send);
  const auto d = R.cols(), k = edge_feats.cols();
  const auto ne = static_cast<Eigen::Index>(recv_idx.size());
  if (S.cols() != d || value(w).rows() != 1 || value(w).cols() != 2 * d + k || edge_feats.rows() != ne ||
      static_cast<Eigen::Index>(send_idx.size()) != ne)
    throw std::invalid_argument("attend: dimension mismatch");

  Eigen::VectorXd raw = Eigen::VectorXd::Zero(ne), alpha(ne);
  Eigen::VectorXd denom = Eigen::VectorXd::Zero(R.rows());
  if (attention) {
    const auto W = value(w).row(0);
    const Eigen::VectorXd sr = R * W.segment(0, d).transpose();
    const Eigen::VectorXd sf = edge_feats * W.segment(d, k).transpose();
    const Eigen::VectorXd ss = S * W.segment(d + k, d).transpose();
    for (Eigen::Index e = 0; e < ne; ++e) {
      raw[e] = 1.0 / (1.0 + std::exp(-(sr[recv_idx[e]] + sf[e] + ss[send_idx[e]])));
      alpha[e] = std::exp(raw[e]);
      denom[recv_idx[e]] += alpha[e];
    }
  } else {
    for (Eigen::Index e = 0; e < ne; ++e) {
      alpha[e] = 1.0;
      denom[recv_idx[e]] += 1.0;
    }
  }
  Mat out = Mat::Zero(R.rows(), d);
  for (Eigen::Index e = 0; e < ne; ++e) {
    alpha[e] /= denom[recv_idx[e]];
    out.row(recv_idx[e]) += alpha[e] * S.row(send_idx[e]);
  }

  const Id id = push(std::move(out));
  nodes_[id].back = [this, id, recv, send, w, edge_feats, recv_idx, send_idx, attention, raw, alpha, d, k, ne] {
    const Mat& G = nodes_[id].grad;
    const Mat& S = value(send);
    Mat& gs = g(send);
    Eigen::VectorXd dalpha(ne);
    for (Eigen::Index e = 0; e < ne; ++e) {
      gs.row(send_idx[e]) += alpha[e] * G.row(recv_idx[e]);
      dalpha[e] = G.row(recv_idx[e]).dot(S.row(send_idx[e]));
    }
    if (!attention) return;
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(G.rows());
    for (Eigen::Index e = 0; e < ne; ++e) weighted[recv_idx[e]] += alpha[e] * dalpha[e];
    const Mat& R = value(recv);
    const auto W = value(w).row(0);
    Mat& gr = g(recv);
    Mat& gw = g(w);
    for (Eigen::Index e = 0; e < ne; ++e) {
      const double dpre = alpha[e] * (dalpha[e] - weighted[recv_idx[e]]) * raw[e] * (1.0 - raw[e]);
      if (dpre == 0.0) continue;
      gr.row(recv_idx[e]) += dpre * W.segment(0, d);
      gs.row(send_idx[e]) += dpre * W.segment(d + k, d);
      gw.block(0, 0, 1, d) += dpre * R.row(recv_idx[e]);
      gw.block(0, d, 1, k) += dpre * edge_feats.row(e);
      gw.block(0, d + k, 1, d) += dpre * S.row(send_idx[e]);
    }
  };
  return id;
}

Tape::Id Tape::bce(Id z, const std::vector<int>& targets) {
  const Mat& Z = value(z);
  if (Z.size() != static_cast<Eigen::Index>(targets.size())) throw std::invalid_argument("bce: size mismatch");
  constexpr double lo = 1e-7, hi = 1.0 - 1e-7;
  int n = 0;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < Z.size(); ++i) {
    if (targets[i] < 0) continue;
    ++n;
    const double p = std::clamp(Z(i), lo, hi);
    loss -= targets[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  if (n == 0) throw std::invalid_argument("bce: no labelled entries");
  const Id id = push(Mat::Constant(1, 1, loss / n));
  nodes_[id].back = [this, id, z, targets, n] {
    const Mat& Z = value(z);
    Mat& gz = g(z);
    const double scale = nodes_[id].grad(0, 0) / n;
    for (Eigen::Index i = 0; i < Z.size(); ++i) {
      if (targets[i] < 0) continue;
      const double p = Z(i);
      if (p < lo || p > hi) continue;
      gz(i) += scale * (targets[i] == 1 ? -1.0 / p : 1.0 / (1.0 - p));
    }
  };
  return id;
}

void Tape::backward(Id out) {
  if (value(out).size() != 1) throw std::invalid_argument("backward needs a scalar");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  g(out)(0, 0) = 1.0;
  for (Id i = out; i >= 0; --i) {
    auto& n = nodes_[i];
    if (n.back && n.grad.size() > 0) n.back();
  }
  for (Id i = 0; i < static_cast<Id>(nodes_.size()); ++i) g(i);
}

}  // namespace mipgcn::ad
