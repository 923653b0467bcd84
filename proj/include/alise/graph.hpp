#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "alise/tensor.hpp"

namespace alise {

/// Named parameter tensors plus their gradient accumulators. Iteration is
/// always in creation order, which fixes the reduction and update order for
/// bit reproducibility.
class ParamStore {
 public:
  Tensor& create(const std::string& name, Tensor init);
  bool has(const std::string& name) const;
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  const std::vector<std::string>& names() const { return order_; }
  void zero_grad();
  int64_t param_count() const;

 private:
  struct Entry {
    Tensor value;
    Tensor grad;
  };
  std::vector<std::string> order_;
  std::vector<Entry> entries_;
  int index_of(const std::string& name) const;
};

/// Tape-based reverse-mode autodiff over Tensor values. Forward values are
/// computed eagerly as ops are built; backward() replays the tape in reverse
/// creation order, so gradient reduction order is deterministic.
class Graph {
 public:
  using Id = int32_t;

  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Id input(Tensor t);
  Id param(ParamStore& store, const std::string& name);

  const Tensor& val(Id id) const { return nodes_[id].val; }
  Tensor& grad_ref(Id id);
  bool has_grad(Id id) const { return nodes_[id].grad.defined(); }

  /// Backpropagate from a scalar node; accumulates into ParamStore grads.
  void backward(Id root);

  /// Largest |row_sum - 1| over every softmax row evaluated on this graph.
  double softmax_row_sum_dev() const { return softmax_dev_; }

  size_t size() const { return nodes_.size(); }

  // ---- differentiable ops ----
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);
  Id scale(Id a, double s);
  Id add_scalar(Id a, Id b);            // both [1]
  Id add_bcast(Id x, Id y);             // y.shape == trailing dims of x
  Id relu(Id x);
  Id reshape(Id x, std::vector<int64_t> shape);
  Id permute(Id x, std::vector<int> perm);
  Id slice(Id x, int axis, int64_t start, int64_t len);
  Id concat(const std::vector<Id>& xs, int axis);
  Id linear(Id x, Id w, Id b = -1);     // x [...][in], w [out][in], b [out]
  Id conv2d(Id x, Id w, Id b, int stride);  // x [N][Cin][H][W], w [Cout][Cin][3][3], pad 1
  Id upsample2x(Id x);                  // nearest neighbour
  Id layer_norm(Id x, Id gamma, Id beta, double eps = 1e-5);  // over last dim
  Id batch_std_cols(Id x, double eps = 1e-5);  // standardize each column of [N][F]
  Id softmax_lastdim(Id x);
  Id bmm(Id a, Id b, bool trans_b, bool shared_a);
  Id sum_all(Id x);
  Id mean_all(Id x);
  Id center_cols(Id x);                 // x [N][F] minus per-column mean

  /// Validity-masked reconstruction error of one batch of views.
  /// xhat [B][T][c][h][w] (or [T][c][h][w]); x same shape; validity
  /// [B][T][h][w] with 1 = clear. Per date: pixel-summed squared error over
  /// all channels of clear pixels, divided by the clear-pixel count; dates
  /// with no clear pixel are skipped and excluded from the date average.
  Id masked_mse(Id xhat, const Tensor& x, const Tensor& validity);

  /// Mean cross-entropy over rows of logits [P][k]; rows whose label equals
  /// ignore_id are excluded.
  Id cross_entropy(Id logits, const std::vector<int32_t>& labels, int32_t ignore_id);

 private:
  struct Node {
    Tensor val;
    Tensor grad;
    bool needs_grad = false;
    std::function<void(Graph&, const Tensor&)> backfn;  // (graph, grad of this node)
    Tensor* param_grad = nullptr;                       // set for parameter leaves
  };

  Id emplace(Tensor val, bool needs_grad, std::function<void(Graph&, const Tensor&)> backfn = nullptr);
  void accum(Id id, const Tensor& g);
  void accum_raw(Id id, const double* g, int64_t n);
  bool any_needs_grad(std::initializer_list<Id> ids) const;

  std::vector<Node> nodes_;
  bool grad_enabled_ = true;
  double softmax_dev_ = 0.0;
};

}  // namespace alise
