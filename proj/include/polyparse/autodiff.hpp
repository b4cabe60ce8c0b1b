#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace polyparse::ad {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

enum class Init { kGlorot, kZero };

// A named tensor with its gradient. Lookup tables store one entry per column;
// their gradient is only meaningful on `touched` columns.
template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  bool trainable = true;
  bool lookup = false;
  Init init = Init::kGlorot;
  std::vector<Index> touched;

  void zero_grad();
  // Sorted, deduplicated touched columns.
  const std::vector<Index>& touched_columns();
};

template <typename Scalar>
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter<Scalar>& add(const std::string& name, Index rows, Index cols, Init init = Init::kGlorot);
  Parameter<Scalar>& add_lookup(const std::string& name, Index dim, Index entries);
  // Fixed tensor: serialized with the model, never updated.
  Parameter<Scalar>& add_fixed(const std::string& name, Matrix<Scalar> value);

  Parameter<Scalar>& get(const std::string& name);
  const Parameter<Scalar>& get(const std::string& name) const;
  Parameter<Scalar>* find(const std::string& name);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  Parameter<Scalar>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<Scalar>& operator[](std::size_t i) const { return *params_[i]; }

  // Glorot-uniform (or zero) initialization of trainable tensors in
  // registration order.
  void initialize(Rng& rng);
  void zero_grad();

  std::vector<Matrix<Scalar>> snapshot() const;
  void restore(const std::vector<Matrix<Scalar>>& values);

 private:
  std::vector<std::unique_ptr<Parameter<Scalar>>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Uniform samples in +-sqrt(6 / (rows + cols)).
template <typename Scalar>
Matrix<Scalar> glorot_init(Index rows, Index cols, Rng& rng);
double glorot_bound(Index rows, Index cols);

template <typename Scalar>
class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
template <typename Scalar>
struct Expr {
  Graph<Scalar>* graph = nullptr;
  std::size_t id = 0;

  const Matrix<Scalar>& value() const { return graph->value(*this); }
  Index rows() const { return value().rows(); }
  Scalar scalar() const { return value()(0, 0); }
  explicit operator bool() const { return graph != nullptr; }
};

// Eager tape: every op computes its value on creation and records a closure
// that pushes its output gradient to its inputs.
template <typename Scalar>
class Graph {
 public:
  using Mat = Matrix<Scalar>;
  using Backward = std::function<void(Graph&, const Mat& output_grad)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Expr<Scalar> input(Mat value);
  Expr<Scalar> zeros(Index rows);
  // Trainable parameters accumulate into Parameter::grad on backward();
  // fixed ones act as constants. Repeated calls share one node.
  Expr<Scalar> parameter(Parameter<Scalar>& p);
  Expr<Scalar> lookup(Parameter<Scalar>& table, Index column);
  Expr<Scalar> const_lookup(const Parameter<Scalar>& table, Index column);

  Expr<Scalar> emit(Mat value, Backward backward);

  const Mat& value(Expr<Scalar> e) const;
  // Empty matrix when no gradient reached the node.
  const Mat& grad(Expr<Scalar> e) const { return nodes_[e.id].grad; }
  void accumulate(std::size_t id, const Mat& delta);

  // Requires a 1x1 loss. Fills node gradients and parameter gradients.
  void backward(Expr<Scalar> loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    const Mat* ref = nullptr;
    Mat grad;
    Backward backward;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<Scalar>*, std::size_t> parameter_nodes_;
};

template <typename Scalar>
Expr<Scalar> operator+(Expr<Scalar> a, Expr<Scalar> b);
template <typename Scalar>
Expr<Scalar> operator-(Expr<Scalar> a, Expr<Scalar> b);
template <typename Scalar>
Expr<Scalar> sum(const std::vector<Expr<Scalar>>& xs);
template <typename Scalar>
Expr<Scalar> concat(const std::vector<Expr<Scalar>>& xs);
// bias + sum_i W_i x_i
template <typename Scalar>
Expr<Scalar> affine(Expr<Scalar> bias, const std::vector<std::pair<Expr<Scalar>, Expr<Scalar>>>& terms);
template <typename Scalar>
Expr<Scalar> matvec(Expr<Scalar> w, Expr<Scalar> x);
template <typename Scalar>
Expr<Scalar> cwise_product(Expr<Scalar> a, Expr<Scalar> b);
template <typename Scalar>
Expr<Scalar> scale(Expr<Scalar> x, Scalar factor);
template <typename Scalar>
Expr<Scalar> tanh(Expr<Scalar> x);
template <typename Scalar>
Expr<Scalar> logistic(Expr<Scalar> x);
// max{0, x}
template <typename Scalar>
Expr<Scalar> rectify(Expr<Scalar> x);
template <typename Scalar>
Expr<Scalar> rows(Expr<Scalar> x, Index start, Index count);
template <typename Scalar>
Expr<Scalar> squared_norm(Expr<Scalar> x);

// Softmax restricted to entries with mask[i] == true. Masked entries get
// probability exactly 0. An empty mask means "all entries".
template <typename Scalar>
Vector<Scalar> masked_softmax(const Matrix<Scalar>& scores, const std::vector<bool>& mask = {});

// -log softmax(scores)[gold] over the masked entries.
template <typename Scalar>
Expr<Scalar> softmax_cross_entropy(Expr<Scalar> scores, Index gold, const std::vector<bool>& mask = {});

}  // namespace polyparse::ad
