#include "polyparse/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polyparse/error.hpp"

namespace polyparse::ad {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error("shape mismatch: " + what);
}

template <typename Scalar>
Graph<Scalar>& graph_of(std::initializer_list<Expr<Scalar>> xs) {
  Graph<Scalar>* g = nullptr;
  for (const auto& x : xs) {
    if (!x.graph) throw Error("expression is not attached to a graph");
    if (g && g != x.graph) throw Error("expressions belong to different graphs");
    g = x.graph;
  }
  return *g;
}

}  // namespace

template <typename Scalar>
void Parameter<Scalar>::zero_grad() {
  if (lookup) {
    for (Index c : touched_columns()) grad.col(c).setZero();
    touched.clear();
  } else {
    grad.setZero();
  }
}

template <typename Scalar>
const std::vector<Index>& Parameter<Scalar>::touched_columns() {
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  return touched;
}

template <typename Scalar>
Parameter<Scalar>& ParameterStore<Scalar>::add(const std::string& name, Index rows, Index cols,
                                               Init init) {
  if (index_.count(name)) throw Error("duplicate parameter name '" + name + "'");
  auto p = std::make_unique<Parameter<Scalar>>();
  p->name = name;
  p->value = Matrix<Scalar>::Zero(rows, cols);
  p->grad = Matrix<Scalar>::Zero(rows, cols);
  p->init = init;
  index_.emplace(name, params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

template <typename Scalar>
Parameter<Scalar>& ParameterStore<Scalar>::add_lookup(const std::string& name, Index dim,
                                                      Index entries) {
  auto& p = add(name, dim, entries);
  p.lookup = true;
  return p;
}

template <typename Scalar>
Parameter<Scalar>& ParameterStore<Scalar>::add_fixed(const std::string& name,
                                                     Matrix<Scalar> value) {
  auto& p = add(name, 0, 0, Init::kZero);
  p.value = std::move(value);
  p.trainable = false;
  return p;
}

template <typename Scalar>
Parameter<Scalar>& ParameterStore<Scalar>::get(const std::string& name) {
  auto* p = find(name);
  if (!p) throw Error("unknown parameter '" + name + "'");
  return *p;
}

template <typename Scalar>
const Parameter<Scalar>& ParameterStore<Scalar>::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter '" + name + "'");
  return *params_[it->second];
}

template <typename Scalar>
Parameter<Scalar>* ParameterStore<Scalar>::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

template <typename Scalar>
void ParameterStore<Scalar>::initialize(Rng& rng) {
  for (auto& p : params_) {
    if (!p->trainable) continue;
    if (p->init == Init::kZero) {
      p->value.setZero();
    } else if (p->lookup) {
      // Each column is an embedding vector fed forward on its own.
      for (Index c = 0; c < p->value.cols(); ++c) {
        p->value.col(c) = glorot_init<Scalar>(p->value.rows(), 1, rng);
      }
    } else {
      p->value = glorot_init<Scalar>(p->value.rows(), p->value.cols(), rng);
    }
  }
}

template <typename Scalar>
void ParameterStore<Scalar>::zero_grad() {
  for (auto& p : params_) {
    if (p->trainable) p->zero_grad();
  }
}

template <typename Scalar>
std::vector<Matrix<Scalar>> ParameterStore<Scalar>::snapshot() const {
  std::vector<Matrix<Scalar>> values;
  values.reserve(params_.size());
  for (const auto& p : params_) values.push_back(p->value);
  return values;
}

template <typename Scalar>
void ParameterStore<Scalar>::restore(const std::vector<Matrix<Scalar>>& values) {
  if (values.size() != params_.size()) throw Error("snapshot does not match parameter store");
  for (std::size_t i = 0; i < values.size(); ++i) params_[i]->value = values[i];
}

double glorot_bound(Index rows, Index cols) {
  return std::sqrt(6.0 / static_cast<double>(rows + cols));
}

template <typename Scalar>
Matrix<Scalar> glorot_init(Index rows, Index cols, Rng& rng) {
  const double bound = glorot_bound(rows, cols);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix<Scalar> m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = static_cast<Scalar>(dist(rng));
  }
  return m;
}

template <typename Scalar>
Expr<Scalar> Graph<Scalar>::emit(Mat value, Backward backward) {
  Node node;
  node.value = std::move(value);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

template <typename Scalar>
Expr<Scalar> Graph<Scalar>::input(Mat value) {
  return emit(std::move(value), nullptr);
}

template <typename Scalar>
Expr<Scalar> Graph<Scalar>::zeros(Index rows) {
  return input(Mat::Zero(rows, 1));
}

template <typename Scalar>
Expr<Scalar> Graph<Scalar>::parameter(Parameter<Scalar>& p) {
  auto it = parameter_nodes_.find(&p);
  if (it != parameter_nodes_.end()) return {this, it->second};
  Node node;
  node.ref = &p.value;
  if (p.trainable) {
    Parameter<Scalar>* target = &p;
    node.backward = [target](Graph&, const Mat& g) { target->grad += g; };
  }
  nodes_.push_back(std::move(node));
  parameter_nodes_.emplace(&p, nodes_.size() - 1);
  return {this, nodes_.size() - 1};
}

template <typename Scalar>
Expr<Scalar> Graph<Scalar>::lookup(Parameter<Scalar>& table, Index column) {
  if (column < 0 || column >= table.value.cols()) {
    throw Error("lookup of entry " + std::to_string(column) + " in '" + table.name + "' with " +
                std::to_string(table.value.cols()) + " entries");
  }
  if (!table.trainable) return const_lookup(table, column);
  Parameter<Scalar>* target = &table;
  return emit(table.value.col(column), [target, column](Graph&, const Mat& g) {
    target->grad.col(column) += g;
    target->touched.push_back(column);
  });
}

template <typename Scalar>
Expr<Scalar> Graph<Scalar>::const_lookup(const Parameter<Scalar>& table, Index column) {
  if (column < 0 || column >= table.value.cols()) {
    throw Error("lookup of entry " + std::to_string(column) + " in '" + table.name + "'");
  }
  return input(table.value.col(column));
}

template <typename Scalar>
const typename Graph<Scalar>::Mat& Graph<Scalar>::value(Expr<Scalar> e) const {
  const auto& node = nodes_[e.id];
  return node.ref ? *node.ref : node.value;
}

template <typename Scalar>
void Graph<Scalar>::accumulate(std::size_t id, const Mat& delta) {
  auto& node = nodes_[id];
  if (node.grad.size() == 0) {
    node.grad = delta;
  } else {
    node.grad += delta;
  }
}

template <typename Scalar>
void Graph<Scalar>::backward(Expr<Scalar> loss) {
  const auto& v = value(loss);
  if (v.rows() != 1 || v.cols() != 1) throw Error("backward() needs a scalar loss");
  for (auto& node : nodes_) node.grad.resize(0, 0);
  nodes_[loss.id].grad = Mat::Ones(1, 1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (node.grad.size() == 0 || !node.backward) continue;
    // The closure may append to other nodes' gradients only, so holding a
    // copy of this one is safe against reallocation.
    const Mat g = node.grad;
    node.backward(*this, g);
  }
}

template <typename Scalar>
Expr<Scalar> operator+(Expr<Scalar> a, Expr<Scalar> b) {
  auto& g = graph_of({a, b});
  require(a.value().rows() == b.value().rows() && a.value().cols() == b.value().cols(), "add");
  const auto ia = a.id, ib = b.id;
  return g.emit(a.value() + b.value(), [ia, ib](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
    gr.accumulate(ia, d);
    gr.accumulate(ib, d);
  });
}

template <typename Scalar>
Expr<Scalar> operator-(Expr<Scalar> a, Expr<Scalar> b) {
  auto& g = graph_of({a, b});
  require(a.value().rows() == b.value().rows() && a.value().cols() == b.value().cols(), "sub");
  const auto ia = a.id, ib = b.id;
  return g.emit(a.value() - b.value(), [ia, ib](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
    gr.accumulate(ia, d);
    gr.accumulate(ib, -d);
  });
}

template <typename Scalar>
Expr<Scalar> sum(const std::vector<Expr<Scalar>>& xs) {
  if (xs.empty()) throw Error("sum of no expressions");
  auto& g = *xs.front().graph;
  Matrix<Scalar> total = xs.front().value();
  std::vector<std::size_t> ids{xs.front().id};
  for (std::size_t i = 1; i < xs.size(); ++i) {
    require(xs[i].value().rows() == total.rows() && xs[i].value().cols() == total.cols(), "sum");
    total += xs[i].value();
    ids.push_back(xs[i].id);
  }
  return g.emit(std::move(total), [ids](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
    for (auto id : ids) gr.accumulate(id, d);
  });
}

template <typename Scalar>
Expr<Scalar> concat(const std::vector<Expr<Scalar>>& xs) {
  if (xs.empty()) throw Error("concat of no expressions");
  auto& g = *xs.front().graph;
  Index total = 0;
  std::vector<std::pair<std::size_t, Index>> parts;
  for (const auto& x : xs) {
    require(x.value().cols() == 1, "concat expects column vectors");
    parts.emplace_back(x.id, x.value().rows());
    total += x.value().rows();
  }
  Matrix<Scalar> v(total, 1);
  Index offset = 0;
  for (const auto& x : xs) {
    v.middleRows(offset, x.value().rows()) = x.value();
    offset += x.value().rows();
  }
  return g.emit(std::move(v), [parts](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
    Index off = 0;
    for (auto [id, n] : parts) {
      gr.accumulate(id, d.middleRows(off, n));
      off += n;
    }
  });
}

template <typename Scalar>
Expr<Scalar> affine(Expr<Scalar> bias,
                    const std::vector<std::pair<Expr<Scalar>, Expr<Scalar>>>& terms) {
  auto& g = *bias.graph;
  Matrix<Scalar> v = bias.value();
  std::vector<std::pair<std::size_t, std::size_t>> ids;
  for (const auto& [w, x] : terms) {
    require(w.value().cols() == x.value().rows() && w.value().rows() == v.rows() &&
                x.value().cols() == 1,
            "affine: W is " + std::to_string(w.value().rows()) + "x" +
                std::to_string(w.value().cols()) + ", x has " + std::to_string(x.value().rows()) +
                " rows, bias has " + std::to_string(v.rows()));
    v.noalias() += w.value() * x.value();
    ids.emplace_back(w.id, x.id);
  }
  const auto ib = bias.id;
  return g.emit(std::move(v), [ib, ids](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
    gr.accumulate(ib, d);
    for (auto [iw, ix] : ids) {
      const auto& W = gr.value({&gr, iw});
      const auto& x = gr.value({&gr, ix});
      gr.accumulate(iw, d * x.transpose());
      gr.accumulate(ix, W.transpose() * d);
    }
  });
}

template <typename Scalar>
Expr<Scalar> matvec(Expr<Scalar> w, Expr<Scalar> x) {
  auto& g = graph_of({w, x});
  require(w.value().cols() == x.value().rows(), "matvec");
  const auto iw = w.id, ix = x.id;
  return g.emit(w.value() * x.value(), [iw, ix](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
    const auto& W = gr.value({&gr, iw});
    const auto& xv = gr.value({&gr, ix});
    gr.accumulate(iw, d * xv.transpose());
    gr.accumulate(ix, W.transpose() * d);
  });
}

template <typename Scalar>
Expr<Scalar> cwise_product(Expr<Scalar> a, Expr<Scalar> b) {
  auto& g = graph_of({a, b});
  require(a.value().rows() == b.value().rows() && a.value().cols() == b.value().cols(),
          "cwise_product");
  const auto ia = a.id, ib = b.id;
  return g.emit(a.value().cwiseProduct(b.value()),
                [ia, ib](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
                  gr.accumulate(ia, d.cwiseProduct(gr.value({&gr, ib})));
                  gr.accumulate(ib, d.cwiseProduct(gr.value({&gr, ia})));
                });
}

template <typename Scalar>
Expr<Scalar> scale(Expr<Scalar> x, Scalar factor) {
  const auto ix = x.id;
  return x.graph->emit(x.value() * factor, [ix, factor](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
    gr.accumulate(ix, d * factor);
  });
}

template <typename Scalar>
Expr<Scalar> tanh(Expr<Scalar> x) {
  const auto ix = x.id;
  Matrix<Scalar> v = x.value().array().tanh().matrix();
  auto* g = x.graph;
  const auto self = g->size();
  return g->emit(std::move(v), [ix, self](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
    const auto& y = gr.value({&gr, self});
    gr.accumulate(ix, (d.array() * (Scalar(1) - y.array().square())).matrix());
  });
}

template <typename Scalar>
Expr<Scalar> logistic(Expr<Scalar> x) {
  const auto ix = x.id;
  Matrix<Scalar> v =
      (Scalar(1) / (Scalar(1) + (-x.value().array()).exp())).matrix();
  auto* g = x.graph;
  const auto self = g->size();
  return g->emit(std::move(v), [ix, self](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
    const auto& y = gr.value({&gr, self});
    gr.accumulate(ix, (d.array() * y.array() * (Scalar(1) - y.array())).matrix());
  });
}

template <typename Scalar>
Expr<Scalar> rectify(Expr<Scalar> x) {
  const auto ix = x.id;
  Matrix<Scalar> v = x.value().cwiseMax(Scalar(0));
  return x.graph->emit(std::move(v), [ix](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
    const auto& in = gr.value({&gr, ix});
    gr.accumulate(ix, (in.array() > Scalar(0)).select(d, Matrix<Scalar>::Zero(d.rows(), d.cols())));
  });
}

template <typename Scalar>
Expr<Scalar> rows(Expr<Scalar> x, Index start, Index count) {
  require(start >= 0 && count >= 0 && start + count <= x.value().rows(), "rows");
  const auto ix = x.id;
  const Index total = x.value().rows(), cols = x.value().cols();
  return x.graph->emit(x.value().middleRows(start, count),
                       [ix, start, count, total, cols](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
                         Matrix<Scalar> full = Matrix<Scalar>::Zero(total, cols);
                         full.middleRows(start, count) = d;
                         gr.accumulate(ix, full);
                       });
}

template <typename Scalar>
Expr<Scalar> squared_norm(Expr<Scalar> x) {
  const auto ix = x.id;
  Matrix<Scalar> v(1, 1);
  v(0, 0) = x.value().squaredNorm();
  return x.graph->emit(std::move(v), [ix](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
    gr.accumulate(ix, gr.value({&gr, ix}) * (Scalar(2) * d(0, 0)));
  });
}

template <typename Scalar>
Vector<Scalar> masked_softmax(const Matrix<Scalar>& scores, const std::vector<bool>& mask) {
  if (scores.cols() != 1) throw Error("softmax expects a column vector");
  const Index n = scores.rows();
  if (!mask.empty() && static_cast<Index>(mask.size()) != n) throw Error("softmax mask size");
  auto allowed = [&](Index i) { return mask.empty() || mask[i]; };
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < n; ++i) {
    if (allowed(i)) best = std::max(best, scores(i, 0));
  }
  if (!std::isfinite(static_cast<double>(best))) throw Error("softmax over an empty support");
  Vector<Scalar> p = Vector<Scalar>::Zero(n);
  Scalar z = 0;
  for (Index i = 0; i < n; ++i) {
    if (allowed(i)) {
      p(i) = std::exp(scores(i, 0) - best);
      z += p(i);
    }
  }
  return p / z;
}

template <typename Scalar>
Expr<Scalar> softmax_cross_entropy(Expr<Scalar> scores, Index gold, const std::vector<bool>& mask) {
  const auto& s = scores.value();
  if (gold < 0 || gold >= s.rows()) throw Error("gold index outside the score vector");
  if (!mask.empty() && !mask[gold]) throw Error("gold class is masked out");
  Vector<Scalar> p = masked_softmax<Scalar>(s, mask);
  Matrix<Scalar> v(1, 1);
  // log-sum-exp form keeps the loss exact when p(gold) underflows.
  Scalar best = s(gold, 0);
  for (Index i = 0; i < s.rows(); ++i) {
    if (mask.empty() || mask[i]) best = std::max(best, s(i, 0));
  }
  Scalar z = 0;
  for (Index i = 0; i < s.rows(); ++i) {
    if (mask.empty() || mask[i]) z += std::exp(s(i, 0) - best);
  }
  v(0, 0) = std::log(z) + best - s(gold, 0);
  const auto is = scores.id;
  return scores.graph->emit(std::move(v), [is, p, gold](Graph<Scalar>& gr, const Matrix<Scalar>& d) {
    Matrix<Scalar> delta = p;
    delta(gold, 0) -= Scalar(1);
    gr.accumulate(is, delta * d(0, 0));
  });
}

#define POLYPARSE_INSTANTIATE_AD(S)                                                             \
  template struct Parameter<S>;                                                                 \
  template class ParameterStore<S>;                                                             \
  template class Graph<S>;                                                                      \
  template Matrix<S> glorot_init<S>(Index, Index, Rng&);                                        \
  template Expr<S> operator+ <S>(Expr<S>, Expr<S>);                                             \
  template Expr<S> operator- <S>(Expr<S>, Expr<S>);                                             \
  template Expr<S> sum<S>(const std::vector<Expr<S>>&);                                         \
  template Expr<S> concat<S>(const std::vector<Expr<S>>&);                                      \
  template Expr<S> affine<S>(Expr<S>, const std::vector<std::pair<Expr<S>, Expr<S>>>&);         \
  template Expr<S> matvec<S>(Expr<S>, Expr<S>);                                                 \
  template Expr<S> cwise_product<S>(Expr<S>, Expr<S>);                                          \
  template Expr<S> scale<S>(Expr<S>, S);                                                        \
  template Expr<S> tanh<S>(Expr<S>);                                                            \
  template Expr<S> logistic<S>(Expr<S>);                                                        \
  template Expr<S> rectify<S>(Expr<S>);                                                         \
  template Expr<S> rows<S>(Expr<S>, Index, Index);                                              \
  template Expr<S> squared_norm<S>(Expr<S>);                                                    \
  template Vector<S> masked_softmax<S>(const Matrix<S>&, const std::vector<bool>&);             \
  template Expr<S> softmax_cross_entropy<S>(Expr<S>, Index, const std::vector<bool>&);

POLYPARSE_INSTANTIATE_AD(float)
POLYPARSE_INSTANTIATE_AD(double)

}  // namespace polyparse::ad
