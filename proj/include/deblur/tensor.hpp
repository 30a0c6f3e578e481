#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "deblur/common.hpp"

namespace deblur {

using Shape = std::vector<int>;

std::size_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

class Tape;

// Dense row-major float64 tensor. Storage is shared; copies alias the same
// buffer. A tensor produced by an op under a live tape remembers its node id
// so backward() can reach it.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double v);
  static Tensor scalar_tensor(double v) { return Tensor({1}, {v}); }

  const Shape& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::size_t size() const;
  bool defined() const { return data_ != nullptr; }

  double* data() { return data_->data(); }
  const double* data() const { return data_->data(); }
  double operator[](std::size_t i) const { return (*data_)[i]; }
  double& operator[](std::size_t i) { return (*data_)[i]; }

  // Value of a one-element tensor.
  double item() const;

  // Detached copy of the same values, off any tape.
  Tensor detached() const;

  // Alias of the same buffer under a new shape, off any tape.
  Tensor view(Shape shape) const;

  bool on_tape() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t node() const { return node_; }

  bool all_finite() const;

 private:
  friend class Tape;
  Shape shape_;
  std::shared_ptr<std::vector<double>> data_;
  Tape* tape_ = nullptr;
  std::size_t node_ = static_cast<std::size_t>(-1);
};

// Trainable leaf: value plus a gradient buffer that persists across tapes and
// accumulates until zero_grad().
struct Parameter {
  std::string name;
  Tensor value;
  std::vector<double> grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Tensor v);
  void zero_grad();
};

using BackwardFn = std::function<void(Tape&, const std::vector<double>&)>;

// Append-only record of ops for reverse-mode differentiation. One tape per
// optimization step; clear() or destruction drops all closures.
class Tape {
 public:
  // Wraps a freshly computed value as the output of an op. `backward` receives
  // the node's accumulated gradient and pushes into parents via add_grad.
  Tensor record(Tensor value, BackwardFn backward);

  // Enters a parameter as a leaf; its gradient lands in p.grad.
  Tensor leaf(Parameter& p);

  // Seeds d(loss)/d(loss)=1 and sweeps the tape in reverse. `loss` must be a
  // one-element tensor recorded on this tape.
  void backward(const Tensor& loss);

  // Accumulates n gradient values into a node (interior buffer or leaf).
  void add_grad(std::size_t node, const double* g, std::size_t n);

  std::size_t num_nodes() const { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    BackwardFn backward;
    std::vector<double> grad;
    std::size_t size = 0;
    std::vector<double>* external = nullptr;
    bool seen = false;
  };
  std::vector<Node> nodes_;
};

// Tape context threaded through model code. Null tape means plain evaluation.
// Leaves are cached so one parameter enters a tape once per step.
struct Ctx {
  Tape* tape = nullptr;
  bool training = false;

  Ctx() = default;
  explicit Ctx(Tape* t, bool train = false) : tape(t), training(train) {}

  Tensor use(Parameter& p);

 private:
  std::vector<std::pair<const Parameter*, Tensor>> cache_;
};

}  // namespace deblur
