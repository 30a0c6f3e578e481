#include "deblur/tensor.hpp"

#include <cmath>
#include <sstream>

namespace deblur {

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) {
    if (d < 0) throw ValueError("negative dimension in shape " + shape_str(s));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(shape_numel(shape_), 0.0)) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(std::move(shape)) {
  if (values.size() != shape_numel(shape_))
    throw ValueError("value count " + std::to_string(values.size()) +
                     " does not match shape " + shape_str(shape_));
  data_ = std::make_shared<std::vector<double>>(std::move(values));
}

Tensor Tensor::full(Shape shape, double v) {
  Tensor t(std::move(shape));
  for (auto& x : *t.data_) x = v;
  return t;
}

std::size_t Tensor::size() const { return data_ ? data_->size() : 0; }

double Tensor::item() const {
  if (size() != 1) throw ValueError("item() on tensor of shape " + shape_str(shape_));
  return (*data_)[0];
}

Tensor Tensor::detached() const {
  Tensor t;
  t.shape_ = shape_;
  t.data_ = std::make_shared<std::vector<double>>(*data_);
  return t;
}

Tensor Tensor::view(Shape shape) const {
  if (shape_numel(shape) != size())
    throw ValueError("view: cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

bool Tensor::all_finite() const {
  for (double v : *data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Parameter::Parameter(std::string n, Tensor v)
    : name(std::move(n)), value(std::move(v)), grad(value.size(), 0.0) {}

void Parameter::zero_grad() {
  for (auto& g : grad) g = 0.0;
}

Tensor Tape::record(Tensor value, BackwardFn backward) {
  Node node;
  node.backward = std::move(backward);
  node.size = value.size();
  nodes_.push_back(std::move(node));
  value.tape_ = this;
  value.node_ = nodes_.size() - 1;
  return value;
}

Tensor Tape::leaf(Parameter& p) {
  if (p.grad.size() != p.value.size()) p.grad.assign(p.value.size(), 0.0);
  Node node;
  node.size = p.value.size();
  node.external = &p.grad;
  nodes_.push_back(std::move(node));
  Tensor t = p.value;
  t.tape_ = this;
  t.node_ = nodes_.size() - 1;
  return t;
}

void Tape::add_grad(std::size_t node, const double* g, std::size_t n) {
  Node& nd = nodes_[node];
  if (n != nd.size) throw ValueError("gradient size mismatch on tape node");
  if (nd.external) {
    double* dst = nd.external->data();
    for (std::size_t i = 0; i < n; ++i) dst[i] += g[i];
    return;
  }
  if (nd.grad.empty()) nd.grad.assign(nd.size, 0.0);
  for (std::size_t i = 0; i < n; ++i) nd.grad[i] += g[i];
  nd.seen = true;
}

void Tape::backward(const Tensor& loss) {
  if (loss.tape_ != this) throw ValueError("backward: loss not recorded on this tape");
  if (loss.size() != 1) throw ValueError("backward: loss must be a scalar");
  for (auto& nd : nodes_) {
    nd.grad.clear();
    nd.seen = false;
  }
  double one = 1.0;
  add_grad(loss.node_, &one, 1);
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& nd = nodes_[i];
    if (nd.seen && nd.backward) nd.backward(*this, nd.grad);
  }
}

void Tape::clear() { nodes_.clear(); }

Tensor Ctx::use(Parameter& p) {
  if (!tape) return p.value;
  for (auto& [ptr, t] : cache_)
    if (ptr == &p) return t;
  Tensor t = tape->leaf(p);
  cache_.emplace_back(&p, t);
  return t;
}

}  // namespace deblur
