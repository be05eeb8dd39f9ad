#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "finetype/tensor.hpp"

namespace finetype {

// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t index = 0;
};

// Parameter name -> accumulated gradient, name-sorted for deterministic walks.
using GradientMap = std::map<std::string, Tensor>;

// Records forward primitives and runs reverse-mode accumulation over them.
// One tape per forward pass, single-threaded. Gradients for a parameter used
// several times accumulate additively, in reverse recording order.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves. input() is a constant; param() registers a named tensor whose
  // gradient backward() reports. A name may be bound at most once per tape.
  Var input(Tensor value);
  Var param(const std::string& name, const Tensor& value);

  Var add(Var a, Var b);
  Var mul(Var a, Var b);                          // elementwise
  Var affine(Var x, double scale, double shift);  // scale*x + shift, elementwise
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var relu(Var x);  // max(0, x); gradient at the kink is 0
  Var matmul(Var a, Var b);
  Var matvec(Var m, Var v);  // [r x c] * [c] -> [r]
  Var vecmat(Var v, Var m);  // [r] * [r x c] -> [c]
  Var concat(std::span<const Var> parts);  // rank-1 operands
  Var concat(Var a, Var b);
  Var concat(Var a, Var b, Var c);
  Var dot(Var a, Var b);
  Var sum(Var x);
  Var pick(Var x, std::size_t i);
  Var gather(Var x, std::vector<std::size_t> indices);
  Var max(Var x);  // ties resolve to the lowest index
  Var row(Var m, std::size_t r);

  const Tensor& value(Var v) const { return nodes_[v.index].value; }
  std::size_t node_count() const { return nodes_.size(); }

  // Reverse pass from a scalar output (shape [1]). Resets all gradients
  // first, so repeated calls over the same recording are bit-identical.
  GradientMap backward(Var scalar_output);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&, const Tensor&)> back;  // empty for leaves
  };

  Var push(Tensor value, std::function<void(Tape&, const Tensor&)> back);
  Tensor& grad(std::uint32_t i) { return nodes_[i].grad; }
  const Tensor& val(std::uint32_t i) const { return nodes_[i].value; }

  std::vector<Node> nodes_;
  std::vector<std::pair<std::string, std::uint32_t>> params_;
};

}  // namespace finetype
