#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "finetype/tape.hpp"
#include "finetype/tensor.hpp"

namespace finetype {

// Bias-corrected Adam. One step() call advances the shared step counter by
// exactly 1; parameters absent from the gradient map (frozen tensors) are
// left untouched.
class AdamState {
 public:
  AdamState() = default;
  AdamState(double beta1, double beta2, double eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<std::pair<std::string, Tensor*>>& params, const GradientMap& grads,
            double lr);

  std::size_t steps_taken() const { return t_; }

 private:
  struct Moments {
    Tensor m, v;
  };
  std::map<std::string, Moments> moments_;
  std::size_t t_ = 0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
};

}  // namespace finetype
