#include "finetype/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace finetype {

void AdamState::step(const std::vector<std::pair<std::string, Tensor*>>& params,
                     const GradientMap& grads, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const auto& [name, param] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const Tensor& g = git->second;
    if (!g.same_shape(*param)) {
      throw std::invalid_argument("adam: gradient shape " + g.shape_str() + " for '" + name +
                                  "' does not match parameter " + param->shape_str());
    }
    auto [it, fresh] = moments_.try_emplace(name);
    if (fresh) {
      it->second.m = Tensor::zeros(param->shape);
      it->second.v = Tensor::zeros(param->shape);
    }
    Tensor& m = it->second.m;
    Tensor& v = it->second.v;
    for (std::size_t i = 0; i < g.size(); ++i) {
      m.data[i] = beta1_ * m.data[i] + (1.0 - beta1_) * g.data[i];
      v.data[i] = beta2_ * v.data[i] + (1.0 - beta2_) * g.data[i] * g.data[i];
      const double m_hat = m.data[i] / bc1;
      const double v_hat = v.data[i] / bc2;
      param->data[i] -= lr * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

}  // namespace finetype
