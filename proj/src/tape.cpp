#include "finetype/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace finetype {

namespace {

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                              " vs " + b.shape_str());
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a) {
  throw std::invalid_argument(std::string(op) + ": unsupported shape " + a.shape_str());
}

}  // namespace

Var Tape::push(Tensor value, std::function<void(Tape&, const Tensor&)> back) {
  nodes_.push_back(Node{std::move(value), Tensor{}, std::move(back)});
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::input(Tensor value) { return push(std::move(value), nullptr); }

Var Tape::param(const std::string& name, const Tensor& value) {
  for (const auto& [existing, idx] : params_) {
    if (existing == name) {
      throw std::invalid_argument("parameter '" + name + "' bound twice on one tape");
    }
  }
  Var v = push(value, nullptr);
  params_.emplace_back(name, v.index);
  return v;
}

Var Tape::add(Var a, Var b) {
  const Tensor& A = val(a.index);
  const Tensor& B = val(b.index);
  if (!A.same_shape(B)) shape_fail("add", A, B);
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += B.data[i];
  return push(std::move(out), [ai = a.index, bi = b.index](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad(ai);
    Tensor& gb = t.grad(bi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data[i] += g.data[i];
      gb.data[i] += g.data[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& A = val(a.index);
  const Tensor& B = val(b.index);
  if (!A.same_shape(B)) shape_fail("mul", A, B);
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= B.data[i];
  return push(std::move(out), [ai = a.index, bi = b.index](Tape& t, const Tensor& g) {
    const Tensor& A2 = t.val(ai);
    const Tensor& B2 = t.val(bi);
    Tensor& ga = t.grad(ai);
    Tensor& gb = t.grad(bi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data[i] += g.data[i] * B2.data[i];
      gb.data[i] += g.data[i] * A2.data[i];
    }
  });
}

Var Tape::affine(Var x, double scale, double shift) {
  Tensor out = val(x.index);
  for (double& v : out.data) v = scale * v + shift;
  return push(std::move(out), [xi = x.index, scale](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad(xi);
    for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += scale * g.data[i];
  });
}

Var Tape::sigmoid(Var x) {
  Tensor out = val(x.index);
  for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  Var r = push(std::move(out), nullptr);
  nodes_[r.index].back = [xi = x.index, ri = r.index](Tape& t, const Tensor& g) {
    const Tensor& y = t.val(ri);
    Tensor& gx = t.grad(xi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      gx.data[i] += g.data[i] * y.data[i] * (1.0 - y.data[i]);
    }
  };
  return r;
}

Var Tape::tanh(Var x) {
  Tensor out = val(x.index);
  for (double& v : out.data) v = std::tanh(v);
  Var r = push(std::move(out), nullptr);
  nodes_[r.index].back = [xi = x.index, ri = r.index](Tape& t, const Tensor& g) {
    const Tensor& y = t.val(ri);
    Tensor& gx = t.grad(xi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      gx.data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
    }
  };
  return r;
}

Var Tape::relu(Var x) {
  Tensor out = val(x.index);
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  Var r = push(std::move(out), nullptr);
  nodes_[r.index].back = [xi = x.index, ri = r.index](Tape& t, const Tensor& g) {
    const Tensor& y = t.val(ri);
    Tensor& gx = t.grad(xi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (y.data[i] > 0.0) gx.data[i] += g.data[i];
    }
  };
  return r;
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = val(a.index);
  const Tensor& B = val(b.index);
  if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows()) shape_fail("matmul", A, B);
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor out = Tensor::zeros({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A.at(i, p);
      for (std::size_t j = 0; j < n; ++j) out.at(i, j) += aip * B.at(p, j);
    }
  }
  return push(std::move(out), [ai = a.index, bi = b.index](Tape& t, const Tensor& g) {
    const Tensor& A2 = t.val(ai);
    const Tensor& B2 = t.val(bi);
    Tensor& ga = t.grad(ai);
    Tensor& gb = t.grad(bi);
    const std::size_t m = A2.rows(), k = A2.cols(), n = B2.cols();
    // dA += g * B^T ; dB += A^T * g
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += g.at(i, j) * B2.at(p, j);
        ga.at(i, p) += s;
      }
    }
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += A2.at(i, p) * g.at(i, j);
        gb.at(p, j) += s;
      }
    }
  });
}

Var Tape::matvec(Var m, Var v) {
  const Tensor& M = val(m.index);
  const Tensor& x = val(v.index);
  if (M.rank() != 2 || x.rank() != 1 || M.cols() != x.size()) shape_fail("matvec", M, x);
  const std::size_t r = M.rows(), c = M.cols();
  Tensor out = Tensor::zeros({r});
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += M.at(i, j) * x.data[j];
    out.data[i] = s;
  }
  return push(std::move(out), [mi = m.index, vi = v.index](Tape& t, const Tensor& g) {
    const Tensor& M2 = t.val(mi);
    const Tensor& x2 = t.val(vi);
    Tensor& gm = t.grad(mi);
    Tensor& gv = t.grad(vi);
    const std::size_t r = M2.rows(), c = M2.cols();
    for (std::size_t i = 0; i < r; ++i) {
      const double gi = g.data[i];
      for (std::size_t j = 0; j < c; ++j) {
        gm.at(i, j) += gi * x2.data[j];
        gv.data[j] += M2.at(i, j) * gi;
      }
    }
  });
}

Var Tape::vecmat(Var v, Var m) {
  const Tensor& x = val(v.index);
  const Tensor& M = val(m.index);
  if (x.rank() != 1 || M.rank() != 2 || x.size() != M.rows()) shape_fail("vecmat", x, M);
  const std::size_t r = M.rows(), c = M.cols();
  Tensor out = Tensor::zeros({c});
  for (std::size_t i = 0; i < r; ++i) {
    const double xi = x.data[i];
    for (std::size_t j = 0; j < c; ++j) out.data[j] += xi * M.at(i, j);
  }
  return push(std::move(out), [vi = v.index, mi = m.index](Tape& t, const Tensor& g) {
    const Tensor& x2 = t.val(vi);
    const Tensor& M2 = t.val(mi);
    Tensor& gv = t.grad(vi);
    Tensor& gm = t.grad(mi);
    const std::size_t r = M2.rows(), c = M2.cols();
    for (std::size_t i = 0; i < r; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        s += M2.at(i, j) * g.data[j];
        gm.at(i, j) += x2.data[i] * g.data[j];
      }
      gv.data[i] += s;
    }
  });
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no operands");
  std::size_t total = 0;
  for (Var p : parts) {
    const Tensor& t = val(p.index);
    if (t.rank() != 1) shape_fail("concat", t);
    total += t.size();
  }
  Tensor out = Tensor::zeros({total});
  std::size_t off = 0;
  std::vector<std::uint32_t> idx;
  idx.reserve(parts.size());
  for (Var p : parts) {
    const Tensor& t = val(p.index);
    std::copy(t.data.begin(), t.data.end(), out.data.begin() + off);
    off += t.size();
    idx.push_back(p.index);
  }
  return push(std::move(out), [idx = std::move(idx)](Tape& t, const Tensor& g) {
    std::size_t off = 0;
    for (std::uint32_t i : idx) {
      Tensor& gi = t.grad(i);
      for (std::size_t j = 0; j < gi.size(); ++j) gi.data[j] += g.data[off + j];
      off += gi.size();
    }
  });
}

Var Tape::concat(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat(std::span<const Var>(parts));
}

Var Tape::concat(Var a, Var b, Var c) {
  const Var parts[] = {a, b, c};
  return concat(std::span<const Var>(parts));
}

Var Tape::dot(Var a, Var b) {
  const Tensor& A = val(a.index);
  const Tensor& B = val(b.index);
  if (A.rank() != 1 || B.rank() != 1 || A.size() != B.size()) shape_fail("dot", A, B);
  double s = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) s += A.data[i] * B.data[i];
  return push(Tensor::scalar(s), [ai = a.index, bi = b.index](Tape& t, const Tensor& g) {
    const Tensor& A2 = t.val(ai);
    const Tensor& B2 = t.val(bi);
    Tensor& ga = t.grad(ai);
    Tensor& gb = t.grad(bi);
    const double g0 = g.data[0];
    for (std::size_t i = 0; i < A2.size(); ++i) {
      ga.data[i] += g0 * B2.data[i];
      gb.data[i] += g0 * A2.data[i];
    }
  });
}

Var Tape::sum(Var x) {
  const Tensor& X = val(x.index);
  double s = 0.0;
  for (double v : X.data) s += v;
  return push(Tensor::scalar(s), [xi = x.index](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad(xi);
    const double g0 = g.data[0];
    for (double& v : gx.data) v += g0;
  });
}

Var Tape::pick(Var x, std::size_t i) {
  const Tensor& X = val(x.index);
  if (X.rank() != 1 || i >= X.size()) shape_fail("pick", X);
  return push(Tensor::scalar(X.data[i]), [xi = x.index, i](Tape& t, const Tensor& g) {
    t.grad(xi).data[i] += g.data[0];
  });
}

Var Tape::gather(Var x, std::vector<std::size_t> indices) {
  const Tensor& X = val(x.index);
  if (X.rank() != 1) shape_fail("gather", X);
  if (indices.empty()) throw std::invalid_argument("gather: empty index list");
  Tensor out = Tensor::zeros({indices.size()});
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= X.size()) throw std::invalid_argument("gather: index out of range");
    out.data[k] = X.data[indices[k]];
  }
  return push(std::move(out), [xi = x.index, idx = std::move(indices)](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad(xi);
    for (std::size_t k = 0; k < idx.size(); ++k) gx.data[idx[k]] += g.data[k];
  });
}

Var Tape::max(Var x) {
  const Tensor& X = val(x.index);
  if (X.rank() != 1) shape_fail("max", X);
  std::size_t win = 0;
  for (std::size_t i = 1; i < X.size(); ++i) {
    if (X.data[i] > X.data[win]) win = i;
  }
  return push(Tensor::scalar(X.data[win]), [xi = x.index, win](Tape& t, const Tensor& g) {
    t.grad(xi).data[win] += g.data[0];
  });
}

Var Tape::row(Var m, std::size_t r) {
  const Tensor& M = val(m.index);
  if (M.rank() != 2 || r >= M.rows()) shape_fail("row", M);
  const std::size_t c = M.cols();
  Tensor out = Tensor::zeros({c});
  for (std::size_t j = 0; j < c; ++j) out.data[j] = M.at(r, j);
  return push(std::move(out), [mi = m.index, r](Tape& t, const Tensor& g) {
    Tensor& gm = t.grad(mi);
    const std::size_t c = gm.cols();
    for (std::size_t j = 0; j < c; ++j) gm.at(r, j) += g.data[j];
  });
}

GradientMap Tape::backward(Var scalar_output) {
  const std::uint32_t out = scalar_output.index;
  if (out >= nodes_.size()) throw std::invalid_argument("backward: unknown output");
  if (nodes_[out].value.size() != 1) {
    throw std::invalid_argument("backward: output must be scalar, got " +
                                nodes_[out].value.shape_str());
  }
  for (std::uint32_t i = 0; i <= out; ++i) {
    nodes_[i].grad = Tensor::zeros(nodes_[i].value.shape);
  }
  nodes_[out].grad.data[0] = 1.0;
  for (std::uint32_t i = out + 1; i-- > 0;) {
    if (nodes_[i].back) nodes_[i].back(*this, nodes_[i].grad);
  }
  GradientMap grads;
  for (const auto& [name, idx] : params_) {
    if (idx <= out) grads[name] = nodes_[idx].grad;
  }
  return grads;
}

}  // namespace finetype
