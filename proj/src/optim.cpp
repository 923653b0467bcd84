#include "alise/optim.hpp"

#include <cmath>

namespace alise {

Adam::Adam(ParamStore& ps, double lr) : ps_(ps), lr_(lr) {
  for (const std::string& name : ps.names()) {
    m_.push_back(Tensor::zeros(ps.value(name).shape()));
    v_.push_back(Tensor::zeros(ps.value(name).shape()));
  }
}

void Adam::set_trainable_prefixes(std::vector<std::string> prefixes) {
  prefixes_ = std::move(prefixes);
}

bool Adam::trainable(const std::string& name) const {
  if (prefixes_.empty()) return true;
  for (const std::string& p : prefixes_)
    if (name.rfind(p, 0) == 0) return true;
  return false;
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto& names = ps_.names();
  for (size_t i = 0; i < names.size(); ++i) {
    if (!trainable(names[i])) continue;
    Tensor& p = ps_.value(names[i]);
    const Tensor& g = ps_.grad(names[i]);
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (int64_t j = 0; j < p.numel(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace alise
