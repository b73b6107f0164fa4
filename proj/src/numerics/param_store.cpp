#include "jointmap/numerics/param_store.hpp"

#include <cmath>

#include "jointmap/error.hpp"

namespace jointmap::numerics {

void GradBuffer::zero() {
  for (auto& m : slots_) m.fill(0.0);
}

GradBuffer& GradBuffer::operator+=(const GradBuffer& other) {
  if (other.slots_.size() != slots_.size()) {
    throw ShapeError("gradient buffers hold different parameter counts");
  }
  for (std::size_t i = 0; i < slots_.size(); ++i) slots_[i] += other.slots_[i];
  return *this;
}

std::size_t ParamStore::add(std::string name, Matrix init) {
  if (find(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  if (!init.all_finite()) throw NumericError("parameter '" + name + "' initialized non-finite");
  Parameter p;
  p.name = std::move(name);
  p.grad = Matrix(init.rows(), init.cols());
  p.first_moment = Matrix(init.rows(), init.cols());
  p.second_moment = Matrix(init.rows(), init.cols());
  p.value = std::move(init);
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

std::optional<std::size_t> ParamStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParamStore::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw LookupError("no parameter named '" + std::string(name) + "'");
}

void ParamStore::zero_grad() {
  for (auto& p : params_) {
    p.grad.fill(0.0);
    p.grad_ready = false;
  }
}

void ParamStore::accumulate(const GradBuffer& buffer, double scale) {
  if (buffer.size() != params_.size()) {
    throw ShapeError("gradient buffer has " + std::to_string(buffer.size()) +
                     " slots, store has " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (!buffer[i].same_shape(p.grad)) {
      throw ShapeError("gradient for '" + p.name + "' has shape " + buffer[i].shape_string() +
                       ", expected " + p.grad.shape_string());
    }
    auto dst = p.grad.values();
    const auto src = buffer[i].values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
    p.grad_ready = true;
  }
}

GradBuffer ParamStore::make_grad_buffer() const {
  std::vector<Matrix> slots;
  slots.reserve(params_.size());
  for (const auto& p : params_) slots.emplace_back(p.value.rows(), p.value.cols());
  return GradBuffer(std::move(slots));
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void adam_step(ParamStore& store, double learning_rate, const AdamConfig& config) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!store[i].grad_ready) {
      throw ConsistencyError("parameter '" + store[i].name + "' has no gradient for this step");
    }
  }
  const std::uint64_t t = store.step_count() + 1;
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto& p = store[i];
    auto value = p.value.values();
    const auto grad = p.grad.values();
    auto m = p.first_moment.values();
    auto v = p.second_moment.values();
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k];
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g;
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[k] / bias1;
      const double v_hat = v[k] / bias2;
      value[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
  store.set_step_count(t);
  store.zero_grad();
}

}  // namespace jointmap::numerics
