#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jointmap/numerics/matrix.hpp"

namespace jointmap::numerics {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix first_moment;
  Matrix second_moment;
  // Set once a backward pass has written this parameter's gradient slot.
  bool grad_ready = false;
};

// Gradient slots detached from a store, shaped like its parameters. Worker
// threads accumulate into their own buffer; the owner reduces them.
class GradBuffer {
 public:
  GradBuffer() = default;
  explicit GradBuffer(std::vector<Matrix> slots) : slots_(std::move(slots)) {}

  std::size_t size() const noexcept { return slots_.size(); }
  Matrix& operator[](std::size_t i) { return slots_[i]; }
  const Matrix& operator[](std::size_t i) const { return slots_[i]; }

  void zero();
  GradBuffer& operator+=(const GradBuffer& other);

 private:
  std::vector<Matrix> slots_;
};

// Every trainable tensor of a model, with paired gradient slots and Adam
// moment accumulators.
class ParamStore {
 public:
  // Returns the index of the new parameter. Names must be unique.
  std::size_t add(std::string name, Matrix init);

  std::size_t size() const noexcept { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Like find() but throws LookupError.
  std::size_t index_of(std::string_view name) const;

  std::uint64_t step_count() const noexcept { return step_; }
  void set_step_count(std::uint64_t step) noexcept { step_ = step; }

  // Zeros all gradients and clears the ready flags.
  void zero_grad();
  // Adds scale * buffer into the gradient slots and marks them ready.
  void accumulate(const GradBuffer& buffer, double scale = 1.0);
  GradBuffer make_grad_buffer() const;

  std::size_t parameter_count() const;

  std::vector<Parameter>::const_iterator begin() const { return params_.begin(); }
  std::vector<Parameter>::const_iterator end() const { return params_.end(); }

 private:
  std::vector<Parameter> params_;
  std::uint64_t step_ = 0;
};

// One Adam update over every parameter, then gradients are cleared.
// Throws ConsistencyError if any gradient slot was never populated.
void adam_step(ParamStore& store, double learning_rate, const AdamConfig& config = {});

}  // namespace jointmap::numerics
