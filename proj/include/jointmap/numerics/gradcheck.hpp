#pragma once

#include <functional>
#include <string>
#include <vector>

#include "jointmap/numerics/param_store.hpp"

namespace jointmap::numerics {

// Evaluates a scalar loss at the store's current parameter values. When
// `with_gradients` is true it must also write analytic gradients into the
// store (e.g. via ParamStore::accumulate).
using LossClosure = std::function<double(ParamStore& store, bool with_gradients)>;

struct ParamGradCheck {
  std::string name;
  double max_relative_error = 0.0;
  double max_abs_analytic = 0.0;
};

struct GradCheckReport {
  std::vector<ParamGradCheck> params;
  double tolerance = 0.0;
  bool passed = false;

  double worst() const;
};

struct GradCheckOptions {
  double tolerance = 1e-4;
  double step = 1e-4;
  // Relative error is |a - f| / max(|a|, |f|, denominator_floor), so
  // gradients far below the floor are compared in absolute terms.
  double denominator_floor = 1e-6;
};

// Compares analytic gradients against central finite differences for every
// entry of every parameter. Throws ProtocolError if two evaluations at the
// same point disagree.
GradCheckReport check_gradients(const LossClosure& loss, ParamStore& store,
                                const GradCheckOptions& options = {});

}  // namespace jointmap::numerics
