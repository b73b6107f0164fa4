#include "jointmap/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "jointmap/error.hpp"

namespace jointmap::numerics {

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& p : params) w = std::max(w, p.max_relative_error);
  return w;
}

GradCheckReport check_gradients(const LossClosure& loss, ParamStore& store,
                                const GradCheckOptions& options) {
  store.zero_grad();
  const double base = loss(store, true);
  std::vector<Matrix> analytic;
  analytic.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) analytic.push_back(store[i].grad);
  store.zero_grad();

  const double again = loss(store, false);
  if (again != base) {
    throw ProtocolError("loss closure is not deterministic: " + std::to_string(base) + " vs " +
                        std::to_string(again));
  }

  GradCheckReport report;
  report.tolerance = options.tolerance;
  for (std::size_t i = 0; i < store.size(); ++i) {
    ParamGradCheck entry;
    entry.name = store[i].name;
    auto values = store[i].value.values();
    const auto a = analytic[i].values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double saved = values[k];
      values[k] = saved + options.step;
      const double plus = loss(store, false);
      values[k] = saved - options.step;
      const double minus = loss(store, false);
      values[k] = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double denom =
          std::max({std::abs(a[k]), std::abs(numeric), options.denominator_floor});
      entry.max_relative_error =
          std::max(entry.max_relative_error, std::abs(a[k] - numeric) / denom);
      entry.max_abs_analytic = std::max(entry.max_abs_analytic, std::abs(a[k]));
    }
    report.params.push_back(std::move(entry));
  }
  report.passed = std::all_of(report.params.begin(), report.params.end(), [&](const auto& p) {
    return p.max_relative_error <= options.tolerance;
  });
  return report;
}

}  // namespace jointmap::numerics
