#pragma once

#include <cstddef>
#include <string_view>

#include "mpmi/matrix.hpp"

namespace mpmi {

enum class Method { mpmi, mpm, tsvd, tr, morozov };

std::string_view to_string(Method m) noexcept;
/// Accepts the lower-case names printed by `to_string`; throws InputError otherwise.
Method parse_method(std::string_view name);

/// Name of the quantity stored in `SolveReport::chosen_parameter`.
std::string_view parameter_name(Method m) noexcept;

struct SolveReport {
  Vector solution;
  Method method = Method::mpmi;
  /// h(delta) for MPMI, lambda(h) for MPM, alpha for TR/Morozov, rank for TSVD.
  double chosen_parameter = 0.0;
  std::size_t effective_rank = 0;
  std::size_t numerical_rank = 0;
  /// Spectral condition number of the operator actually inverted.
  double condition_number = 0.0;
  /// |A z - u_delta| with A the exact matrix.
  double residual = 0.0;
  double mu_delta = 0.0;
  bool jump_root = false;
};

}  // namespace mpmi
