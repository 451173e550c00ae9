#pragma once

#include <string>

#include "twf/types.hpp"

namespace twf {

/// Scalar threshold operators. Both satisfy the contract
///   T_tau(x) = 0 for |x| <= tau,  |T_tau(x) - x| <= tau for all x,
/// with the boundary |x| = tau mapped to zero.
enum class ThresholdKind { soft, hard };

double apply_threshold(ThresholdKind kind, double x, double tau);

/// Coordinatewise application. Output support is contained in {i : |v_i| > tau}.
Vector apply_threshold(ThresholdKind kind, const Vector& v, double tau);

std::string threshold_kind_name(ThresholdKind kind);
ThresholdKind threshold_kind_from_name(const std::string& name);

}  // namespace twf
