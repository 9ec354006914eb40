#pragma once

#include <functional>
#include <span>
#include <vector>

namespace infdds {

/// Central-difference gradient estimate, (f(x+h e_i) - f(x-h e_i)) / 2h per
/// coordinate. Test oracle for hand-derived gradients; throws if f returns a
/// non-finite value at any probe point.
std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double h);

}  // namespace infdds
