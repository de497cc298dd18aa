// Small shared numerics: extrapolation, slope fits, monotone interpolation.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace soliton {

// Neville polynomial extrapolation of (x_i, y_i) to x = 0.
double extrapolate_to_zero(std::span<const double> x, std::span<const double> y);

// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

// Least-squares intercept (value at x = 0).
double ls_intercept(std::span<const double> x, std::span<const double> y);

// Derivative of the interpolating cubic through four consecutive samples,
// evaluated at x[i]; stencil is clamped at the ends.  Grid may be nonuniform.
double local_cubic_derivative(std::span<const double> x, std::span<const double> y, std::size_t i);

// Monotonicity-preserving piecewise cubic (Fritsch-Carlson slopes).
class Pchip {
public:
    Pchip() = default;
    Pchip(std::vector<double> x, std::vector<double> y);
    double operator()(double xq) const;

private:
    std::vector<double> x_, y_, m_;
};

}  // namespace soliton
