// Right-hand sides, the first integral, and the linearized flow at the germ.
#pragma once

#include <array>

#include "soliton/params.hpp"
#include "soliton/state.hpp"

namespace soliton {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec8 = std::array<double, 8>;

struct degenerate_state : std::domain_error {
    using std::domain_error::domain_error;
};

// Core tangent of the t-flow at (X, Y, Z, W); no divisions, defined everywhere.
Vec4 core_tangent(const SolitonParams& p, double X, double Y, double Z, double W);

// Full augmented tangent.  f_t = g Z W / Y needs Y > 0 unless W == 0, in which
// case the limit value 0 is used (the stationary orbit has W == 0 throughout).
Vec8 rhs_nonlin1(const SolitonParams& p, const Vec8& y);

inline Vec8 rhs_nonlin1(const SolitonParams& p, const PhaseState& st) {
    return rhs_nonlin1(p, st.vec());
}

// Germ-end system in (X, Yt, Zt, W) with respect to ttil = -t.
Vec4 rhs_nonlin2(const SolitonParams& p, const Vec4& v);

// Reduced system on the Kaehler branch, tangent in t at (X, Ytil).
std::array<double, 2> rhs_kahler(const SolitonParams& p, double X, double Ytil);

// d X^2 + A2 Y^2 + Z^2 - A3 W^2 - 1 + C L^2; identically zero along exact orbits.
double first_integral_residual(const SolitonParams& p, const FirstIntegralContext& ctx,
                               const PhaseState& st);

// Constant coefficient matrix of the germ-end linearization.
Mat4 linearization(const SolitonParams& p);

// Fundamental matrix of v' = A v: Phi(t, t0) = exp(A (t - t0)) in closed form.
Mat4 fundamental_matrix(const SolitonParams& p, double t, double t0);

// Nonlinear remainder b(v) = rhs_nonlin2(v) - A v.  No constant or linear
// terms: b(0) = 0 and Db(0) = 0.
Vec4 nonlinearity_b(const SolitonParams& p, const Vec4& v);

// Homogeneous pieces of b, quadratic and cubic in v; b = quad + cubic.
void nonlinearity_b_parts(const SolitonParams& p, const Vec4& v, Vec4& quad, Vec4& cubic);

Vec4 mat_apply(const Mat4& m, const Vec4& v);
Mat4 mat_mul(const Mat4& a, const Mat4& b);

}  // namespace soliton
