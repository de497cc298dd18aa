// Bundle parameters and conserved-quantity context for the soliton family.
#pragma once

#include <stdexcept>

namespace soliton {

// Geometric input: base dimension d (real, even, >= 2) and Chern ratio q != 0.
// A2 and A3 are the curvature constants of the principal-orbit metric; every
// right-hand side below depends on (d, q) only through them.
struct SolitonParams {
    int d = 2;
    double q = -1.0;
    double A2 = 8.0;  // d(d+2)
    double A3 = 8.0;  // d(d+2)^2 q^2 / 4
};

struct invalid_params : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

SolitonParams make_params(int d, double q);

// Conserved-quantity bookkeeping for one run of the construction.
//   C      scalar-curvature constant (S + h_s^2 = C along the profile)
//   lambda limit of g at the germ end
//   Lambda = C * lambda^2, the scale-invariant family parameter
//   gamma  = (Lambda + A2) / 2, the germ ratio lim (1-Z)/Y^2
struct FirstIntegralContext {
    double C = 0.0;
    double lambda = 1.0;
    double Lambda = 0.0;
    double gamma = 0.0;
};

FirstIntegralContext make_context(const SolitonParams& p, double Lambda, double lambda);

// Completeness threshold: the smallest Lambda for which the fiber-ratio bound
// 2^{2/3} sqrt(3/Lambda) <= sqrt(A2 / (A3 (d+2))) closes, i.e.
// Lambda0 = 3 * 2^{4/3} * A3 (d+2) / A2.
double lambda0_threshold(const SolitonParams& p);

// Upper bound certified for W^2/Y^2 once Lambda >= lambda0_threshold.
inline double w_ratio_bound(const SolitonParams& p) {
    return p.A2 / (p.A3 * (p.d + 2));
}

}  // namespace soliton
