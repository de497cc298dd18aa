// Reduced construction of the q = -1 Kaehler solitons: 2D system seeded on
// the unstable manifold of the germ fixed point, integrated backward to the
// limit and forward through the lift to the full phase flow.
#pragma once

#include <stdexcept>
#include <vector>

#include "soliton/integrate.hpp"
#include "soliton/params.hpp"
#include "soliton/profile.hpp"
#include "soliton/state.hpp"

namespace soliton {

struct accuracy_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct comparison_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// First-order unstable-manifold point (eps, 2/(d+2) + slope*eps) with
// slope = -(C0 lambda0^2 + A2)/(d+2)^2.  The germ fixed point (0, 2/(d+2))
// has linearization 2*Identity, so the straight-line seed is off the orbit
// only at O(eps^2).  Requires q = -1 and eps <= 1e-4.
KahlerState unstable_seed(const SolitonParams& p, double C0, double lambda0, double eps);

// Prescribed tangential slope of the seed ray.
double unstable_slope(const SolitonParams& p, double C0, double lambda0);

// C g^2 X + A2 X + (d+2)^2 Ytil - 2(d+2); zero along exact reduced orbits.
double reduced_fi_residual(const SolitonParams& p, double C, double g, double X, double Ytil);

struct ReducedRun {
    SolitonParams params;
    FirstIntegralContext ctx;
    KahlerState seed;
    std::vector<KahlerState> reduced;   // increasing t, backward tail first
    double measured_slope = 0;          // extrapolated lim (Ytil - 2/(d+2))/X
    double backward_rate = 0;           // fitted approach rate to the fixed point
    double max_reduced_fi_drift = 0;
    double limit_WY2 = 0;               // closing ratio at the backward end
    double IX = 0;                      // int X dt over the whole germ side
    Trajectory trajectory;              // lifted samples with derivatives and stats
};

// Backward flow to within 1e-10 of the fixed point (measuring the manifold
// slope and approach rate), then forward with the quadratures (lng, s, f, L)
// until origin convergence.  The reduced first integral is monitored at every
// sample; drift above 1e-6 throws accuracy_error.
ReducedRun integrate_reduced(const SolitonParams& p, const KahlerState& seed,
                             const FirstIntegralContext& ctx,
                             const IntegrationOptions& opts = {});

// Pointwise lift X = X, Y = sqrt(X Ytil), Z = (d+2) Ytil - 1, W = 2X/(d+2).
// Quadrature fields of the output are zero; callers fill them.
PhaseState lift_to_xyzw(const SolitonParams& p, const KahlerState& st);

// Sup-relative deviations between two profiles over their common s range.
struct DeviationRecord {
    double f = 0, g = 0, h_s = 0;
    double s_lo = 0, s_hi = 0;  // compared range
    double max() const { return std::max(f, std::max(g, h_s)); }
};

DeviationRecord compare_profiles(const MetricProfile& a, const MetricProfile& b);

}  // namespace soliton
