// Forward flow from the germ handoff: adaptive integration, event detection,
// invariant statistics, and the trajectory-level verification checks.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "soliton/params.hpp"
#include "soliton/report.hpp"
#include "soliton/state.hpp"
#include "soliton/systems.hpp"

namespace soliton {

struct IntegrationOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_t = 1e15;         // horizon; reaching it without an event is StepLimit
    double origin_eps = 1e-7;    // sup-norm threshold on (X, Y, Z, W)
    double origin_dL = 1e-10;    // companion threshold on dL/dt
    double blowup_norm = 1e6;
    double hmin = 1e-14;
    std::size_t max_steps = 2000000;
};

enum class Outcome { ConvergedToOrigin, BlowUp, StepLimit };

std::string to_string(Outcome o);

// Time-ordered samples of the augmented flow with end-point derivatives at
// each sample (cubic Hermite dense output between neighbours).  Statistics are
// maxima/minima over the samples.
struct Trajectory {
    SolitonParams params;
    FirstIntegralContext ctx;
    std::vector<PhaseState> samples;
    std::vector<Vec8> derivs;
    Outcome outcome = Outcome::StepLimit;
    std::string diagnostic;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    double max_first_integral_drift = 0.0;
    double max_dXplusZ = 0.0;
    double min_WY2_margin = 0.0;  // min of A2/(A3 (d+2)) - W^2/Y^2
};

struct corrupt_trajectory : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Integrates the augmented flow from start until origin convergence, blow-up,
// or exhaustion.  Records every accepted step, start state included.
Trajectory integrate_forward(const SolitonParams& p, const PhaseState& start,
                             const FirstIntegralContext& ctx, const IntegrationOptions& opts = {});

// Prepends germ samples (with derivatives evaluated from the flow) and
// recomputes the trajectory statistics over the combined sample set.  The
// first forward sample duplicates the germ end and is dropped.
Trajectory with_germ_prefix(std::vector<PhaseState> germ, Trajectory forward);

void recompute_stats(Trajectory& traj);

double final_L_times_sqrtC(const Trajectory& traj);

// Once X goes negative it must stay negative, and likewise Z - X.  measured is
// the sample index of the first violating return (-1 when none).
ReportEntry check_sign_invariance(const Trajectory& traj);

// max over samples of dX + Z against 1 + 1e-9.
ReportEntry check_dXplusZ(const Trajectory& traj);

// W^2/Y^2 against A2/(A3 (d+2)); asserted for Lambda >= lambda0, otherwise
// reported only.
ReportEntry check_W_bound(const Trajectory& traj, double lambda0);

// L must never decrease, and must strictly increase wherever the flow predicts
// an increment resolvable in double precision.
ReportEntry check_L_monotone(const Trajectory& traj);

// Relative drift of the monitored identity L = exp(lng) * Y.
ReportEntry check_L_identity(const Trajectory& traj, double tol = 1e-7);

// Rescaled-by-Y diagnostics in the slow time tbar = int Y dt: the tanh funnel
// for (Z-1)/Y, the sup bound on W/Y, and the pointwise facts of the
// completeness argument.  Requires germ samples prefixed so the tbar head is
// resolved.  Entries are asserted only for Lambda above the completeness
// threshold, reported otherwise.
std::vector<ReportEntry> bar_diagnostics(const Trajectory& traj);

// Fitted exponential decay rates at the germ end on t in [fit_lo, fit_hi]:
// ln Y slope -> 1; ln X, ln W, ln(1-Z), ln L^2 slopes -> 2.
std::vector<ReportEntry> germ_rate_report(const Trajectory& traj, double fit_lo = -12.0,
                                          double fit_hi = -6.0);

}  // namespace soliton
