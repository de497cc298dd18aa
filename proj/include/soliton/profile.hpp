// Conversion of a trajectory into the metric profile (f, g, h_s, h, S) over
// arclength, plus the smooth-closing and cross-consistency checks.
#pragma once

#include <vector>

#include "soliton/integrate.hpp"
#include "soliton/params.hpp"
#include "soliton/report.hpp"

namespace soliton {

struct ProfileSample {
    double s = 0, t = 0;
    double f = 0, g = 0, h_s = 0, h = 0, S = 0;
    double X = 0, Y = 0, Z = 0, W = 0, L = 0;
    double fi_residual = 0;
    double kahler_residual = 0;  // pointwise -(d+2)/2 q f - g_s g
};

// Values measured at the smallest available arclength.
struct ClosingRecord {
    double f0 = 0, fs0 = 0, g0 = 0, gs0 = 0, hs0 = 0;
    double wy2_limit = 0;  // filled by the pipeline from the germ construction
};

struct MetricProfile {
    SolitonParams params;
    FirstIntegralContext ctx;
    std::vector<ProfileSample> samples;  // native trajectory grid, increasing s
    ClosingRecord closing;
};

// Radial derivatives recovered from the phase variables.
inline double radial_f_s(const ProfileSample& smp) {
    return smp.Y > 0 ? smp.Z * smp.W / (smp.Y * smp.Y) : 1.0;
}
inline double radial_g_s(const ProfileSample& smp) {
    return smp.Y > 0 ? smp.X / smp.Y : 0.0;
}

// Second-derivative ratios evaluated algebraically from the flow equations;
// never from finite differences of sampled data.
struct SecondDerivs {
    double fss_over_f = 0;
    double gss_over_g = 0;
    double h_ss = 0;
};
SecondDerivs second_derivs(const SolitonParams& p, const FirstIntegralContext& ctx,
                           const ProfileSample& smp);

// g = e^{lng}, h_s = (1 - dX - Z)/L away from the germ end and its asymptotic
// substitute (Lambda/(2 lambda)) Y where the numerator is a catastrophic
// cancellation; h by cumulative quadrature with h = 0 at the zero section.
MetricProfile recover_profile(const Trajectory& traj);

// Monotone-cubic resample onto an equidistant s grid; derived columns
// (S, fi_residual, kahler_residual) are recomputed from the interpolated
// physical columns so stored rows satisfy the same pointwise identities.
std::vector<ProfileSample> resample_uniform(const MetricProfile& prof, int count = 2048);

// Limits at the zero section: W/Y^2 -> 1, g_s/f -> A2/(2 d lambda),
// h_s/g_s -> d C lambda / A2, plus the measured h_s/f limit against both
// candidate closed forms.
std::vector<ReportEntry> closing_report(const MetricProfile& prof, double limit_WY2);

// Cross identities: f/g vs W/Y, g_s two ways, h_s positivity, S range.
std::vector<ReportEntry> profile_consistency_report(const MetricProfile& prof);

}  // namespace soliton
