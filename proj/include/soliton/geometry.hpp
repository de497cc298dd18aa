// Geometric diagnostics on a metric profile: curvature signs, the Kaehler
// condition, complex-structure derivative coefficients, end asymptotics, and
// the completeness verdict.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "soliton/integrate.hpp"
#include "soliton/profile.hpp"
#include "soliton/report.hpp"

namespace soliton {

// Minima of h_ss, f_s h_s / f and g_s h_s / g over the profile; each must be
// nonnegative up to 1e-10 for a complete-regime run.
std::vector<ReportEntry> ricci_sign_report(const MetricProfile& prof);

// sup |-(d+2)/2 q f - g_s g| / max(1, sup |g_s g|).
double scaled_kahler_residual(const MetricProfile& prof);

// The residual is asserted < 1e-6 only for profiles produced by the reduced
// q = -1 pipeline; otherwise reported.
ReportEntry kahler_residual_report(const MetricProfile& prof, bool assert_kahler);

// The four scalar coefficient functions of the complex-structure derivative;
// they vanish simultaneously exactly when the Kaehler condition holds.
struct NablaJSample {
    std::array<double, 4> c{};
};
NablaJSample nabla_J_coefficients(const SolitonParams& p, const ProfileSample& smp);

std::vector<ReportEntry> nabla_J_report(const MetricProfile& prof, bool assert_kahler);

enum class AsymptoticClass { Paraboloid, CigarParaboloid, Undetermined };
std::string to_string(AsymptoticClass c);

struct Classification {
    AsymptoticClass cls = AsymptoticClass::Undetermined;
    double g_sqrt_variation = 0;  // relative variation of g/sqrt(s), final decade
    double f_sqrt_variation = 0;  // of f/sqrt(s)
    double f_variation = 0;       // of f
    double g_over_sqrt_s = 0;     // fitted limit
};

// g/sqrt(s) must settle to a positive constant (relative variation < 1% over
// the final decade of s); the class is decided by whether f/sqrt(s) or f
// settles.
Classification classify_asymptotics(const MetricProfile& prof);

std::vector<ReportEntry> classifier_report(const Classification& cls, bool expect_definite);

enum class Verdict { ProvenComplete, Complete, ObservedOnly, Incomplete };
std::string to_string(Verdict v);

// Complete: origin convergence, the fiber-ratio margin, and the terminal
// L sqrt(C) identity all hold.  ProvenComplete additionally needs Lambda at or
// above the threshold.  Origin convergence without the certificate is
// ObservedOnly; anything else is Incomplete.
Verdict completeness_verdict(const Trajectory& traj);

ReportEntry completeness_entry(const Trajectory& traj);

}  // namespace soliton
