#include "soliton/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace soliton {

std::vector<ReportEntry> ricci_sign_report(const MetricProfile& prof) {
    double min_hss = std::numeric_limits<double>::infinity();
    double min_fhf = std::numeric_limits<double>::infinity();
    double min_ghg = std::numeric_limits<double>::infinity();
    for (const auto& smp : prof.samples) {
        const auto d2 = second_derivs(prof.params, prof.ctx, smp);
        min_hss = std::min(min_hss, d2.h_ss);
        min_fhf = std::min(min_fhf, radial_f_s(smp) * smp.h_s / smp.f);
        min_ghg = std::min(min_ghg, radial_g_s(smp) * smp.h_s / smp.g);
    }
    const double tol = 1e-10;
    return {
        make_entry("ricci-hss-min", min_hss >= -tol, min_hss, tol,
                   "radial Hessian component h_ss stays nonnegative"),
        make_entry("ricci-fhf-min", min_fhf >= -tol, min_fhf, tol,
                   "fiber Hessian component f_s h_s / f stays nonnegative"),
        make_entry("ricci-ghg-min", min_ghg >= -tol, min_ghg, tol,
                   "base Hessian component g_s h_s / g stays nonnegative"),
    };
}

double scaled_kahler_residual(const MetricProfile& prof) {
    double sup_res = 0.0, sup_scale = 0.0;
    for (const auto& smp : prof.samples) {
        sup_res = std::max(sup_res, std::abs(smp.kahler_residual));
        sup_scale = std::max(sup_scale, std::abs(radial_g_s(smp) * smp.g));
    }
    return sup_res / std::max(1.0, sup_scale);
}

ReportEntry kahler_residual_report(const MetricProfile& prof, bool assert_kahler) {
    const double res = scaled_kahler_residual(prof);
    ReportEntry e = make_entry("kahler-residual", res < 1e-6, res, 1e-6,
                               "scaled defect of the condition -(d+2)/2 q f = g_s g");
    if (!assert_kahler) e.status = CheckStatus::ReportOnly;
    return e;
}

NablaJSample nabla_J_coefficients(const SolitonParams& p, const ProfileSample& smp) {
    if (smp.f <= 0.0) throw std::domain_error("nonpositive f in nabla-J evaluation");
    const double gs = radial_g_s(smp), f = smp.f, g = smp.g;
    const double hq = (p.d + 2) / 2.0 * p.q;
    NablaJSample out;
    out.c[0] = -hq * f / (g * g) - gs / g;
    out.c[1] = f * gs / g + hq * f * f / (g * g);
    out.c[2] = -gs * g - hq * f;
    out.c[3] = -gs * g / f - hq;
    return out;
}

std::vector<ReportEntry> nabla_J_report(const MetricProfile& prof, bool assert_kahler) {
    std::array<double, 4> sup{}, scale{};
    double prop = 0.0, prop_scale = 0.0;
    for (const auto& smp : prof.samples) {
        const auto cs = nabla_J_coefficients(prof.params, smp);
        const double gs = radial_g_s(smp);
        const std::array<double, 4> natural = {
            std::abs(gs / smp.g), std::abs(smp.f * gs / smp.g), std::abs(gs * smp.g),
            std::abs(gs * smp.g / smp.f)};
        for (int i = 0; i < 4; ++i) {
            sup[i] = std::max(sup[i], std::abs(cs.c[i]));
            scale[i] = std::max(scale[i], natural[i]);
        }
        // c3 = g^2 c1 is an algebraic identity between the coefficients.
        prop = std::max(prop, std::abs(cs.c[2] - smp.g * smp.g * cs.c[0]));
        prop_scale = std::max(prop_scale, std::abs(cs.c[2]));
    }
    std::vector<ReportEntry> out;
    const char* names[4] = {"nablaJ-c1", "nablaJ-c2", "nablaJ-c3", "nablaJ-c4"};
    for (int i = 0; i < 4; ++i) {
        const double v = sup[i] / std::max(1.0, scale[i]);
        ReportEntry e = make_entry(names[i], v < 1e-6, v, 1e-6,
                                   "scaled sup of a complex-structure derivative coefficient");
        if (!assert_kahler) e.status = CheckStatus::ReportOnly;
        out.push_back(e);
    }
    const double prop_rel = prop / std::max(1.0, prop_scale);
    out.push_back(make_entry("nablaJ-proportionality", prop_rel <= 1e-10, prop_rel, 1e-10,
                             "coefficient identity c3 = g^2 c1 at every sample"));
    return out;
}

std::string to_string(AsymptoticClass c) {
    switch (c) {
        case AsymptoticClass::Paraboloid: return "Paraboloid";
        case AsymptoticClass::CigarParaboloid: return "CigarParaboloid";
        default: return "Undetermined";
    }
}

namespace {

// Relative variation (max - min) / |mean| over the final decade of s.
double final_decade_variation(const MetricProfile& prof, double (*value)(const ProfileSample&),
                              double* mean_out = nullptr) {
    const double s_max = prof.samples.back().s;
    const double s_lo = s_max / 10.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& smp : prof.samples) {
        if (smp.s < s_lo) continue;
        const double v = value(smp);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
        ++n;
    }
    if (n < 8) return std::numeric_limits<double>::infinity();
    const double mean = sum / n;
    if (mean_out) *mean_out = mean;
    if (mean == 0.0) return std::numeric_limits<double>::infinity();
    return (hi - lo) / std::abs(mean);
}

}  // namespace

Classification classify_asymptotics(const MetricProfile& prof) {
    Classification out;
    double g_mean = 0.0;
    out.g_sqrt_variation = final_decade_variation(
        prof, [](const ProfileSample& s) { return s.g / std::sqrt(s.s); }, &g_mean);
    out.f_sqrt_variation = final_decade_variation(
        prof, [](const ProfileSample& s) { return s.f / std::sqrt(s.s); });
    out.f_variation =
        final_decade_variation(prof, [](const ProfileSample& s) { return s.f; });
    out.g_over_sqrt_s = g_mean;

    if (!(out.g_sqrt_variation < 0.01) || !(g_mean > 0.0)) {
        out.cls = AsymptoticClass::Undetermined;
    } else if (out.f_sqrt_variation < 0.01) {
        out.cls = AsymptoticClass::Paraboloid;
    } else if (out.f_variation < 0.01) {
        out.cls = AsymptoticClass::CigarParaboloid;
    } else {
        out.cls = AsymptoticClass::Undetermined;
    }
    return out;
}

std::vector<ReportEntry> classifier_report(const Classification& cls, bool expect_definite) {
    std::vector<ReportEntry> out;
    out.push_back(make_entry("asymptotic-g-sqrt-s", cls.g_sqrt_variation < 0.01,
                             cls.g_sqrt_variation, 0.01,
                             "g/sqrt(s) settles to a positive constant over the final decade"));
    out.push_back(make_report_only("asymptotic-g-limit", cls.g_over_sqrt_s,
                                   "fitted limit of g/sqrt(s)"));
    ReportEntry cl = make_entry(
        "asymptotic-class-" + to_string(cls.cls), cls.cls != AsymptoticClass::Undetermined,
        cls.cls == AsymptoticClass::Paraboloid ? cls.f_sqrt_variation : cls.f_variation, 0.01,
        "end behaviour of f: ~sqrt(s) (paraboloid) or ~const (cigar-paraboloid)");
    if (!expect_definite && cl.status == CheckStatus::Fail) cl.status = CheckStatus::ReportOnly;
    out.push_back(cl);
    return out;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::ProvenComplete: return "ProvenComplete";
        case Verdict::Complete: return "Complete";
        case Verdict::ObservedOnly: return "ObservedOnly";
        default: return "Incomplete";
    }
}

Verdict completeness_verdict(const Trajectory& traj) {
    if (traj.outcome != Outcome::ConvergedToOrigin) return Verdict::Incomplete;
    const bool margin_ok = traj.min_WY2_margin >= -1e-9;
    const bool L_ok = std::abs(final_L_times_sqrtC(traj) - 1.0) <= 1e-4;
    if (!(margin_ok && L_ok)) return Verdict::ObservedOnly;
    if (traj.ctx.Lambda >= lambda0_threshold(traj.params)) return Verdict::ProvenComplete;
    return Verdict::Complete;
}

ReportEntry completeness_entry(const Trajectory& traj) {
    const Verdict v = completeness_verdict(traj);
    const bool above = traj.ctx.Lambda >= lambda0_threshold(traj.params);
    ReportEntry e = make_entry("completeness-" + to_string(v),
                               v == Verdict::ProvenComplete, static_cast<double>(v), 0.0,
                               "completeness verdict from outcome, ratio margin, and the "
                               "terminal L sqrt(C) identity");
    if (!above && e.status == CheckStatus::Fail) e.status = CheckStatus::ReportOnly;
    return e;
}

}  // namespace soliton
