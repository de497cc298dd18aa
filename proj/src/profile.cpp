#include "soliton/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "soliton/numerics.hpp"

namespace soliton {

SecondDerivs second_derivs(const SolitonParams& p, const FirstIntegralContext& ctx,
                           const ProfileSample& smp) {
    (void)ctx;
    const double fs = radial_f_s(smp), gs = radial_g_s(smp);
    const double f = smp.f, g = smp.g, hs = smp.h_s;
    const double g2 = g * g, ratio = f * f / (g2 * g2);
    SecondDerivs out;
    out.fss_over_f = -p.d * fs * gs / (f * g) - fs * hs / f + p.A3 * ratio;
    out.gss_over_g = -fs * gs / (f * g) - gs * hs / g - (p.d - 1) * (gs / g) * (gs / g) +
                     (p.A2 / p.d) / g2 - (2.0 * p.A3 / p.d) * ratio;
    out.h_ss = -out.fss_over_f - p.d * out.gss_over_g;
    return out;
}

MetricProfile recover_profile(const Trajectory& traj) {
    const SolitonParams& p = traj.params;
    const FirstIntegralContext& ctx = traj.ctx;
    const double y_switch = 1e-5;

    MetricProfile prof;
    prof.params = p;
    prof.ctx = ctx;
    prof.samples.reserve(traj.samples.size());

    for (const auto& st : traj.samples) {
        if (st.L <= 0.0)
            throw corrupt_trajectory("nonpositive L in trajectory sample");
        ProfileSample smp;
        smp.s = st.s;
        smp.t = st.t;
        smp.X = st.X;
        smp.Y = st.Y;
        smp.Z = st.Z;
        smp.W = st.W;
        smp.L = st.L;
        smp.f = st.f;
        smp.g = std::exp(st.lng);
        const double num = 1.0 - p.d * st.X - st.Z;
        // Germ side: the numerator is a cancellation of order Y^2; substitute
        // its leading term (Lambda/2) Y^2 / (lambda Y).  The far end (Z near 0)
        // has a benign numerator even when Y is equally small.
        if (st.Y < y_switch && p.d * st.X + st.Z > 0.5)
            smp.h_s = (ctx.Lambda / (2.0 * ctx.lambda)) * st.Y;
        else
            smp.h_s = num / st.L;
        smp.S = ctx.C - smp.h_s * smp.h_s;
        smp.fi_residual = first_integral_residual(p, ctx, st);
        smp.kahler_residual = -(p.d + 2) / 2.0 * p.q * smp.f - radial_g_s(smp) * smp.g;
        prof.samples.push_back(smp);
    }

    // h by corrected trapezoid in s, using the algebraic h_ss; head integrates
    // h_s ~ (C/2) s from the zero section.
    auto& ss = prof.samples;
    std::vector<double> hss(ss.size());
    for (std::size_t k = 0; k < ss.size(); ++k)
        hss[k] = second_derivs(p, ctx, ss[k]).h_ss;
    ss[0].h = 0.25 * ctx.C * ss[0].s * ss[0].s;
    for (std::size_t k = 0; k + 1 < ss.size(); ++k) {
        const double ds = ss[k + 1].s - ss[k].s;
        ss[k + 1].h = ss[k].h + ds / 2.0 * (ss[k].h_s + ss[k + 1].h_s) -
                      ds * ds / 12.0 * (hss[k + 1] - hss[k]);
    }

    const auto& first = ss.front();
    prof.closing = {first.f, radial_f_s(first), first.g, radial_g_s(first), first.h_s, 0.0};
    return prof;
}

std::vector<ProfileSample> resample_uniform(const MetricProfile& prof, int count) {
    const auto& ss = prof.samples;
    std::vector<double> s(ss.size());
    for (std::size_t k = 0; k < ss.size(); ++k) s[k] = ss[k].s;

    auto column = [&](double ProfileSample::* field) {
        std::vector<double> y(ss.size());
        for (std::size_t k = 0; k < ss.size(); ++k) y[k] = ss[k].*field;
        return Pchip(s, std::move(y));
    };
    const Pchip it = column(&ProfileSample::t), iff = column(&ProfileSample::f),
                ig = column(&ProfileSample::g), ihs = column(&ProfileSample::h_s),
                ih = column(&ProfileSample::h), iX = column(&ProfileSample::X),
                iY = column(&ProfileSample::Y), iZ = column(&ProfileSample::Z),
                iW = column(&ProfileSample::W), iL = column(&ProfileSample::L);

    std::vector<ProfileSample> out;
    out.reserve(count);
    const double s0 = s.front(), s1 = s.back();
    for (int i = 0; i < count; ++i) {
        const double sq = s0 + (s1 - s0) * double(i) / (count - 1);
        ProfileSample smp;
        smp.s = sq;
        smp.t = it(sq);
        smp.f = iff(sq);
        smp.g = ig(sq);
        smp.h_s = ihs(sq);
        smp.h = ih(sq);
        smp.X = iX(sq);
        smp.Y = iY(sq);
        smp.Z = iZ(sq);
        smp.W = iW(sq);
        smp.L = iL(sq);
        smp.S = prof.ctx.C - smp.h_s * smp.h_s;
        PhaseState st{smp.t, smp.X, smp.Y, smp.Z, smp.W,
                      std::log(std::max(smp.g, std::numeric_limits<double>::min())),
                      smp.s, smp.f, smp.L};
        smp.fi_residual = first_integral_residual(prof.params, prof.ctx, st);
        smp.kahler_residual =
            -(prof.params.d + 2) / 2.0 * prof.params.q * smp.f - radial_g_s(smp) * smp.g;
        out.push_back(smp);
    }
    return out;
}

namespace {

// Limit of a column at s -> 0 extrapolated over the first few samples.  Even
// quantities (the closing ratios) expand in s^2; odd ones (h_s) in s.
double head_limit(const MetricProfile& prof, bool odd_in_s,
                  double (*value)(const ProfileSample&)) {
    const std::size_t n = std::min<std::size_t>(5, prof.samples.size());
    std::vector<double> xs(n), ys(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = prof.samples[k].s;
        xs[k] = odd_in_s ? s : s * s;
        ys[k] = value(prof.samples[k]);
    }
    return extrapolate_to_zero(xs, ys);
}

}  // namespace

std::vector<ReportEntry> closing_report(const MetricProfile& prof, double limit_WY2) {
    const SolitonParams& p = prof.params;
    const FirstIntegralContext& ctx = prof.ctx;
    std::vector<ReportEntry> out;

    out.push_back(make_entry("closing-WY2", std::abs(limit_WY2 - 1.0) <= 1e-6, limit_WY2, 1e-6,
                             "W/Y^2 tends to 1, the smooth-closing condition"));

    const double gs_f = head_limit(prof, false, [](const ProfileSample& s) {
        return radial_g_s(s) / s.f;
    });
    const double gs_f_want = p.A2 / (2.0 * p.d * ctx.lambda);
    out.push_back(make_entry("closing-gs-over-f", std::abs(gs_f - gs_f_want) <= 1e-3, gs_f, 1e-3,
                             "g_s/f tends to A2/(2 d lambda) at the zero section"));

    const double hs_gs = head_limit(prof, false, [](const ProfileSample& s) {
        const double gs = radial_g_s(s);
        return gs != 0.0 ? s.h_s / gs : 0.0;
    });
    const double hs_gs_want = p.d * ctx.C * ctx.lambda / p.A2;
    out.push_back(make_entry("closing-hs-over-gs", std::abs(hs_gs - hs_gs_want) <= 1e-3, hs_gs,
                             1e-3, "h_s/g_s tends to d C lambda / A2 at the zero section"));

    const double hs_f = head_limit(prof, false, [](const ProfileSample& s) { return s.h_s / s.f; });
    out.push_back(make_report_only("closing-hs-over-f", hs_f,
                                   "measured limit of h_s/f at the zero section"));
    out.push_back(make_report_only("closing-hs-over-f-minus-half-C", hs_f - ctx.C / 2.0,
                                   "deviation of the h_s/f limit from C/2"));
    out.push_back(make_report_only("closing-hs-over-f-minus-C-over-lambda",
                                   hs_f - ctx.C / ctx.lambda,
                                   "deviation of the h_s/f limit from C/lambda"));

    const double fs0 = head_limit(prof, false, [](const ProfileSample& s) { return radial_f_s(s); });
    out.push_back(make_entry("closing-fs", std::abs(fs0 - 1.0) <= 1e-6, fs0, 1e-6,
                             "f_s tends to 1 at the zero section (odd smooth extension)"));
    const double hs0 = head_limit(prof, true, [](const ProfileSample& s) { return s.h_s; });
    out.push_back(make_entry("closing-hs", std::abs(hs0) <= 1e-6, hs0, 1e-6,
                             "h_s vanishes at the zero section"));
    out.push_back(make_entry("closing-g-lambda",
                             std::abs(prof.closing.g0 - ctx.lambda) <= 1e-6, prof.closing.g0,
                             1e-6, "g tends to lambda at the zero section"));
    const double S_first = prof.samples.front().S;
    out.push_back(make_entry("closing-S-max", std::abs(S_first - ctx.C) <= 1e-8, S_first, 1e-8,
                             "S attains its maximum C on the zero section"));
    return out;
}

std::vector<ReportEntry> profile_consistency_report(const MetricProfile& prof) {
    const auto& ss = prof.samples;
    std::vector<ReportEntry> out;

    double cross = 0.0;
    for (const auto& smp : ss)
        if (smp.Y > 0.0 && smp.g > 0.0)
            cross = std::max(cross, std::abs(smp.f / smp.g - smp.W / smp.Y));
    out.push_back(make_entry("cross-f-over-g", cross <= 1e-6, cross, 1e-6,
                             "f/g coincides with W/Y along the profile"));

    // g_s from the phase variables against the derivative of sampled g(s).
    std::vector<double> s(ss.size()), g(ss.size());
    for (std::size_t k = 0; k < ss.size(); ++k) {
        s[k] = ss[k].s;
        g[k] = ss[k].g;
    }
    double gs_diff = 0.0;
    for (std::size_t k = 0; k < ss.size(); ++k) {
        const double fd = local_cubic_derivative(s, g, k);
        gs_diff = std::max(gs_diff, std::abs(fd - radial_g_s(ss[k])));
    }
    out.push_back(make_entry("cross-gs-two-ways", gs_diff <= 1e-5, gs_diff, 1e-5,
                             "g_s from phase variables matches the slope of g(s)"));

    double min_hs = std::numeric_limits<double>::infinity();
    double min_S = std::numeric_limits<double>::infinity();
    double max_S = -std::numeric_limits<double>::infinity();
    std::size_t argmax_S = 0;
    double s_identity = 0.0;
    for (std::size_t k = 0; k < ss.size(); ++k) {
        min_hs = std::min(min_hs, ss[k].h_s);
        min_S = std::min(min_S, ss[k].S);
        if (ss[k].S > max_S) {
            max_S = ss[k].S;
            argmax_S = k;
        }
        s_identity = std::max(
            s_identity, std::abs(prof.ctx.C - ss[k].h_s * ss[k].h_s - ss[k].S));
    }
    out.push_back(make_entry("hs-positive", min_hs > 0.0, min_hs, 0.0,
                             "h_s stays positive away from the zero section"));
    out.push_back(make_entry("S-identity", s_identity <= 1e-12, s_identity, 1e-12,
                             "S + h_s^2 = C at every sample"));
    out.push_back(make_entry("S-range",
                             min_S >= -1e-7 && max_S <= prof.ctx.C && argmax_S == 0,
                             min_S, 1e-7,
                             "scalar level S stays in [0, C], maximal at the zero section"));

    bool s_mono = true;
    for (std::size_t k = 0; k + 1 < ss.size(); ++k)
        if (!(ss[k + 1].s > ss[k].s)) s_mono = false;
    out.push_back(make_entry("s-strictly-increasing", s_mono,
                             static_cast<double>(ss.size()), 0.0,
                             "arclength is strictly increasing along the flow"));
    return out;
}

}  // namespace soliton
