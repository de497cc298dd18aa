// Acceptance gate: every exit criterion measured at its stated tolerance on
// freshly executed runs, one PASS/FAIL line per criterion.  Exits nonzero if
// any criterion fails.  The tolerance-halving clause of criterion 1 is
// measured unweakened even though a 5(4) pair advancing its fifth-order
// solution scales accumulated drift linearly (about 2x per halving), so that
// clause is expected to report the measured ratio and fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "soliton/geometry.hpp"
#include "soliton/kahler.hpp"
#include "soliton/picard.hpp"
#include "soliton/pipeline.hpp"

using namespace soliton;

namespace {

int g_failures = 0;

void line(int n, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", n, detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(double v, int prec = 6) {
    std::ostringstream ss;
    ss.precision(prec);
    ss << v;
    return ss.str();
}

struct Timed {
    RunResult res;
    double seconds = 0;
};

Timed timed_run(const RunConfig& cfg, const char* tag) {
    const auto t0 = std::chrono::steady_clock::now();
    Timed out;
    out.res = run_config(cfg);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("run %-22s outcome=%s drift=%.3g elapsed=%.2fs\n", tag,
                to_string(out.res.trajectory.outcome).c_str(),
                out.res.trajectory.max_first_integral_drift, out.seconds);
    return out;
}

bool entry_passes(const RunResult& res, const std::string& name) {
    const ReportEntry* e = res.report.find(name);
    return e != nullptr && e->status == CheckStatus::Pass;
}

double entry_measured(const RunResult& res, const std::string& name) {
    const ReportEntry* e = res.report.find(name);
    return e ? e->measured : std::nan("");
}

}  // namespace

int main() {
    std::printf("reference configuration d=2 q=-1 lambda=1\n");

    RunConfig base;
    base.Lambda = 40.0;
    std::map<double, Timed> general, halved;
    for (double Lam : {31.0, 40.0, 80.0}) {
        RunConfig cfg = base;
        cfg.Lambda = Lam;
        general.emplace(Lam, timed_run(cfg, ("general L=" + fmt(Lam)).c_str()));
        cfg.rtol = 5e-11;
        halved.emplace(Lam, timed_run(cfg, ("general L=" + fmt(Lam) + " rtol/2").c_str()));
    }
    RunConfig kcfg = base;
    kcfg.pipeline = "kahler";
    const Timed kahler40 = timed_run(kcfg, "kahler L=40");
    RunConfig tcfg;
    tcfg.q = -2.0;
    tcfg.Lambda = 160.0;
    const Timed twisted = timed_run(tcfg, "general q=-2 L=160");

    const RunResult& g40 = general.at(40.0).res;

    // 1. Conservation level and tolerance scaling.
    {
        bool level = true, scaling = true;
        std::ostringstream ss;
        ss << "max drift";
        for (double Lam : {31.0, 40.0, 80.0}) {
            const double d = general.at(Lam).res.trajectory.max_first_integral_drift;
            level = level && d < 1e-8;
            ss << " L" << Lam << "=" << fmt(d, 3);
        }
        ss << " (< 1e-8); halving ratios";
        for (double Lam : {31.0, 40.0, 80.0}) {
            const double ratio = general.at(Lam).res.trajectory.max_first_integral_drift /
                                 halved.at(Lam).res.trajectory.max_first_integral_drift;
            scaling = scaling && ratio >= 4.0;
            ss << " L" << Lam << "=" << fmt(ratio, 3);
        }
        ss << " (>= 4 required; a 5(4) pair advancing the 5th-order solution gives ~2)";
        line(1, level && scaling, ss.str());
    }

    // 2. Smooth-closing germ limits.
    {
        const bool pass = entry_passes(g40, "germ-limit-WY2") &&
                          entry_passes(g40, "germ-limit-1mZY2") &&
                          entry_passes(g40, "germ-limit-XY2");
        line(2, pass,
             "W/Y^2 -> " + fmt(entry_measured(g40, "germ-limit-WY2"), 12) +
                 " (1 +- 1e-6), (1-Z)/Y^2 -> " + fmt(entry_measured(g40, "germ-limit-1mZY2"), 12) +
                 " (24 +- 1e-6), X/Y^2 -> " + fmt(entry_measured(g40, "germ-limit-XY2"), 12) +
                 " (2 +- 1e-5)");
    }

    // 3. Fitted exponential rates at the germ end.
    {
        bool pass = true;
        std::ostringstream ss;
        ss << "rates on t in [-12,-6]:";
        for (const char* name : {"germ-rate-Y", "germ-rate-X", "germ-rate-W", "germ-rate-1mZ",
                                 "germ-rate-L2"}) {
            pass = pass && entry_passes(g40, name);
            ss << " " << (name + 10) << "=" << fmt(entry_measured(g40, name), 4);
        }
        ss << " (targets 1,2,2,2,2 +- 5%)";
        line(3, pass, ss.str());
    }

    // 4. Completeness at Lambda = 40.
    {
        const Trajectory& traj = g40.trajectory;
        const bool pass = traj.outcome == Outcome::ConvergedToOrigin &&
                          traj.min_WY2_margin >= -1e-9 &&
                          std::abs(g40.final_L_sqrtC - 1.0) <= 1e-4;
        line(4, pass,
             "outcome=" + to_string(traj.outcome) +
                 ", min fiber-ratio margin=" + fmt(traj.min_WY2_margin, 4) +
                 " (>= -1e-9), L*sqrt(C)=" + fmt(g40.final_L_sqrtC, 10) + " (1 +- 1e-4)");
    }

    // 5. Trapping-region certificate chain.
    {
        const bool pass = g40.trajectory.max_dXplusZ <= 1.0 + 1e-9 &&
                          entry_passes(g40, "bar-tanh-funnel") && entry_passes(g40, "bar-W-sup");
        line(5, pass,
             "max dX+Z=" + fmt(g40.trajectory.max_dXplusZ, 12) +
                 " (<= 1+1e-9), funnel excess=" + fmt(entry_measured(g40, "bar-tanh-funnel"), 3) +
                 " (<= 1e-6), sup W/Y=" + fmt(entry_measured(g40, "bar-W-sup"), 6) +
                 " (<= 2^(2/3) sqrt(3/40)+1e-6)");
    }

    // 6. Ricci curvature sign minima.
    {
        bool pass = true;
        std::ostringstream ss;
        ss << "minima over the profile (>= -1e-10):";
        for (double Lam : {31.0, 40.0, 80.0}) {
            const RunResult& r = general.at(Lam).res;
            for (const char* name : {"ricci-hss-min", "ricci-fhf-min", "ricci-ghg-min"})
                pass = pass && entry_passes(r, name) && entry_measured(r, name) >= -1e-10;
            ss << " L" << Lam << "=" << fmt(std::min({entry_measured(r, "ricci-hss-min"),
                                                      entry_measured(r, "ricci-fhf-min"),
                                                      entry_measured(r, "ricci-ghg-min")}),
                                            3);
        }
        line(6, pass, ss.str());
    }

    // 7. Kaehler dichotomy across the fiber twist.
    {
        const double res_k = scaled_kahler_residual(kahler40.res.profile);
        const double res_t = scaled_kahler_residual(twisted.res.profile);
        bool nabla = true;
        for (const char* name : {"nablaJ-c1", "nablaJ-c2", "nablaJ-c3", "nablaJ-c4"})
            nabla = nabla && entry_passes(kahler40.res, name) &&
                    entry_measured(kahler40.res, name) < 1e-6;
        const bool pass = res_k < 1e-6 && nabla && res_t > 1e-2;
        line(7, pass,
             "q=-1 scaled residual=" + fmt(res_k, 3) + " (< 1e-6, nablaJ coefficients " +
                 std::string(nabla ? "all < 1e-6" : "exceed 1e-6") +
                 "); q=-2 residual=" + fmt(res_t, 3) + " (> 1e-2)");
    }

    // 8. General vs reduced pipeline agreement.
    {
        const DeviationRecord dev = compare_profiles(g40.profile, kahler40.res.profile);
        const bool pass = dev.f <= 1e-5 && dev.g <= 1e-5 && dev.h_s <= 1e-5;
        line(8, pass,
             "sup-relative deviation f=" + fmt(dev.f, 3) + " g=" + fmt(dev.g, 3) +
                 " h_s=" + fmt(dev.h_s, 3) + " (each <= 1e-5) over s in [" + fmt(dev.s_lo, 3) +
                 ", " + fmt(dev.s_hi, 3) + "]");
    }

    // 9. Contraction of the germ integral operator.
    {
        const SolitonParams p = make_params(2, -1.0);
        const FirstIntegralContext ctx = make_context(p, 40.0, 1.0);
        const WeightedGrid grid = WeightedGrid::uniform(400, 12.0);
        SeedSpec s3;
        s3.gamma = ctx.gamma;
        s3.eps = 1e-3;
        const PicardResult p3 = iterate_to_fixed_point(p, ctx, grid, s3);
        SeedSpec s2 = s3;
        s2.eps = 1e-2;
        const PicardResult p2 = iterate_to_fixed_point(p, ctx, grid, s2);
        bool contracts = !p3.contraction_ratios.empty();
        double worst = 0.0;
        for (double r : p3.contraction_ratios) {
            worst = std::max(worst, r);
            contracts = contracts && r < 0.5;
        }
        const double ratio = p2.first_correction_norm / p3.first_correction_norm;
        const bool quadratic = ratio >= 80.0 && ratio <= 120.0;
        line(9, contracts && quadratic,
             "max contraction ratio=" + fmt(worst, 4) + " (< 0.5 at eps=1e-3); " +
                 "first-correction ratio eps 1e-2 / 1e-3 = " + fmt(ratio, 5) + " (100 +- 20%)");
    }

    // 10. End asymptotics and classification.
    {
        bool settles = true;
        std::ostringstream ss;
        ss << "g/sqrt(s) final-decade variation:";
        for (double Lam : {31.0, 40.0, 80.0}) {
            const RunResult& r = general.at(Lam).res;
            settles = settles && entry_passes(r, "asymptotic-g-sqrt-s");
            ss << " L" << Lam << "=" << fmt(entry_measured(r, "asymptotic-g-sqrt-s"), 3);
        }
        const bool definite = general.at(40.0).res.asym != AsymptoticClass::Undetermined &&
                              general.at(80.0).res.asym != AsymptoticClass::Undetermined;
        ss << " (< 0.01); class L40=" << to_string(general.at(40.0).res.asym)
           << " L80=" << to_string(general.at(80.0).res.asym) << " (definite)";
        line(10, settles && definite, ss.str());
    }

    std::printf("%d of 10 criteria passed\n", 10 - g_failures);
    return g_failures > 0 ? 1 : 0;
}
