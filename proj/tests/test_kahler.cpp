// Reduced construction: seed ray, backward/forward reduced flow, the lift to
// the full phase space, and agreement with the general pipeline.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "soliton/kahler.hpp"
#include "soliton/numerics.hpp"
#include "soliton/pipeline.hpp"

using namespace soliton;

namespace {

SolitonParams ref() { return make_params(2, -1.0); }

const ReducedRun& reduced40() {
    static const ReducedRun run = [] {
        const SolitonParams p = ref();
        const FirstIntegralContext ctx = make_context(p, 40.0, 1.0);
        return integrate_reduced(p, unstable_seed(p, ctx.C, 1.0, 1e-7), ctx);
    }();
    return run;
}

const RunResult& kahler40() {
    static const RunResult res = [] {
        RunConfig cfg;
        cfg.pipeline = "kahler";
        cfg.Lambda = 40.0;
        return run_kahler(cfg);
    }();
    return res;
}

const ReportEntry& entry(const RunResult& res, const std::string& name) {
    const ReportEntry* e = res.report.find(name);
    REQUIRE_MESSAGE(e != nullptr, "missing report entry ", name);
    return *e;
}

}  // namespace

TEST_CASE("unstable-manifold seed ray") {
    const SolitonParams p = ref();
    CHECK(unstable_slope(p, 40.0, 1.0) == -3.0);
    CHECK(unstable_slope(p, 160.0, 0.5) == -3.0);  // depends on C lambda0^2 only

    const KahlerState seed = unstable_seed(p, 40.0, 1.0, 1e-5);
    CHECK(seed.t == 0.0);
    CHECK(seed.X == 1e-5);
    CHECK(seed.Ytil == doctest::Approx(0.5 - 3e-5).epsilon(1e-15));

    CHECK_THROWS_AS((void)unstable_seed(make_params(2, -2.0), 40.0, 1.0, 1e-5), invalid_params);
    CHECK_THROWS_AS((void)unstable_seed(p, 40.0, 1.0, 2e-4), invalid_params);
    CHECK_THROWS_AS((void)unstable_seed(p, 40.0, 1.0, 0.0), invalid_params);
    CHECK_THROWS_AS((void)unstable_seed(p, 0.0, 1.0, 1e-5), invalid_params);
    CHECK_THROWS_AS((void)unstable_seed(p, 40.0, 0.0, 1e-5), invalid_params);
}

TEST_CASE("reduced conserved quantity vanishes along the seed ray") {
    const SolitonParams p = ref();
    for (double eps : {1e-5, 1e-6, 1e-7}) {
        const KahlerState seed = unstable_seed(p, 40.0, 1.0, eps);
        CHECK(std::abs(reduced_fi_residual(p, 40.0, 1.0, seed.X, seed.Ytil)) < 1e-13);
    }
    // Off the ray the residual is linear in the offset.
    CHECK(reduced_fi_residual(p, 40.0, 1.0, 0.0, 0.5 + 1e-3) ==
          doctest::Approx(16e-3).epsilon(1e-12));
}

TEST_CASE("pointwise lift to the full phase space") {
    const SolitonParams p = ref();
    const PhaseState st = lift_to_xyzw(p, {0.0, 0.01, 0.5});
    CHECK(st.X == 0.01);
    CHECK(st.Y == doctest::Approx(std::sqrt(0.005)).epsilon(1e-15));
    CHECK(st.Z == 1.0);
    CHECK(st.W == doctest::Approx(0.005).epsilon(1e-15));

    CHECK_THROWS_AS((void)lift_to_xyzw(p, {0.0, 0.0, 0.5}), degenerate_state);
    CHECK_THROWS_AS((void)lift_to_xyzw(p, {0.0, 0.01, 0.0}), degenerate_state);
}

TEST_CASE("reduced run structure at the reference parameters") {
    const ReducedRun& rr = reduced40();
    CHECK(rr.trajectory.outcome == Outcome::ConvergedToOrigin);

    CHECK(rr.measured_slope == doctest::Approx(-3.0).epsilon(1e-6));
    CHECK(rr.backward_rate == doctest::Approx(2.0).epsilon(0.05));
    CHECK(rr.max_reduced_fi_drift < 1e-8);
    CHECK(rr.limit_WY2 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rr.IX == doctest::Approx(rr.seed.X / 2.0).epsilon(0.01));

    // Lifted trajectory: time-ordered, on-manifold, sign-preserving.
    const Trajectory& traj = rr.trajectory;
    CHECK(traj.max_first_integral_drift < 1e-8);
    CHECK(traj.min_WY2_margin > 0.0);
    for (std::size_t k = 1; k < traj.samples.size(); ++k) {
        CHECK(traj.samples[k].t > traj.samples[k - 1].t);
        CHECK(traj.samples[k].s >= traj.samples[k - 1].s);
    }
    CHECK(traj.samples.front().t < -3.0);
    CHECK(std::abs(final_L_times_sqrtC(traj) - 1.0) <= 1e-4);
}

TEST_CASE("lifted samples solve the full flow equations") {
    const Trajectory& traj = reduced40().trajectory;
    std::vector<double> t, X, Y, Z, W;
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
        const PhaseState& st = traj.samples[k];
        if (st.t < 0.5 || st.t > 5.0) continue;
        idx.push_back(k);
        t.push_back(st.t);
        X.push_back(st.X);
        Y.push_back(st.Y);
        Z.push_back(st.Z);
        W.push_back(st.W);
    }
    REQUIRE(t.size() > 30);
    double worst = 0.0;
    for (std::size_t j = 2; j + 2 < t.size(); j += 3) {
        const Vec8& f = traj.derivs[idx[j]];
        const double scale = 1.0 + std::abs(f[0]);
        worst = std::max(worst, std::abs(local_cubic_derivative(t, X, j) - f[0]) / scale);
        worst = std::max(worst, std::abs(local_cubic_derivative(t, Y, j) - f[1]) / scale);
        worst = std::max(worst, std::abs(local_cubic_derivative(t, Z, j) - f[2]) / scale);
        worst = std::max(worst, std::abs(local_cubic_derivative(t, W, j) - f[3]) / scale);
    }
    CHECK(worst < 1e-5);

    // The lift keeps f/g and W/Y identified.
    const MetricProfile prof = recover_profile(traj);
    double dev = 0.0;
    for (const auto& smp : prof.samples)
        if (smp.Y > 0.0) dev = std::max(dev, std::abs(smp.f / smp.g - smp.W / smp.Y));
    CHECK(dev < 1e-6);
}

TEST_CASE("reduced pipeline report at the reference parameters") {
    const RunResult& r = kahler40();
    for (const auto& e : r.report.entries) {
        INFO(e.name, " measured ", e.measured);
        CHECK(e.status != CheckStatus::Fail);
    }
    CHECK(r.report.all_pass());

    CHECK(entry(r, "reduced-slope").measured == doctest::Approx(-3.0).epsilon(1e-6));
    CHECK(entry(r, "reduced-backward-rate").measured == doctest::Approx(2.0).epsilon(0.05));
    CHECK(entry(r, "reduced-fi-drift").measured < 1e-8);
    CHECK(entry(r, "reduced-lift-identity").measured == 0.0);
    CHECK(entry(r, "reduced-limit-WY2").status == CheckStatus::ReportOnly);
    CHECK(entry(r, "reduced-limit-WY2").measured == doctest::Approx(1.0).epsilon(1e-6));

    // The reduced pipeline asserts the holonomy reduction.
    CHECK(entry(r, "kahler-residual").status == CheckStatus::Pass);
    CHECK(entry(r, "kahler-residual").measured < 1e-6);
    CHECK(std::abs(r.final_L_sqrtC - 1.0) <= 1e-4);
    CHECK(r.verdict == Verdict::ProvenComplete);
}

TEST_CASE("seed offset does not move the soliton") {
    RunConfig cfg;
    cfg.pipeline = "kahler";
    cfg.Lambda = 40.0;
    cfg.seed_eps = 5e-8;
    const RunResult moved = run_kahler(cfg);
    const DeviationRecord dev = compare_profiles(kahler40().profile, moved.profile);
    CHECK(dev.max() < 1e-6);
}

TEST_CASE("general and reduced pipelines construct the same metric") {
    RunConfig cfg;
    cfg.Lambda = 40.0;
    const RunResult general = run_general(cfg);
    const DeviationRecord dev = compare_profiles(general.profile, kahler40().profile);
    CHECK(dev.f <= 1e-5);
    CHECK(dev.g <= 1e-5);
    CHECK(dev.h_s <= 1e-5);
    CHECK(dev.s_hi > 100.0);
}

TEST_CASE("profile comparison guards and sensitivity") {
    const RunResult& r = kahler40();
    const DeviationRecord self = compare_profiles(r.profile, r.profile);
    CHECK(self.max() == 0.0);

    MetricProfile twisted = r.profile;
    twisted.params.q = -2.0;
    CHECK_THROWS_AS((void)compare_profiles(r.profile, twisted), comparison_error);
    MetricProfile empty;
    empty.params = r.params;
    CHECK_THROWS_AS((void)compare_profiles(r.profile, empty), comparison_error);

    RunConfig cfg;
    cfg.pipeline = "kahler";
    cfg.Lambda = 41.0;
    const RunResult nearby = run_kahler(cfg);
    CHECK(compare_profiles(r.profile, nearby.profile).max() > 1e-3);
}

TEST_CASE("below-threshold reduced run lacks the completeness certificate") {
    RunConfig cfg;
    cfg.pipeline = "kahler";
    cfg.Lambda = 15.0;
    const RunResult r = run_kahler(cfg);
    CHECK(r.trajectory.outcome == Outcome::ConvergedToOrigin);
    CHECK(r.trajectory.min_WY2_margin < 0.0);
    CHECK(r.verdict == Verdict::ObservedOnly);
    CHECK(entry(r, "fiber-ratio-bound").status == CheckStatus::ReportOnly);
    CHECK(entry(r, "bar-W-sup").status == CheckStatus::ReportOnly);
}
