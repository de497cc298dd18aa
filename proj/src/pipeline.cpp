#include "soliton/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace soliton {

namespace {

constexpr const char* kColumns = "s,t,f,g,h_s,h,S,X,Y,Z,W,L,fi_residual,kahler_residual";

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double get_num(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw invalid_params(std::string("config key must be numeric: ") + key);
    return j[key].get<double>();
}

}  // namespace

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_params("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw invalid_params(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw invalid_params("config root must be a JSON object");

    static const std::set<std::string> known = {
        "d",     "q",          "Lambda", "lambda0",  "picard_tol", "rtol",    "atol",
        "tmax_tilde", "nodes", "seed_eps", "pipeline", "out",        "report",
        "workers", "Lambdas"};  // workers/Lambdas are read by the sweep driver
    for (const auto& item : j.items())
        if (!known.count(item.key())) throw invalid_params("unknown config key: " + item.key());

    RunConfig cfg;
    try {
        if (j.contains("d")) cfg.d = j["d"].get<int>();
        cfg.q = get_num(j, "q", cfg.q);
        if (j.contains("Lambda")) cfg.Lambda = get_num(j, "Lambda", 0.0);
        cfg.lambda0 = get_num(j, "lambda0", cfg.lambda0);
        cfg.picard_tol = get_num(j, "picard_tol", cfg.picard_tol);
        cfg.rtol = get_num(j, "rtol", cfg.rtol);
        cfg.atol = get_num(j, "atol", cfg.atol);
        cfg.tmax_tilde = get_num(j, "tmax_tilde", cfg.tmax_tilde);
        if (j.contains("nodes")) cfg.nodes = j["nodes"].get<int>();
        if (j.contains("seed_eps")) cfg.seed_eps = get_num(j, "seed_eps", 0.0);
        if (j.contains("pipeline")) cfg.pipeline = j["pipeline"].get<std::string>();
        if (j.contains("out")) cfg.out_csv = j["out"].get<std::string>();
        if (j.contains("report")) cfg.out_report = j["report"].get<std::string>();
    } catch (const invalid_params&) {
        throw;
    } catch (const std::exception& e) {
        throw invalid_params(std::string("config type error: ") + e.what());
    }
    return cfg;
}

void RunConfig::apply_env() {
    if (const char* env = std::getenv("SOLITON_FORGE_SEED_EPS")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end == env || *end != '\0' || !(v > 0.0))
            throw invalid_params("SOLITON_FORGE_SEED_EPS must be a positive number");
        seed_eps = v;
    }
}

void RunConfig::validate() const {
    make_params(d, q);
    if (!Lambda) throw invalid_params("Lambda is required");
    if (!(*Lambda > 0.0)) throw invalid_params("Lambda must be positive");
    if (!(lambda0 > 0.0)) throw invalid_params("lambda0 must be positive");
    if (!(picard_tol > 0.0) || !(rtol > 0.0) || !(atol > 0.0))
        throw invalid_params("tolerances must be positive");
    if (!(tmax_tilde > 0.0)) throw invalid_params("tmax_tilde must be positive");
    if (nodes < 8) throw invalid_params("nodes must be at least 8");
    if (pipeline != "general" && pipeline != "kahler")
        throw invalid_params("pipeline must be \"general\" or \"kahler\"");
    if (seed_eps && !(*seed_eps > 0.0)) throw invalid_params("seed_eps must be positive");
    if (pipeline == "kahler" && q != -1.0)
        throw invalid_params("reduced construction requires q = -1");
}

namespace {

// Trajectory-level entries shared by both pipelines.  Claims tied to the
// completeness theorem are asserted above the threshold, reported below.
void append_flow_entries(VerificationReport& rep, const Trajectory& traj) {
    const double threshold = lambda0_threshold(traj.params);
    const bool above = traj.ctx.Lambda >= threshold;
    const bool conv = traj.outcome == Outcome::ConvergedToOrigin;

    ReportEntry oc = make_entry("flow-outcome", conv, double(static_cast<int>(traj.outcome)),
                                0.0,
                                "forward flow reaches the origin (0 origin, 1 blow-up, 2 "
                                "step limit)");
    if (!conv && !above) oc.status = CheckStatus::ReportOnly;
    rep.add(oc);

    rep.add(make_entry("first-integral-drift", traj.max_first_integral_drift < 1e-8,
                       traj.max_first_integral_drift, 1e-8,
                       "conserved-quantity residual over the whole trajectory"));

    const double lval = final_L_times_sqrtC(traj);
    ReportEntry fl = make_entry("final-L-sqrtC", conv && std::abs(lval - 1.0) <= 1e-4, lval,
                                1e-4, "terminal L sqrt(C) equals 1");
    if (!conv && !above) fl.status = CheckStatus::ReportOnly;
    rep.add(fl);

    rep.add(check_sign_invariance(traj));
    rep.add(check_dXplusZ(traj));
    rep.add(check_W_bound(traj, threshold));
    rep.add(check_L_monotone(traj));
    rep.add(check_L_identity(traj));
    rep.add(bar_diagnostics(traj));
}

void append_profile_entries(VerificationReport& rep, RunResult& res, double limit_wy2,
                            bool assert_kahler) {
    rep.add(closing_report(res.profile, limit_wy2));
    rep.add(profile_consistency_report(res.profile));
    rep.add(ricci_sign_report(res.profile));
    rep.add(kahler_residual_report(res.profile, assert_kahler));
    rep.add(nabla_J_report(res.profile, assert_kahler));

    const Classification cls = classify_asymptotics(res.profile);
    res.asym = cls.cls;
    rep.add(classifier_report(cls, res.trajectory.outcome == Outcome::ConvergedToOrigin));

    rep.add(completeness_entry(res.trajectory));
    res.verdict = completeness_verdict(res.trajectory);
    res.final_L_sqrtC = final_L_times_sqrtC(res.trajectory);
}

}  // namespace

RunResult run_general(const RunConfig& cfg) {
    cfg.validate();
    RunResult res;
    res.config = cfg;
    res.params = make_params(cfg.d, cfg.q);
    res.ctx = make_context(res.params, *cfg.Lambda, cfg.lambda0);
    const SolitonParams& p = res.params;
    const FirstIntegralContext& ctx = res.ctx;

    const WeightedGrid grid = WeightedGrid::uniform(cfg.nodes, cfg.tmax_tilde);
    SeedSpec seed;
    seed.gamma = ctx.gamma;
    seed.beta = 1.0;
    seed.eps = cfg.effective_seed_eps();
    PicardOptions popts;
    popts.tol = cfg.picard_tol;
    const PicardResult pr = iterate_to_fixed_point(p, ctx, grid, seed, popts);

    std::vector<PhaseState> germ = germ_states(p, ctx, pr);
    const PhaseState handoff = germ.back();

    IntegrationOptions iopts;
    iopts.rtol = cfg.rtol;
    iopts.atol = cfg.atol;
    Trajectory fwd = integrate_forward(p, handoff, ctx, iopts);
    res.trajectory = with_germ_prefix(std::move(germ), std::move(fwd));

    res.profile = recover_profile(res.trajectory);
    res.profile.closing.wy2_limit = pr.limit_WY2;

    VerificationReport& rep = res.report;
    double max_ratio = 0.0;
    for (double r : pr.contraction_ratios) max_ratio = std::max(max_ratio, r);
    rep.add(make_entry("picard-contraction", max_ratio < 0.5, max_ratio, 0.5,
                       "weighted-norm update ratios of the germ iteration"));
    rep.add(make_report_only("picard-first-correction", pr.first_correction_norm,
                             "weighted norm of the first iterate correction"));
    rep.add(make_report_only("picard-iterations", double(pr.iterations),
                             "iterations to the germ fixed point"));
    rep.add(make_report_only("picard-eps", pr.seed.eps, "germ seed amplitude actually used"));

    const double handoff_fi = std::abs(first_integral_residual(p, ctx, handoff));
    rep.add(make_entry("picard-handoff-fi", handoff_fi < 1e-7, handoff_fi, 1e-7,
                       "conserved-quantity residual of the germ at the handoff point"));
    rep.add(make_entry("germ-limit-WY2", std::abs(pr.limit_WY2 - 1.0) <= 1e-6, pr.limit_WY2,
                       1e-6, "limit of W/Y^2 at the zero section equals 1 (smooth closing)"));
    rep.add(make_entry("germ-limit-1mZY2", std::abs(pr.limit_1mZY2 - ctx.gamma) <= 1e-6,
                       pr.limit_1mZY2, 1e-6, "limit of (1-Z)/Y^2 equals (Lambda + A2)/2"));
    rep.add(make_entry("germ-limit-XY2", std::abs(pr.limit_XY2 - p.A2 / (2.0 * p.d)) <= 1e-5,
                       pr.limit_XY2, 1e-5, "limit of X/Y^2 equals A2/(2d)"));
    rep.add(germ_rate_report(res.trajectory));

    append_flow_entries(rep, res.trajectory);
    append_profile_entries(rep, res, pr.limit_WY2, /*assert_kahler=*/p.q == -1.0);
    return res;
}

RunResult run_kahler(const RunConfig& cfg) {
    cfg.validate();
    RunResult res;
    res.config = cfg;
    res.params = make_params(cfg.d, cfg.q);
    res.ctx = make_context(res.params, *cfg.Lambda, cfg.lambda0);
    const SolitonParams& p = res.params;
    const FirstIntegralContext& ctx = res.ctx;

    const KahlerState seed = unstable_seed(p, ctx.C, cfg.lambda0, cfg.effective_seed_eps());
    IntegrationOptions iopts;
    iopts.rtol = cfg.rtol;
    iopts.atol = cfg.atol;
    ReducedRun rr = integrate_reduced(p, seed, ctx, iopts);
    res.trajectory = std::move(rr.trajectory);

    res.profile = recover_profile(res.trajectory);
    res.profile.closing.wy2_limit = rr.limit_WY2;

    VerificationReport& rep = res.report;
    const double slope = unstable_slope(p, ctx.C, cfg.lambda0);
    rep.add(make_entry("reduced-slope", std::abs(rr.measured_slope - slope) <= 1e-6,
                       rr.measured_slope, 1e-6,
                       "extrapolated limit of (Ytil - 2/(d+2))/X matches the seeded branch"));
    rep.add(make_entry("reduced-backward-rate", std::abs(rr.backward_rate - 2.0) <= 0.1,
                       rr.backward_rate, 0.1,
                       "backward flow approaches the fixed point at exponential rate 2"));
    rep.add(make_entry("reduced-fi-drift", rr.max_reduced_fi_drift < 1e-8,
                       rr.max_reduced_fi_drift, 1e-8,
                       "residual of the reduced conserved quantity"));
    double lift_dev = 0.0;
    for (const auto& st : res.trajectory.samples)
        lift_dev = std::max(lift_dev, std::abs(st.W - 2.0 * st.X / (p.d + 2)));
    rep.add(make_entry("reduced-lift-identity", lift_dev == 0.0, lift_dev, 0.0,
                       "W = 2X/(d+2) holds exactly on lifted samples"));
    rep.add(make_report_only("reduced-limit-WY2", rr.limit_WY2,
                             "closing ratio W/Y^2 at the backward end"));

    append_flow_entries(rep, res.trajectory);
    append_profile_entries(rep, res, rr.limit_WY2, /*assert_kahler=*/true);
    return res;
}

RunResult run_config(const RunConfig& cfg) {
    cfg.validate();
    return cfg.pipeline == "kahler" ? run_kahler(cfg) : run_general(cfg);
}

void write_profile_csv(const std::string& path, const RunResult& res, int rows) {
    const auto grid = resample_uniform(res.profile, rows);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "# d=" << res.params.d << "\n";
    out << "# q=" << fmt17(res.params.q) << "\n";
    out << "# Lambda=" << fmt17(res.ctx.Lambda) << "\n";
    out << "# lambda=" << fmt17(res.ctx.lambda) << "\n";
    out << "# C=" << fmt17(res.ctx.C) << "\n";
    out << "# pipeline=" << res.config.pipeline << "\n";
    out << "# seed_eps=" << fmt17(res.config.effective_seed_eps()) << "\n";
    out << "# picard_tol=" << fmt17(res.config.picard_tol) << "\n";
    out << "# rtol=" << fmt17(res.config.rtol) << "\n";
    out << "# atol=" << fmt17(res.config.atol) << "\n";
    out << "# tmax_tilde=" << fmt17(res.config.tmax_tilde) << "\n";
    out << "# nodes=" << res.config.nodes << "\n";
    out << "# outcome=" << to_string(res.trajectory.outcome) << "\n";
    out << "# verdict=" << to_string(res.verdict) << "\n";
    out << "# classification=" << to_string(res.asym) << "\n";
    out << "# final_L_sqrtC=" << fmt17(res.final_L_sqrtC) << "\n";
    out << "# native_samples=" << res.profile.samples.size() << "\n";
    out << "# rows=" << grid.size() << "\n";
    out << kColumns << "\n";
    for (const auto& r : grid) {
        out << fmt17(r.s) << ',' << fmt17(r.t) << ',' << fmt17(r.f) << ',' << fmt17(r.g) << ','
            << fmt17(r.h_s) << ',' << fmt17(r.h) << ',' << fmt17(r.S) << ',' << fmt17(r.X)
            << ',' << fmt17(r.Y) << ',' << fmt17(r.Z) << ',' << fmt17(r.W) << ',' << fmt17(r.L)
            << ',' << fmt17(r.fi_residual) << ',' << fmt17(r.kahler_residual) << "\n";
    }
    if (!out) throw std::runtime_error("write failure on " + path);
}

void write_report_json(const std::string& path, const RunResult& res) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << to_json(res.report).dump(2) << "\n";
    if (!out) throw std::runtime_error("write failure on " + path);
}

VerificationReport check_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile: " + path);

    std::map<std::string, std::string> meta;
    std::string line, header;
    bool header_seen = false;
    std::vector<std::array<double, 14>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto start = line.find_first_not_of("# ");
            if (start == std::string::npos) continue;
            const std::string body = line.substr(start);
            const auto eq = body.find('=');
            if (eq != std::string::npos) meta[body.substr(0, eq)] = body.substr(eq + 1);
            continue;
        }
        if (!header_seen) {
            header = line;
            header_seen = true;
            continue;
        }
        std::array<double, 14> row{};
        const char* ptr = line.c_str();
        for (int i = 0; i < 14; ++i) {
            char* end = nullptr;
            row[i] = std::strtod(ptr, &end);
            if (end == ptr) throw std::runtime_error("malformed data row in " + path);
            ptr = end;
            if (i < 13) {
                if (*ptr != ',') throw std::runtime_error("malformed data row in " + path);
                ++ptr;
            }
        }
        rows.push_back(row);
    }
    auto need = [&](const char* key) {
        const auto it = meta.find(key);
        if (it == meta.end())
            throw std::runtime_error(std::string("missing metadata key: ") + key);
        return it->second;
    };
    const int d = std::stoi(need("d"));
    const double q = std::stod(need("q"));
    const double C = std::stod(need("C"));
    const double lambda = std::stod(need("lambda"));
    const double Lambda = std::stod(need("Lambda"));
    if (rows.empty()) throw std::runtime_error("profile has no data rows");

    const SolitonParams p = make_params(d, q);
    FirstIntegralContext ctx;
    ctx.C = C;
    ctx.lambda = lambda;
    ctx.Lambda = Lambda;
    ctx.gamma = (Lambda + p.A2) / 2.0;

    VerificationReport rep;
    rep.add(make_entry("check-columns", header == kColumns, header == kColumns ? 1.0 : 0.0,
                       0.0, "column header matches the documented order"));
    const double lam_dev = std::abs(Lambda - C * lambda * lambda);
    rep.add(make_entry("check-lambda-consistency", lam_dev <= 1e-12 * std::max(1.0, Lambda),
                       lam_dev, 1e-12, "metadata satisfies Lambda = C lambda^2"));
    rep.add(make_report_only("check-rows", double(rows.size()), "data rows read"));

    enum { S = 0, T, F, G, HS, H, SC, X, Y, Z, W, L, FI, KR };
    double min_ds = std::numeric_limits<double>::infinity();
    double min_dh = std::numeric_limits<double>::infinity();
    double s_dev = 0, fi_dev = 0, k_dev = 0, l_dev = 0;
    double hs_min = std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    double f_min = std::numeric_limits<double>::infinity();
    double sc_min = std::numeric_limits<double>::infinity();
    double sc_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = rows[k];
        if (k > 0) {
            min_ds = std::min(min_ds, r[S] - rows[k - 1][S]);
            min_dh = std::min(min_dh, r[H] - rows[k - 1][H]);
        }
        s_dev = std::max(s_dev, std::abs(r[SC] - (C - r[HS] * r[HS])));
        const PhaseState st{r[T],
                            r[X],
                            r[Y],
                            r[Z],
                            r[W],
                            std::log(std::max(r[G], std::numeric_limits<double>::min())),
                            r[S],
                            r[F],
                            r[L]};
        fi_dev = std::max(fi_dev, std::abs(r[FI] - first_integral_residual(p, ctx, st)));
        const double gs = r[Y] > 0 ? r[X] / r[Y] : 0.0;
        k_dev = std::max(k_dev,
                         std::abs(r[KR] - (-(p.d + 2) / 2.0 * p.q * r[F] - gs * r[G])));
        l_dev = std::max(l_dev, std::abs(r[L] - r[G] * r[Y]) / std::max(1.0, std::abs(r[L])));
        hs_min = std::min(hs_min, r[HS]);
        g_min = std::min(g_min, r[G]);
        f_min = std::min(f_min, r[F]);
        sc_min = std::min(sc_min, r[SC]);
        sc_max = std::max(sc_max, r[SC]);
    }
    rep.add(make_entry("check-s-increasing", min_ds > 0.0, min_ds, 0.0,
                       "arclength column strictly increases"));
    rep.add(make_entry("check-S-identity", s_dev <= 1e-12, s_dev, 1e-12,
                       "stored S equals C - h_s^2 row-wise"));
    rep.add(make_entry("check-fi-identity", fi_dev <= 1e-12, fi_dev, 1e-12,
                       "stored conserved-quantity residual matches its recomputation"));
    rep.add(make_entry("check-kahler-identity", k_dev <= 1e-12, k_dev, 1e-12,
                       "stored Kaehler residual matches its recomputation"));
    rep.add(make_entry("check-L-identity", l_dev <= 1e-5, l_dev, 1e-5,
                       "L agrees with g Y within interpolation accuracy"));
    rep.add(make_entry("check-hs-positive", hs_min > 0.0, hs_min, 0.0,
                       "h_s stays positive away from the zero section"));
    rep.add(make_entry("check-h-monotone", min_dh >= 0.0, min_dh, 0.0,
                       "potential h never decreases"));
    rep.add(make_entry("check-g-positive", g_min > 0.0, g_min, 0.0, "g stays positive"));
    rep.add(make_entry("check-f-positive", f_min > 0.0, f_min, 0.0,
                       "fiber radius stays positive away from the zero section"));
    rep.add(make_entry("check-S-range", sc_min >= -1e-7 && sc_max <= C + 1e-12, sc_min, 1e-7,
                       "scalar curvature stays within [0, C] up to roundoff"));
    return rep;
}

}  // namespace soliton
