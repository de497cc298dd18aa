// Command-line front end: solve / kahler / compare / sweep / check.
// Exit codes: 0 all checks pass, 2 verification failure or non-convergence,
// 3 invalid input.
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "soliton/pipeline.hpp"

namespace {

using namespace soliton;

struct RunFlags {
    std::string config;
    std::optional<int> d;
    std::optional<double> q, Lambda, lambda0, rtol, atol, picard_tol, tmax_tilde;
    std::optional<int> nodes;
    std::optional<std::string> out, report;
};

void add_run_options(CLI::App* cmd, RunFlags& fs) {
    cmd->add_option("--config", fs.config, "JSON config file; flags override its fields");
    cmd->add_option("--d", fs.d, "base dimension (even, at least 2)");
    cmd->add_option("--q", fs.q, "Chern ratio (nonzero)");
    cmd->add_option("--Lambda", fs.Lambda, "family parameter C lambda^2");
    cmd->add_option("--lambda0", fs.lambda0, "prescribed limit of g at the zero section");
    cmd->add_option("--rtol", fs.rtol, "relative tolerance of the adaptive integrator");
    cmd->add_option("--atol", fs.atol, "absolute tolerance of the adaptive integrator");
    cmd->add_option("--picard-tol", fs.picard_tol, "weighted-norm tolerance of the germ iteration");
    cmd->add_option("--tmax-tilde", fs.tmax_tilde, "germ grid horizon");
    cmd->add_option("--nodes", fs.nodes, "germ grid node count");
    cmd->add_option("--out", fs.out, "profile CSV output path");
    cmd->add_option("--report", fs.report, "verification report JSON output path");
}

RunConfig build_config(const RunFlags& fs, const std::string& pipeline) {
    RunConfig cfg;
    if (!fs.config.empty()) cfg = RunConfig::from_json_file(fs.config);
    if (fs.d) cfg.d = *fs.d;
    if (fs.q) cfg.q = *fs.q;
    if (fs.Lambda) cfg.Lambda = *fs.Lambda;
    if (fs.lambda0) cfg.lambda0 = *fs.lambda0;
    if (fs.rtol) cfg.rtol = *fs.rtol;
    if (fs.atol) cfg.atol = *fs.atol;
    if (fs.picard_tol) cfg.picard_tol = *fs.picard_tol;
    if (fs.tmax_tilde) cfg.tmax_tilde = *fs.tmax_tilde;
    if (fs.nodes) cfg.nodes = *fs.nodes;
    if (fs.out) cfg.out_csv = *fs.out;
    if (fs.report) cfg.out_report = *fs.report;
    if (!pipeline.empty()) cfg.pipeline = pipeline;
    cfg.apply_env();
    cfg.validate();
    return cfg;
}

void print_summary(const RunResult& res) {
    std::printf("pipeline=%s d=%d q=%.17g Lambda=%.17g lambda=%.17g\n",
                res.config.pipeline.c_str(), res.params.d, res.params.q, res.ctx.Lambda,
                res.ctx.lambda);
    std::printf("outcome=%s verdict=%s classification=%s\n",
                to_string(res.trajectory.outcome).c_str(), to_string(res.verdict).c_str(),
                to_string(res.asym).c_str());
    std::printf("final_L_sqrtC=%.12g fi_drift=%.3g min_WY2_margin=%.6g samples=%zu\n",
                res.final_L_sqrtC, res.trajectory.max_first_integral_drift,
                res.trajectory.min_WY2_margin, res.trajectory.samples.size());
    std::size_t pass = 0, fail = 0, info = 0;
    for (const auto& e : res.report.entries) {
        if (e.status == CheckStatus::Pass) ++pass;
        else if (e.status == CheckStatus::Fail) ++fail;
        else ++info;
    }
    std::printf("checks: %zu pass, %zu fail, %zu report-only\n", pass, fail, info);
    for (const auto& e : res.report.entries)
        if (e.status == CheckStatus::Fail)
            std::printf("FAIL %s measured=%.17g tolerance=%.17g\n", e.name.c_str(), e.measured,
                        e.tolerance);
}

int do_run(const RunFlags& fs, const std::string& pipeline) {
    const RunConfig cfg = build_config(fs, pipeline);
    const RunResult res = run_config(cfg);
    if (!cfg.out_csv.empty()) write_profile_csv(cfg.out_csv, res);
    if (!cfg.out_report.empty()) write_report_json(cfg.out_report, res);
    print_summary(res);
    return res.report.all_pass() ? 0 : 2;
}

int do_compare(const std::string& config_a, const std::string& config_b,
               const std::string& report_path) {
    RunConfig a = RunConfig::from_json_file(config_a);
    RunConfig b = RunConfig::from_json_file(config_b);
    a.apply_env();
    b.apply_env();
    a.validate();
    b.validate();
    const RunResult ra = run_config(a);
    const RunResult rb = run_config(b);
    const DeviationRecord dev = compare_profiles(ra.profile, rb.profile);
    std::printf("compared s range [%.17g, %.17g]\n", dev.s_lo, dev.s_hi);
    std::printf("deviation f=%.17g g=%.17g h_s=%.17g max=%.17g\n", dev.f, dev.g, dev.h_s,
                dev.max());
    if (!report_path.empty()) {
        nlohmann::ordered_json j;
        j["f"] = dev.f;
        j["g"] = dev.g;
        j["h_s"] = dev.h_s;
        j["max"] = dev.max();
        j["s_lo"] = dev.s_lo;
        j["s_hi"] = dev.s_hi;
        std::ofstream out(report_path);
        if (!out) throw std::runtime_error("cannot open output file: " + report_path);
        out << j.dump(2) << "\n";
    }
    return (ra.report.all_pass() && rb.report.all_pass()) ? 0 : 2;
}

// foo.csv -> foo-L31.csv for the per-point outputs of a sweep.
std::string with_lambda_suffix(const std::string& path, double Lambda) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "-L%g", Lambda);
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || path.find('/', dot) != std::string::npos)
        return path + tag;
    return path.substr(0, dot) + tag + path.substr(dot);
}

struct SweepRow {
    double Lambda = 0;
    std::string outcome, verdict, cls;
    double l_sqrtc = 0, margin = 0;
    bool all_pass = false;
    std::string error;
};

int do_sweep(const RunFlags& fs, std::vector<double> lambdas, std::optional<int> workers_flag) {
    int workers = 0;
    if (!fs.config.empty()) {
        // Sweep-only keys live beside the run config in the same document.
        std::ifstream in(fs.config);
        nlohmann::json j;
        if (in && (in >> j, j.is_object())) {
            if (lambdas.empty() && j.contains("Lambdas"))
                lambdas = j["Lambdas"].get<std::vector<double>>();
            if (!workers_flag && j.contains("workers")) workers = j["workers"].get<int>();
        }
    }
    if (workers_flag) workers = *workers_flag;
    if (workers <= 0) workers = 4;
    if (lambdas.empty()) throw invalid_params("sweep requires a nonempty Lambda list");
    std::sort(lambdas.begin(), lambdas.end());

    // Validate the shared part once up front so a bad base config is exit 3,
    // not a page of per-row failures.
    {
        RunFlags probe = fs;
        probe.Lambda = lambdas.front();
        build_config(probe, "");
    }

    std::vector<SweepRow> rows(lambdas.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= lambdas.size()) break;
            SweepRow& row = rows[i];
            row.Lambda = lambdas[i];
            try {
                RunFlags rf = fs;
                rf.Lambda = lambdas[i];
                RunConfig cfg = build_config(rf, "");
                const RunResult res = run_config(cfg);
                if (!cfg.out_csv.empty())
                    write_profile_csv(with_lambda_suffix(cfg.out_csv, lambdas[i]), res);
                if (!cfg.out_report.empty())
                    write_report_json(with_lambda_suffix(cfg.out_report, lambdas[i]), res);
                row.outcome = to_string(res.trajectory.outcome);
                row.verdict = to_string(res.verdict);
                row.cls = to_string(res.asym);
                row.l_sqrtc = res.final_L_sqrtC;
                row.margin = res.trajectory.min_WY2_margin;
                row.all_pass = res.report.all_pass();
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(workers, static_cast<int>(lambdas.size()));
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();

    std::printf("%10s  %-18s %-15s %-12s %-12s %-16s %s\n", "Lambda", "outcome", "verdict",
                "L*sqrtC", "min_margin", "classification", "status");
    bool ok = true;
    for (const auto& row : rows) {
        if (!row.error.empty()) {
            std::printf("%10g  run failed: %s\n", row.Lambda, row.error.c_str());
            ok = false;
            continue;
        }
        std::printf("%10g  %-18s %-15s %-12.8f %-12.4g %-16s %s\n", row.Lambda,
                    row.outcome.c_str(), row.verdict.c_str(), row.l_sqrtc, row.margin,
                    row.cls.c_str(), row.all_pass ? "pass" : "FAIL");
        ok = ok && row.all_pass;
    }
    return ok ? 0 : 2;
}

int do_check(const std::string& path, const std::string& report_path) {
    VerificationReport rep;
    try {
        rep = check_profile_csv(path);
    } catch (const std::exception& e) {
        std::cerr << "invalid profile: " << e.what() << "\n";
        return 3;
    }
    std::size_t fail = 0;
    for (const auto& e : rep.entries) {
        std::printf("%-28s %-11s measured=%.17g\n", e.name.c_str(),
                    to_string(e.status).c_str(), e.measured);
        if (e.status == CheckStatus::Fail) ++fail;
    }
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw std::runtime_error("cannot open output file: " + report_path);
        out << to_json(rep).dump(2) << "\n";
    }
    return fail == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"constructs and verifies the steady soliton family on line bundles"};
    app.require_subcommand(1);

    RunFlags solve_fs, kahler_fs, sweep_fs;
    CLI::App* solve = app.add_subcommand("solve", "general construction at one Lambda");
    add_run_options(solve, solve_fs);
    CLI::App* kahler = app.add_subcommand("kahler", "reduced q = -1 construction");
    add_run_options(kahler, kahler_fs);

    std::string cmp_a, cmp_b, cmp_report;
    CLI::App* compare = app.add_subcommand("compare", "run two configs and compare profiles");
    compare->add_option("--config", cmp_a, "first run config")->required();
    compare->add_option("--config2", cmp_b, "second run config")->required();
    compare->add_option("--report", cmp_report, "deviation record JSON output path");

    std::vector<double> lambdas;
    std::optional<int> workers;
    CLI::App* sweep = app.add_subcommand("sweep", "run a list of Lambda values");
    add_run_options(sweep, sweep_fs);
    sweep->add_option("--Lambdas", lambdas, "Lambda values to run")->delimiter(',');
    sweep->add_option("--workers", workers, "concurrent run count");

    std::string check_path, check_report;
    CLI::App* check = app.add_subcommand("check", "re-verify a stored profile CSV");
    check->add_option("profile", check_path, "profile CSV path")->required();
    check->add_option("--report", check_report, "check report JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    try {
        if (solve->parsed()) return do_run(solve_fs, "general");
        if (kahler->parsed()) return do_run(kahler_fs, "kahler");
        if (compare->parsed()) return do_compare(cmp_a, cmp_b, cmp_report);
        if (sweep->parsed()) return do_sweep(sweep_fs, lambdas, workers);
        if (check->parsed()) return do_check(check_path, check_report);
    } catch (const invalid_params& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 3;
    } catch (const comparison_error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 3;
}
