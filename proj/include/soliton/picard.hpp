// Germ construction: contraction iteration for the integral operator
//   (T_u v)(ttil) = u(ttil) - int_ttil^inf Phi(ttil, s) b(v(s)) ds
// on the weight-e^{2 ttil} Banach space, followed by the handoff of the fixed
// point to the forward flow.
#pragma once

#include <stdexcept>
#include <vector>

#include "soliton/params.hpp"
#include "soliton/state.hpp"
#include "soliton/systems.hpp"

namespace soliton {

// Seed ray u(ttil) = eps * (A2/(2d), 1, gamma, beta) e^{-2 ttil}.  gamma pins
// the germ ratio (1-Z)/Y^2 and beta = 1 pins W/Y^2, i.e. the smooth closing.
struct SeedSpec {
    double gamma = 0.0;
    double beta = 1.0;
    double eps = 1e-3;
    double ball_radius = 0.0;  // 0: picked as 2*gamma*eps at build time
};

// Quadrature grid on [0, tmax_tilde]; nodes[0] = 0, strictly increasing,
// nodes.back() = tmax_tilde.  Default construction is uniform, which gives
// uniform relative resolution of the e^{-2 ttil} envelope.
struct WeightedGrid {
    double tmax = 12.0;
    std::vector<double> nodes;

    static WeightedGrid uniform(int n, double tmax);
    std::size_t panels() const { return nodes.size() - 1; }
};

struct non_contraction : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PicardOptions {
    double tol = 1e-12;   // weighted sup-norm of the update
    int max_iter = 200;
    int max_retries = 6;  // eps halvings on non-contraction
};

struct PicardResult {
    WeightedGrid grid;
    SeedSpec seed;                     // seed actually used (eps after retries)
    std::vector<Vec4> v;               // fixed point at the nodes
    std::vector<double> contraction_ratios;
    double first_correction_norm = 0;  // ||T_u u - u|| in the weighted norm
    int iterations = 0;
    int retries = 0;
    double limit_WY2 = 0;              // lim W/Y^2   (smooth closing: 1)
    double limit_1mZY2 = 0;            // lim (1-Z)/Y^2 (gamma)
    double limit_XY2 = 0;              // lim X/Y^2   (A2/(2d))
};

Vec4 seed_coeffs(const SolitonParams& p, const SeedSpec& spec);

// Seed evaluated at the grid nodes.
std::vector<Vec4> build_seed(const SolitonParams& p, const WeightedGrid& grid,
                             const SeedSpec& spec);

// One application of T_u.  Checks that v stays in the seed's weighted ball;
// throws non_contraction on violation (v not decaying at the required rate).
std::vector<Vec4> apply_T(const SolitonParams& p, const WeightedGrid& grid,
                          const SeedSpec& spec, const std::vector<Vec4>& v);

PicardResult iterate_to_fixed_point(const SolitonParams& p, const FirstIntegralContext& ctx,
                                    const WeightedGrid& grid, SeedSpec spec,
                                    const PicardOptions& opts = {});

// Fixed point materialized as phase states on t in [-tmax, 0], increasing t.
// lng, s, f are quadratures of the germ with closed-form exponential tails;
// L = g Y exactly on the germ.
std::vector<PhaseState> germ_states(const SolitonParams& p, const FirstIntegralContext& ctx,
                                    const PicardResult& res);

PhaseState handoff_state(const SolitonParams& p, const FirstIntegralContext& ctx,
                         const PicardResult& res);

double weighted_norm(const WeightedGrid& grid, const std::vector<Vec4>& v);

}  // namespace soliton
