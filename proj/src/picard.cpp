#include "soliton/picard.hpp"

#include "soliton/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace soliton {

namespace {

// Gauss-Legendre 3 on the unit interval.
constexpr double kGx[3] = {0.11270166537925831, 0.5, 0.88729833462074169};
constexpr double kGw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

// Weighted profile c(ttil) = e^{2 ttil} v(ttil); slowly varying, so local
// quintic interpolation of c recovers v between nodes to near machine level
// while the exponential envelope is handled by the quadrature exactly enough
// (Gauss-3 on panels a few percent of a decay length).
struct Profile {
    const std::vector<double>& x;
    std::vector<Vec4> c;

    Profile(const WeightedGrid& grid, const std::vector<Vec4>& v) : x(grid.nodes) {
        c.resize(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) {
            const double w = std::exp(2.0 * x[k]);
            for (int i = 0; i < 4; ++i) c[k][i] = v[k][i] * w;
        }
    }

    Vec4 at(std::size_t panel, double s) const {
        const std::size_t n1 = x.size();
        const std::size_t width = std::min<std::size_t>(6, n1);
        std::size_t j0 = 0;
        if (n1 > width) {
            j0 = (panel >= 2) ? panel - 2 : 0;
            j0 = std::min(j0, n1 - width);
        }
        Vec4 out{};
        for (std::size_t k = 0; k < width; ++k) {
            double lk = 1.0;
            for (std::size_t b = 0; b < width; ++b) {
                if (b == k) continue;
                lk *= (s - x[j0 + b]) / (x[j0 + k] - x[j0 + b]);
            }
            for (int i = 0; i < 4; ++i) out[i] += lk * c[j0 + k][i];
        }
        return out;
    }
};

double wnorm_delta(const WeightedGrid& grid, const std::vector<Vec4>& a,
                   const std::vector<Vec4>& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double w = std::exp(2.0 * grid.nodes[k]);
        for (int i = 0; i < 4; ++i) m = std::max(m, w * std::abs(a[k][i] - b[k][i]));
    }
    return m;
}

}  // namespace

WeightedGrid WeightedGrid::uniform(int n, double tmax) {
    if (n < 8) throw std::invalid_argument("grid needs at least 8 panels");
    if (!(tmax > 0)) throw std::invalid_argument("tmax_tilde must be positive");
    WeightedGrid g;
    g.tmax = tmax;
    g.nodes.resize(n + 1);
    for (int k = 0; k <= n; ++k) g.nodes[k] = tmax * double(k) / n;
    g.nodes.back() = tmax;
    return g;
}

Vec4 seed_coeffs(const SolitonParams& p, const SeedSpec& spec) {
    return {spec.eps * p.A2 / (2.0 * p.d), spec.eps, spec.eps * spec.gamma, spec.eps * spec.beta};
}

std::vector<Vec4> build_seed(const SolitonParams& p, const WeightedGrid& grid,
                             const SeedSpec& spec) {
    const Vec4 u0 = seed_coeffs(p, spec);
    std::vector<Vec4> v(grid.nodes.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double e = std::exp(-2.0 * grid.nodes[k]);
        for (int i = 0; i < 4; ++i) v[k][i] = u0[i] * e;
    }
    return v;
}

double weighted_norm(const WeightedGrid& grid, const std::vector<Vec4>& v) {
    double m = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double w = std::exp(2.0 * grid.nodes[k]);
        for (int i = 0; i < 4; ++i) m = std::max(m, w * std::abs(v[k][i]));
    }
    return m;
}

std::vector<Vec4> apply_T(const SolitonParams& p, const WeightedGrid& grid,
                          const SeedSpec& spec, const std::vector<Vec4>& v) {
    const std::size_t n1 = grid.nodes.size();
    assert(v.size() == n1);
    const double T = grid.tmax;
    const Vec4 u0 = seed_coeffs(p, spec);
    const double radius = spec.ball_radius > 0 ? spec.ball_radius : 2.0 * spec.gamma * spec.eps;

    const Profile prof(grid, v);
    for (std::size_t k = 0; k < n1; ++k) {
        for (int i = 0; i < 4; ++i)
            if (std::abs(prof.c[k][i] - u0[i]) > radius)
                throw non_contraction("iterate left the weighted ball around the seed");
        // Negative Y^2 means the iterate left the germ domain; exact zero is
        // allowed (the operator maps the zero profile to the seed).
        if (v[k][1] < 0.0) throw non_contraction("iterate lost positivity of Y^2");
    }

    // Panel integrals of b(v) and e^{2s} b(v).
    std::vector<Vec4> P(n1 - 1, Vec4{}), Q(n1 - 1, Vec4{});
    for (std::size_t m = 0; m + 1 < n1; ++m) {
        const double a = grid.nodes[m], b = grid.nodes[m + 1], hm = b - a;
        for (int g = 0; g < 3; ++g) {
            const double s = a + hm * kGx[g];
            const Vec4 cg = prof.at(m, s);
            const double e2s = std::exp(2.0 * s);
            Vec4 vg;
            for (int i = 0; i < 4; ++i) vg[i] = cg[i] / e2s;
            const Vec4 bg = nonlinearity_b(p, vg);
            for (int i = 0; i < 4; ++i) {
                P[m][i] += hm * kGw[g] * bg[i];
                Q[m][i] += hm * kGw[g] * bg[i] * e2s;
            }
        }
    }

    // Closed-form tails for s > T with the weighted profile frozen at c(T):
    // b(v) = quad(cT) e^{-4s} + cubic(cT) e^{-6s}.
    Vec4 cT = prof.c[n1 - 1], quad, cubic;
    nonlinearity_b_parts(p, cT, quad, cubic);
    const double e2 = std::exp(-2.0 * T), e4 = e2 * e2, e6 = e4 * e2;
    std::vector<Vec4> J(n1), E(n1);
    for (int i = 0; i < 4; ++i) {
        J[n1 - 1][i] = quad[i] * e4 / 4.0 + cubic[i] * e6 / 6.0;
        E[n1 - 1][i] = quad[i] * e2 / 2.0 + cubic[i] * e4 / 4.0;
    }
    for (std::size_t k = n1 - 1; k-- > 0;)
        for (int i = 0; i < 4; ++i) {
            J[k][i] = J[k + 1][i] + P[k][i];
            E[k][i] = E[k + 1][i] + Q[k][i];
        }

    const double couple = p.A2 / (2.0 * p.d);
    std::vector<Vec4> out(n1);
    for (std::size_t k = 0; k < n1; ++k) {
        const double em2 = std::exp(-2.0 * grid.nodes[k]);
        out[k][0] = u0[0] * em2 - (J[k][0] + couple * (em2 * E[k][1] - J[k][1]));
        for (int i = 1; i < 4; ++i) out[k][i] = u0[i] * em2 - em2 * E[k][i];
    }
    return out;
}

PicardResult iterate_to_fixed_point(const SolitonParams& p, const FirstIntegralContext& ctx,
                                    const WeightedGrid& grid, SeedSpec spec,
                                    const PicardOptions& opts) {
    (void)ctx;
    std::string last_error = "did not converge";
    for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
        PicardResult res;
        res.grid = grid;
        res.seed = spec;
        res.retries = attempt;
        std::vector<Vec4> v = build_seed(p, grid, spec);
        double prev_delta = -1.0;
        bool converged = false, diverging = false;
        try {
            for (int it = 1; it <= opts.max_iter; ++it) {
                std::vector<Vec4> vn = apply_T(p, grid, spec, v);
                const double delta = wnorm_delta(grid, vn, v);
                v = std::move(vn);
                res.iterations = it;
                if (it == 1) res.first_correction_norm = delta;
                if (prev_delta > 0.0) {
                    const double ratio = delta / prev_delta;
                    res.contraction_ratios.push_back(ratio);
                    // Ratios near the machine floor are noise, not dynamics.
                    if (ratio >= 1.0 && delta > 1e3 * opts.tol) {
                        diverging = true;
                        break;
                    }
                }
                prev_delta = delta;
                if (delta < opts.tol) {
                    converged = true;
                    break;
                }
            }
        } catch (const non_contraction& e) {
            last_error = e.what();
            diverging = true;
        }
        if (converged && !diverging) {
            res.v = std::move(v);
            const std::size_t n1 = res.v.size();
            double xs[3], wy2[3], zy2[3], xy2[3];
            for (int j = 0; j < 3; ++j) {
                const std::size_t k = n1 - 3 + j;
                xs[j] = std::exp(-2.0 * grid.nodes[k]);
                wy2[j] = res.v[k][3] / res.v[k][1];
                zy2[j] = res.v[k][2] / res.v[k][1];
                xy2[j] = res.v[k][0] / res.v[k][1];
            }
            res.limit_WY2 = extrapolate_to_zero(xs, wy2);
            res.limit_1mZY2 = extrapolate_to_zero(xs, zy2);
            res.limit_XY2 = extrapolate_to_zero(xs, xy2);
            return res;
        }
        spec.eps *= 0.5;
        if (!diverging) last_error = "iteration exceeded max_iter";
    }
    throw non_contraction("fixed-point iteration failed after eps retries: " + last_error);
}

// --- germ materialization ------------------------------------------------

namespace {

// int_a^b c1(s) e^{-2s} ds on a sub-span of one panel.
double gauss_x_integral(const Profile& prof, std::size_t panel, double a, double b) {
    double acc = 0.0;
    const double hm = b - a;
    for (int g = 0; g < 3; ++g) {
        const double s = a + hm * kGx[g];
        acc += hm * kGw[g] * prof.at(panel, s)[0] * std::exp(-2.0 * s);
    }
    return acc;
}

}  // namespace

std::vector<PhaseState> germ_states(const SolitonParams&, const FirstIntegralContext& ctx,
                                    const PicardResult& res) {
    const WeightedGrid& grid = res.grid;
    const std::size_t n1 = grid.nodes.size();
    const double T = grid.tmax;
    const double lam = ctx.lambda;
    const Profile prof(grid, res.v);

    // IX[k] = int_{node_k}^{inf} v1, so that g = lambda e^{IX}.
    std::vector<double> IX(n1);
    IX[n1 - 1] = prof.c[n1 - 1][0] * std::exp(-2.0 * T) / 2.0;
    for (std::size_t k = n1 - 1; k-- > 0;)
        IX[k] = IX[k + 1] + gauss_x_integral(prof, k, grid.nodes[k], grid.nodes[k + 1]);

    auto g_at = [&](std::size_t panel, double s) {
        const double ix = IX[panel + 1] + gauss_x_integral(prof, panel, s, grid.nodes[panel + 1]);
        return lam * std::exp(ix);
    };

    // Arclength and fiber-radius quadratures; both integrands decay like e^{-s}
    // times a slowly varying factor, with frozen-profile tails past T.
    std::vector<double> S(n1), F(n1);
    {
        const Vec4 cT = prof.c[n1 - 1];
        const double gT = lam * std::exp(IX[n1 - 1]);
        const double sq = std::sqrt(cT[1]);
        const double v3T = cT[2] * std::exp(-2.0 * T);
        S[n1 - 1] = gT * sq * std::exp(-T);
        F[n1 - 1] = gT * (1.0 - v3T) * (cT[3] / sq) * std::exp(-T);
    }
    for (std::size_t m = n1 - 1; m-- > 0;) {
        const double a = grid.nodes[m], b = grid.nodes[m + 1], hm = b - a;
        double ps = 0.0, pf = 0.0;
        for (int g = 0; g < 3; ++g) {
            const double s = a + hm * kGx[g];
            const Vec4 cg = prof.at(m, s);
            const double gs = g_at(m, s);
            const double em1 = std::exp(-s);
            const double sq = std::sqrt(cg[1]);
            const double v3 = cg[2] * em1 * em1;
            ps += hm * kGw[g] * gs * sq * em1;
            pf += hm * kGw[g] * gs * (1.0 - v3) * (cg[3] / sq) * em1;
        }
        S[m] = S[m + 1] + ps;
        F[m] = F[m + 1] + pf;
    }

    std::vector<PhaseState> out;
    out.reserve(n1);
    for (std::size_t k = n1; k-- > 0;) {
        const Vec4& v = res.v[k];
        PhaseState st;
        st.t = -grid.nodes[k];
        st.X = v[0];
        st.Y = std::sqrt(v[1]);
        st.Z = 1.0 - v[2];
        st.W = v[3];
        st.lng = std::log(lam) + IX[k];
        st.s = S[k];
        st.f = F[k];
        st.L = lam * std::exp(IX[k]) * st.Y;
        out.push_back(st);
    }
    return out;
}

PhaseState handoff_state(const SolitonParams& p, const FirstIntegralContext& ctx,
                         const PicardResult& res) {
    return germ_states(p, ctx, res).back();
}

}  // namespace soliton
