#include "soliton/params.hpp"

#include <cmath>

namespace soliton {

SolitonParams make_params(int d, double q) {
    if (d < 2) throw invalid_params("base dimension must be >= 2");
    if (d % 2 != 0) throw invalid_params("base dimension must be even");
    if (q == 0.0 || !std::isfinite(q)) throw invalid_params("Chern ratio q must be finite and nonzero");
    SolitonParams p;
    p.d = d;
    p.q = q;
    p.A2 = double(d) * (d + 2);
    p.A3 = 0.25 * double(d) * double(d + 2) * double(d + 2) * q * q;
    return p;
}

FirstIntegralContext make_context(const SolitonParams& p, double Lambda, double lambda) {
    if (!(Lambda > 0.0) || !std::isfinite(Lambda)) throw invalid_params("Lambda must be positive and finite");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw invalid_params("lambda must be positive and finite");
    FirstIntegralContext ctx;
    ctx.Lambda = Lambda;
    ctx.lambda = lambda;
    ctx.C = Lambda / (lambda * lambda);
    ctx.gamma = 0.5 * (Lambda + p.A2);
    return ctx;
}

double lambda0_threshold(const SolitonParams& p) {
    return 3.0 * std::pow(2.0, 4.0 / 3.0) * p.A3 * (p.d + 2) / p.A2;
}

}  // namespace soliton
