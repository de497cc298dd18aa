#include "soliton/systems.hpp"

#include <cmath>

namespace soliton {

Vec4 core_tangent(const SolitonParams& p, double X, double Y, double Z, double W) {
    const double Q = p.d * X * X + Z * Z;
    return {
        X * (Q - 1.0) + (p.A2 / p.d) * Y * Y - (2.0 * p.A3 / p.d) * W * W,
        Y * (Q - X),
        Z * (Q - 1.0) + p.A3 * W * W,
        W * (Q - 2.0 * X + Z),
    };
}

Vec8 rhs_nonlin1(const SolitonParams& p, const Vec8& y) {
    const double X = y[0], Y = y[1], Z = y[2], W = y[3], lng = y[4], L = y[7];
    const Vec4 core = core_tangent(p, X, Y, Z, W);
    double f_t = 0.0;
    if (W != 0.0) {
        if (Y <= 0.0) throw degenerate_state("fiber tangent g Z W / Y undefined for Y <= 0");
        f_t = std::exp(lng) * Z * W / Y;
    }
    const double Q = p.d * X * X + Z * Z;
    return {core[0], core[1], core[2], core[3], X, L, f_t, L * Q};
}

Vec4 rhs_nonlin2(const SolitonParams& p, const Vec4& v) {
    const double X = v[0], Yt = v[1], Zt = v[2], W = v[3];
    const double Qt = p.d * X * X + Zt * Zt - 2.0 * Zt;
    return {
        -X * Qt - (p.A2 / p.d) * Yt + (2.0 * p.A3 / p.d) * W * W,
        -2.0 * Yt * (Qt - X + 1.0),
        -Zt * (Qt - Zt + 2.0) + p.d * X * X + p.A3 * W * W,
        -W * (Qt - Zt + 2.0 - 2.0 * X),
    };
}

std::array<double, 2> rhs_kahler(const SolitonParams& p, double X, double Ytil) {
    const double n = p.d + 2;
    const double P = p.d * X * X + n * n * Ytil * Ytil;
    return {X * (P - 2.0 * X - n * Ytil), Ytil * (P - 3.0 * n * Ytil + 2.0)};
}

double first_integral_residual(const SolitonParams& p, const FirstIntegralContext& ctx,
                               const PhaseState& st) {
    return p.d * st.X * st.X + p.A2 * st.Y * st.Y + st.Z * st.Z - p.A3 * st.W * st.W
           - 1.0 + ctx.C * st.L * st.L;
}

Mat4 linearization(const SolitonParams& p) {
    Mat4 a{};
    a[0][1] = -p.A2 / p.d;
    a[1][1] = -2.0;
    a[2][2] = -2.0;
    a[3][3] = -2.0;
    return a;
}

Mat4 fundamental_matrix(const SolitonParams& p, double t, double t0) {
    const double e = std::exp(-2.0 * (t - t0));
    Mat4 m{};
    m[0][0] = 1.0;
    m[0][1] = (p.A2 / (2.0 * p.d)) * (e - 1.0);
    m[1][1] = e;
    m[2][2] = e;
    m[3][3] = e;
    return m;
}

void nonlinearity_b_parts(const SolitonParams& p, const Vec4& v, Vec4& quad, Vec4& cubic) {
    const double X = v[0], Yt = v[1], Zt = v[2], W = v[3];
    quad = {
        2.0 * X * Zt + (2.0 * p.A3 / p.d) * W * W,
        2.0 * X * Yt + 4.0 * Yt * Zt,
        p.d * X * X + 3.0 * Zt * Zt + p.A3 * W * W,
        2.0 * X * W + 3.0 * Zt * W,
    };
    cubic = {
        -p.d * X * X * X - X * Zt * Zt,
        -2.0 * p.d * X * X * Yt - 2.0 * Yt * Zt * Zt,
        -p.d * X * X * Zt - Zt * Zt * Zt,
        -p.d * X * X * W - W * Zt * Zt,
    };
}

Vec4 nonlinearity_b(const SolitonParams& p, const Vec4& v) {
    Vec4 q, c;
    nonlinearity_b_parts(p, v, q, c);
    return {q[0] + c[0], q[1] + c[1], q[2] + c[2], q[3] + c[3]};
}

Vec4 mat_apply(const Mat4& m, const Vec4& v) {
    Vec4 r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i] += m[i][j] * v[j];
    return r;
}

Mat4 mat_mul(const Mat4& a, const Mat4& b) {
    Mat4 r{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k)
            for (int j = 0; j < 4; ++j) r[i][j] += a[i][k] * b[k][j];
    return r;
}

}  // namespace soliton
