// Phase-space state records for the three coordinate systems in use.
#pragma once

#include <array>
#include <cmath>

namespace soliton {

// Augmented phase point along the t-flow.  (X, Y, Z, W) is the core state;
// lng = ln g, s = arclength from the zero section, f = fiber radius and
// L = g*Y ride along as quadratures of the same flow.
struct PhaseState {
    double t = 0.0;
    double X = 0.0;
    double Y = 0.0;
    double Z = 0.0;
    double W = 0.0;
    double lng = 0.0;
    double s = 0.0;
    double f = 0.0;
    double L = 0.0;

    std::array<double, 8> vec() const { return {X, Y, Z, W, lng, s, f, L}; }
    static PhaseState from_vec(double t, const std::array<double, 8>& y) {
        return {t, y[0], y[1], y[2], y[3], y[4], y[5], y[6], y[7]};
    }
};

// Germ-end coordinates: ttil = -t, Yt = Y^2, Zt = 1 - Z.  Storing Yt and Zt
// directly keeps full precision where Y^2 and 1-Z underflow the spacing of
// doubles around 1.
struct TildeState {
    double ttil = 0.0;
    double X = 0.0;
    double Yt = 0.0;
    double Zt = 0.0;
    double W = 0.0;
};

inline TildeState to_tilde(const PhaseState& p) {
    return {-p.t, p.X, p.Y * p.Y, 1.0 - p.Z, p.W};
}

inline PhaseState from_tilde(const TildeState& v) {
    PhaseState p;
    p.t = -v.ttil;
    p.X = v.X;
    p.Y = std::sqrt(v.Yt);
    p.Z = 1.0 - v.Zt;
    p.W = v.W;
    return p;
}

// Reduced coordinates on the Kaehler branch: Ytil = Y^2 / X.
struct KahlerState {
    double t = 0.0;
    double X = 0.0;
    double Ytil = 0.0;
};

}  // namespace soliton
