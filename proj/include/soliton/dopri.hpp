// Generic Dormand-Prince 5(4) driver used by the forward flow and the
// reduced Kaehler flow.  FSAL, PI step-size control, accepted steps handed to
// the caller together with end-point derivatives (enough for cubic Hermite
// dense output).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace soliton::detail {

struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-12;
    double hmax = std::numeric_limits<double>::infinity();
    double hmin = 1e-14;  // also bounded below by a few ulp of t
    double h0 = 0.0;      // 0: automatic
    std::size_t max_steps = 2000000;
};

enum class StepOutcome { Event, StepLimit, Underflow };

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

// Butcher tableau of Dormand-Prince 5(4).
inline constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// Error weights: 5th-order minus embedded 4th-order solution.
inline constexpr double kE[7] = {71.0 / 57600,     0.0,        -71.0 / 16695, 71.0 / 1920,
                                 -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

// Integrates y' = rhs(t, y) forward from (t0, y0).  After every accepted step
// calls on_accept(t0, y0, f0, t1, y1, f1); a false return is the caller's stop
// event and ends the run with StepOutcome::Event.  Exceptions thrown by rhs
// during trial stages reject the step; non-finite accepted states throw.
template <std::size_t N, class RHS, class OnAccept>
StepOutcome dopri5(RHS&& rhs, double t, std::array<double, N> y, const StepControl& ctl,
                   StepStats& stats, OnAccept&& on_accept) {
    using Vec = std::array<double, N>;
    constexpr double kSafety = 0.9, kFacMin = 0.2, kFacMax = 6.0;
    constexpr double kAlpha = 0.17, kBeta = 0.04;  // PI exponents for order 5

    auto finite = [](const Vec& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };

    Vec f0 = rhs(t, y);
    if (!finite(y) || !finite(f0))
        throw std::runtime_error("non-finite state at integration start");

    auto scaled_norm = [&](const Vec& v, const Vec& ya, const Vec& yb) {
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double sc = ctl.atol + ctl.rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            double r = v[i] / sc;
            acc += r * r;
        }
        return std::sqrt(acc / N);
    };

    double h = ctl.h0;
    if (h <= 0.0) {
        // Hairer-style starting step from the local scale of y and y'.
        double d0 = scaled_norm(y, y, y), d1 = scaled_norm(f0, y, y);
        double ha = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * (d0 / d1);
        Vec y1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + ha * f0[i];
        double d2 = 0.0;
        try {
            Vec f1 = rhs(t + ha, y1);
            Vec df;
            for (std::size_t i = 0; i < N; ++i) df[i] = f1[i] - f0[i];
            d2 = scaled_norm(df, y, y) / ha;
        } catch (const std::exception&) {
            d2 = 1.0 / ha;
        }
        double hb = (std::max(d1, d2) <= 1e-15)
                        ? std::max(1e-6, ha * 1e-3)
                        : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
        h = std::min({100.0 * ha, hb, ctl.hmax});
    }

    double err_prev = 1e-4;
    bool just_rejected = false;
    while (stats.accepted < ctl.max_steps) {
        h = std::min(h, ctl.hmax);
        const double floor_h = std::max(ctl.hmin, 4.0 * std::abs(t) *
                                                      std::numeric_limits<double>::epsilon());
        if (h < floor_h) return StepOutcome::Underflow;

        std::array<Vec, 7> k;
        k[0] = f0;
        bool stage_failed = false;
        Vec y1{}, yerr{};
        try {
            for (int s = 1; s < 7; ++s) {
                Vec ys = y;
                for (int j = 0; j < s; ++j) {
                    const double a = kA[s][j];
                    if (a == 0.0) continue;
                    for (std::size_t i = 0; i < N; ++i) ys[i] += h * a * k[j][i];
                }
                k[s] = rhs(t + kC[s] * h, ys);
                if (!finite(k[s])) {
                    stage_failed = true;
                    break;
                }
                if (s == 6) y1 = ys;  // stage 7 is evaluated at the 5th-order solution
            }
        } catch (const std::exception&) {
            stage_failed = true;
        }

        double err = std::numeric_limits<double>::infinity();
        if (!stage_failed && finite(y1)) {
            for (std::size_t i = 0; i < N; ++i) {
                double e = 0.0;
                for (int s = 0; s < 7; ++s) e += kE[s] * k[s][i];
                yerr[i] = h * e;
            }
            err = scaled_norm(yerr, y, y1);
        }

        if (err <= 1.0) {
            stats.accepted++;
            const double t1 = t + h;
            const Vec& f1 = k[6];  // FSAL
            if (!on_accept(t, y, f0, t1, y1, f1)) return StepOutcome::Event;
            t = t1;
            y = y1;
            f0 = f1;
            double fac = kSafety * std::pow(err, -kAlpha) * std::pow(err_prev, kBeta);
            fac = std::clamp(fac, kFacMin, just_rejected ? 1.0 : kFacMax);
            h *= fac;
            err_prev = std::max(err, 1e-4);
            just_rejected = false;
        } else {
            stats.rejected++;
            double fac = std::isfinite(err) ? std::max(kFacMin, kSafety * std::pow(err, -0.2))
                                            : kFacMin;
            h *= fac;
            just_rejected = true;
        }
    }
    return StepOutcome::StepLimit;
}

// Cubic Hermite evaluation on one accepted segment.
template <std::size_t N>
std::array<double, N> hermite(double t0, const std::array<double, N>& y0,
                              const std::array<double, N>& f0, double t1,
                              const std::array<double, N>& y1, const std::array<double, N>& f1,
                              double t) {
    const double h = t1 - t0, u = (t - t0) / h;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i];
    return out;
}

}  // namespace soliton::detail
