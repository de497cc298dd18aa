// Exponential RK4 (Cox-Matthews) driver for the asymptotic tail of the flow,
// where the field splits as y' = Lam y + N(y) with a constant diagonal Lam
// carrying the O(1) contraction rates and a slowly varying N.  A classical
// explicit pair is stability-bound to h ~ 3 in that regime no matter the
// tolerance; integrating Lam exactly removes the bound so the controller can
// grow h with t.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "soliton/dopri.hpp"

namespace soliton::detail {

// e^z together with phi_k(z) = sum_{j>=0} z^j / (j+k)!, k = 1..3, evaluated
// without cancellation: truncated series under |z| < 0.1, direct form beyond.
struct Phis {
    double e = 1.0, p1 = 1.0, p2 = 0.5, p3 = 1.0 / 6.0;
};

inline Phis phis(double z) {
    Phis out;
    out.e = std::exp(z);
    if (std::abs(z) < 0.1) {
        constexpr double inv_fact[] = {1.0,
                                       1.0,
                                       1.0 / 2,
                                       1.0 / 6,
                                       1.0 / 24,
                                       1.0 / 120,
                                       1.0 / 720,
                                       1.0 / 5040,
                                       1.0 / 40320,
                                       1.0 / 362880,
                                       1.0 / 3628800,
                                       1.0 / 39916800};
        double p1 = 0.0, p2 = 0.0, p3 = 0.0, zj = 1.0;
        for (int j = 0; j <= 8; ++j) {
            p1 += zj * inv_fact[j + 1];
            p2 += zj * inv_fact[j + 2];
            p3 += zj * inv_fact[j + 3];
            zj *= z;
        }
        out.p1 = p1;
        out.p2 = p2;
        out.p3 = p3;
    } else {
        out.p1 = (out.e - 1.0) / z;
        out.p2 = (out.e - 1.0 - z) / (z * z);
        out.p3 = (out.e - 1.0 - z - 0.5 * z * z) / (z * z * z);
    }
    return out;
}

// Advances y' = rhs(t, y) from (t, y) with the diagonal split Lam until an
// event fires; same accept-callback and control contract as dopri5.  The
// error estimate compares the 4th-order update against the scheme's internal
// 2nd-order full-step stage, so accepted steps carry a large accuracy margin.
template <std::size_t N, class RHS, class OnAccept>
StepOutcome etd4_tail(RHS&& rhs, double t, std::array<double, N> y,
                      const std::array<double, N>& lam, const StepControl& ctl,
                      StepStats& stats, OnAccept&& on_accept) {
    using Vec = std::array<double, N>;
    constexpr double kSafety = 0.9, kFacMin = 0.2, kFacMax = 5.0;
    // Steps never outrun the algebraic decay scale of the tail.
    constexpr double kRelCap = 0.35;

    auto finite = [](const Vec& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    auto scaled_norm = [&](const Vec& v, const Vec& ya, const Vec& yb) {
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double sc = ctl.atol + ctl.rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            double r = v[i] / sc;
            acc += r * r;
        }
        return std::sqrt(acc / N);
    };
    auto nonlin = [&](double tt, const Vec& yy) {
        Vec f = rhs(tt, yy);
        for (std::size_t i = 0; i < N; ++i) f[i] -= lam[i] * yy[i];
        return f;
    };

    Vec f0 = rhs(t, y);
    if (!finite(y) || !finite(f0))
        throw std::runtime_error("non-finite state at tail start");

    double h = 1e-3 * std::max(std::abs(t), 1.0);
    bool just_rejected = false;
    while (stats.accepted < ctl.max_steps) {
        h = std::min({h, ctl.hmax, kRelCap * std::max(std::abs(t), 1.0)});
        const double floor_h = std::max(ctl.hmin, 4.0 * std::abs(t) *
                                                      std::numeric_limits<double>::epsilon());
        if (h < floor_h) return StepOutcome::Underflow;

        bool stage_failed = false;
        Vec y1{}, est{};
        try {
            Vec n1 = f0;
            for (std::size_t i = 0; i < N; ++i) n1[i] -= lam[i] * y[i];
            std::array<Phis, N> ph, ph2;
            for (std::size_t i = 0; i < N; ++i) {
                ph[i] = phis(h * lam[i]);
                ph2[i] = phis(0.5 * h * lam[i]);
            }
            Vec a, b, c;
            for (std::size_t i = 0; i < N; ++i)
                a[i] = ph2[i].e * y[i] + 0.5 * h * ph2[i].p1 * n1[i];
            const Vec n2 = nonlin(t + 0.5 * h, a);
            for (std::size_t i = 0; i < N; ++i)
                b[i] = ph2[i].e * y[i] + 0.5 * h * ph2[i].p1 * n2[i];
            const Vec n3 = nonlin(t + 0.5 * h, b);
            for (std::size_t i = 0; i < N; ++i)
                c[i] = ph2[i].e * a[i] + 0.5 * h * ph2[i].p1 * (2.0 * n3[i] - n1[i]);
            const Vec n4 = nonlin(t + h, c);
            for (std::size_t i = 0; i < N; ++i) {
                const double w1 = ph[i].p1 - 3.0 * ph[i].p2 + 4.0 * ph[i].p3;
                const double w2 = ph[i].p2 - 2.0 * ph[i].p3;
                const double w3 = 4.0 * ph[i].p3 - ph[i].p2;
                y1[i] = ph[i].e * y[i] +
                        h * (w1 * n1[i] + 2.0 * w2 * (n2[i] + n3[i]) + w3 * n4[i]);
                est[i] = y1[i] - c[i];
            }
        } catch (const std::exception&) {
            stage_failed = true;
        }

        double err = std::numeric_limits<double>::infinity();
        if (!stage_failed && finite(y1)) err = scaled_norm(est, y, y1);

        if (err <= 1.0) {
            stats.accepted++;
            const double t1 = t + h;
            Vec f1 = rhs(t1, y1);
            if (!finite(f1)) throw std::runtime_error("non-finite derivative in tail");
            if (!on_accept(t, y, f0, t1, y1, f1)) return StepOutcome::Event;
            t = t1;
            y = y1;
            f0 = f1;
            double fac = kSafety * std::pow(std::max(err, 1e-10), -1.0 / 3.0);
            fac = std::clamp(fac, kFacMin, just_rejected ? 1.0 : kFacMax);
            h *= fac;
            just_rejected = false;
        } else {
            stats.rejected++;
            double fac = std::isfinite(err)
                             ? std::max(kFacMin, kSafety * std::pow(err, -1.0 / 3.0))
                             : kFacMin;
            h *= fac;
            just_rejected = true;
        }
    }
    return StepOutcome::StepLimit;
}

}  // namespace soliton::detail
