#include "soliton/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace soliton {

double extrapolate_to_zero(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size() && !x.empty());
    std::vector<double> p(y.begin(), y.end());
    const std::size_t n = x.size();
    for (std::size_t level = 1; level < n; ++level)
        for (std::size_t i = 0; i + level < n; ++i) {
            const double xi = x[i], xj = x[i + level];
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    return p[0];
}

double ls_slope(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size() && x.size() >= 2);
    double mx = 0, my = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n; my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

double ls_intercept(std::span<const double> x, std::span<const double> y) {
    double mx = 0, my = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n; my /= n;
    return my - ls_slope(x, y) * mx;
}

double local_cubic_derivative(std::span<const double> x, std::span<const double> y, std::size_t i) {
    const std::size_t n = x.size();
    assert(n >= 2 && i < n);
    if (n < 4) {
        const std::size_t j = std::min(i, n - 2);
        return (y[j + 1] - y[j]) / (x[j + 1] - x[j]);
    }
    std::size_t j0 = (i >= 1) ? i - 1 : 0;
    j0 = std::min(j0, n - 4);
    // Derivative of the Lagrange cubic through nodes j0..j0+3 at x[i].
    double der = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        double num = 0.0;
        for (std::size_t a = 0; a < 4; ++a) {
            if (a == k) continue;
            double prod = 1.0;
            for (std::size_t b = 0; b < 4; ++b) {
                if (b == k || b == a) continue;
                prod *= x[i] - x[j0 + b];
            }
            num += prod;
        }
        double den = 1.0;
        for (std::size_t b = 0; b < 4; ++b) {
            if (b == k) continue;
            den *= x[j0 + k] - x[j0 + b];
        }
        der += y[j0 + k] * num / den;
    }
    return der;
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n != y_.size() || n < 2) throw std::invalid_argument("Pchip needs matched arrays, n >= 2");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("Pchip abscissae must increase");
    m_.resize(n);
    std::vector<double> d(n - 1), h(n - 1);
    for (std::size_t i = 0; i < n - 1; ++i) {
        h[i] = x_[i + 1] - x_[i];
        d[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (n == 2) {
        m_[0] = m_[1] = d[0];
        return;
    }
    for (std::size_t i = 1; i < n - 1; ++i) {
        if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0) != (d[i] > 0)) {
            m_[i] = 0.0;
        } else {
            const double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
            m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if ((m > 0) != (d0 > 0) || d0 == 0.0) m = 0.0;
        else if ((d0 > 0) != (d1 > 0) && std::abs(m) > 3 * std::abs(d0)) m = 3 * d0;
        return m;
    };
    m_[0] = end_slope(h[0], h[1], d[0], d[1]);
    m_[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

double Pchip::operator()(double xq) const {
    if (xq <= x_.front()) return y_.front() + m_.front() * (xq - x_.front());
    if (xq >= x_.back()) return y_.back() + m_.back() * (xq - x_.back());
    std::size_t lo = std::upper_bound(x_.begin(), x_.end(), xq) - x_.begin() - 1;
    const double h = x_[lo + 1] - x_[lo];
    const double u = (xq - x_[lo]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    const double h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u);
    const double h11 = u * u * (u - 1);
    return h00 * y_[lo] + h10 * h * m_[lo] + h01 * y_[lo + 1] + h11 * h * m_[lo + 1];
}

}  // namespace soliton
