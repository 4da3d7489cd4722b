#pragma once

#include "comet/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

namespace comet {

enum class RegKind { zero, l1, squared_l2, elastic_net };

/// Nonsmooth part g of F = f + tau * g.
///
///   zero:        g(x) = 0
///   l1:          g(x) = ||x||_1
///   squared_l2:  g(x) = (mu_g/2) ||x||^2
///   elastic_net: g(x) = ||x||_1 + (mu_g/2) ||x||^2
///
/// After `split` the regularizer carries a negative quadratic
/// -(shift/2)||x - anchor||^2 with shift == mu_g, so its own strong
/// convexity is zero. `value` never includes the weight tau.
struct Regularizer {
    RegKind kind = RegKind::zero;
    double tau = 0.0;
    double mu_g = 0.0;
    double shift = 0.0;
    Vector anchor;

    static Regularizer zero() { return {}; }
    static Regularizer l1(double tau) { return checked({RegKind::l1, tau, 0.0, 0.0, {}}); }
    static Regularizer squared_l2(double tau, double mu_g) {
        return checked({RegKind::squared_l2, tau, mu_g, 0.0, {}});
    }
    static Regularizer elastic_net(double tau, double mu_g) {
        return checked({RegKind::elastic_net, tau, mu_g, 0.0, {}});
    }

    double l1_weight() const { return kind == RegKind::l1 || kind == RegKind::elastic_net ? 1.0 : 0.0; }
    double l2_weight() const {
        return kind == RegKind::squared_l2 || kind == RegKind::elastic_net ? mu_g : 0.0;
    }
    bool is_shifted() const { return shift > 0.0; }
    /// Strong convexity of the (possibly shifted) g.
    double strong_convexity() const { return l2_weight() - shift; }
    /// True when tau * g vanishes identically.
    bool is_null() const { return tau == 0.0 || (kind == RegKind::zero && shift == 0.0); }

    double value(const Vector& x) const {
        double v = 0.0;
        if (l1_weight() != 0.0) {
            v += x.lpNorm<1>();
        }
        if (l2_weight() != 0.0) {
            v += 0.5 * l2_weight() * x.squaredNorm();
        }
        if (shift != 0.0) {
            v -= 0.5 * shift * (x - anchor).squaredNorm();
        }
        return v;
    }

    void validate() const {
        if (!(tau >= 0.0)) {
            throw InvalidInput("regularizer weight tau must be nonnegative");
        }
        if (!(mu_g >= 0.0)) {
            throw InvalidInput("regularizer mu_g must be nonnegative");
        }
        if ((kind == RegKind::l1 || kind == RegKind::zero) && mu_g != 0.0) {
            throw InvalidInput("mu_g must be 0 for l1 and zero regularizers");
        }
    }

private:
    static Regularizer checked(Regularizer r) {
        r.validate();
        return r;
    }
};

namespace detail {

inline void require_positive_step(double t) {
    if (!(t > 0.0)) {
        throw InvalidInput("prox step must be positive, got " + std::to_string(t));
    }
}

inline double soft_threshold(double v, double t) {
    const double a = std::abs(v) - t;
    return a > 0.0 ? std::copysign(a, v) : 0.0;
}

} // namespace detail

/// argmin_z t||z||_1 + 0.5||z - x||^2.
inline Vector prox_l1(const Vector& x, double t) {
    detail::require_positive_step(t);
    return x.unaryExpr([t](double v) { return detail::soft_threshold(v, t); });
}

/// argmin_z t(l1_w||z||_1 + (l2_w/2)||z||^2) + 0.5||z - x||^2.
inline Vector prox_elastic_net(const Vector& x, double t, double l1_w, double l2_w) {
    detail::require_positive_step(t);
    const double thr = t * l1_w;
    const double scale = 1.0 / (1.0 + t * l2_w);
    return x.unaryExpr([thr, scale](double v) { return detail::soft_threshold(v, thr) * scale; });
}

/// prox of t*g for an unshifted regularizer (weight tau not applied).
inline Vector prox_base(const Vector& x, double t, const Regularizer& g) {
    detail::require_positive_step(t);
    switch (g.kind) {
    case RegKind::zero:
        return x;
    case RegKind::l1:
        return prox_l1(x, t);
    case RegKind::squared_l2:
        return prox_elastic_net(x, t, 0.0, g.mu_g);
    case RegKind::elastic_net:
        return prox_elastic_net(x, t, 1.0, g.mu_g);
    }
    return x;
}

/// prox of t * (g - (mu_g/2)||. - x0||^2).
///
/// Completing the square gives prox_{s g}(u) with s = t / (1 - t mu_g)
/// and u = (x - t mu_g x0) / (1 - t mu_g).
inline Vector prox_shifted(const Vector& x, double t, const Regularizer& base, double mu_g, const Vector& x0) {
    detail::require_positive_step(t);
    if (mu_g == 0.0) {
        return prox_base(x, t, base);
    }
    require_dim(x0, x.size(), "prox_shifted anchor");
    const double c = 1.0 - t * mu_g;
    if (!(c > 0.0)) {
        throw StepTooLarge("prox_shifted: t * mu_g = " + std::to_string(t * mu_g) + " >= 1");
    }
    const Vector u = (x - (t * mu_g) * x0) / c;
    return prox_base(u, t / c, base);
}

/// prox of t*g for any regularizer produced by this library (shifted or not).
inline Vector prox(const Regularizer& g, const Vector& x, double t) {
    if (!g.is_shifted()) {
        return prox_base(x, t, g);
    }
    return prox_shifted(x, t, g, g.shift, g.anchor);
}

/// Per-coordinate ternary search for argmin_z t*g_i(z) + 0.5(z - x_i)^2.
///
/// Test oracle: g must be separable and convex in each coordinate. The
/// search bracket is [x_i - 10(1+|x_i|), x_i + 10(1+|x_i|)].
inline Vector prox_bruteforce(const Vector& x, double t, const std::function<double(Index, double)>& g) {
    detail::require_positive_step(t);
    Vector z(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        const double half = 10.0 * (1.0 + std::abs(xi));
        double lo = xi - half;
        double hi = xi + half;
        const auto obj = [&](double v) { return t * g(i, v) + 0.5 * (v - xi) * (v - xi); };
        while (hi - lo > 1e-9) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (obj(m1) <= obj(m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        z[i] = 0.5 * (lo + hi);
    }
    return z;
}

inline Vector prox_bruteforce(const Vector& x, double t, const std::function<double(double)>& g) {
    return prox_bruteforce(x, t, [&g](Index, double v) { return g(v); });
}

} // namespace comet
