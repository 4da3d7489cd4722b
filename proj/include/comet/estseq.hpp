#pragma once

#include "comet/mapping.hpp"
#include "comet/types.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace comet {

/// Scanning function phi_k(x) = phi_star + (gamma/2)||x - v||^2 together with
/// the estimating-sequence scale lambda_k.
struct ScanningState {
    std::size_t k = 0;
    double gamma = 0.0;
    Vector v;
    double phi_star = 0.0;
    double lambda = 1.0;
    std::optional<double> alpha_prev;
    double L_accepted = 0.0;

    /// State at k = 0: v_0 = x_0, phi*_0 = F(x_0), lambda_0 = 1.
    static ScanningState initial(const Vector& x0, double F_x0, double gamma0, double L0) {
        ScanningState s;
        s.gamma = gamma0;
        s.v = x0;
        s.phi_star = F_x0;
        s.L_accepted = L0;
        return s;
    }
};

/// Positive root of L a^2 + (gamma - mu) a - gamma = 0, so that L a^2 = (1-a) gamma + a mu.
inline double alpha_update(double gamma, double mu, double L) {
    if (!(L > 0.0)) {
        throw InvalidInput("alpha_update: L must be positive");
    }
    if (!(gamma >= 0.0) || !(mu >= 0.0)) {
        throw InvalidInput("alpha_update: gamma and mu must be nonnegative");
    }
    if (gamma == 0.0 && mu == 0.0) {
        throw DegenerateConfiguration("alpha_update: gamma = mu = 0 gives alpha = 0");
    }
    const double b = mu - gamma;
    const double disc = std::sqrt(b * b + 4.0 * L * gamma);
    // For b < 0 the textbook form cancels; use the conjugate root expression instead.
    if (b >= 0.0) {
        return (b + disc) / (2.0 * L);
    }
    return 2.0 * gamma / (disc - b);
}

inline double gamma_update(double gamma, double mu, double alpha) {
    return (1.0 - alpha) * gamma + alpha * mu;
}

/// y_k = (gamma_{k+1} x_k + alpha gamma_k v_k) / (gamma_{k+1} + alpha gamma_k).
inline Vector y_update(const Vector& x, const Vector& v, double gamma, double gamma_next, double alpha) {
    require_dim(v, x.size(), "y_update");
    const double denom = gamma_next + alpha * gamma;
    if (!(denom > 0.0)) {
        throw DegenerateConfiguration("y_update: gamma_next + alpha * gamma must be positive");
    }
    return (gamma_next * x + (alpha * gamma) * v) / denom;
}

/// v_{k+1} = [(1-alpha) gamma v + alpha (mu y - L (y - T))] / gamma_{k+1}.
inline Vector v_update(const Vector& v, const Vector& y, const Vector& T, double gamma, double gamma_next,
                       double alpha, double mu, double L) {
    require_dim(y, v.size(), "v_update y");
    require_dim(T, v.size(), "v_update T");
    if (!(gamma_next > 0.0)) {
        throw DegenerateConfiguration("v_update: gamma_next must be positive");
    }
    return ((1.0 - alpha) * gamma * v + alpha * (mu * y - L * (y - T))) / gamma_next;
}

/// Minimum of the next scanning function.
///
/// The cross term is (v_k - y)^T (y - T): expanding
/// (gamma_{k+1}/2)||y - v_{k+1}||^2 with the v recursion gives this sign,
/// and it is the one under which phi*_{k+1} equals min_x phi_{k+1}(x).
inline double phi_star_update(const ScanningState& state, const MappingResult& m, double alpha, double gamma_next,
                              const Vector& y, double mu) {
    if (!(gamma_next > 0.0)) {
        throw DegenerateConfiguration("phi_star_update: gamma_next must be positive");
    }
    const double L = m.trial_L;
    const double gamma = state.gamma;
    const Vector y_minus_T = y - m.T;
    const Vector v_minus_y = state.v - y;
    const double w = alpha * gamma * (1.0 - alpha) / gamma_next;
    return (1.0 - alpha) * state.phi_star + alpha * (m.objective_at_T + m.r.squaredNorm() / (2.0 * L)) -
           (L * L * alpha * alpha / (2.0 * gamma_next)) * y_minus_T.squaredNorm() +
           0.5 * mu * w * v_minus_y.squaredNorm() + L * w * v_minus_y.dot(y_minus_T);
}

struct LambdaBound {
    double loose = 0.0;
    double tight = 0.0;
};

/// Upper bounds on lambda_k for the two gamma_0 regimes:
///   gamma0 in [0, mu):        1.042 mu Lmax / (L_k^2 S^2)          <= 1.042 Lmax / (L_k (k+1)^2)
///   gamma0 in [mu, 3L0 + mu]: 4 mu Lmax / (L_k (gamma0-mu) S^2)    <= 4 Lmax / ((gamma0-mu)(k+1))^2
/// with S = e^{(k+1) d} - e^{-(k+1) d}, d = sqrt(mu / L_k) / 2.
/// gamma0 == mu makes the second regime vacuous (+inf).
inline LambdaBound lambda_bound(std::size_t k, double gamma0, double mu, double L_k, double L_max, double L0) {
    if (!(L_k > 0.0) || !(L_max > 0.0) || !(L0 > 0.0) || !(mu >= 0.0)) {
        throw InvalidInput("lambda_bound: constants must be positive (mu nonnegative)");
    }
    if (!(gamma0 >= 0.0) || gamma0 > 3.0 * L0 + mu) {
        throw InvalidInput("lambda_bound: gamma0 must lie in [0, 3 L0 + mu]");
    }
    if (gamma0 == 0.0 && mu == 0.0) {
        throw DegenerateConfiguration("lambda_bound: gamma0 = mu = 0 is degenerate");
    }
    const double kp1 = static_cast<double>(k + 1);
    const double d = 0.5 * std::sqrt(mu / L_k);
    const double s = 2.0 * std::sinh(kp1 * d);
    const double s2 = s * s;
    constexpr double inf = std::numeric_limits<double>::infinity();

    LambdaBound b;
    if (gamma0 < mu) {
        b.tight = 1.042 * mu * L_max / (L_k * L_k * s2);
        b.loose = 1.042 * L_max / (L_k * kp1 * kp1);
        return b;
    }
    const double excess = gamma0 - mu;
    if (excess == 0.0) {
        b.tight = inf;
        b.loose = inf;
        return b;
    }
    // mu -> 0 limit of mu / S^2 is L_k / (k+1)^2.
    const double mu_over_s2 = mu == 0.0 ? L_k / (kp1 * kp1) : mu / s2;
    b.tight = 4.0 * L_max * mu_over_s2 / (L_k * excess);
    b.loose = 4.0 * L_max / (excess * kp1 * excess * kp1);
    return b;
}

/// lambda_k [F(x_0) - F* + (gamma_0/2)||x_0 - x*||^2].
inline double gap_bound(double lambda_k, double F_x0, double F_star, double gamma0, double dist0_sq) {
    if (F_x0 < F_star) {
        throw InvalidInput("gap_bound: F(x0) below F*");
    }
    if (!(dist0_sq >= 0.0)) {
        throw InvalidInput("gap_bound: squared distance must be nonnegative");
    }
    return lambda_k * (F_x0 - F_star + 0.5 * gamma0 * dist0_sq);
}

inline double gap_bound(const ScanningState& state, double F_x0, double F_star, double gamma0,
                                 double dist0_sq) {
    return gap_bound(state.lambda, F_x0, F_star, gamma0, dist0_sq);
}

} // namespace comet
