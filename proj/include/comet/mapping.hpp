#pragma once

#include "comet/problem.hpp"
#include "comet/prox.hpp"
#include "comet/types.hpp"

#include <cmath>
#include <limits>

namespace comet {

/// One evaluation of the composite gradient mapping at y for a trial constant L.
struct MappingResult {
    double trial_L = 0.0;
    Vector y;
    Vector T;             // T_L(y)
    Vector r;             // r_L(y) = L (y - T)
    double model_value = 0.0;     // m_L(y; T)
    double objective_at_T = 0.0;  // F(T)

    double f_y = 0.0;     // fhat(y)
    Vector grad_y;        // grad fhat(y)
    /// fhat(T) - fhat(y) - grad_y^T (T - y), evaluated without cancellation where possible.
    double smooth_gap = 0.0;
    /// Rounding allowance on smooth_gap; zero when the model forms it exactly.
    double gap_rounding = 0.0;
};

/// m_L(y; x) = fhat(y) + grad fhat(y)^T (x - y) + (L/2)||x - y||^2 + tau ghat(x).
inline double model_value(const CompositeProblem& p, const Vector& y, const Vector& x, double L) {
    require_dim(y, p.dim(), "model_value y");
    require_dim(x, p.dim(), "model_value x");
    if (!(L > 0.0)) {
        throw InvalidInput("model_value: L must be positive");
    }
    Vector g;
    const double fy = p.smooth.value_and_gradient(y, g);
    const Vector d = x - y;
    double m = fy + g.dot(d) + 0.5 * L * d.squaredNorm();
    if (!p.reg.is_null()) {
        m += p.tau() * p.reg.value(x);
    }
    return m;
}

/// T_L(y) from an already evaluated fhat(y) and its gradient.
inline MappingResult gradient_map(const CompositeProblem& p, const Vector& y, double f_y, const Vector& grad_y,
                                  double L) {
    require_dim(y, p.dim(), "gradient_map");
    if (!(L > 0.0)) {
        throw InvalidInput("gradient_map: L must be positive");
    }
    MappingResult m;
    m.trial_L = L;
    m.y = y;
    m.f_y = f_y;
    m.grad_y = grad_y;

    const Vector step = y - grad_y / L;
    m.T = p.reg.is_null() ? step : prox(p.reg, step, p.tau() / L);
    m.r = L * (y - m.T);

    const Vector d = m.T - y;
    const double reg_T = p.reg.is_null() ? 0.0 : p.tau() * p.reg.value(m.T);
    m.model_value = f_y + grad_y.dot(d) + 0.5 * L * d.squaredNorm() + reg_T;
    m.smooth_gap = p.smooth.bregman(m.T, y, f_y, grad_y);
    const double f_T = p.smooth.value(m.T);
    m.objective_at_T = f_T + reg_T;
    if (!p.smooth.exact_bregman()) {
        constexpr double eps = std::numeric_limits<double>::epsilon();
        m.gap_rounding = 8.0 * eps * (std::abs(f_T) + std::abs(f_y) + std::abs(grad_y.dot(d)));
    }
    return m;
}

inline MappingResult gradient_map(const CompositeProblem& p, const Vector& y, double L) {
    require_dim(y, p.dim(), "gradient_map");
    Vector g;
    const double fy = p.smooth.value_and_gradient(y, g);
    return gradient_map(p, y, fy, g, L);
}

/// F(T) + r^T (x - y) + (mu/2)||x - y||^2 + ||r||^2 / (2L); a lower bound on F(x)
/// whenever the mapping was computed with trial_L >= L_fhat.
inline double lower_bound_at(const CompositeProblem& p, const MappingResult& m, const Vector& x) {
    require_dim(x, p.dim(), "lower_bound_at");
    const Vector d = x - m.y;
    return m.objective_at_T + m.r.dot(d) + 0.5 * p.mu_hat * d.squaredNorm() +
           m.r.squaredNorm() / (2.0 * m.trial_L);
}

/// Backtracking test F(T) <= m_L(y; T).
///
/// tau*ghat(T) appears on both sides, so the test is evaluated as
/// smooth_gap <= (L/2)||T - y||^2, which stays meaningful when both sides
/// are far below the rounding level of F. A gap formed by subtraction gets
/// its rounding allowance; otherwise L would grow without bound at the floor.
inline bool acceptance_test(const CompositeProblem&, const MappingResult& m) {
    const double rhs = 0.5 * m.trial_L * (m.T - m.y).squaredNorm();
    return m.smooth_gap <= rhs + m.gap_rounding;
}

} // namespace comet
