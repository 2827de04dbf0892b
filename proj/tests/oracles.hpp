#ifndef GRANTNOV_TESTS_ORACLES_HPP
#define GRANTNOV_TESTS_ORACLES_HPP

// Independent numerical oracles used by the unit and acceptance tests. These
// deliberately avoid the implementation paths they check.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "grantnov/sparse.hpp"

namespace oracles {

// adaptive Simpson quadrature
inline double simpson_segment(const std::function<double(double)>& f, double a, double b, double fa, double fb,
                              double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fb,
                               double fm, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_segment(f, a, m, fa, fm, flm);
    const double right = simpson_segment(f, m, b, fm, fb, frm);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, fm, flm, left, tol / 2, depth - 1) +
           adaptive_simpson(f, m, b, fm, fb, frm, right, tol / 2, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    return adaptive_simpson(f, a, b, fa, fb, fm, simpson_segment(f, a, b, fa, fb, fm), tol, 60);
}

// upper tail of Student's t by integrating the density, independent of the
// incomplete-beta code under test
inline double student_t_sf(double t, double df) {
    const double ln_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * M_PI);
    auto pdf = [&](double x) { return std::exp(ln_norm - 0.5 * (df + 1.0) * std::log1p(x * x / df)); };
    if (t < 0) return 1.0 - student_t_sf(-t, df);
    return 0.5 - integrate(pdf, 0.0, t);
}

// regularized incomplete beta by quadrature (needs a, b >= 1 for smoothness)
inline double incomplete_beta(double a, double b, double x) {
    const double ln_b = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    auto integrand = [&](double u) {
        if (u <= 0 || u >= 1) return 0.0;
        return std::exp((a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u) - ln_b);
    };
    return integrate(integrand, 0.0, x);
}

inline double f_sf(double f, double df1, double df2) {
    return incomplete_beta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
}

// -------- brute-force QP oracle for the one-class SVM dual ----------------
//
// minimize (1/2) a^T K a  s.t.  0 <= a_i <= c,  sum a = 1
// FISTA projected gradient with adaptive restart; an entirely different
// algorithm family from the SMO under test.

// Euclidean projection onto the box-constrained simplex via bisection on the
// shift.
inline void project_box_simplex(std::vector<double>& a, double c) {
    double lo = -2.0, hi = 2.0;
    auto mass = [&](double lambda) {
        double s = 0.0;
        for (double v : a) s += std::min(c, std::max(0.0, v - lambda));
        return s;
    };
    // bracket the shift
    while (mass(lo) < 1.0) lo -= std::max(1.0, std::fabs(lo));
    while (mass(hi) > 1.0) hi += std::max(1.0, std::fabs(hi));
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mass(mid) > 1.0) lo = mid;
        else hi = mid;
    }
    const double lambda = 0.5 * (lo + hi);
    for (double& v : a) v = std::min(c, std::max(0.0, v - lambda));
}

struct QpSolution {
    std::vector<double> alpha;
    double objective = 0.0;
};

inline QpSolution solve_ocsvm_dual(const std::vector<std::vector<double>>& kernel, double c, std::size_t max_iter = 60000,
                                   double tol = 1e-12) {
    const std::size_t l = kernel.size();
    auto objective = [&](const std::vector<double>& a) {
        double s = 0.0;
        for (std::size_t i = 0; i < l; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < l; ++j) row += kernel[i][j] * a[j];
            s += a[i] * row;
        }
        return 0.5 * s;
    };

    // Lipschitz constant of the gradient via power iteration on K
    std::vector<double> v(l, 1.0 / std::sqrt(static_cast<double>(l)));
    double lip = 1.0;
    for (int it = 0; it < 60; ++it) {
        std::vector<double> kv(l, 0.0);
        for (std::size_t i = 0; i < l; ++i) {
            for (std::size_t j = 0; j < l; ++j) kv[i] += kernel[i][j] * v[j];
        }
        double norm = 0.0;
        for (double x : kv) norm += x * x;
        norm = std::sqrt(norm);
        if (norm <= 0) break;
        lip = norm;
        for (std::size_t i = 0; i < l; ++i) v[i] = kv[i] / norm;
    }
    const double step = 1.0 / (lip * 1.01 + 1e-9);

    std::vector<double> a(l, 1.0 / static_cast<double>(l));
    project_box_simplex(a, c);
    std::vector<double> y = a, a_prev = a;
    double t_mom = 1.0;
    double best = objective(a);
    std::vector<double> best_a = a;
    double last = best;

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        std::vector<double> grad(l, 0.0);
        for (std::size_t i = 0; i < l; ++i) {
            for (std::size_t j = 0; j < l; ++j) grad[i] += kernel[i][j] * y[j];
        }
        a_prev = a;
        for (std::size_t i = 0; i < l; ++i) a[i] = y[i] - step * grad[i];
        project_box_simplex(a, c);

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
        for (std::size_t i = 0; i < l; ++i) y[i] = a[i] + (t_mom - 1.0) / t_next * (a[i] - a_prev[i]);
        t_mom = t_next;

        if ((iter & 63) == 63) {
            const double obj = objective(a);
            if (obj < best) {
                best = obj;
                best_a = a;
            }
            if (obj > last) { // adaptive restart
                y = a;
                t_mom = 1.0;
            }
            if (std::fabs(last - obj) < tol * std::max(1.0, std::fabs(obj))) break;
            last = obj;
        }
    }
    const double final_obj = objective(a);
    if (final_obj < best) {
        best = final_obj;
        best_a = a;
    }
    return {best_a, best};
}

// decision offset recovered from the oracle alphas, mirroring the KKT rule
inline double qp_rho(const std::vector<std::vector<double>>& kernel, const std::vector<double>& alpha, double c) {
    const std::size_t l = alpha.size();
    double sum = 0.0;
    std::size_t n = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    const double eps = 1e-8 * c;
    for (std::size_t i = 0; i < l; ++i) {
        double g = 0.0;
        for (std::size_t j = 0; j < l; ++j) g += kernel[i][j] * alpha[j];
        if (alpha[i] > eps && alpha[i] < c - eps) {
            sum += g;
            ++n;
        } else if (alpha[i] <= eps) {
            upper = std::min(upper, g);
        } else {
            lower = std::max(lower, g);
        }
    }
    if (n > 0) return sum / static_cast<double>(n);
    if (std::isfinite(lower) && std::isfinite(upper)) return 0.5 * (lower + upper);
    return std::isfinite(lower) ? lower : upper;
}

} // namespace oracles

#endif
