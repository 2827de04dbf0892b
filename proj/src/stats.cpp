#include "grantnov/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "grantnov/csv.hpp"
#include "grantnov/error.hpp"

namespace grantnov {

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

namespace {

// continued fraction for the incomplete beta (Lentz), converges for
// x < (a+1)/(a+b+2)
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (a <= 0 || b <= 0) raise(ErrorCode::validation, "incomplete_beta: a, b must be positive");
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
    if (df <= 0) raise(ErrorCode::validation, "student_t_sf: df must be positive");
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double x = df / (df + t * t);
    const double half_tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
    return t >= 0 ? half_tail : 1.0 - half_tail;
}

double f_sf(double f, double df1, double df2) {
    if (df1 <= 0 || df2 <= 0) raise(ErrorCode::validation, "f_sf: degrees of freedom must be positive");
    if (f <= 0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return incomplete_beta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
}

RegressionResult ols_fit(const std::vector<double>& y, const DenseMatrix& x, const std::vector<std::string>& names) {
    const std::size_t n = x.rows;
    const std::size_t k = x.cols;
    if (y.size() != n) raise(ErrorCode::dimension, "ols_fit: y length does not match design rows");
    if (names.size() != k) raise(ErrorCode::dimension, "ols_fit: names length does not match design columns");
    if (n <= k) raise(ErrorCode::validation, "ols_fit: need more observations than regressors");

    Eigen::MatrixXd xm(n, k);
    Eigen::VectorXd yv(n);
    for (std::size_t r = 0; r < n; ++r) {
        yv(static_cast<Eigen::Index>(r)) = y[r];
        for (std::size_t c = 0; c < k; ++c) xm(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x.at(r, c);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xm);
    qr.setThreshold(1e-10);
    if (static_cast<std::size_t>(qr.rank()) < k) {
        // columns outside the pivot set are the collinear ones
        std::vector<int> dropped;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < static_cast<Eigen::Index>(k); ++i) {
            dropped.push_back(perm(i));
        }
        std::sort(dropped.begin(), dropped.end());
        std::ostringstream msg;
        msg << "ols_fit: rank-deficient design, collinear column indices:";
        for (int c : dropped) msg << ' ' << c;
        raise(ErrorCode::validation, msg.str());
    }

    Eigen::VectorXd beta = qr.solve(yv);
    Eigen::VectorXd resid = yv - xm * beta;
    const double rss = resid.squaredNorm();
    const double y_mean = yv.mean();
    const double tss = (yv.array() - y_mean).square().sum();
    const double df_resid = static_cast<double>(n - k);
    const double sigma2 = rss / df_resid;

    // (X'X)^-1 = P R^-1 R^-T P' from the pivoted factorization
    Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    Eigen::MatrixXd rinv = r.inverse();
    Eigen::MatrixXd xtx_inv_perm = rinv * rinv.transpose();
    Eigen::MatrixXd p = qr.colsPermutation();
    Eigen::MatrixXd xtx_inv = p * xtx_inv_perm * p.transpose();

    RegressionResult res;
    res.names = names;
    res.n_observations = n;
    res.estimates.resize(k);
    res.std_errors.resize(k);
    res.t_values.resize(k);
    res.p_values.resize(k);
    res.coef_covariance = DenseMatrix(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            res.coef_covariance.at(i, j) = sigma2 * xtx_inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    for (std::size_t i = 0; i < k; ++i) {
        res.estimates[i] = beta(static_cast<Eigen::Index>(i));
        const double var = res.coef_covariance.at(i, i);
        res.std_errors[i] = var > 0 ? std::sqrt(var) : 0.0;
        if (res.std_errors[i] > 0) {
            res.t_values[i] = res.estimates[i] / res.std_errors[i];
            res.p_values[i] = 2.0 * student_t_sf(std::fabs(res.t_values[i]), df_resid);
        } else {
            res.t_values[i] = res.estimates[i] == 0 ? 0.0 : std::numeric_limits<double>::infinity();
            res.p_values[i] = res.estimates[i] == 0 ? 1.0 : 0.0;
        }
    }

    res.r_squared = tss > 0 ? 1.0 - rss / tss : 1.0;
    res.adj_r_squared = 1.0 - (1.0 - res.r_squared) * static_cast<double>(n - 1) / df_resid;
    res.residual_std_error = std::sqrt(sigma2);
    res.f_df1 = k - 1;
    res.f_df2 = n - k;
    if (k > 1) {
        const double denom = 1.0 - res.r_squared;
        if (denom > 0) {
            res.f_statistic = (res.r_squared / static_cast<double>(res.f_df1)) / (denom / df_resid);
            res.f_p_value = f_sf(res.f_statistic, static_cast<double>(res.f_df1), df_resid);
        } else {
            res.f_statistic = std::numeric_limits<double>::infinity();
            res.f_p_value = 0.0;
        }
    }
    return res;
}

std::string RegressionResult::to_json() const {
    nlohmann::json j;
    j["coefficients"] = nlohmann::json::array();
    for (std::size_t i = 0; i < names.size(); ++i) {
        j["coefficients"].push_back({{"name", names[i]},
                                     {"estimate", estimates[i]},
                                     {"std_error", std_errors[i]},
                                     {"t_value", t_values[i]},
                                     {"p_value", p_values[i]}});
    }
    j["r_squared"] = r_squared;
    j["adj_r_squared"] = adj_r_squared;
    j["residual_std_error"] = residual_std_error;
    j["f_statistic"] = f_statistic;
    j["f_df1"] = f_df1;
    j["f_df2"] = f_df2;
    j["f_p_value"] = f_p_value;
    j["observations"] = n_observations;
    return j.dump(2);
}

TestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) raise(ErrorCode::dimension, "paired_ttest: length mismatch");
    if (a.size() < 2) raise(ErrorCode::validation, "paired_ttest: need at least 2 pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double var = sample_variance(d);
    if (var <= 0) raise(ErrorCode::degenerate, "paired_ttest: differences have zero variance");
    const double n = static_cast<double>(d.size());
    TestResult r;
    r.statistic = mean(d) / std::sqrt(var / n);
    r.df = n - 1.0;
    r.p_value = 2.0 * student_t_sf(std::fabs(r.statistic), r.df);
    return r;
}

TestResult two_sample_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) raise(ErrorCode::validation, "two_sample_ttest: need at least 2 per group");
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const double v1 = sample_variance(a);
    const double v2 = sample_variance(b);
    const double pooled = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0);
    if (pooled <= 0) raise(ErrorCode::degenerate, "two_sample_ttest: zero pooled variance");
    TestResult r;
    r.statistic = (mean(a) - mean(b)) / std::sqrt(pooled * (1.0 / n1 + 1.0 / n2));
    r.df = n1 + n2 - 2.0;
    r.p_value = 2.0 * student_t_sf(std::fabs(r.statistic), r.df);
    return r;
}

TestResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) raise(ErrorCode::dimension, "pearson: length mismatch");
    if (x.size() < 3) raise(ErrorCode::validation, "pearson: need at least 3 points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0 || syy <= 0) raise(ErrorCode::degenerate, "pearson: constant input");
    TestResult r;
    r.statistic = sxy / std::sqrt(sxx * syy);
    r.statistic = std::clamp(r.statistic, -1.0, 1.0);
    const double n = static_cast<double>(x.size());
    r.df = n - 2.0;
    if (std::fabs(r.statistic) >= 1.0) {
        r.p_value = 0.0;
    } else {
        const double t = r.statistic * std::sqrt(r.df / (1.0 - r.statistic * r.statistic));
        r.p_value = 2.0 * student_t_sf(std::fabs(t), r.df);
    }
    return r;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) raise(ErrorCode::dimension, "roc_auc: length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (int lbl : labels) {
        if (lbl) ++n_pos;
        else ++n_neg;
    }
    if (n_pos == 0 || n_neg == 0) raise(ErrorCode::validation, "roc_auc: both classes required");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // rank-sum with average ranks over tie groups
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0; // 1-based
        for (std::size_t t = i; t <= j; ++t) {
            if (labels[order[t]]) pos_rank_sum += avg_rank;
        }
        i = j + 1;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

} // namespace grantnov
