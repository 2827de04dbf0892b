#ifndef GRANTNOV_STATS_HPP
#define GRANTNOV_STATS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "grantnov/sparse.hpp"

namespace grantnov {

struct RegressionResult {
    std::vector<std::string> names;
    std::vector<double> estimates;
    std::vector<double> std_errors;
    std::vector<double> t_values;
    std::vector<double> p_values;
    DenseMatrix coef_covariance; // sigma^2 (X'X)^-1
    double r_squared = 0.0;
    double adj_r_squared = 0.0;
    double residual_std_error = 0.0;
    double f_statistic = 0.0;
    std::size_t f_df1 = 0;
    std::size_t f_df2 = 0;
    double f_p_value = 1.0;
    std::size_t n_observations = 0;

    std::string to_json() const;
};

struct TestResult {
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

// X must already contain the intercept column; names label the columns
RegressionResult ols_fit(const std::vector<double>& y, const DenseMatrix& x, const std::vector<std::string>& names);

TestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

// two-sample pooled-variance t-test, df = n1 + n2 - 2
TestResult two_sample_ttest(const std::vector<double>& a, const std::vector<double>& b);

// statistic = sample correlation r
TestResult pearson(const std::vector<double>& x, const std::vector<double>& y);

// one-sided upper tail of Student's t; t may be negative
double student_t_sf(double t, double df);

// upper tail of the F distribution
double f_sf(double f, double df1, double df2);

// regularized incomplete beta I_x(a, b)
double incomplete_beta(double a, double b, double x);

// Mann-Whitney AUC with ties counting one half
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

double mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);

} // namespace grantnov

#endif
