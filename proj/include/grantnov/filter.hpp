#ifndef GRANTNOV_FILTER_HPP
#define GRANTNOV_FILTER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "grantnov/sparse.hpp"

namespace grantnov {

struct LogRegOptions {
    double l2 = 1.0; // penalty on weights, intercept unpenalized
    std::size_t max_iter = 1000;
    double tol = 1e-6; // gradient 2-norm
};

struct LogRegModel {
    std::vector<double> weights;
    double intercept = 0.0;
    double l2 = 0.0;
    std::size_t iterations = 0;
    bool converged = false;

    double score(const SparseVector& x) const;
};

LogRegModel logreg_fit(const CsrMatrix& x, const std::vector<int>& y, const LogRegOptions& opts = {});

double predict_proba(const LogRegModel& model, const SparseVector& x);

// penalized log-likelihood and its gradient, exposed so tests can check the
// analytic gradient against finite differences
double logreg_loglik(const CsrMatrix& x, const std::vector<int>& y, const std::vector<double>& weights,
                     double intercept, double l2);
void logreg_gradient(const CsrMatrix& x, const std::vector<int>& y, const std::vector<double>& weights,
                     double intercept, double l2, std::vector<double>& grad_w, double& grad_b);

struct LabelPool {
    CsrMatrix features;
    std::vector<std::optional<int>> labels; // nullopt = unlabeled
    std::vector<int> provenance;            // -1 unlabeled, 0 seed, r >= 1 active round
};

// returns the label for a pool index; a nullopt answer is an oracle failure
using LabelOracle = std::function<std::optional<int>(std::size_t)>;

struct ActiveLearnResult {
    LogRegModel model;
    std::size_t rounds_run = 0;
    std::size_t labeled_total = 0;
    bool pool_exhausted = false;
};

ActiveLearnResult active_learning_loop(LabelPool& pool, const LabelOracle& oracle, std::size_t rounds,
                                       std::size_t batch, const LogRegOptions& opts = {});

struct CvAucResult {
    double mean_auc = 0.0;
    double sd_auc = 0.0;
    std::vector<double> fold_aucs;
};

CvAucResult cv_auc(const CsrMatrix& x, const std::vector<int>& y, std::size_t folds, const LogRegOptions& opts,
                   std::uint64_t seed);

} // namespace grantnov

#endif
