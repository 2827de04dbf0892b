#include "grantnov/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "grantnov/error.hpp"
#include "grantnov/rng.hpp"
#include "grantnov/stats.hpp"

namespace grantnov {

namespace {

// log(1 + e^s) without overflow
double log1pexp(double s) {
    if (s > 35.0) return s;
    if (s < -35.0) return std::exp(s);
    return std::log1p(std::exp(s));
}

double sigmoid(double s) {
    if (s >= 0) {
        const double z = std::exp(-s);
        return 1.0 / (1.0 + z);
    }
    const double z = std::exp(s);
    return z / (1.0 + z);
}

void check_two_classes(const std::vector<int>& y) {
    bool has0 = false, has1 = false;
    for (int v : y) {
        if (v) has1 = true;
        else has0 = true;
    }
    if (!has0 || !has1) raise(ErrorCode::validation, "logistic regression: both classes required");
}

} // namespace

double LogRegModel::score(const SparseVector& x) const {
    if (x.dim != weights.size()) raise(ErrorCode::dimension, "logreg score: dimension mismatch");
    double s = intercept;
    for (std::size_t p = 0; p < x.idx.size(); ++p) s += weights[x.idx[p]] * x.val[p];
    return s;
}

double predict_proba(const LogRegModel& model, const SparseVector& x) {
    const double p = sigmoid(model.score(x));
    // keep the open interval promised by the contract
    return std::clamp(p, 1e-15, 1.0 - 1e-15);
}

double logreg_loglik(const CsrMatrix& x, const std::vector<int>& y, const std::vector<double>& weights,
                     double intercept, double l2) {
    double ll = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
        double s = intercept;
        for (std::size_t p = x.row_ptr[r]; p < x.row_ptr[r + 1]; ++p) s += weights[x.col_idx[p]] * x.vals[p];
        ll += (y[r] ? s : 0.0) - log1pexp(s);
    }
    double penalty = 0.0;
    for (double w : weights) penalty += w * w;
    return ll - 0.5 * l2 * penalty;
}

void logreg_gradient(const CsrMatrix& x, const std::vector<int>& y, const std::vector<double>& weights,
                     double intercept, double l2, std::vector<double>& grad_w, double& grad_b) {
    grad_w.assign(weights.size(), 0.0);
    grad_b = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
        double s = intercept;
        for (std::size_t p = x.row_ptr[r]; p < x.row_ptr[r + 1]; ++p) s += weights[x.col_idx[p]] * x.vals[p];
        const double resid = static_cast<double>(y[r]) - sigmoid(s);
        grad_b += resid;
        for (std::size_t p = x.row_ptr[r]; p < x.row_ptr[r + 1]; ++p) grad_w[x.col_idx[p]] += resid * x.vals[p];
    }
    for (std::size_t j = 0; j < weights.size(); ++j) grad_w[j] -= l2 * weights[j];
}

LogRegModel logreg_fit(const CsrMatrix& x, const std::vector<int>& y, const LogRegOptions& opts) {
    if (x.rows != y.size()) raise(ErrorCode::dimension, "logreg_fit: rows/labels mismatch");
    check_two_classes(y);

    LogRegModel model;
    model.weights.assign(x.cols, 0.0);
    model.l2 = opts.l2;

    std::vector<double> grad_w;
    double grad_b = 0.0;
    double ll = logreg_loglik(x, y, model.weights, model.intercept, opts.l2);

    for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
        logreg_gradient(x, y, model.weights, model.intercept, opts.l2, grad_w, grad_b);
        double gnorm2 = grad_b * grad_b;
        for (double g : grad_w) gnorm2 += g * g;
        model.iterations = iter;
        if (std::sqrt(gnorm2) < opts.tol) {
            model.converged = true;
            break;
        }

        // gradient ascent with backtracking (Armijo)
        double step = 4.0 / std::max<double>(1.0, static_cast<double>(x.rows));
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            std::vector<double> w_try(model.weights.size());
            for (std::size_t j = 0; j < w_try.size(); ++j) w_try[j] = model.weights[j] + step * grad_w[j];
            const double b_try = model.intercept + step * grad_b;
            const double ll_try = logreg_loglik(x, y, w_try, b_try, opts.l2);
            if (ll_try >= ll + 1e-4 * step * gnorm2) {
                model.weights = std::move(w_try);
                model.intercept = b_try;
                ll = ll_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // step underflow: as converged as arithmetic allows
    }
    return model;
}

ActiveLearnResult active_learning_loop(LabelPool& pool, const LabelOracle& oracle, std::size_t rounds,
                                       std::size_t batch, const LogRegOptions& opts) {
    if (rounds < 1) raise(ErrorCode::validation, "active_learning_loop: rounds must be >= 1");
    if (pool.labels.size() != pool.features.rows || pool.provenance.size() != pool.features.rows) {
        raise(ErrorCode::dimension, "active_learning_loop: pool vectors misaligned");
    }
    {
        std::vector<int> seed_labels;
        for (const auto& l : pool.labels) {
            if (l) seed_labels.push_back(*l);
        }
        if (seed_labels.empty()) raise(ErrorCode::validation, "active_learning_loop: no seed labels");
        check_two_classes(seed_labels);
    }

    ActiveLearnResult result;
    auto fit_current = [&]() {
        CsrMatrix x;
        x.cols = pool.features.cols;
        std::vector<int> y;
        for (std::size_t i = 0; i < pool.labels.size(); ++i) {
            if (!pool.labels[i]) continue;
            x.append_row(pool.features.row(i));
            y.push_back(*pool.labels[i]);
        }
        return logreg_fit(x, y, opts);
    };

    LogRegModel model = fit_current();
    for (std::size_t round = 1; round <= rounds; ++round) {
        // most uncertain first: smallest |p - 0.5|, ties by pool index
        std::vector<std::pair<double, std::size_t>> candidates;
        for (std::size_t i = 0; i < pool.labels.size(); ++i) {
            if (pool.labels[i]) continue;
            const double p = predict_proba(model, pool.features.row(i));
            candidates.emplace_back(std::fabs(p - 0.5), i);
        }
        if (candidates.empty()) {
            result.pool_exhausted = true;
            break;
        }
        std::sort(candidates.begin(), candidates.end());
        const std::size_t take = std::min(batch, candidates.size());
        for (std::size_t t = 0; t < take; ++t) {
            const std::size_t idx = candidates[t].second;
            auto label = oracle(idx);
            if (!label) raise(ErrorCode::validation, "active_learning_loop: oracle failed for index " + std::to_string(idx));
            pool.labels[idx] = *label;
            pool.provenance[idx] = static_cast<int>(round);
        }
        model = fit_current();
        result.rounds_run = round;
        if (take < batch) {
            result.pool_exhausted = true;
            break;
        }
    }

    for (const auto& l : pool.labels) {
        if (l) ++result.labeled_total;
    }
    result.model = std::move(model);
    return result;
}

CvAucResult cv_auc(const CsrMatrix& x, const std::vector<int>& y, std::size_t folds, const LogRegOptions& opts,
                   std::uint64_t seed) {
    if (folds < 2) raise(ErrorCode::validation, "cv_auc: need at least 2 folds");
    check_two_classes(y);
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) {
        (y[i] ? pos : neg).push_back(i);
    }
    if (pos.size() < folds || neg.size() < folds) {
        raise(ErrorCode::validation, "cv_auc: a class has fewer members than folds");
    }

    // stratified assignment: shuffle within class, deal round-robin
    std::vector<int> fold_of(y.size(), 0);
    Rng rng(derive_seed(seed, "cv-folds"));
    for (auto* cls : {&pos, &neg}) {
        auto perm = rng.permutation(cls->size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            fold_of[(*cls)[perm[i]]] = static_cast<int>(i % folds);
        }
    }

    CvAucResult result;
    for (std::size_t f = 0; f < folds; ++f) {
        CsrMatrix train_x, test_x;
        train_x.cols = test_x.cols = x.cols;
        std::vector<int> train_y;
        std::vector<double> test_scores;
        std::vector<int> test_y;
        LogRegModel model;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (fold_of[i] == static_cast<int>(f)) continue;
            train_x.append_row(x.row(i));
            train_y.push_back(y[i]);
        }
        model = logreg_fit(train_x, train_y, opts);
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (fold_of[i] != static_cast<int>(f)) continue;
            test_scores.push_back(predict_proba(model, x.row(i)));
            test_y.push_back(y[i]);
        }
        result.fold_aucs.push_back(roc_auc(test_scores, test_y));
    }
    result.mean_auc = mean(result.fold_aucs);
    result.sd_auc = std::sqrt(sample_variance(result.fold_aucs));
    return result;
}

} // namespace grantnov
