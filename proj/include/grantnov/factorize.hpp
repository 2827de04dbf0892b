#ifndef GRANTNOV_FACTORIZE_HPP
#define GRANTNOV_FACTORIZE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "grantnov/sparse.hpp"

namespace grantnov {

struct NmfOptions {
    std::size_t max_iter = 200;
    double tol = 1e-4; // stop when relative loss decrease falls below
};

struct NmfFitInfo {
    std::size_t iterations = 0;
    double final_loss = 0.0;           // squared Frobenius reconstruction error
    std::vector<double> loss_history;  // loss after every full update
    std::size_t zero_topic_repairs = 0;
};

// topics x terms factor H plus everything needed to project new documents
struct TopicModel {
    DenseMatrix h; // k x terms, entrywise >= 0
    std::size_t k = 0;
    std::uint64_t seed = 0;
    NmfFitInfo fit;
    DenseMatrix hht; // k x k Gram of H, kept for fast transforms

    void rebuild_gram();
};

struct NmfResult {
    DenseMatrix w; // documents x topics
    TopicModel model;
};

NmfResult nmf_fit(const CsrMatrix& v, std::size_t k, std::uint64_t seed, const NmfOptions& opts = {});

// explicit-init overload used by the scaling/monotonicity property tests
NmfResult nmf_fit_from(const CsrMatrix& v, DenseMatrix w0, DenseMatrix h0, std::uint64_t seed,
                       const NmfOptions& opts = {});

// least-squares projection onto the frozen topic basis, w >= 0
std::vector<double> nmf_transform(const TopicModel& model, const SparseVector& v, const NmfOptions& opts = {});

void save_topic_model(const std::string& path, const TopicModel& model);
TopicModel load_topic_model(const std::string& path);

} // namespace grantnov

#endif
