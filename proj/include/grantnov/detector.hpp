#ifndef GRANTNOV_DETECTOR_HPP
#define GRANTNOV_DETECTOR_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grantnov/sparse.hpp"

namespace grantnov {

enum class KernelKind { rbf, linear };

struct KernelSpec {
    KernelKind kind = KernelKind::rbf;
    double gamma = 1.0; // rbf only, must be > 0
};

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);
double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

// default bandwidth: 1 / (dims * mean per-dimension variance of X)
double auto_gamma(const DenseMatrix& x);

struct OcSvmOptions {
    double tol = 1e-4;
    std::uint64_t max_iter = 10'000'000; // pair updates
    std::size_t cache_rows_cap = 20'000; // full kernel matrix below this
};

struct OcSvmModel {
    DenseMatrix support_vectors; // rows with alpha > 0
    std::vector<double> alpha;
    double rho = 0.0;
    double nu = 0.0;
    std::size_t train_count = 0;
    KernelSpec kernel;

    bool converged = false;
    double kkt_violation = 0.0;
    std::uint64_t iterations = 0;

    // signed quantity whose sign classifies: sum_i alpha_i K(sv_i, x) - rho
    double decision_value(std::span<const double> x) const;
    // rho - sum_i alpha_i K(sv_i, x); larger = more novel
    double raw_novelty(std::span<const double> x) const;
};

OcSvmModel ocsvm_fit(const DenseMatrix& x, double nu, const KernelSpec& kernel, const OcSvmOptions& opts = {});

void save_ocsvm_model(const std::string& path, const OcSvmModel& model);
OcSvmModel load_ocsvm_model(const std::string& path);

} // namespace grantnov

#endif
