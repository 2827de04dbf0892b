#include <doctest.h>

#include <cmath>

#include "grantnov/detector.hpp"
#include "grantnov/error.hpp"
#include "grantnov/rng.hpp"
#include "oracles.hpp"

using namespace grantnov;

namespace {

std::vector<std::vector<double>> kernel_matrix(const DenseMatrix& x, const KernelSpec& spec) {
    std::vector<std::vector<double>> k(x.rows, std::vector<double>(x.rows));
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.rows; ++j) {
            k[i][j] = kernel_eval(spec, std::span<const double>(x.row_ptr(i), x.cols),
                                  std::span<const double>(x.row_ptr(j), x.cols));
        }
    }
    return k;
}

double dual_objective(const std::vector<std::vector<double>>& k, const std::vector<double>& alpha) {
    double s = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        for (std::size_t j = 0; j < alpha.size(); ++j) s += alpha[i] * k[i][j] * alpha[j];
    }
    return 0.5 * s;
}

// dense alpha vector of the fitted model, mapped back onto training indices
std::vector<double> model_alpha_dense(const OcSvmModel& model, const DenseMatrix& x) {
    std::vector<double> alpha(x.rows, 0.0);
    std::size_t sv = 0;
    for (std::size_t i = 0; i < x.rows && sv < model.support_vectors.rows; ++i) {
        bool same = true;
        for (std::size_t c = 0; c < x.cols; ++c) {
            if (x.at(i, c) != model.support_vectors.at(sv, c)) {
                same = false;
                break;
            }
        }
        if (same) alpha[i] = model.alpha[sv++];
    }
    return alpha;
}

DenseMatrix random_points(Rng& rng, std::size_t n, std::size_t d) {
    DenseMatrix x(n, d);
    for (double& v : x.data) v = rng.normal();
    return x;
}

} // namespace

TEST_CASE("rbf kernel basics") {
    std::vector<double> a = {1.0, 2.0};
    std::vector<double> b = {0.5, -1.0};
    CHECK(rbf_kernel(a, a, 2.0) == doctest::Approx(1.0));
    CHECK(rbf_kernel(a, b, 0.7) == doctest::Approx(rbf_kernel(b, a, 0.7)));
    CHECK(rbf_kernel(a, b, 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
    std::vector<double> c = {1.0};
    CHECK_THROWS_AS(rbf_kernel(a, c, 1.0), Error);
    CHECK_THROWS_AS(rbf_kernel(a, b, 0.0), Error);
}

TEST_CASE("nu = 1 forces uniform alphas") {
    Rng rng(1);
    DenseMatrix x = random_points(rng, 12, 3);
    auto model = ocsvm_fit(x, 1.0, {KernelKind::rbf, 1.0});
    REQUIRE(model.alpha.size() == 12);
    for (double a : model.alpha) CHECK(a == doctest::Approx(1.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("identical training points sit on the boundary") {
    DenseMatrix x(8, 2);
    for (std::size_t r = 0; r < 8; ++r) {
        x.at(r, 0) = 0.3;
        x.at(r, 1) = -1.2;
    }
    auto model = ocsvm_fit(x, 0.5, {KernelKind::rbf, 1.0});
    std::vector<double> point = {0.3, -1.2};
    CHECK(model.decision_value(point) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("infeasible nu and degenerate inputs error") {
    DenseMatrix x(4, 2);
    CHECK_THROWS_AS(ocsvm_fit(x, 0.1, {KernelKind::rbf, 1.0}), Error); // nu*l = 0.4 < 1
    DenseMatrix one(1, 2);
    CHECK_THROWS_AS(ocsvm_fit(one, 1.0, {KernelKind::rbf, 1.0}), Error);
    CHECK_THROWS_AS(ocsvm_fit(x, 0.0, {KernelKind::rbf, 1.0}), Error);
}

TEST_CASE("far outlier gets a negative decision value and a bounded alpha") {
    Rng rng(17);
    DenseMatrix x(50, 2);
    for (std::size_t r = 0; r + 1 < 50; ++r) {
        x.at(r, 0) = rng.normal(0.0, 0.3);
        x.at(r, 1) = rng.normal(0.0, 0.3);
    }
    x.at(49, 0) = 8.0;
    x.at(49, 1) = 8.0;
    auto model = ocsvm_fit(x, 0.1, {KernelKind::rbf, 1.0}, {1e-6, 10'000'000, 20000});
    std::vector<double> outlier = {8.0, 8.0};
    CHECK(model.decision_value(outlier) < 0.0);

    const double c = 1.0 / (0.1 * 50.0);
    auto alpha = model_alpha_dense(model, x);
    CHECK(alpha[49] == doctest::Approx(c).epsilon(1e-9)); // bounded support vector

    // oracle agreement on the same dataset
    auto k = kernel_matrix(x, model.kernel);
    auto oracle = oracles::solve_ocsvm_dual(k, c);
    CHECK(dual_objective(k, alpha) == doctest::Approx(oracle.objective).epsilon(1e-6));
}

TEST_CASE("raw novelty is exactly the negated decision value") {
    Rng rng(23);
    DenseMatrix x = random_points(rng, 30, 4);
    auto model = ocsvm_fit(x, 0.2, {KernelKind::rbf, 0.5});
    for (int i = 0; i < 10; ++i) {
        std::vector<double> p(4);
        for (double& v : p) v = rng.normal();
        CHECK(model.raw_novelty(p) + model.decision_value(p) == 0.0);
    }
}

TEST_CASE("decision value approaches -rho far from all support vectors") {
    Rng rng(29);
    DenseMatrix x = random_points(rng, 20, 2);
    auto model = ocsvm_fit(x, 0.25, {KernelKind::rbf, 1.0});
    std::vector<double> far = {1e4, -1e4};
    CHECK(model.decision_value(far) == doctest::Approx(-model.rho).epsilon(1e-6));
    CHECK(model.raw_novelty(far) == doctest::Approx(model.rho).epsilon(1e-6));
}

TEST_CASE("kkt certificate holds after fit") {
    Rng rng(31);
    const double nu = 0.3;
    DenseMatrix x = random_points(rng, 60, 3);
    const double tol = 1e-5;
    auto model = ocsvm_fit(x, nu, {KernelKind::rbf, 0.8}, {tol, 10'000'000, 20000});
    REQUIRE(model.converged);
    const double c = 1.0 / (nu * 60.0);
    auto alpha = model_alpha_dense(model, x);

    double alpha_sum = 0.0;
    for (double a : alpha) alpha_sum += a;
    CHECK(alpha_sum == doctest::Approx(1.0).epsilon(1e-8));

    for (std::size_t i = 0; i < 60; ++i) {
        std::vector<double> xi(x.row_ptr(i), x.row_ptr(i) + 3);
        const double value = model.decision_value(xi);
        if (alpha[i] <= 0.0) {
            CHECK(value >= -tol);
        } else if (alpha[i] >= c) {
            CHECK(value <= tol);
        } else {
            CHECK(std::fabs(value) <= tol);
        }
    }
}

TEST_CASE("smo dual matches the projected-gradient oracle across datasets") {
    for (std::uint64_t seed : {2u, 3u, 4u}) {
        Rng rng(seed);
        const std::size_t l = 20 + rng.below(30);
        const std::size_t d = 2 + rng.below(4);
        DenseMatrix x = random_points(rng, l, d);
        const double nu = 0.3;
        const double c = 1.0 / (nu * static_cast<double>(l));
        KernelSpec spec{KernelKind::rbf, 0.7};
        auto model = ocsvm_fit(x, nu, spec, {1e-7, 10'000'000, 20000});
        auto k = kernel_matrix(x, spec);
        auto oracle = oracles::solve_ocsvm_dual(k, c);
        auto alpha = model_alpha_dense(model, x);
        CHECK(dual_objective(k, alpha) == doctest::Approx(oracle.objective).epsilon(1e-6));

        // decision values across random probes agree through the oracle rho
        const double rho_oracle = oracles::qp_rho(k, oracle.alpha, c);
        for (int probe = 0; probe < 5; ++probe) {
            std::vector<double> p(d);
            for (double& v : p) v = rng.normal();
            double expansion = 0.0;
            for (std::size_t i = 0; i < l; ++i) {
                std::vector<double> xi(x.row_ptr(i), x.row_ptr(i) + d);
                expansion += oracle.alpha[i] * kernel_eval(spec, xi, p);
            }
            CHECK(model.decision_value(p) == doctest::Approx(expansion - rho_oracle).epsilon(1e-4));
        }
    }
}

TEST_CASE("linear kernel fit works") {
    Rng rng(41);
    DenseMatrix x = random_points(rng, 25, 3);
    auto model = ocsvm_fit(x, 0.4, {KernelKind::linear, 0.0});
    CHECK(model.converged);
    CHECK(std::isfinite(model.rho));
}

TEST_CASE("novelty ordering reverses the kernel-expansion ordering") {
    Rng rng(47);
    DenseMatrix x = random_points(rng, 40, 2);
    auto model = ocsvm_fit(x, 0.2, {KernelKind::rbf, 1.0});
    std::vector<double> a = {0.1, 0.1};
    std::vector<double> b = {3.0, 3.0};
    const double exp_a = model.decision_value(a) + model.rho;
    const double exp_b = model.decision_value(b) + model.rho;
    REQUIRE(exp_a > exp_b);
    CHECK(model.raw_novelty(a) < model.raw_novelty(b));
}

TEST_CASE("model persistence round-trip") {
    Rng rng(53);
    DenseMatrix x = random_points(rng, 15, 3);
    auto model = ocsvm_fit(x, 0.3, {KernelKind::rbf, 0.9});
    save_ocsvm_model("/tmp/gn_ocsvm.txt", model);
    auto loaded = load_ocsvm_model("/tmp/gn_ocsvm.txt");
    std::vector<double> p = {0.2, -0.4, 1.0};
    CHECK(loaded.decision_value(p) == doctest::Approx(model.decision_value(p)).epsilon(1e-14));
    CHECK(loaded.rho == model.rho);
    CHECK(loaded.nu == model.nu);
}

TEST_CASE("auto gamma uses mean per-dimension variance") {
    DenseMatrix x(4, 2);
    x.at(0, 0) = 0;
    x.at(1, 0) = 2;
    x.at(2, 0) = 0;
    x.at(3, 0) = 2; // var = 1
    x.at(0, 1) = 0;
    x.at(1, 1) = 0;
    x.at(2, 1) = 6;
    x.at(3, 1) = 6; // var = 9
    CHECK(auto_gamma(x) == doctest::Approx(1.0 / (2.0 * 5.0)).epsilon(1e-12));

    DenseMatrix constant(3, 2, 1.0);
    CHECK(auto_gamma(constant) == doctest::Approx(1.0));
}
