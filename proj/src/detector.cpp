#include "grantnov/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <list>
#include <unordered_map>

#include "grantnov/csv.hpp"
#include "grantnov/error.hpp"

namespace grantnov {

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
    if (x.size() != y.size()) raise(ErrorCode::dimension, "rbf_kernel: dimension mismatch");
    if (gamma <= 0) raise(ErrorCode::validation, "rbf_kernel: gamma must be positive");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
    if (spec.kind == KernelKind::linear) {
        if (x.size() != y.size()) raise(ErrorCode::dimension, "linear kernel: dimension mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
        return s;
    }
    return rbf_kernel(x, y, spec.gamma);
}

double auto_gamma(const DenseMatrix& x) {
    if (x.rows == 0 || x.cols == 0) return 1.0;
    double var_sum = 0.0;
    for (std::size_t c = 0; c < x.cols; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) mean += x.at(r, c);
        mean /= static_cast<double>(x.rows);
        double var = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) {
            const double d = x.at(r, c) - mean;
            var += d * d;
        }
        var_sum += var / static_cast<double>(x.rows);
    }
    const double mean_var = var_sum / static_cast<double>(x.cols);
    if (mean_var <= 0 || !std::isfinite(mean_var)) return 1.0;
    return 1.0 / (static_cast<double>(x.cols) * mean_var);
}

namespace {

// kernel rows, fully cached below the row cap, LRU above it
class KernelCache {
  public:
    KernelCache(const DenseMatrix& x, const KernelSpec& spec, std::size_t cap)
        : x_(x), spec_(spec), full_(x.rows <= cap) {
        if (full_) {
            rows_.assign(x_.rows, {});
        } else {
            // keep roughly cap*cap doubles worth of rows
            max_cached_ = std::max<std::size_t>(2, cap * cap / std::max<std::size_t>(1, x_.rows));
        }
    }

    const std::vector<double>& row(std::size_t i) {
        if (full_) {
            if (rows_[i].empty()) rows_[i] = compute(i);
            return rows_[i];
        }
        auto it = lru_map_.find(i);
        if (it != lru_map_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second;
        }
        lru_.emplace_front(i, compute(i));
        lru_map_[i] = lru_.begin();
        if (lru_.size() > max_cached_) {
            lru_map_.erase(lru_.back().first);
            lru_.pop_back();
        }
        return lru_.front().second;
    }

    double diag(std::size_t i) {
        if (spec_.kind == KernelKind::rbf) return 1.0;
        const double* r = x_.row_ptr(i);
        double s = 0.0;
        for (std::size_t c = 0; c < x_.cols; ++c) s += r[c] * r[c];
        return s;
    }

  private:
    std::vector<double> compute(std::size_t i) const {
        std::vector<double> out(x_.rows);
        std::span<const double> xi(x_.row_ptr(i), x_.cols);
        for (std::size_t j = 0; j < x_.rows; ++j) {
            out[j] = kernel_eval(spec_, xi, std::span<const double>(x_.row_ptr(j), x_.cols));
        }
        return out;
    }

    const DenseMatrix& x_;
    const KernelSpec& spec_;
    bool full_;
    std::vector<std::vector<double>> rows_; // full mode
    std::size_t max_cached_ = 0;
    std::list<std::pair<std::size_t, std::vector<double>>> lru_;
    std::unordered_map<std::size_t, std::list<std::pair<std::size_t, std::vector<double>>>::iterator> lru_map_;
};

} // namespace

OcSvmModel ocsvm_fit(const DenseMatrix& x, double nu, const KernelSpec& kernel, const OcSvmOptions& opts) {
    const std::size_t l = x.rows;
    if (l < 2) raise(ErrorCode::validation, "ocsvm_fit: need at least 2 training rows");
    if (nu <= 0 || nu > 1) raise(ErrorCode::validation, "ocsvm_fit: nu must lie in (0, 1]");
    if (nu * static_cast<double>(l) < 1.0) {
        raise(ErrorCode::validation, "ocsvm_fit: infeasible nu, nu*l must be >= 1");
    }
    KernelSpec spec = kernel;
    if (spec.kind == KernelKind::rbf && spec.gamma <= 0) spec.gamma = auto_gamma(x);

    const double c_bound = 1.0 / (nu * static_cast<double>(l));
    std::vector<double> alpha(l, 0.0);
    // deterministic feasible start: fill the box from the front
    double remaining = 1.0;
    for (std::size_t i = 0; i < l && remaining > 0; ++i) {
        const double a = std::min(c_bound, remaining);
        alpha[i] = a;
        remaining -= a;
    }

    KernelCache cache(x, spec, opts.cache_rows_cap);

    // gradient of the dual objective (1/2) a^T K a is g = K a
    std::vector<double> grad(l, 0.0);
    for (std::size_t i = 0; i < l; ++i) {
        if (alpha[i] == 0.0) continue;
        const auto& ki = cache.row(i);
        const double a = alpha[i];
        for (std::size_t j = 0; j < l; ++j) grad[j] += a * ki[j];
    }

    OcSvmModel model;
    model.nu = nu;
    model.train_count = l;
    model.kernel = spec;

    std::uint64_t iter = 0;
    double violation = 0.0;
    for (; iter < opts.max_iter; ++iter) {
        // maximal violating pair: raise the smallest gradient among rows that
        // can grow, lower the largest among rows that can shrink
        std::size_t up = l, down = l;
        double g_up = std::numeric_limits<double>::infinity();
        double g_down = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < l; ++i) {
            if (alpha[i] < c_bound && grad[i] < g_up) {
                g_up = grad[i];
                up = i;
            }
            if (alpha[i] > 0.0 && grad[i] > g_down) {
                g_down = grad[i];
                down = i;
            }
        }
        violation = g_down - g_up;
        if (up == l || down == l || violation <= opts.tol) break;

        const auto& k_up = cache.row(up);
        const double k_ud = k_up[down];
        const double eta = cache.diag(up) + cache.diag(down) - 2.0 * k_ud;
        double step = (eta > 1e-15) ? violation / eta : std::numeric_limits<double>::infinity();
        const double room_up = c_bound - alpha[up];
        const double room_down = alpha[down];
        step = std::min(step, std::min(room_up, room_down));

        if (step >= room_up) {
            alpha[up] = c_bound;
            alpha[down] -= room_up;
            step = room_up;
        } else if (step >= room_down) {
            alpha[down] = 0.0;
            alpha[up] += room_down;
            step = room_down;
        } else {
            alpha[up] += step;
            alpha[down] -= step;
        }
        if (step <= 0) break; // no progress possible

        const auto& k_down = cache.row(down);
        for (std::size_t j = 0; j < l; ++j) grad[j] += step * (k_up[j] - k_down[j]);
    }

    model.iterations = iter;
    model.kkt_violation = std::max(violation, 0.0);
    model.converged = violation <= opts.tol;

    // rho: average gradient over unbounded support vectors, else midpoint of
    // the interval the bound constraints allow
    double rho_sum = 0.0;
    std::size_t rho_n = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < l; ++i) {
        if (alpha[i] > 0.0 && alpha[i] < c_bound) {
            rho_sum += grad[i];
            ++rho_n;
        } else if (alpha[i] == 0.0) {
            upper = std::min(upper, grad[i]);
        } else {
            lower = std::max(lower, grad[i]);
        }
    }
    if (rho_n > 0) {
        model.rho = rho_sum / static_cast<double>(rho_n);
    } else if (std::isfinite(lower) && std::isfinite(upper)) {
        model.rho = 0.5 * (lower + upper);
    } else if (std::isfinite(lower)) {
        model.rho = lower;
    } else {
        model.rho = upper;
    }

    for (std::size_t i = 0; i < l; ++i) {
        if (alpha[i] > 0.0) {
            model.alpha.push_back(alpha[i]);
            if (model.support_vectors.cols == 0) model.support_vectors = DenseMatrix(0, x.cols);
            model.support_vectors.data.insert(model.support_vectors.data.end(), x.row_ptr(i), x.row_ptr(i) + x.cols);
            ++model.support_vectors.rows;
        }
    }
    return model;
}

double OcSvmModel::decision_value(std::span<const double> x) const {
    if (x.size() != support_vectors.cols) {
        raise(ErrorCode::dimension, "decision_value: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < support_vectors.rows; ++i) {
        s += alpha[i] * kernel_eval(kernel, std::span<const double>(support_vectors.row_ptr(i), support_vectors.cols), x);
    }
    return s - rho;
}

double OcSvmModel::raw_novelty(std::span<const double> x) const { return -decision_value(x); }

void save_ocsvm_model(const std::string& path, const OcSvmModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io, "cannot write ocsvm model: " + path);
    out << "grantnov-ocsvm 1\n";
    out << "kernel " << (model.kernel.kind == KernelKind::rbf ? "rbf" : "linear") << "\n";
    out << "gamma " << format_double(model.kernel.gamma) << "\n";
    out << "nu " << format_double(model.nu) << "\n";
    out << "rho " << format_double(model.rho) << "\n";
    out << "l " << model.train_count << "\n";
    out << "sv " << model.support_vectors.rows << " " << model.support_vectors.cols << "\n";
    for (std::size_t i = 0; i < model.support_vectors.rows; ++i) {
        out << format_double(model.alpha[i]);
        for (std::size_t c = 0; c < model.support_vectors.cols; ++c) {
            out << ' ' << format_double(model.support_vectors.at(i, c));
        }
        out << '\n';
    }
}

OcSvmModel load_ocsvm_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io, "cannot open ocsvm model: " + path);
    std::string magic, key, kind;
    int version = 0;
    in >> magic >> version;
    if (magic != "grantnov-ocsvm" || version != 1) raise(ErrorCode::parse, "not a grantnov-ocsvm v1 file: " + path);
    OcSvmModel model;
    std::size_t sv_rows = 0, sv_cols = 0;
    in >> key >> kind;
    if (key != "kernel") raise(ErrorCode::parse, "malformed ocsvm header");
    model.kernel.kind = (kind == "rbf") ? KernelKind::rbf : KernelKind::linear;
    in >> key >> model.kernel.gamma;
    in >> key >> model.nu;
    in >> key >> model.rho;
    in >> key >> model.train_count;
    in >> key >> sv_rows >> sv_cols;
    if (key != "sv") raise(ErrorCode::parse, "malformed ocsvm header");
    model.support_vectors = DenseMatrix(sv_rows, sv_cols);
    model.alpha.resize(sv_rows);
    for (std::size_t i = 0; i < sv_rows; ++i) {
        if (!(in >> model.alpha[i])) raise(ErrorCode::parse, "truncated ocsvm model");
        for (std::size_t c = 0; c < sv_cols; ++c) {
            if (!(in >> model.support_vectors.at(i, c))) raise(ErrorCode::parse, "truncated ocsvm model");
        }
    }
    model.converged = true;
    return model;
}

} // namespace grantnov
