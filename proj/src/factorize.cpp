#include "grantnov/factorize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "grantnov/csv.hpp"
#include "grantnov/error.hpp"
#include "grantnov/rng.hpp"

namespace grantnov {

namespace {

constexpr double kDenomEps = 1e-12;

// C = A^T A for row-major A (rows x k), result k x k
void gram(const DenseMatrix& a, DenseMatrix& out) {
    const std::size_t k = a.cols;
    out = DenseMatrix(k, k, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        const double* row = a.row_ptr(r);
        for (std::size_t i = 0; i < k; ++i) {
            const double ri = row[i];
            if (ri == 0.0) continue;
            double* out_row = out.row_ptr(i);
            for (std::size_t j = 0; j < k; ++j) out_row[j] += ri * row[j];
        }
    }
}

// gram of H over its columns: out = H H^T (k x k) for H (k x m)
void gram_rows(const DenseMatrix& h, DenseMatrix& out) {
    const std::size_t k = h.rows;
    const std::size_t m = h.cols;
    out = DenseMatrix(k, k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const double* hi = h.row_ptr(i);
        for (std::size_t j = i; j < k; ++j) {
            const double* hj = h.row_ptr(j);
            double s = 0.0;
            for (std::size_t c = 0; c < m; ++c) s += hi[c] * hj[c];
            out.at(i, j) = s;
            out.at(j, i) = s;
        }
    }
}

// squared Frobenius loss ||V - WH||^2 using ||V||^2 - 2<V,WH> + tr(WtW HHt)
double frobenius_loss(const CsrMatrix& v, double v_norm2, const DenseMatrix& w, const DenseMatrix& h) {
    const std::size_t k = w.cols;
    double cross = 0.0;
    for (std::size_t r = 0; r < v.rows; ++r) {
        const double* wrow = w.row_ptr(r);
        for (std::size_t p = v.row_ptr[r]; p < v.row_ptr[r + 1]; ++p) {
            const std::size_t c = v.col_idx[p];
            double wh = 0.0;
            for (std::size_t t = 0; t < k; ++t) wh += wrow[t] * h.at(t, c);
            cross += v.vals[p] * wh;
        }
    }
    DenseMatrix wtw;
    gram(w, wtw);
    DenseMatrix hht;
    gram_rows(h, hht);
    double quad = 0.0;
    for (std::size_t i = 0; i < k * k; ++i) quad += wtw.data[i] * hht.data[i];
    return v_norm2 - 2.0 * cross + quad;
}

void fill_uniform(DenseMatrix& m, Rng& rng) {
    for (double& x : m.data) x = rng.uniform_open0();
}

} // namespace

void TopicModel::rebuild_gram() { gram_rows(h, hht); }

NmfResult nmf_fit(const CsrMatrix& v, std::size_t k, std::uint64_t seed, const NmfOptions& opts) {
    Rng rng(derive_seed(seed, "nmf-init"));
    DenseMatrix w0(v.rows, k);
    DenseMatrix h0(k, v.cols);
    fill_uniform(w0, rng);
    fill_uniform(h0, rng);
    return nmf_fit_from(v, std::move(w0), std::move(h0), seed, opts);
}

NmfResult nmf_fit_from(const CsrMatrix& v, DenseMatrix w, DenseMatrix h, std::uint64_t seed, const NmfOptions& opts) {
    for (double x : v.vals) {
        if (x < 0) raise(ErrorCode::validation, "nmf_fit: matrix has a negative entry");
    }
    const std::size_t k = w.cols;
    if (h.rows != k || w.rows != v.rows || h.cols != v.cols) {
        raise(ErrorCode::dimension, "nmf_fit: factor dimensions do not match V");
    }

    Rng repair_rng(derive_seed(seed, "nmf-repair"));
    const double v_norm2 = v.frobenius_squared();

    NmfResult result;
    NmfFitInfo& info = result.model.fit;
    double loss = frobenius_loss(v, v_norm2, w, h);
    info.loss_history.push_back(loss);

    DenseMatrix wtw, hht;
    DenseMatrix num_h(k, v.cols);
    DenseMatrix num_w(v.rows, k);

    for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
        // H <- H * (WtV) / (WtW H + eps)
        gram(w, wtw);
        std::fill(num_h.data.begin(), num_h.data.end(), 0.0);
        for (std::size_t r = 0; r < v.rows; ++r) {
            const double* wrow = w.row_ptr(r);
            for (std::size_t p = v.row_ptr[r]; p < v.row_ptr[r + 1]; ++p) {
                const std::size_t c = v.col_idx[p];
                const double x = v.vals[p];
                for (std::size_t t = 0; t < k; ++t) num_h.at(t, c) += wrow[t] * x;
            }
        }
        for (std::size_t t = 0; t < k; ++t) {
            const double* wtw_row = wtw.row_ptr(t);
            for (std::size_t c = 0; c < v.cols; ++c) {
                double denom = 0.0;
                for (std::size_t s = 0; s < k; ++s) denom += wtw_row[s] * h.at(s, c);
                h.at(t, c) *= num_h.at(t, c) / (denom + kDenomEps);
            }
        }

        // W <- W * (V Ht) / (W HHt + eps)
        gram_rows(h, hht);
        std::fill(num_w.data.begin(), num_w.data.end(), 0.0);
        for (std::size_t r = 0; r < v.rows; ++r) {
            double* nrow = num_w.row_ptr(r);
            for (std::size_t p = v.row_ptr[r]; p < v.row_ptr[r + 1]; ++p) {
                const std::size_t c = v.col_idx[p];
                const double x = v.vals[p];
                for (std::size_t t = 0; t < k; ++t) nrow[t] += x * h.at(t, c);
            }
        }
        for (std::size_t r = 0; r < v.rows; ++r) {
            double* wrow = w.row_ptr(r);
            double* nrow = num_w.row_ptr(r);
            for (std::size_t t = 0; t < k; ++t) {
                double denom = 0.0;
                const double* hht_row = hht.row_ptr(t);
                for (std::size_t s = 0; s < k; ++s) denom += wrow[s] * hht_row[s];
                wrow[t] *= nrow[t] / (denom + kDenomEps);
            }
        }

        // a topic row that underflowed to zero is re-seeded so it can recover
        for (std::size_t t = 0; t < k; ++t) {
            bool dead = true;
            for (std::size_t c = 0; c < v.cols && dead; ++c) {
                if (h.at(t, c) > 0.0) dead = false;
            }
            if (dead) {
                for (std::size_t c = 0; c < v.cols; ++c) h.at(t, c) = repair_rng.uniform_open0();
                ++info.zero_topic_repairs;
            }
        }

        double new_loss = frobenius_loss(v, v_norm2, w, h);
        info.loss_history.push_back(new_loss);
        info.iterations = iter + 1;
        const double rel_decrease = (loss - new_loss) / std::max(loss, kDenomEps);
        loss = new_loss;
        if (rel_decrease >= 0 && rel_decrease < opts.tol) break;
    }

    info.final_loss = loss;
    result.w = std::move(w);
    result.model.h = std::move(h);
    result.model.k = k;
    result.model.seed = seed;
    result.model.rebuild_gram();
    return result;
}

std::vector<double> nmf_transform(const TopicModel& model, const SparseVector& v, const NmfOptions& opts) {
    if (v.dim != model.h.cols) {
        raise(ErrorCode::dimension, "nmf_transform: vector dimension " + std::to_string(v.dim) +
                                        " does not match topic model terms " + std::to_string(model.h.cols));
    }
    const std::size_t k = model.k;
    Rng rng(derive_seed(model.seed, "nmf-transform"));
    std::vector<double> w(k);
    for (double& x : w) x = rng.uniform_open0();

    // v Ht, fixed across iterations
    std::vector<double> vht(k, 0.0);
    for (std::size_t p = 0; p < v.idx.size(); ++p) {
        const std::size_t c = v.idx[p];
        const double x = v.val[p];
        for (std::size_t t = 0; t < k; ++t) vht[t] += x * model.h.at(t, c);
    }

    const double v_norm2 = v.norm2_squared();
    auto loss_of = [&](const std::vector<double>& ww) {
        double cross = 0.0, quad = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
            cross += ww[t] * vht[t];
            double hw = 0.0;
            const double* hht_row = model.hht.row_ptr(t);
            for (std::size_t s = 0; s < k; ++s) hw += hht_row[s] * ww[s];
            quad += ww[t] * hw;
        }
        return v_norm2 - 2.0 * cross + quad;
    };

    double loss = loss_of(w);
    for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
        for (std::size_t t = 0; t < k; ++t) {
            double denom = 0.0;
            const double* hht_row = model.hht.row_ptr(t);
            for (std::size_t s = 0; s < k; ++s) denom += hht_row[s] * w[s];
            w[t] *= vht[t] / (denom + kDenomEps);
        }
        double new_loss = loss_of(w);
        const double rel_decrease = (loss - new_loss) / std::max(loss, kDenomEps);
        loss = new_loss;
        if (rel_decrease >= 0 && rel_decrease < opts.tol) break;
    }
    return w;
}

void save_topic_model(const std::string& path, const TopicModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io, "cannot write topic model: " + path);
    out << "grantnov-nmf 1\n";
    out << "k " << model.k << "\n";
    out << "seed " << model.seed << "\n";
    out << "dims " << model.h.rows << " " << model.h.cols << "\n";
    for (std::size_t r = 0; r < model.h.rows; ++r) {
        for (std::size_t c = 0; c < model.h.cols; ++c) {
            if (c) out << ' ';
            out << format_double(model.h.at(r, c));
        }
        out << '\n';
    }
}

TopicModel load_topic_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io, "cannot open topic model: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "grantnov-nmf" || version != 1) raise(ErrorCode::parse, "not a grantnov-nmf v1 file: " + path);
    TopicModel model;
    std::string key;
    std::size_t rows = 0, cols = 0;
    in >> key >> model.k;
    if (key != "k") raise(ErrorCode::parse, "malformed topic model header");
    in >> key >> model.seed;
    if (key != "seed") raise(ErrorCode::parse, "malformed topic model header");
    in >> key >> rows >> cols;
    if (key != "dims") raise(ErrorCode::parse, "malformed topic model header");
    model.h = DenseMatrix(rows, cols);
    for (double& x : model.h.data) {
        if (!(in >> x)) raise(ErrorCode::parse, "truncated topic model matrix");
    }
    model.rebuild_gram();
    return model;
}

} // namespace grantnov
