#include "grantnov/textpipe.hpp"

#include <algorithm>
#include <cmath>

#include "grantnov/csv.hpp"
#include "grantnov/error.hpp"

namespace grantnov {

namespace {

inline bool is_token_char(unsigned char c) {
    // bytes >= 0x80 stay inside tokens so UTF-8 words survive whole
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80;
}

} // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        if (is_token_char(c)) {
            cur.push_back(static_cast<char>(c));
        } else if (!cur.empty()) {
            if (cur.size() >= 2) tokens.push_back(cur);
            cur.clear();
        }
    }
    if (cur.size() >= 2) tokens.push_back(cur);
    return tokens;
}

TermCounts term_counts(const std::vector<std::string>& tokens) {
    TermCounts counts;
    for (const auto& t : tokens) counts[t] += 1.0;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        counts[tokens[i] + "_" + tokens[i + 1]] += 1.0;
    }
    return counts;
}

Vocabulary build_vocabulary(const std::vector<TermCounts>& docs, std::size_t min_df, double max_df_ratio) {
    if (docs.empty()) raise(ErrorCode::validation, "build_vocabulary: empty document collection");
    std::map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
        for (const auto& [term, count] : doc) {
            if (count > 0) ++df[term];
        }
    }
    const double max_df = max_df_ratio * static_cast<double>(docs.size());
    Vocabulary vocab;
    for (const auto& [term, d] : df) { // std::map iterates lexicographically
        if (d >= min_df && static_cast<double>(d) <= max_df) {
            vocab.index.emplace(term, vocab.terms.size());
            vocab.terms.push_back(term);
            vocab.df.push_back(d);
        }
    }
    if (vocab.terms.empty()) {
        raise(ErrorCode::validation, "build_vocabulary: no term survives min_df/max_df thresholds");
    }
    return vocab;
}

SparseVector TfIdfModel::transform(const TermCounts& doc) const {
    SparseVector v;
    v.dim = vocab.size();
    for (const auto& [term, count] : doc) {
        if (count <= 0) continue;
        auto it = vocab.index.find(term);
        if (it == vocab.index.end()) continue;
        v.idx.push_back(it->second);
        v.val.push_back(count * idf[it->second]);
    }
    // column order must be strictly increasing even if the vocab was loaded
    // from a file whose order differs from term order
    std::vector<std::size_t> order(v.idx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v.idx[a] < v.idx[b]; });
    SparseVector sorted;
    sorted.dim = v.dim;
    sorted.idx.reserve(v.idx.size());
    sorted.val.reserve(v.val.size());
    for (std::size_t i : order) {
        sorted.idx.push_back(v.idx[i]);
        sorted.val.push_back(v.val[i]);
    }
    if (l2_normalize) {
        double n2 = sorted.norm2_squared();
        if (n2 > 0) sorted.scale(1.0 / std::sqrt(n2));
    }
    return sorted;
}

std::pair<TfIdfModel, CsrMatrix> tfidf_fit_transform(const std::vector<TermCounts>& docs, const Vocabulary& vocab,
                                                     bool l2_normalize) {
    TfIdfModel model;
    model.vocab = vocab;
    model.corpus_size = docs.size();
    model.l2_normalize = l2_normalize;
    model.idf.resize(vocab.size());
    const double n = static_cast<double>(docs.size());
    for (std::size_t t = 0; t < vocab.size(); ++t) {
        model.idf[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(vocab.df[t]))) + 1.0;
    }
    CsrMatrix matrix;
    matrix.cols = vocab.size();
    for (const auto& doc : docs) {
        matrix.append_row(model.transform(doc));
    }
    return {std::move(model), std::move(matrix)};
}

void write_vocabulary_csv(const std::string& path, const TfIdfModel& model) {
    CsvWriter w(path);
    w.write_row({"TERM", "DF", "IDF"});
    for (std::size_t t = 0; t < model.vocab.size(); ++t) {
        w.write_row({model.vocab.terms[t], std::to_string(model.vocab.df[t]), format_double(model.idf[t])});
    }
}

} // namespace grantnov
