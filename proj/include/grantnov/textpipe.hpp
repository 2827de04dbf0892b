#ifndef GRANTNOV_TEXTPIPE_HPP
#define GRANTNOV_TEXTPIPE_HPP

#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "grantnov/sparse.hpp"

namespace grantnov {

// lowercase maximal alphanumeric runs, tokens shorter than 2 bytes dropped
std::vector<std::string> tokenize(const std::string& text);

// term -> weight; real-valued so the clone probe can inject noisy counts
using TermCounts = std::map<std::string, double>;

// unigram plus adjacent-bigram counts; bigrams joined with '_'
TermCounts term_counts(const std::vector<std::string>& tokens);

struct Vocabulary {
    std::vector<std::string> terms; // lexicographic
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::size_t> df;

    std::size_t size() const { return terms.size(); }
};

Vocabulary build_vocabulary(const std::vector<TermCounts>& docs, std::size_t min_df, double max_df_ratio);

struct TfIdfOptions {
    std::size_t min_df = 2;
    double max_df_ratio = 0.95;
    bool l2_normalize = true;
};

struct TfIdfModel {
    Vocabulary vocab;
    std::vector<double> idf;
    std::size_t corpus_size = 0;
    bool l2_normalize = true;

    SparseVector transform(const TermCounts& doc) const;
};

// fits idf on these docs and returns their weighted rows; row i corresponds
// to docs[i]
std::pair<TfIdfModel, CsrMatrix> tfidf_fit_transform(const std::vector<TermCounts>& docs, const Vocabulary& vocab,
                                                     bool l2_normalize = true);

void write_vocabulary_csv(const std::string& path, const TfIdfModel& model);

} // namespace grantnov

#endif
