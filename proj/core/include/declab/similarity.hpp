#pragma once

#include "declab/corpus.hpp"
#include "declab/syntax.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace declab::similarity {

using TokenSeq = std::vector<syntax::Token>;

// Lexes by the language grammar's token rules; comments dropped, string
// literals (interpolation included) kept whole.
TokenSeq tokenize(std::string_view code, corpus::Language language);

struct CodeBleuConfig {
    // Component weights (ngram, weighted ngram, ast, dataflow). Normalized
    // to sum 1 on use.
    std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};
    int max_n = 4;
    double keyword_weight = 5.0;
    corpus::Language language = corpus::Language::dart;
};

struct CodeBleuReport {
    double ngram = 0.0;
    double weighted_ngram = 0.0;
    double ast_match = 0.0;
    double dataflow_match = 0.0;
    double combined = 0.0;
    bool candidate_parsed = false;
    // Reference had zero def-use edges: the component is absent and the
    // remaining weights were rescaled to sum 1.
    bool dataflow_absent = false;
    std::array<double, 4> effective_weights{0.25, 0.25, 0.25, 0.25};
    bool empty_candidate = false;
};

// Clipped n-gram precision BLEU with brevity penalty. Zero-match precisions
// are add-one smoothed for n >= 2, never for n = 1; an empty candidate
// scores 0.
double ngram_bleu(const TokenSeq& candidate, const TokenSeq& reference, int max_n);

// As ngram_bleu, but each n-gram counts with the mean of its token weights
// (keyword_weight for keywords, 1 otherwise).
double weighted_ngram_bleu(const TokenSeq& candidate, const TokenSeq& reference,
                           int max_n, double keyword_weight);

struct ComponentScore {
    double score = 0.0;
    bool candidate_parsed = false;
};

// Subtree multiset match over the concrete syntax trees: all subtrees of
// height >= 2, identifier and literal leaves anonymized; score is
// |intersection| / |reference multiset|.
ComponentScore ast_match(std::string_view candidate, std::string_view reference,
                         corpus::Language language);

struct DataflowScore {
    double score = 0.0;
    bool candidate_parsed = false;
    std::size_t reference_edges = 0; // zero => component absent
};

// Def-use edges via nearest-preceding-definition resolution in lexical
// scope, definition sites numbered by order of first appearance so
// consistent renames score identically.
DataflowScore dataflow_match(std::string_view candidate, std::string_view reference,
                             corpus::Language language);

// Normalized def-use edge multiset, exposed for oracle tests:
// (definition-site ordinal, use ordinal under that definition) -> count.
std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t>
dataflow_edges(std::string_view code, corpus::Language language);

// Anonymized serialized subtrees of height >= 2, exposed for oracle tests.
std::map<std::string, std::uint32_t> ast_subtree_multiset(std::string_view code,
                                                          corpus::Language language);

CodeBleuReport codebleu(std::string_view candidate, std::string_view reference,
                        const CodeBleuConfig& config);

} // namespace declab::similarity
