#include "declab/similarity.hpp"

#include "declab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace declab::similarity {

namespace {

using syntax::CstNode;
using syntax::ParseResult;
using syntax::Token;
using syntax::TokenKind;

// --- n-gram machinery -------------------------------------------------------

// n-grams are keyed by joining token texts with an unlexable separator.
std::string ngram_key(const TokenSeq& tokens, std::size_t start, int n) {
    std::string key;
    for (int i = 0; i < n; ++i) {
        if (i > 0) key += '\x1f';
        key += tokens[start + static_cast<std::size_t>(i)].text;
    }
    return key;
}

struct NgramCounts {
    std::unordered_map<std::string, std::uint32_t> counts;
    // Mean token weight per distinct n-gram (same key always yields the
    // same weight since weights depend only on token texts/kinds).
    std::unordered_map<std::string, double> weight;
    std::size_t total = 0;
};

NgramCounts collect_ngrams(const TokenSeq& tokens, int n, double keyword_weight) {
    NgramCounts out;
    if (tokens.size() < static_cast<std::size_t>(n)) {
        return out;
    }
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        std::string key = ngram_key(tokens, i, n);
        double w = 0.0;
        for (int j = 0; j < n; ++j) {
            const Token& t = tokens[i + static_cast<std::size_t>(j)];
            w += t.kind == TokenKind::keyword ? keyword_weight : 1.0;
        }
        out.weight[key] = w / n;
        ++out.counts[key];
        ++out.total;
    }
    return out;
}

double bleu_core(const TokenSeq& candidate, const TokenSeq& reference, int max_n,
                 std::optional<double> keyword_weight) {
    if (max_n < 1) {
        throw data_error("ngram_bleu: max_n must be >= 1");
    }
    if (candidate.empty()) {
        return 0.0;
    }
    const double kw = keyword_weight.value_or(1.0);

    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        const NgramCounts cand = collect_ngrams(candidate, n, kw);
        const NgramCounts ref = collect_ngrams(reference, n, kw);

        double matched = 0.0;
        double total = 0.0;
        for (const auto& [key, count] : cand.counts) {
            const double w = keyword_weight ? cand.weight.at(key) : 1.0;
            total += w * count;
            auto it = ref.counts.find(key);
            if (it != ref.counts.end()) {
                matched += w * std::min(count, it->second);
            }
        }

        double precision;
        if (matched > 0.0) {
            precision = matched / total;
        } else if (n == 1) {
            return 0.0; // no unigram overlap: the score is zero outright
        } else {
            precision = 1.0 / (total + 1.0); // add-one smoothing floor
        }
        log_sum += std::log(precision);
    }

    double score = std::exp(log_sum / max_n);

    const double c = static_cast<double>(candidate.size());
    const double r = static_cast<double>(reference.size());
    if (c < r && c > 0.0) {
        score *= std::exp(1.0 - r / c);
    }
    return std::clamp(score, 0.0, 1.0);
}

// --- syntax-tree subtree extraction ------------------------------------------

int node_height(const ParseResult& parse, std::uint32_t index,
                std::vector<int>& memo) {
    if (memo[index] != 0) {
        return memo[index];
    }
    int best = 0;
    for (const auto& child : parse.nodes[index].children) {
        const int h = child.is_token ? 1 : node_height(parse, child.index, memo);
        best = std::max(best, h);
    }
    memo[index] = best + 1;
    return memo[index];
}

void serialize_subtree(const ParseResult& parse, std::uint32_t index,
                       std::string& out) {
    const CstNode& node = parse.nodes[index];
    out += '(';
    out += node.rule;
    for (const auto& child : node.children) {
        out += ' ';
        if (child.is_token) {
            const Token& t = parse.tokens[child.index];
            // Identifier and literal leaves are anonymized so renamings and
            // constant changes do not perturb structure matching.
            switch (t.kind) {
            case TokenKind::identifier:
                out += "ID";
                break;
            case TokenKind::literal:
                out += "LIT";
                break;
            default:
                out += t.text;
                break;
            }
        } else {
            serialize_subtree(parse, child.index, out);
        }
    }
    out += ')';
}

std::map<std::string, std::uint32_t> subtree_multiset(const ParseResult& parse) {
    std::map<std::string, std::uint32_t> out;
    if (parse.nodes.empty()) {
        return out;
    }
    std::vector<int> heights(parse.nodes.size(), 0);
    for (std::uint32_t i = 0; i < parse.nodes.size(); ++i) {
        if (node_height(parse, i, heights) >= 2) {
            std::string repr;
            serialize_subtree(parse, i, repr);
            ++out[repr];
        }
    }
    return out;
}

// --- def-use extraction -------------------------------------------------------

struct DefSite {
    std::uint32_t ordinal = 0;
    std::uint32_t next_use = 0;
};

using EdgeMultiset = std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t>;

const std::set<std::string_view>& scope_rules(corpus::Language lang) {
    static const std::set<std::string_view> dart = {
        "unit",
        "block",
        "function_declaration",
        "local_function",
        "method_declaration",
        "getter_declaration",
        "setter_declaration",
        "operator_declaration",
        "function_expression",
        "for_statement",
        "for_element",
        "on_handler",
        "catch_handler",
    };
    static const std::set<std::string_view> swift = {
        "unit",
        "block",
        "function_declaration",
        "initializer_declaration",
        "deinit_declaration",
        "subscript_declaration",
        "closure_expression",
        "for_statement",
        "if_statement",
        "while_statement",
        "switch_case",
        "catch_block",
        "accessor",
    };
    return lang == corpus::Language::dart ? dart : swift;
}

class DataflowWalker {
public:
    DataflowWalker(const ParseResult& parse, corpus::Language lang)
        : parse_(parse), scopes_rules_(scope_rules(lang)) {}

    EdgeMultiset run() {
        if (parse_.nodes.empty()) {
            return {};
        }
        push_scope();
        walk(parse_.root);
        return edges_;
    }

private:
    struct Scope {
        std::unordered_map<std::string_view, std::size_t> bindings; // name -> site index
    };

    void push_scope() { scopes_.emplace_back(); }
    void pop_scope() { scopes_.pop_back(); }

    std::size_t register_def(std::string_view name, bool escape_to_parent) {
        sites_.push_back(DefSite{next_ordinal_++, 0});
        const std::size_t site = sites_.size() - 1;
        std::size_t target = scopes_.size() - 1;
        if (escape_to_parent && scopes_.size() >= 2) {
            target = scopes_.size() - 2;
        }
        scopes_[target].bindings[name] = site;
        return site;
    }

    DefSite* resolve(std::string_view name) {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto found = it->bindings.find(name);
            if (found != it->bindings.end()) {
                return &sites_[found->second];
            }
        }
        return nullptr;
    }

    void record_use(std::string_view name) {
        if (DefSite* site = resolve(name)) {
            ++edges_[{site->ordinal, site->next_use++}];
        }
    }

    // Reassigns the binding that currently resolves `name`; unresolved
    // targets become fresh definitions in the current scope.
    void record_assignment_def(std::string_view name) {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto found = it->bindings.find(name);
            if (found != it->bindings.end()) {
                sites_.push_back(DefSite{next_ordinal_++, 0});
                found->second = sites_.size() - 1;
                return;
            }
        }
        register_def(name, false);
    }

    std::string_view node_token_text(const CstNode& node) const {
        for (const auto& child : node.children) {
            if (child.is_token) {
                return parse_.tokens[child.index].text;
            }
        }
        return {};
    }

    // A collapsed lone-identifier expression is just the identifier_ref node.
    const CstNode* as_identifier_ref(const syntax::CstChild& child) const {
        if (child.is_token) {
            return nullptr;
        }
        const CstNode& node = parse_.nodes[child.index];
        return node.rule == "identifier_ref" ? &node : nullptr;
    }

    void walk(std::uint32_t index) {
        const CstNode& node = parse_.nodes[index];
        const bool guard_like = node.rule == "guard_statement";
        const bool opens_scope = scopes_rules_.contains(node.rule);
        if (opens_scope) {
            push_scope();
        }

        if (node.rule == "def_name") {
            register_def(node_token_text(node), in_guard_condition_);
        } else if (node.rule == "identifier_ref") {
            record_use(node_token_text(node));
        } else if (node.rule == "assignment_expression" && node.children.size() >= 3 &&
                   !node.children[1].is_token &&
                   parse_.nodes[node.children[1].index].rule == "assignment_operator") {
            const CstNode* lhs_ref = as_identifier_ref(node.children[0]);
            const CstNode& op = parse_.nodes[node.children[1].index];
            const bool plain_assign =
                op.children.size() == 1 && op.children[0].is_token &&
                parse_.tokens[op.children[0].index].text == "=";
            if (lhs_ref != nullptr) {
                const std::string_view name = node_token_text(*lhs_ref);
                if (!plain_assign) {
                    record_use(name); // compound assignment reads first
                }
                // Right-hand side evaluates against the pre-assignment state.
                for (std::size_t i = 2; i < node.children.size(); ++i) {
                    if (!node.children[i].is_token) {
                        walk(node.children[i].index);
                    }
                }
                record_assignment_def(name);
                if (opens_scope) pop_scope();
                return;
            }
            for (const auto& child : node.children) {
                if (!child.is_token) walk(child.index);
            }
            if (opens_scope) pop_scope();
            return;
        }

        if (guard_like) {
            // Defs in guard conditions outlive the guard's else block.
            for (const auto& child : node.children) {
                if (child.is_token) continue;
                const CstNode& sub = parse_.nodes[child.index];
                const bool in_condition = sub.rule != "block";
                const bool saved = in_guard_condition_;
                in_guard_condition_ = in_condition;
                walk(child.index);
                in_guard_condition_ = saved;
            }
        } else {
            for (const auto& child : node.children) {
                if (!child.is_token) {
                    walk(child.index);
                }
            }
        }

        if (opens_scope) {
            pop_scope();
        }
    }

    const ParseResult& parse_;
    const std::set<std::string_view>& scopes_rules_;
    std::vector<Scope> scopes_;
    std::vector<DefSite> sites_;
    EdgeMultiset edges_;
    std::uint32_t next_ordinal_ = 0;
    bool in_guard_condition_ = false;
};

double multiset_overlap(const EdgeMultiset& cand, const EdgeMultiset& ref) {
    std::uint64_t matched = 0;
    std::uint64_t total = 0;
    for (const auto& [edge, count] : ref) {
        total += count;
        auto it = cand.find(edge);
        if (it != cand.end()) {
            matched += std::min<std::uint64_t>(count, it->second);
        }
    }
    if (total == 0) {
        return 0.0;
    }
    return static_cast<double>(matched) / static_cast<double>(total);
}

} // namespace

TokenSeq tokenize(std::string_view code, corpus::Language language) {
    return syntax::lex(code, language);
}

double ngram_bleu(const TokenSeq& candidate, const TokenSeq& reference, int max_n) {
    return bleu_core(candidate, reference, max_n, std::nullopt);
}

double weighted_ngram_bleu(const TokenSeq& candidate, const TokenSeq& reference,
                           int max_n, double keyword_weight) {
    if (keyword_weight <= 0.0) {
        throw data_error("weighted_ngram_bleu: keyword_weight must be positive");
    }
    return bleu_core(candidate, reference, max_n, keyword_weight);
}

std::map<std::string, std::uint32_t> ast_subtree_multiset(std::string_view code,
                                                          corpus::Language language) {
    const auto parse = syntax::language_grammar(language).run(code, language);
    if (!parse.ok) {
        throw data_error("ast_subtree_multiset: code does not parse: " +
                         parse.diagnostics);
    }
    return subtree_multiset(parse);
}

ComponentScore ast_match(std::string_view candidate, std::string_view reference,
                         corpus::Language language) {
    const auto& grammar = syntax::language_grammar(language);
    const auto ref_parse = grammar.run(reference, language);
    if (!ref_parse.ok) {
        throw data_error("ast_match: reference does not parse: " + ref_parse.diagnostics);
    }
    const auto cand_parse = grammar.run(candidate, language);
    ComponentScore out;
    out.candidate_parsed = cand_parse.ok && !cand_parse.tokens.empty();
    if (!out.candidate_parsed) {
        return out;
    }
    const auto ref_set = subtree_multiset(ref_parse);
    const auto cand_set = subtree_multiset(cand_parse);
    std::uint64_t total = 0;
    std::uint64_t matched = 0;
    for (const auto& [repr, count] : ref_set) {
        total += count;
        auto it = cand_set.find(repr);
        if (it != cand_set.end()) {
            matched += std::min<std::uint64_t>(count, it->second);
        }
    }
    if (total == 0) {
        // Degenerate reference with no structure: identical emptiness counts
        // as a full match.
        out.score = cand_set.empty() ? 1.0 : 0.0;
        return out;
    }
    out.score = static_cast<double>(matched) / static_cast<double>(total);
    return out;
}

EdgeMultiset dataflow_edges(std::string_view code, corpus::Language language) {
    const auto parse = syntax::language_grammar(language).run(code, language);
    if (!parse.ok) {
        throw data_error("dataflow_edges: code does not parse: " + parse.diagnostics);
    }
    DataflowWalker walker(parse, language);
    return walker.run();
}

DataflowScore dataflow_match(std::string_view candidate, std::string_view reference,
                             corpus::Language language) {
    const auto& grammar = syntax::language_grammar(language);
    const auto ref_parse = grammar.run(reference, language);
    if (!ref_parse.ok) {
        throw data_error("dataflow_match: reference does not parse: " +
                         ref_parse.diagnostics);
    }
    DataflowScore out;
    DataflowWalker ref_walker(ref_parse, language);
    const EdgeMultiset ref_edges = ref_walker.run();
    for (const auto& [edge, count] : ref_edges) {
        out.reference_edges += count;
    }

    const auto cand_parse = grammar.run(candidate, language);
    out.candidate_parsed = cand_parse.ok && !cand_parse.tokens.empty();
    if (!out.candidate_parsed || out.reference_edges == 0) {
        return out;
    }
    DataflowWalker cand_walker(cand_parse, language);
    out.score = multiset_overlap(cand_walker.run(), ref_edges);
    return out;
}

CodeBleuReport codebleu(std::string_view candidate, std::string_view reference,
                        const CodeBleuConfig& config) {
    if (config.max_n < 1) {
        throw data_error("codebleu: max_n must be >= 1");
    }
    const double weight_sum =
        std::accumulate(config.weights.begin(), config.weights.end(), 0.0);
    if (weight_sum <= 0.0) {
        throw data_error("codebleu: component weights must sum to a positive value");
    }

    CodeBleuReport report;
    const TokenSeq cand_tokens = tokenize(candidate, config.language);
    const TokenSeq ref_tokens = tokenize(reference, config.language);
    report.empty_candidate = cand_tokens.empty();

    report.ngram = ngram_bleu(cand_tokens, ref_tokens, config.max_n);
    report.weighted_ngram =
        weighted_ngram_bleu(cand_tokens, ref_tokens, config.max_n, config.keyword_weight);

    const auto ast = ast_match(candidate, reference, config.language);
    const auto flow = dataflow_match(candidate, reference, config.language);
    report.ast_match = ast.score;
    report.dataflow_match = flow.score;
    report.candidate_parsed = ast.candidate_parsed && !report.empty_candidate;
    report.dataflow_absent = flow.reference_edges == 0;

    std::array<double, 4> weights = config.weights;
    for (double& w : weights) {
        w /= weight_sum;
    }
    if (report.dataflow_absent) {
        const double remaining = weights[0] + weights[1] + weights[2];
        weights[0] /= remaining;
        weights[1] /= remaining;
        weights[2] /= remaining;
        weights[3] = 0.0;
    }
    report.effective_weights = weights;
    report.combined = weights[0] * report.ngram + weights[1] * report.weighted_ngram +
                      weights[2] * report.ast_match + weights[3] * report.dataflow_match;
    return report;
}

} // namespace declab::similarity
