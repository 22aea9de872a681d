#pragma once

#include "declab/corpus.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace declab::syntax {

enum class TokenKind : std::uint8_t {
    keyword,
    identifier,
    literal,
    op,
    punct,
    other,
};

std::string_view to_string(TokenKind kind);

struct Token {
    std::string text;
    TokenKind kind = TokenKind::other;
    std::uint32_t line = 1;
    std::uint32_t column = 1;
    std::size_t offset = 0;
};

// Lexing is total: bytes that fit no rule come back as single `other`
// tokens. Comments are dropped; string literals (including interpolation)
// stay single tokens.
std::vector<Token> lex(std::string_view code, corpus::Language language);

// Grammar definitions and keyword lists live as data files. Resolution
// order: explicit path, DECLAB_DATA_DIR env var, compiled-in defaults.
std::filesystem::path default_data_dir();

// --- Concrete syntax tree -------------------------------------------------

struct CstChild {
    bool is_token = false;
    std::uint32_t index = 0; // node index or token index
};

struct CstNode {
    std::string_view rule; // owned by the Grammar
    std::vector<CstChild> children;
    std::uint32_t first_token = 0; // token span [first, last)
    std::uint32_t last_token = 0;
};

struct ParseResult {
    bool ok = false;
    std::vector<Token> tokens;
    std::vector<CstNode> nodes;
    std::uint32_t root = 0;
    std::string diagnostics;
};

// Token-level PEG interpreter. Rules are loaded from a .peg data file:
//   rule <- alt1 / alt2 ;    sequences by juxtaposition, postfix * + ?,
//   prefix & (and-predicate) and ! (not-predicate), 'text' literal token
//   matches, and uppercase builtins IDENT LITERAL KEYWORD OPERATOR PUNCT
//   OTHER ANY EOF.
// Each named rule that consumes at least one token becomes a CST node;
// single-child chain nodes are collapsed so the tree stays compact.
class Grammar {
public:
    static Grammar load(const std::filesystem::path& peg_file);
    static Grammar parse(std::string_view text, std::string_view name);

    ParseResult run(std::string_view code, corpus::Language language) const;
    ParseResult run_tokens(std::vector<Token> tokens) const;

    const std::string& name() const;

    ~Grammar();
    Grammar(Grammar&&) noexcept;
    Grammar& operator=(Grammar&&) noexcept;
    Grammar(const Grammar&) = delete;
    Grammar& operator=(const Grammar&) = delete;

    struct Impl;

private:
    Grammar();
    std::unique_ptr<Impl> impl_;
};

// Process-wide cache of the bundled language grammars; loading is one-time
// and the returned reference stays valid and shareable across threads.
const Grammar& language_grammar(corpus::Language language);

// Pretty-printer for tests and golden files: one node per line,
// s-expression style.
std::string dump_tree(const ParseResult& result);

} // namespace declab::syntax
