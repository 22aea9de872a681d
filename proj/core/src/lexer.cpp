#include "declab/syntax.hpp"

#include "declab/error.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_set>

namespace declab::syntax {

namespace {

bool is_ident_start(char c, corpus::Language lang) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
        return true;
    }
    return lang == corpus::Language::dart && c == '$';
}

bool is_ident_char(char c, corpus::Language lang) {
    return is_ident_start(c, lang) || (c >= '0' && c <= '9');
}

bool is_digit(char c) {
    return c >= '0' && c <= '9';
}

bool is_hex_digit(char c) {
    return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

// Multi-character operators, longest match first. Runs of '>' are split
// into single '>' tokens so nested generic argument lists close cleanly;
// the grammars reassemble shift and compound-assignment operators.
constexpr std::array<std::string_view, 34> kOperators3 = {
    "~/=", "<<=", "?\?=", "...", "..<", "===", "!==", "?..",
    // 2-char entries follow; table scanned in order.
    "==", "!=", "<=", "&&", "||", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "~/", "<<", "??", "?.", "..", "=>", "->",
    "++", "--", ">=", "**", "!!", "?:",
};

const std::unordered_set<std::string>& keyword_set(corpus::Language lang) {
    static std::mutex mu;
    static std::unordered_set<std::string> dart_set;
    static std::unordered_set<std::string> swift_set;
    static bool loaded = false;

    std::lock_guard<std::mutex> lock(mu);
    if (!loaded) {
        auto load = [](const std::filesystem::path& file) {
            std::unordered_set<std::string> out;
            std::ifstream in(file);
            if (!in) {
                throw data_error("cannot open keyword list " + file.string());
            }
            std::string line;
            while (std::getline(in, line)) {
                while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
                    line.pop_back();
                }
                if (line.empty() || line[0] == '#') {
                    continue;
                }
                out.insert(line);
            }
            return out;
        };
        const auto dir = default_data_dir() / "grammars";
        dart_set = load(dir / "dart_keywords.txt");
        swift_set = load(dir / "swift_keywords.txt");
        loaded = true;
    }
    return lang == corpus::Language::dart ? dart_set : swift_set;
}

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;
    std::uint32_t line = 1;
    std::uint32_t column = 1;

    bool done() const { return pos >= text.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos + ahead < text.size() ? text[pos + ahead] : '\0';
    }
    void advance() {
        if (done()) return;
        if (text[pos] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
        ++pos;
    }
    void advance_n(std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) advance();
    }
    bool starts_with(std::string_view s) const {
        return text.substr(pos, s.size()) == s;
    }
};

void skip_line_comment(Cursor& c) {
    while (!c.done() && c.peek() != '\n') c.advance();
}

void skip_block_comment(Cursor& c) {
    // Dart and Swift both nest /* */.
    int depth = 0;
    while (!c.done()) {
        if (c.starts_with("/*")) {
            ++depth;
            c.advance_n(2);
        } else if (c.starts_with("*/")) {
            --depth;
            c.advance_n(2);
            if (depth == 0) return;
        } else {
            c.advance();
        }
    }
}

void scan_string(Cursor& c, corpus::Language lang, bool raw);

// ${...} in Dart, \(...) in Swift: balanced scan that re-enters string
// lexing so quotes inside interpolations do not end the outer literal.
void scan_interpolation(Cursor& c, corpus::Language lang, char open, char close) {
    int depth = 1;
    c.advance(); // consume the opener
    while (!c.done() && depth > 0) {
        const char ch = c.peek();
        if (ch == open) {
            ++depth;
            c.advance();
        } else if (ch == close) {
            --depth;
            c.advance();
        } else if (ch == '\'' || ch == '"') {
            scan_string(c, lang, false);
        } else if (lang == corpus::Language::dart && ch == 'r' &&
                   (c.peek(1) == '\'' || c.peek(1) == '"')) {
            c.advance();
            scan_string(c, lang, true);
        } else {
            c.advance();
        }
    }
}

void scan_string(Cursor& c, corpus::Language lang, bool raw) {
    const char quote = c.peek();
    bool triple = false;
    if (c.peek(1) == quote && c.peek(2) == quote) {
        triple = true;
        c.advance_n(3);
    } else {
        c.advance();
    }
    while (!c.done()) {
        const char ch = c.peek();
        if (ch == quote) {
            if (!triple) {
                c.advance();
                return;
            }
            if (c.peek(1) == quote && c.peek(2) == quote) {
                c.advance_n(3);
                return;
            }
            c.advance();
            continue;
        }
        if (!raw && ch == '\\') {
            if (lang == corpus::Language::swift && c.peek(1) == '(') {
                c.advance(); // backslash
                scan_interpolation(c, lang, '(', ')');
                continue;
            }
            c.advance_n(2);
            continue;
        }
        if (!raw && lang == corpus::Language::dart && ch == '$' && c.peek(1) == '{') {
            c.advance(); // dollar
            scan_interpolation(c, lang, '{', '}');
            continue;
        }
        if (!triple && ch == '\n') {
            return; // unterminated single-line literal: end it here
        }
        c.advance();
    }
}

} // namespace

std::string_view to_string(TokenKind kind) {
    switch (kind) {
    case TokenKind::keyword:
        return "keyword";
    case TokenKind::identifier:
        return "identifier";
    case TokenKind::literal:
        return "literal";
    case TokenKind::op:
        return "operator";
    case TokenKind::punct:
        return "punctuation";
    case TokenKind::other:
        return "other";
    }
    return "other";
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("DECLAB_DATA_DIR")) {
        return std::filesystem::path(env);
    }
#ifdef DECLAB_SOURCE_DATA_DIR
    {
        std::filesystem::path p(DECLAB_SOURCE_DATA_DIR);
        if (std::filesystem::exists(p / "grammars")) {
            return p;
        }
    }
#endif
    std::error_code ec;
    auto exe = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (!ec) {
        auto candidate = exe.parent_path().parent_path() / "share" / "declab";
        if (std::filesystem::exists(candidate / "grammars")) {
            return candidate;
        }
    }
    throw data_error("cannot locate grammar data directory; set DECLAB_DATA_DIR");
}

std::vector<Token> lex(std::string_view code, corpus::Language lang) {
    const auto& keywords = keyword_set(lang);
    std::vector<Token> tokens;
    Cursor c{code};

    auto emit = [&](std::size_t start, std::uint32_t line, std::uint32_t col,
                    TokenKind kind) {
        Token t;
        t.text = std::string(code.substr(start, c.pos - start));
        t.kind = kind;
        t.line = line;
        t.column = col;
        t.offset = start;
        tokens.push_back(std::move(t));
    };

    while (!c.done()) {
        const char ch = c.peek();
        if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n' || ch == '\f' ||
            ch == '\v') {
            c.advance();
            continue;
        }
        if (c.starts_with("//")) {
            skip_line_comment(c);
            continue;
        }
        if (c.starts_with("/*")) {
            skip_block_comment(c);
            continue;
        }

        const std::size_t start = c.pos;
        const std::uint32_t line = c.line;
        const std::uint32_t col = c.column;

        // Strings.
        if (ch == '\'' || ch == '"') {
            scan_string(c, lang, false);
            emit(start, line, col, TokenKind::literal);
            continue;
        }
        if (lang == corpus::Language::dart && ch == 'r' &&
            (c.peek(1) == '\'' || c.peek(1) == '"')) {
            c.advance();
            scan_string(c, lang, true);
            emit(start, line, col, TokenKind::literal);
            continue;
        }

        // Numbers.
        if (is_digit(ch)) {
            if (ch == '0' && (c.peek(1) == 'x' || c.peek(1) == 'X')) {
                c.advance_n(2);
                while (is_hex_digit(c.peek()) ||
                       (lang == corpus::Language::swift && c.peek() == '_')) {
                    c.advance();
                }
            } else {
                auto digits = [&] {
                    while (is_digit(c.peek()) ||
                           (lang == corpus::Language::swift && c.peek() == '_' &&
                            is_digit(c.peek(1)))) {
                        c.advance();
                    }
                };
                digits();
                if (c.peek() == '.' && is_digit(c.peek(1))) {
                    c.advance();
                    digits();
                }
                if ((c.peek() == 'e' || c.peek() == 'E') &&
                    (is_digit(c.peek(1)) ||
                     ((c.peek(1) == '+' || c.peek(1) == '-') && is_digit(c.peek(2))))) {
                    c.advance();
                    if (c.peek() == '+' || c.peek() == '-') c.advance();
                    digits();
                }
            }
            emit(start, line, col, TokenKind::literal);
            continue;
        }

        // Identifiers / keywords; Swift closure shorthands $0, $1, ...
        if (is_ident_start(ch, lang) ||
            (lang == corpus::Language::swift && ch == '$' && is_digit(c.peek(1)))) {
            if (ch == '$' && lang == corpus::Language::swift) {
                c.advance();
                while (is_digit(c.peek())) c.advance();
            } else {
                while (is_ident_char(c.peek(), lang)) c.advance();
            }
            const auto text = code.substr(start, c.pos - start);
            const bool kw = keywords.contains(std::string(text));
            emit(start, line, col, kw ? TokenKind::keyword : TokenKind::identifier);
            continue;
        }

        // Punctuation.
        if (ch == '(' || ch == ')' || ch == '[' || ch == ']' || ch == '{' ||
            ch == '}' || ch == ',' || ch == ';') {
            c.advance();
            emit(start, line, col, TokenKind::punct);
            continue;
        }

        // '>' runs split into single tokens (generic closers); '>=' only
        // when the '>' does not start a run.
        if (ch == '>') {
            if (c.peek(1) == '>') {
                c.advance();
            } else if (c.peek(1) == '=') {
                c.advance_n(2);
            } else {
                c.advance();
            }
            emit(start, line, col, TokenKind::op);
            continue;
        }

        // Multi-char operators, longest first.
        {
            bool matched = false;
            for (auto op : kOperators3) {
                if (c.starts_with(op)) {
                    c.advance_n(op.size());
                    emit(start, line, col, TokenKind::op);
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }

        // Single-char operators.
        if (std::string_view("+-*/%<=!~&|^?:.@#_\\").find(ch) !=
            std::string_view::npos) {
            c.advance();
            emit(start, line, col, TokenKind::op);
            continue;
        }

        // Anything else: one opaque token per byte.
        c.advance();
        emit(start, line, col, TokenKind::other);
    }
    return tokens;
}

} // namespace declab::syntax
