#include "declab/syntax.hpp"

#include "declab/error.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace declab::syntax {

namespace {

enum class ExprKind : std::uint8_t {
    sequence,
    choice,
    star,
    plus,
    opt,
    and_pred,
    not_pred,
    rule_ref,
    literal,  // 'text'
    builtin,  // IDENT LITERAL KEYWORD OPERATOR PUNCT OTHER ANY EOF
};

enum class Builtin : std::uint8_t {
    ident,
    literal,
    keyword,
    op,
    punct,
    other,
    any,
    eof,
};

struct Expr {
    ExprKind kind = ExprKind::sequence;
    std::vector<Expr> children;
    std::string text;
    int rule_index = -1;
    Builtin builtin = Builtin::any;
};

struct Rule {
    std::string name;
    Expr body;
};

// --- .peg file reader -------------------------------------------------------

struct PegToken {
    enum class Kind { name, literal, symbol, end } kind;
    std::string text;
    std::size_t line;
};

std::vector<PegToken> lex_peg(std::string_view text, std::string_view file) {
    std::vector<PegToken> out;
    std::size_t line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            continue;
        }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        if (c == '\'') {
            std::string lit;
            ++i;
            while (i < text.size() && text[i] != '\'') {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    lit += text[i + 1];
                    i += 2;
                } else {
                    lit += text[i];
                    ++i;
                }
            }
            if (i >= text.size()) {
                throw data_error(std::string(file) + ": unterminated literal in grammar");
            }
            ++i;
            out.push_back({PegToken::Kind::literal, lit, line});
            continue;
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            std::size_t start = i;
            while (i < text.size() &&
                   ((text[i] >= 'a' && text[i] <= 'z') ||
                    (text[i] >= 'A' && text[i] <= 'Z') ||
                    (text[i] >= '0' && text[i] <= '9') || text[i] == '_')) {
                ++i;
            }
            out.push_back({PegToken::Kind::name, std::string(text.substr(start, i - start)), line});
            continue;
        }
        if (text.substr(i, 2) == "<-") {
            out.push_back({PegToken::Kind::symbol, "<-", line});
            i += 2;
            continue;
        }
        if (std::string_view("/*+?&!();").find(c) != std::string_view::npos) {
            out.push_back({PegToken::Kind::symbol, std::string(1, c), line});
            ++i;
            continue;
        }
        throw data_error(std::string(file) + ": unexpected character '" +
                         std::string(1, c) + "' at line " + std::to_string(line));
    }
    out.push_back({PegToken::Kind::end, "", line});
    return out;
}

class PegParser {
public:
    PegParser(std::vector<PegToken> tokens, std::string file)
        : tokens_(std::move(tokens)), file_(std::move(file)) {}

    std::vector<Rule> parse() {
        std::vector<Rule> rules;
        while (peek().kind != PegToken::Kind::end) {
            rules.push_back(parse_rule());
        }
        return rules;
    }

private:
    const PegToken& peek() const { return tokens_[pos_]; }
    const PegToken& next() { return tokens_[pos_++]; }

    [[noreturn]] void fail(const std::string& what) {
        throw data_error(file_ + ":" + std::to_string(peek().line) + ": " + what);
    }

    bool accept_symbol(std::string_view s) {
        if (peek().kind == PegToken::Kind::symbol && peek().text == s) {
            ++pos_;
            return true;
        }
        return false;
    }

    Rule parse_rule() {
        if (peek().kind != PegToken::Kind::name) {
            fail("expected rule name");
        }
        Rule rule;
        rule.name = next().text;
        if (!accept_symbol("<-")) {
            fail("expected '<-' after rule name '" + rule.name + "'");
        }
        rule.body = parse_choice();
        if (!accept_symbol(";")) {
            fail("expected ';' to close rule '" + rule.name + "'");
        }
        return rule;
    }

    Expr parse_choice() {
        Expr first = parse_sequence();
        if (peek().kind != PegToken::Kind::symbol || peek().text != "/") {
            return first;
        }
        Expr choice;
        choice.kind = ExprKind::choice;
        choice.children.push_back(std::move(first));
        while (accept_symbol("/")) {
            choice.children.push_back(parse_sequence());
        }
        return choice;
    }

    bool at_sequence_end() const {
        if (peek().kind == PegToken::Kind::end) return true;
        if (peek().kind != PegToken::Kind::symbol) return false;
        return peek().text == "/" || peek().text == ";" || peek().text == ")";
    }

    Expr parse_sequence() {
        std::vector<Expr> parts;
        while (!at_sequence_end()) {
            parts.push_back(parse_prefixed());
        }
        if (parts.empty()) {
            fail("empty sequence; use e? for optional matches");
        }
        if (parts.size() == 1) {
            return std::move(parts.front());
        }
        Expr seq;
        seq.kind = ExprKind::sequence;
        seq.children = std::move(parts);
        return seq;
    }

    Expr parse_prefixed() {
        if (accept_symbol("&")) {
            Expr e;
            e.kind = ExprKind::and_pred;
            e.children.push_back(parse_prefixed());
            return e;
        }
        if (accept_symbol("!")) {
            Expr e;
            e.kind = ExprKind::not_pred;
            e.children.push_back(parse_prefixed());
            return e;
        }
        return parse_postfixed();
    }

    Expr parse_postfixed() {
        Expr base = parse_primary();
        while (true) {
            if (accept_symbol("*")) {
                Expr e;
                e.kind = ExprKind::star;
                e.children.push_back(std::move(base));
                base = std::move(e);
            } else if (accept_symbol("+")) {
                Expr e;
                e.kind = ExprKind::plus;
                e.children.push_back(std::move(base));
                base = std::move(e);
            } else if (accept_symbol("?")) {
                Expr e;
                e.kind = ExprKind::opt;
                e.children.push_back(std::move(base));
                base = std::move(e);
            } else {
                return base;
            }
        }
    }

    Expr parse_primary() {
        if (accept_symbol("(")) {
            Expr inner = parse_choice();
            if (!accept_symbol(")")) {
                fail("expected ')'");
            }
            return inner;
        }
        if (peek().kind == PegToken::Kind::literal) {
            Expr e;
            e.kind = ExprKind::literal;
            e.text = next().text;
            return e;
        }
        if (peek().kind == PegToken::Kind::name) {
            static const std::map<std::string_view, Builtin> builtins = {
                {"IDENT", Builtin::ident},      {"LITERAL", Builtin::literal},
                {"KEYWORD", Builtin::keyword},  {"OPERATOR", Builtin::op},
                {"PUNCT", Builtin::punct},      {"OTHER", Builtin::other},
                {"ANY", Builtin::any},          {"EOF", Builtin::eof},
            };
            Expr e;
            const std::string name = next().text;
            auto it = builtins.find(name);
            if (it != builtins.end()) {
                e.kind = ExprKind::builtin;
                e.builtin = it->second;
            } else {
                e.kind = ExprKind::rule_ref;
                e.text = name;
            }
            return e;
        }
        fail("expected expression");
    }

    std::vector<PegToken> tokens_;
    std::string file_;
    std::size_t pos_ = 0;
};

// --- interpreter ------------------------------------------------------------

struct MemoEntry {
    enum class Status : std::uint8_t { empty, in_progress, fail, success };
    Status status = Status::empty;
    std::uint32_t end = 0;
    std::int32_t node = -1; // -1: rule matched without creating a node
};

} // namespace

struct Grammar::Impl {
    std::string name;
    std::vector<Rule> rules;
    std::unordered_map<std::string, int> rule_index;
    int start_rule = 0;

    void resolve(Expr& expr) {
        if (expr.kind == ExprKind::rule_ref) {
            auto it = rule_index.find(expr.text);
            if (it == rule_index.end()) {
                throw data_error("grammar " + name + ": undefined rule '" + expr.text + "'");
            }
            expr.rule_index = it->second;
        }
        for (auto& child : expr.children) {
            resolve(child);
        }
    }
};

namespace {

class Matcher {
public:
    Matcher(const Grammar::Impl& g, const std::vector<Token>& tokens)
        : grammar_(g), tokens_(tokens) {
        memo_.resize(g.rules.size() * (tokens.size() + 1));
    }

    std::optional<std::uint32_t> match_rule(int rule, std::uint32_t pos,
                                            std::vector<CstChild>& sink) {
        MemoEntry& entry = memo_[static_cast<std::size_t>(rule) * (tokens_.size() + 1) + pos];
        switch (entry.status) {
        case MemoEntry::Status::in_progress: // left-recursion guard
        case MemoEntry::Status::fail:
            return std::nullopt;
        case MemoEntry::Status::success:
            if (entry.node >= 0) {
                sink.push_back({false, static_cast<std::uint32_t>(entry.node)});
            }
            return entry.end;
        case MemoEntry::Status::empty:
            break;
        }
        entry.status = MemoEntry::Status::in_progress;

        std::vector<CstChild> children;
        auto end = match_expr(grammar_.rules[rule].body, pos, children);
        // The entry reference may dangle if memo_ were resized; it is not.
        if (!end) {
            entry.status = MemoEntry::Status::fail;
            return std::nullopt;
        }
        entry.status = MemoEntry::Status::success;
        entry.end = *end;
        if (*end > pos) {
            CstNode node;
            node.rule = grammar_.rules[rule].name;
            node.children = std::move(children);
            node.first_token = pos;
            node.last_token = *end;
            nodes_.push_back(std::move(node));
            entry.node = static_cast<std::int32_t>(nodes_.size() - 1);
            sink.push_back({false, static_cast<std::uint32_t>(entry.node)});
        } else {
            entry.node = -1;
        }
        return entry.end;
    }

    std::optional<std::uint32_t> match_expr(const Expr& expr, std::uint32_t pos,
                                            std::vector<CstChild>& sink) {
        switch (expr.kind) {
        case ExprKind::sequence: {
            const std::size_t mark = sink.size();
            std::uint32_t p = pos;
            for (const auto& child : expr.children) {
                auto end = match_expr(child, p, sink);
                if (!end) {
                    sink.resize(mark);
                    return std::nullopt;
                }
                p = *end;
            }
            return p;
        }
        case ExprKind::choice: {
            for (const auto& child : expr.children) {
                const std::size_t mark = sink.size();
                auto end = match_expr(child, pos, sink);
                if (end) {
                    return end;
                }
                sink.resize(mark);
            }
            return std::nullopt;
        }
        case ExprKind::star: {
            std::uint32_t p = pos;
            while (true) {
                const std::size_t mark = sink.size();
                auto end = match_expr(expr.children[0], p, sink);
                if (!end || *end == p) {
                    sink.resize(end ? sink.size() : mark);
                    if (end && *end == p) sink.resize(mark);
                    return p;
                }
                p = *end;
            }
        }
        case ExprKind::plus: {
            auto first = match_expr(expr.children[0], pos, sink);
            if (!first) {
                return std::nullopt;
            }
            std::uint32_t p = *first;
            while (true) {
                const std::size_t mark = sink.size();
                auto end = match_expr(expr.children[0], p, sink);
                if (!end || *end == p) {
                    if (end && *end == p) sink.resize(mark);
                    return p;
                }
                p = *end;
            }
        }
        case ExprKind::opt: {
            const std::size_t mark = sink.size();
            auto end = match_expr(expr.children[0], pos, sink);
            if (!end) {
                sink.resize(mark);
                return pos;
            }
            return *end;
        }
        case ExprKind::and_pred: {
            std::vector<CstChild> scratch;
            auto end = match_expr(expr.children[0], pos, scratch);
            if (!end) return std::nullopt;
            return pos;
        }
        case ExprKind::not_pred: {
            std::vector<CstChild> scratch;
            auto end = match_expr(expr.children[0], pos, scratch);
            if (end) return std::nullopt;
            return pos;
        }
        case ExprKind::rule_ref:
            return match_rule(expr.rule_index, pos, sink);
        case ExprKind::literal: {
            if (pos < tokens_.size() && tokens_[pos].text == expr.text) {
                sink.push_back({true, pos});
                return pos + 1;
            }
            note_failure(pos, "'" + expr.text + "'");
            return std::nullopt;
        }
        case ExprKind::builtin: {
            if (expr.builtin == Builtin::eof) {
                if (pos == tokens_.size()) return pos;
                note_failure(pos, "end of input");
                return std::nullopt;
            }
            if (pos >= tokens_.size()) {
                note_failure(pos, "a token");
                return std::nullopt;
            }
            const TokenKind kind = tokens_[pos].kind;
            bool ok = false;
            switch (expr.builtin) {
            case Builtin::ident:
                ok = kind == TokenKind::identifier;
                break;
            case Builtin::literal:
                ok = kind == TokenKind::literal;
                break;
            case Builtin::keyword:
                ok = kind == TokenKind::keyword;
                break;
            case Builtin::op:
                ok = kind == TokenKind::op;
                break;
            case Builtin::punct:
                ok = kind == TokenKind::punct;
                break;
            case Builtin::other:
                ok = kind == TokenKind::other;
                break;
            case Builtin::any:
                ok = true;
                break;
            case Builtin::eof:
                break;
            }
            if (!ok) {
                note_failure(pos, std::string(to_string_builtin(expr.builtin)));
                return std::nullopt;
            }
            sink.push_back({true, pos});
            return pos + 1;
        }
        }
        return std::nullopt;
    }

    static std::string_view to_string_builtin(Builtin b) {
        switch (b) {
        case Builtin::ident:
            return "identifier";
        case Builtin::literal:
            return "literal";
        case Builtin::keyword:
            return "keyword";
        case Builtin::op:
            return "operator";
        case Builtin::punct:
            return "punctuation";
        case Builtin::other:
            return "other token";
        case Builtin::any:
            return "any token";
        case Builtin::eof:
            return "end of input";
        }
        return "?";
    }

    void note_failure(std::uint32_t pos, std::string expected) {
        if (pos > farthest_) {
            farthest_ = pos;
            expected_.clear();
        }
        if (pos == farthest_ && expected_.size() < 8) {
            expected_.insert(std::move(expected));
        }
    }

    std::string diagnostics() const {
        std::ostringstream os;
        if (farthest_ < tokens_.size()) {
            const Token& t = tokens_[farthest_];
            os << "parse error at line " << t.line << ", column " << t.column
               << ": unexpected '" << t.text << "'";
        } else {
            os << "parse error: unexpected end of input";
        }
        if (!expected_.empty()) {
            os << "; expected ";
            bool first = true;
            for (const auto& e : expected_) {
                if (!first) os << " or ";
                os << e;
                first = false;
            }
        }
        return os.str();
    }

    std::vector<CstNode> take_nodes() { return std::move(nodes_); }

private:
    const Grammar::Impl& grammar_;
    const std::vector<Token>& tokens_;
    std::vector<MemoEntry> memo_;
    std::vector<CstNode> nodes_;
    std::uint32_t farthest_ = 0;
    std::set<std::string> expected_;
};

// Collapses single-child chains: a node whose only child is another node is
// replaced by that child. Rebuilds the arena so dropped nodes disappear.
std::uint32_t collapse_into(const std::vector<CstNode>& src, std::uint32_t index,
                            std::vector<CstNode>& dst) {
    const CstNode& node = src[index];
    if (node.children.size() == 1 && !node.children[0].is_token) {
        return collapse_into(src, node.children[0].index, dst);
    }
    CstNode out;
    out.rule = node.rule;
    out.first_token = node.first_token;
    out.last_token = node.last_token;
    for (const auto& child : node.children) {
        if (child.is_token) {
            out.children.push_back(child);
        } else {
            const std::uint32_t mapped = collapse_into(src, child.index, dst);
            out.children.push_back({false, mapped});
        }
    }
    dst.push_back(std::move(out));
    return static_cast<std::uint32_t>(dst.size() - 1);
}

} // namespace

Grammar::Grammar() : impl_(std::make_unique<Impl>()) {}
Grammar::~Grammar() = default;
Grammar::Grammar(Grammar&&) noexcept = default;
Grammar& Grammar::operator=(Grammar&&) noexcept = default;

const std::string& Grammar::name() const { return impl_->name; }

Grammar Grammar::parse(std::string_view text, std::string_view name) {
    Grammar g;
    g.impl_->name = std::string(name);
    PegParser parser(lex_peg(text, name), std::string(name));
    g.impl_->rules = parser.parse();
    if (g.impl_->rules.empty()) {
        throw data_error("grammar " + std::string(name) + " defines no rules");
    }
    for (std::size_t i = 0; i < g.impl_->rules.size(); ++i) {
        if (!g.impl_->rule_index.emplace(g.impl_->rules[i].name, static_cast<int>(i)).second) {
            throw data_error("grammar " + std::string(name) + ": duplicate rule '" +
                             g.impl_->rules[i].name + "'");
        }
    }
    for (auto& rule : g.impl_->rules) {
        g.impl_->resolve(rule.body);
    }
    auto it = g.impl_->rule_index.find("unit");
    g.impl_->start_rule = it == g.impl_->rule_index.end() ? 0 : it->second;
    return g;
}

Grammar Grammar::load(const std::filesystem::path& peg_file) {
    std::ifstream in(peg_file);
    if (!in) {
        throw data_error("cannot open grammar file " + peg_file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), peg_file.filename().string());
}

ParseResult Grammar::run_tokens(std::vector<Token> tokens) const {
    ParseResult result;
    result.tokens = std::move(tokens);

    Matcher matcher(*impl_, result.tokens);
    std::vector<CstChild> sink;
    auto end = matcher.match_rule(impl_->start_rule, 0, sink);
    if (!end || *end != result.tokens.size()) {
        result.ok = false;
        result.diagnostics = matcher.diagnostics();
        return result;
    }
    result.ok = true;
    auto raw_nodes = matcher.take_nodes();
    if (!sink.empty() && !sink[0].is_token) {
        std::vector<CstNode> collapsed;
        result.root = collapse_into(raw_nodes, sink[0].index, collapsed);
        result.nodes = std::move(collapsed);
    }
    return result;
}

ParseResult Grammar::run(std::string_view code, corpus::Language language) const {
    return run_tokens(lex(code, language));
}

const Grammar& language_grammar(corpus::Language language) {
    static std::once_flag flags[2];
    static std::optional<Grammar> grammars[2];
    const int idx = language == corpus::Language::dart ? 0 : 1;
    std::call_once(flags[idx], [&] {
        const auto dir = default_data_dir() / "grammars";
        const char* file = language == corpus::Language::dart ? "dart.peg" : "swift.peg";
        grammars[idx].emplace(Grammar::load(dir / file));
    });
    return *grammars[idx];
}

namespace {

void dump_node(const ParseResult& result, std::uint32_t index, std::ostringstream& os,
               int depth) {
    const CstNode& node = result.nodes[index];
    for (int i = 0; i < depth; ++i) os << "  ";
    os << "(" << node.rule << "\n";
    for (const auto& child : node.children) {
        if (child.is_token) {
            const Token& t = result.tokens[child.index];
            for (int i = 0; i < depth + 1; ++i) os << "  ";
            os << "<" << to_string(t.kind) << ":" << t.text << ">\n";
        } else {
            dump_node(result, child.index, os, depth + 1);
        }
    }
    for (int i = 0; i < depth; ++i) os << "  ";
    os << ")\n";
}

} // namespace

std::string dump_tree(const ParseResult& result) {
    std::ostringstream os;
    if (!result.ok) {
        os << "<parse failed: " << result.diagnostics << ">\n";
        return os.str();
    }
    if (result.nodes.empty()) {
        os << "<empty>\n";
        return os.str();
    }
    dump_node(result, result.root, os, 0);
    return os.str();
}

} // namespace declab::syntax
