#pragma once

#include "tabmc/model.hpp"
#include "tabmc/semantics.hpp"

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

// Parser for the textual model format. One declaration per block:
//
//   clock x;
//   var n : [0, 1] = 0;
//   channel c;
//   automaton A {
//     init q0;
//     location q0 inv (x < 2) labels {p};
//     trans t1: q0 -> q1 when (x > 5) and (n = 0) sync c! reset {x}
//         do {n := n + 1};
//   }
//
// Guards are conjunctions of clock atoms (x ~ c with ~ in {<,>,<=,>=}) and
// variable constraints (n ~ c | n ~ n' | !g | g and g with ~ in {<,=}).
// `when`, `sync`, `reset` and `do` are each optional, in that order.

namespace tabmc {

enum class Severity { Error, Warning };

struct Span {
    int line = 0;
    int col = 0;
};

struct Diagnostic {
    Severity severity = Severity::Error;
    Span span;
    std::string code;
    std::string message;
};

struct ParseResult {
    std::optional<Network> network;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return network.has_value(); }
    std::string describe() const {
        std::ostringstream os;
        for (const auto& d : diagnostics) {
            os << (d.severity == Severity::Error ? "error" : "warning") << " at "
               << d.span.line << ":" << d.span.col << " [" << d.code << "] "
               << d.message << "\n";
        }
        return os.str();
    }
};

namespace parse_detail {

enum class Tok {
    End, Ident, Int,
    Semi, Colon, Comma, LBrace, RBrace, LParen, RParen, LBracket, RBracket,
    Arrow, Assign, Bang, Question, Hash, At,
    Lt, Gt, Le, Ge, Eq, Plus, Minus,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    long long value = 0;
    Span span;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_ws();
        Token t;
        t.span = {line_, col_};
        if (pos_ >= src_.size()) return t;
        const char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                    src_[pos_] == '_'))
                advance();
            t.kind = Tok::Ident;
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   std::isdigit(static_cast<unsigned char>(src_[pos_])))
                advance();
            t.kind = Tok::Int;
            t.text = std::string(src_.substr(start, pos_ - start));
            if (t.text.size() > 18) t.value = INT64_MAX;  // flagged by range checks
            else t.value = std::stoll(t.text);
            return t;
        }
        advance();
        switch (c) {
            case ';': t.kind = Tok::Semi; return t;
            case ':':
                if (peek() == '=') { advance(); t.kind = Tok::Assign; return t; }
                t.kind = Tok::Colon; return t;
            case ',': t.kind = Tok::Comma; return t;
            case '{': t.kind = Tok::LBrace; return t;
            case '}': t.kind = Tok::RBrace; return t;
            case '(': t.kind = Tok::LParen; return t;
            case ')': t.kind = Tok::RParen; return t;
            case '[': t.kind = Tok::LBracket; return t;
            case ']': t.kind = Tok::RBracket; return t;
            case '!': t.kind = Tok::Bang; return t;
            case '?': t.kind = Tok::Question; return t;
            case '#': t.kind = Tok::Hash; return t;
            case '@': t.kind = Tok::At; return t;
            case '<':
                if (peek() == '=') { advance(); t.kind = Tok::Le; return t; }
                t.kind = Tok::Lt; return t;
            case '>':
                if (peek() == '=') { advance(); t.kind = Tok::Ge; return t; }
                t.kind = Tok::Gt; return t;
            case '=': t.kind = Tok::Eq; return t;
            case '+': t.kind = Tok::Plus; return t;
            case '-':
                if (peek() == '>') { advance(); t.kind = Tok::Arrow; return t; }
                t.kind = Tok::Minus; return t;
            default:
                t.kind = Tok::End;
                t.text = std::string(1, c);
                t.value = -1;  // marks an unexpected character
                return t;
        }
    }

private:
    char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
    void advance() {
        if (pos_ < src_.size()) {
            if (src_[pos_] == '\n') { ++line_; col_ = 1; }
            else ++col_;
            ++pos_;
        }
    }
    void skip_ws() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// Generic guard tree produced before clock/variable classification.
struct GuardNode {
    enum class Kind { Atom, Not, And } kind = Kind::Atom;
    // Atom:
    std::string lhs;
    Tok rel = Tok::Eq;
    bool rhs_is_ident = false;
    std::string rhs_ident;
    long long rhs_value = 0;
    Span span;
    std::vector<GuardNode> children;
};

}  // namespace parse_detail

class ModelParser {
public:
    explicit ModelParser(std::string_view text) : lex_(text) { bump(); }

    ParseResult run() {
        ParseResult res;
        parse_file();
        res.diagnostics = std::move(diags_);
        bool has_error = false;
        for (const auto& d : res.diagnostics)
            if (d.severity == Severity::Error) has_error = true;
        if (!has_error) res.network = std::move(net_);
        return res;
    }

private:
    using Tok = parse_detail::Tok;
    using Token = parse_detail::Token;
    using GuardNode = parse_detail::GuardNode;

    // ---- token plumbing ----------------------------------------------------

    void bump() { cur_ = lex_.next(); }
    bool at(Tok k) const { return cur_.kind == k; }
    bool at_kw(const char* kw) const { return cur_.kind == Tok::Ident && cur_.text == kw; }

    bool accept(Tok k) {
        if (!at(k)) return false;
        bump();
        return true;
    }
    bool accept_kw(const char* kw) {
        if (!at_kw(kw)) return false;
        bump();
        return true;
    }
    bool expect(Tok k, const std::string& what) {
        if (accept(k)) return true;
        error("syntax", "expected " + what);
        return false;
    }
    std::optional<std::string> expect_ident(const std::string& what) {
        if (at(Tok::Ident)) {
            std::string s = cur_.text;
            bump();
            return s;
        }
        error("syntax", "expected " + what);
        return std::nullopt;
    }

    void error(const std::string& code, const std::string& msg) {
        diags_.push_back({Severity::Error, cur_.span, code, msg});
    }
    void error_at(Span s, const std::string& code, const std::string& msg) {
        diags_.push_back({Severity::Error, s, code, msg});
    }
    void warn_at(Span s, const std::string& code, const std::string& msg) {
        diags_.push_back({Severity::Warning, s, code, msg});
    }

    // Panic-mode recovery: skip to the next ';' at brace depth 0, or to '}'.
    void recover_statement() {
        int depth = 0;
        while (!at(Tok::End)) {
            if (at(Tok::LBrace)) ++depth;
            if (at(Tok::RBrace)) {
                if (depth == 0) return;
                --depth;
            }
            if (at(Tok::Semi) && depth == 0) {
                bump();
                return;
            }
            bump();
        }
    }

    // ---- top level ----------------------------------------------------------

    void parse_file() {
        while (!at(Tok::End)) {
            if (cur_.kind == Tok::End && cur_.value == -1) {
                error("lex", "unexpected character '" + cur_.text + "'");
                bump();
                continue;
            }
            if (accept_kw("clock")) parse_clock();
            else if (accept_kw("var")) parse_var();
            else if (accept_kw("channel")) parse_channel();
            else if (accept_kw("automaton")) parse_automaton();
            else {
                error("syntax", "expected a clock, var, channel or automaton declaration");
                recover_statement();
            }
        }
        finish_validation();
    }

    bool declare_name(const std::string& name, const char* what, Span s) {
        auto [it, inserted] = names_.insert({name, what});
        if (!inserted) {
            error_at(s, "duplicate-name",
                     std::string(what) + " '" + name + "' collides with a " +
                         it->second + " of the same name");
            return false;
        }
        return true;
    }

    void parse_clock() {
        Span s = cur_.span;
        auto name = expect_ident("clock name");
        if (!name) return recover_statement();
        if (declare_name(*name, "clock", s)) net_.clock_names.push_back(*name);
        expect(Tok::Semi, "';' after clock declaration");
    }

    std::optional<long long> parse_signed_int() {
        bool neg = accept(Tok::Minus);
        if (!at(Tok::Int)) {
            error("syntax", "expected an integer");
            return std::nullopt;
        }
        long long v = cur_.value;
        bump();
        return neg ? -v : v;
    }

    void parse_var() {
        Span s = cur_.span;
        auto name = expect_ident("variable name");
        if (!name) return recover_statement();
        if (!expect(Tok::Colon, "':' in variable declaration")) return recover_statement();
        if (!expect(Tok::LBracket, "'['")) return recover_statement();
        auto lo = parse_signed_int();
        if (!lo) return recover_statement();
        if (!expect(Tok::Comma, "','")) return recover_statement();
        auto hi = parse_signed_int();
        if (!hi) return recover_statement();
        if (!expect(Tok::RBracket, "']'")) return recover_statement();
        if (!expect(Tok::Eq, "'=' before the initial value")) return recover_statement();
        auto init = parse_signed_int();
        if (!init) return recover_statement();
        expect(Tok::Semi, "';' after variable declaration");

        constexpr long long kI32Min = INT32_MIN, kI32Max = INT32_MAX;
        if (*lo < kI32Min || *hi > kI32Max)
            error_at(s, "range-width", "variable range must fit in 32-bit signed integers");
        if (*lo > *hi)
            error_at(s, "range-empty", "variable range is empty");
        if (*init < *lo || *init > *hi)
            error_at(s, "init-range", "initial value " + std::to_string(*init) +
                                          " outside [" + std::to_string(*lo) + ", " +
                                          std::to_string(*hi) + "]");
        if (declare_name(*name, "variable", s))
            net_.variables.push_back({*name, *lo, *hi, *init});
    }

    void parse_channel() {
        Span s = cur_.span;
        auto name = expect_ident("channel name");
        if (!name) return recover_statement();
        if (declare_name(*name, "channel", s)) net_.channel_names.push_back(*name);
        expect(Tok::Semi, "';' after channel declaration");
    }

    // ---- guards -------------------------------------------------------------

    std::optional<GuardNode> parse_guard() {
        auto first = parse_guard_unit();
        if (!first) return std::nullopt;
        std::vector<GuardNode> units;
        units.push_back(std::move(*first));
        while (accept_kw("and")) {
            auto u = parse_guard_unit();
            if (!u) return std::nullopt;
            units.push_back(std::move(*u));
        }
        if (units.size() == 1) return std::move(units.front());
        GuardNode g;
        g.kind = GuardNode::Kind::And;
        g.children = std::move(units);
        return g;
    }

    std::optional<GuardNode> parse_guard_unit() {
        if (accept(Tok::Bang)) {
            auto inner = parse_guard_unit();
            if (!inner) return std::nullopt;
            GuardNode g;
            g.kind = GuardNode::Kind::Not;
            g.span = inner->span;
            g.children.push_back(std::move(*inner));
            return g;
        }
        if (accept(Tok::LParen)) {
            auto inner = parse_guard();
            if (!inner) return std::nullopt;
            if (!expect(Tok::RParen, "')'")) return std::nullopt;
            return inner;
        }
        // atom: IDENT rel (IDENT | INT | -INT)
        GuardNode g;
        g.span = cur_.span;
        auto lhs = expect_ident("a clock or variable name");
        if (!lhs) return std::nullopt;
        g.lhs = *lhs;
        if (at(Tok::Lt) || at(Tok::Gt) || at(Tok::Le) || at(Tok::Ge) || at(Tok::Eq)) {
            g.rel = cur_.kind;
            bump();
        } else {
            error("syntax", "expected a comparison operator");
            return std::nullopt;
        }
        if (at(Tok::Ident)) {
            g.rhs_is_ident = true;
            g.rhs_ident = cur_.text;
            bump();
        } else {
            auto v = parse_signed_int();
            if (!v) return std::nullopt;
            g.rhs_value = *v;
        }
        return g;
    }

    // Splits a parsed guard into the clock-constraint conjunction and the
    // variable-constraint tree; rejects mixed or ill-formed shapes.
    bool classify_guard(const GuardNode& g, ClockConstraint& clocks, VarConstraint& vars) {
        std::vector<GuardNode> units;
        flatten_conj(g, units);
        std::vector<VarConstraint> var_parts;
        for (const auto& u : units) {
            if (u.kind == GuardNode::Kind::Atom && is_clock_name(u.lhs)) {
                auto atom = to_clock_atom(u);
                if (!atom) return false;
                clocks.atoms.push_back(*atom);
            } else {
                auto vc = to_var_constraint(u);
                if (!vc) return false;
                var_parts.push_back(std::move(*vc));
            }
        }
        vars = VarConstraint::conj(std::move(var_parts));
        return true;
    }

    static void flatten_conj(const GuardNode& g, std::vector<GuardNode>& out) {
        if (g.kind == GuardNode::Kind::And) {
            for (const auto& c : g.children) flatten_conj(c, out);
        } else {
            out.push_back(g);
        }
    }

    bool is_clock_name(const std::string& n) const {
        return net_.find_clock(n).has_value();
    }

    std::optional<ClockAtom> to_clock_atom(const GuardNode& g) {
        ClockAtom a;
        a.clock = *net_.find_clock(g.lhs);
        switch (g.rel) {
            case Tok::Lt: a.rel = ClockRel::Lt; break;
            case Tok::Gt: a.rel = ClockRel::Gt; break;
            case Tok::Le: a.rel = ClockRel::Le; break;
            case Tok::Ge: a.rel = ClockRel::Ge; break;
            default:
                error_at(g.span, "clock-guard",
                         "clock constraints allow only <, >, <= and >=");
                return std::nullopt;
        }
        if (g.rhs_is_ident) {
            error_at(g.span, "clock-guard", "clock constraints compare against constants");
            return std::nullopt;
        }
        if (g.rhs_value < 0) {
            error_at(g.span, "clock-guard", "clock constraint constants are natural numbers");
            return std::nullopt;
        }
        a.bound = g.rhs_value;
        return a;
    }

    std::optional<VarConstraint> to_var_constraint(const GuardNode& g) {
        switch (g.kind) {
            case GuardNode::Kind::And: {
                std::vector<VarConstraint> parts;
                for (const auto& c : g.children) {
                    auto p = to_var_constraint(c);
                    if (!p) return std::nullopt;
                    parts.push_back(std::move(*p));
                }
                return VarConstraint::conj(std::move(parts));
            }
            case GuardNode::Kind::Not: {
                auto inner = to_var_constraint(g.children.front());
                if (!inner) return std::nullopt;
                return VarConstraint::negate(std::move(*inner));
            }
            case GuardNode::Kind::Atom: {
                if (is_clock_name(g.lhs)) {
                    error_at(g.span, "mixed-guard",
                             "clock atom '" + g.lhs +
                                 "' cannot appear under negation or inside a variable "
                                 "constraint");
                    return std::nullopt;
                }
                auto v = net_.find_variable(g.lhs);
                if (!v) {
                    error_at(g.span, "unknown-id", "unknown clock or variable '" + g.lhs + "'");
                    return std::nullopt;
                }
                VarRel rel;
                if (g.rel == Tok::Lt) rel = VarRel::Lt;
                else if (g.rel == Tok::Eq) rel = VarRel::Eq;
                else {
                    error_at(g.span, "var-guard", "variable constraints allow only < and =");
                    return std::nullopt;
                }
                if (g.rhs_is_ident) {
                    auto w = net_.find_variable(g.rhs_ident);
                    if (!w) {
                        error_at(g.span, "unknown-id",
                                 "unknown variable '" + g.rhs_ident + "'");
                        return std::nullopt;
                    }
                    return VarConstraint::cmp_var(*v, rel, *w);
                }
                return VarConstraint::cmp_const(*v, rel, g.rhs_value);
            }
        }
        return std::nullopt;
    }

    std::optional<ClockConstraint> parse_clock_only_guard() {
        auto g = parse_guard();
        if (!g) return std::nullopt;
        ClockConstraint clocks;
        VarConstraint vars;
        if (!classify_guard(*g, clocks, vars)) return std::nullopt;
        if (!vars.is_true()) {
            error("invariant", "invariants are clock constraints only");
            return std::nullopt;
        }
        return clocks;
    }

    // ---- expressions ---------------------------------------------------------

    std::optional<IntExpr> parse_int_expr() {
        auto lhs = parse_int_term();
        if (!lhs) return std::nullopt;
        while (at(Tok::Plus) || at(Tok::Minus)) {
            bool plus = at(Tok::Plus);
            bump();
            auto rhs = parse_int_term();
            if (!rhs) return std::nullopt;
            lhs = plus ? IntExpr::add(std::move(*lhs), std::move(*rhs))
                       : IntExpr::sub(std::move(*lhs), std::move(*rhs));
        }
        return lhs;
    }

    std::optional<IntExpr> parse_int_term() {
        if (accept(Tok::LParen)) {
            auto e = parse_int_expr();
            if (!e) return std::nullopt;
            if (!expect(Tok::RParen, "')'")) return std::nullopt;
            return e;
        }
        if (at(Tok::Minus) || at(Tok::Int)) {
            auto v = parse_signed_int();
            if (!v) return std::nullopt;
            return IntExpr::constant(*v);
        }
        if (at(Tok::Ident)) {
            auto v = net_.find_variable(cur_.text);
            if (!v) {
                error("unknown-id", "unknown variable '" + cur_.text + "'");
                return std::nullopt;
            }
            bump();
            return IntExpr::variable(*v);
        }
        error("syntax", "expected a variable, constant, or parenthesized expression");
        return std::nullopt;
    }

    // ---- automata ------------------------------------------------------------

    struct PendingTransition {
        std::string name;
        std::string source, target;
        Span span;
        Transition parsed;  // source/target filled after location resolution
        bool valid = true;
    };

    void parse_automaton() {
        Span s = cur_.span;
        auto name = expect_ident("automaton name");
        if (!name) return recover_statement();
        Automaton aut;
        aut.name = *name;
        bool named_ok = declare_name(*name, "automaton", s);
        if (!expect(Tok::LBrace, "'{' after automaton name")) return recover_statement();

        std::string init_name;
        Span init_span;
        struct PendingLocation {
            std::string name;
            Span span;
            ClockConstraint inv;
            std::vector<LabelId> labels;
        };
        std::vector<PendingLocation> locations;
        std::vector<PendingTransition> transitions;

        while (!at(Tok::RBrace) && !at(Tok::End)) {
            if (accept_kw("init")) {
                Span sp = cur_.span;
                auto n = expect_ident("initial location name");
                if (!n) { recover_statement(); continue; }
                if (!init_name.empty())
                    error_at(sp, "duplicate-init", "initial location already declared");
                init_name = *n;
                init_span = sp;
                expect(Tok::Semi, "';'");
            } else if (accept_kw("location")) {
                PendingLocation loc;
                loc.span = cur_.span;
                auto n = expect_ident("location name");
                if (!n) { recover_statement(); continue; }
                loc.name = *n;
                if (accept_kw("inv")) {
                    auto inv = parse_clock_only_guard();
                    if (!inv) { recover_statement(); continue; }
                    loc.inv = std::move(*inv);
                }
                if (accept_kw("labels")) {
                    if (!expect(Tok::LBrace, "'{'")) { recover_statement(); continue; }
                    if (!at(Tok::RBrace)) {
                        do {
                            auto l = expect_ident("label name");
                            if (!l) break;
                            loc.labels.push_back(intern_label(*l));
                        } while (accept(Tok::Comma));
                    }
                    expect(Tok::RBrace, "'}'");
                    std::sort(loc.labels.begin(), loc.labels.end());
                    loc.labels.erase(std::unique(loc.labels.begin(), loc.labels.end()),
                                     loc.labels.end());
                }
                expect(Tok::Semi, "';' after location");
                for (const auto& other : locations)
                    if (other.name == loc.name)
                        error_at(loc.span, "duplicate-name",
                                 "location '" + loc.name + "' already declared");
                locations.push_back(std::move(loc));
            } else if (accept_kw("trans")) {
                auto tr = parse_transition();
                if (tr) transitions.push_back(std::move(*tr));
            } else {
                error("syntax", "expected init, location or trans");
                recover_statement();
            }
        }
        expect(Tok::RBrace, "'}' closing the automaton");

        // Resolve locations: the initial location becomes id 0.
        if (init_name.empty()) {
            error_at(s, "missing-init", "automaton '" + aut.name +
                                            "' declares no initial location");
            return;
        }
        std::vector<std::string> order;
        order.push_back(init_name);
        bool found_init = false;
        for (const auto& loc : locations) {
            if (loc.name == init_name) found_init = true;
            else order.push_back(loc.name);
        }
        if (!found_init) {
            error_at(init_span, "unknown-id",
                     "initial location '" + init_name + "' is not declared");
            return;
        }
        std::map<std::string, LocationId> ids;
        for (size_t i = 0; i < order.size(); ++i) ids[order[i]] = static_cast<int>(i);
        aut.location_names = order;
        aut.invariants.resize(order.size());
        aut.labels.resize(order.size());
        for (const auto& loc : locations) {
            aut.invariants[ids[loc.name]] = loc.inv;
            aut.labels[ids[loc.name]] = loc.labels;
        }
        for (auto& tr : transitions) {
            if (!tr.valid) continue;
            auto si = ids.find(tr.source);
            auto ti = ids.find(tr.target);
            if (si == ids.end()) {
                error_at(tr.span, "unknown-id", "unknown location '" + tr.source + "'");
                continue;
            }
            if (ti == ids.end()) {
                error_at(tr.span, "unknown-id", "unknown location '" + tr.target + "'");
                continue;
            }
            tr.parsed.name = tr.name;
            tr.parsed.source = si->second;
            tr.parsed.target = ti->second;
            aut.transitions.push_back(std::move(tr.parsed));
        }
        if (named_ok) net_.automata.push_back(std::move(aut));
    }

    std::optional<PendingTransition> parse_transition() {
        PendingTransition tr;
        tr.span = cur_.span;
        auto name = expect_ident("transition name");
        if (!name) { recover_statement(); return std::nullopt; }
        tr.name = *name;
        if (!expect(Tok::Colon, "':' after transition name")) {
            recover_statement();
            return std::nullopt;
        }
        auto src = expect_ident("source location");
        if (!src) { recover_statement(); return std::nullopt; }
        tr.source = *src;
        if (!expect(Tok::Arrow, "'->'")) { recover_statement(); return std::nullopt; }
        auto dst = expect_ident("target location");
        if (!dst) { recover_statement(); return std::nullopt; }
        tr.target = *dst;

        if (accept_kw("when")) {
            auto g = parse_guard();
            if (!g) { recover_statement(); return std::nullopt; }
            if (!classify_guard(*g, tr.parsed.clock_guard, tr.parsed.var_guard)) {
                recover_statement();
                return std::nullopt;
            }
        }
        if (accept_kw("sync")) {
            Span sp = cur_.span;
            auto ch = expect_ident("channel name");
            if (!ch) { recover_statement(); return std::nullopt; }
            auto cid = net_.find_channel(*ch);
            if (!cid) {
                error_at(sp, "unknown-id", "unknown channel '" + *ch + "'");
                recover_statement();
                return std::nullopt;
            }
            SyncKind kind;
            if (accept(Tok::Bang)) kind = SyncKind::Send;
            else if (accept(Tok::Question)) kind = SyncKind::Receive;
            else if (accept(Tok::Hash)) kind = SyncKind::BroadcastSend;
            else if (accept(Tok::At)) kind = SyncKind::BroadcastReceive;
            else {
                error("syntax", "expected one of ! ? # @ after the channel");
                recover_statement();
                return std::nullopt;
            }
            tr.parsed.sync = SyncLabel::on(*cid, kind);
        }
        if (accept_kw("reset")) {
            if (!expect(Tok::LBrace, "'{'")) { recover_statement(); return std::nullopt; }
            if (!at(Tok::RBrace)) {
                do {
                    Span sp = cur_.span;
                    auto cl = expect_ident("clock name");
                    if (!cl) { recover_statement(); return std::nullopt; }
                    auto cid = net_.find_clock(*cl);
                    if (!cid) {
                        error_at(sp, "unknown-id", "unknown clock '" + *cl + "'");
                        tr.valid = false;
                    } else {
                        tr.parsed.resets.push_back(*cid);
                    }
                } while (accept(Tok::Comma));
            }
            if (!expect(Tok::RBrace, "'}'")) { recover_statement(); return std::nullopt; }
            std::sort(tr.parsed.resets.begin(), tr.parsed.resets.end());
            tr.parsed.resets.erase(
                std::unique(tr.parsed.resets.begin(), tr.parsed.resets.end()),
                tr.parsed.resets.end());
        }
        if (accept_kw("do")) {
            if (!expect(Tok::LBrace, "'{'")) { recover_statement(); return std::nullopt; }
            if (!at(Tok::RBrace)) {
                do {
                    Span sp = cur_.span;
                    auto vn = expect_ident("variable name");
                    if (!vn) { recover_statement(); return std::nullopt; }
                    auto vid = net_.find_variable(*vn);
                    if (!vid) {
                        error_at(sp, "unknown-id", "unknown variable '" + *vn + "'");
                        recover_statement();
                        return std::nullopt;
                    }
                    if (!expect(Tok::Assign, "':='")) {
                        recover_statement();
                        return std::nullopt;
                    }
                    auto e = parse_int_expr();
                    if (!e) { recover_statement(); return std::nullopt; }
                    for (const auto& prev : tr.parsed.assignments)
                        if (prev.target == *vid)
                            error_at(sp, "duplicate-assignment",
                                     "two assignments to '" + *vn + "' on one transition");
                    tr.parsed.assignments.push_back({*vid, std::move(*e)});
                } while (accept(Tok::Comma));
            }
            if (!expect(Tok::RBrace, "'}'")) { recover_statement(); return std::nullopt; }
        }
        if (!expect(Tok::Semi, "';' after transition")) recover_statement();
        return tr;
    }

    LabelId intern_label(const std::string& name) {
        if (auto id = net_.find_label(name)) return *id;
        net_.label_names.push_back(name);
        return static_cast<int>(net_.label_names.size()) - 1;
    }

    // ---- cross-cutting validation ---------------------------------------------

    void finish_validation() {
        if (net_.automata.empty())
            diags_.push_back({Severity::Error, {}, "empty-model",
                              "a model needs at least one automaton"});

        // Assignment width rule: a variable appearing in an expression
        // assigned to n must not need more bits than n itself.
        for (const auto& aut : net_.automata) {
            for (const auto& t : aut.transitions) {
                for (const auto& a : t.assignments) {
                    const int wn = var_bit_width(net_.variables.at(a.target));
                    std::vector<VarId> used;
                    collect_vars(a.expr, used);
                    for (VarId u : used) {
                        if (var_bit_width(net_.variables.at(u)) > wn) {
                            diags_.push_back(
                                {Severity::Error, {}, "assignment-width",
                                 "variable '" + net_.variables[u].name + "' (" +
                                     std::to_string(var_bit_width(net_.variables[u])) +
                                     " bits) is too wide for assignment to '" +
                                     net_.variables[a.target].name + "' (" +
                                     std::to_string(wn) + " bits) in " + aut.name +
                                     "." + t.name});
                        }
                    }
                }
            }
        }

        // Channel usage: a one-to-one side without its counterpart can never
        // fire, and a broadcast receive without a sender is equally dead.
        for (ChannelId c = 0; c < static_cast<int>(net_.channel_names.size()); ++c) {
            bool snd = false, rcv = false, bsnd = false, brcv = false;
            for (const auto& aut : net_.automata) {
                for (const auto& t : aut.transitions) {
                    if (t.sync.channel != c) continue;
                    switch (t.sync.kind) {
                        case SyncKind::Send: snd = true; break;
                        case SyncKind::Receive: rcv = true; break;
                        case SyncKind::BroadcastSend: bsnd = true; break;
                        case SyncKind::BroadcastReceive: brcv = true; break;
                    }
                }
            }
            const std::string& cn = net_.channel_names[c];
            if (snd && !rcv)
                diags_.push_back({Severity::Warning, {}, "dead-sync",
                                  "channel '" + cn + "' is sent (!) but never received (?)"});
            if (rcv && !snd)
                diags_.push_back({Severity::Warning, {}, "dead-sync",
                                  "channel '" + cn + "' is received (?) but never sent (!)"});
            if (brcv && !bsnd)
                diags_.push_back({Severity::Warning, {}, "dead-sync",
                                  "channel '" + cn + "' has broadcast receivers (@) but no "
                                  "sender (#)"});
        }
    }

    static void collect_vars(const IntExpr& e, std::vector<VarId>& out) {
        if (e.kind == IntExpr::Kind::Var) out.push_back(e.var);
        for (const auto& k : e.kids) collect_vars(k, out);
    }

    parse_detail::Lexer lex_;
    Token cur_;
    Network net_;
    std::vector<Diagnostic> diags_;
    std::map<std::string, const char*> names_;
};

/// Parses and statically validates a network. On any error the network is
/// absent and the diagnostics say why.
inline ParseResult parse_network(std::string_view text) {
    return ModelParser(text).run();
}

// ---- pretty printer ----------------------------------------------------------

inline std::string print_clock_constraint(const Network& net, const ClockConstraint& g) {
    std::ostringstream os;
    for (size_t i = 0; i < g.atoms.size(); ++i) {
        const auto& a = g.atoms[i];
        if (i) os << " and ";
        os << "(" << net.clock_names.at(a.clock) << " " << clock_rel_text(a.rel) << " "
           << a.bound << ")";
    }
    return os.str();
}

inline std::string print_var_constraint(const Network& net, const VarConstraint& g) {
    std::ostringstream os;
    switch (g.kind) {
        case VarConstraint::Kind::True:
            break;
        case VarConstraint::Kind::CmpConst:
            os << "(" << net.variables.at(g.lhs).name << " "
               << (g.rel == VarRel::Lt ? "<" : "=") << " " << g.rhs_const << ")";
            break;
        case VarConstraint::Kind::CmpVar:
            os << "(" << net.variables.at(g.lhs).name << " "
               << (g.rel == VarRel::Lt ? "<" : "=") << " "
               << net.variables.at(g.rhs_var).name << ")";
            break;
        case VarConstraint::Kind::Not:
            os << "!" << print_var_constraint(net, g.children.front());
            break;
        case VarConstraint::Kind::And: {
            os << "(";
            for (size_t i = 0; i < g.children.size(); ++i) {
                if (i) os << " and ";
                os << print_var_constraint(net, g.children[i]);
            }
            os << ")";
            break;
        }
    }
    return os.str();
}

inline std::string print_int_expr(const Network& net, const IntExpr& e) {
    switch (e.kind) {
        case IntExpr::Kind::Const:
            return std::to_string(e.value);
        case IntExpr::Kind::Var:
            return net.variables.at(e.var).name;
        case IntExpr::Kind::Add:
            return "(" + print_int_expr(net, e.kids[0]) + " + " +
                   print_int_expr(net, e.kids[1]) + ")";
        case IntExpr::Kind::Sub:
            return "(" + print_int_expr(net, e.kids[0]) + " - " +
                   print_int_expr(net, e.kids[1]) + ")";
    }
    return "";
}

/// Prints a network back into the model format; the result parses to a
/// structurally identical network.
inline std::string pretty_print_network(const Network& net) {
    std::ostringstream os;
    for (const auto& c : net.clock_names) os << "clock " << c << ";\n";
    for (const auto& v : net.variables)
        os << "var " << v.name << " : [" << v.lo << ", " << v.hi << "] = " << v.init
           << ";\n";
    for (const auto& c : net.channel_names) os << "channel " << c << ";\n";
    for (const auto& aut : net.automata) {
        os << "automaton " << aut.name << " {\n";
        os << "  init " << aut.location_names.at(0) << ";\n";
        for (size_t q = 0; q < aut.location_names.size(); ++q) {
            os << "  location " << aut.location_names[q];
            if (!aut.invariants[q].is_true())
                os << " inv " << print_clock_constraint(net, aut.invariants[q]);
            if (!aut.labels[q].empty()) {
                os << " labels {";
                for (size_t i = 0; i < aut.labels[q].size(); ++i) {
                    if (i) os << ", ";
                    os << net.label_names.at(aut.labels[q][i]);
                }
                os << "}";
            }
            os << ";\n";
        }
        for (const auto& t : aut.transitions) {
            os << "  trans " << t.name << ": " << aut.location_names.at(t.source)
               << " -> " << aut.location_names.at(t.target);
            std::string guard = print_clock_constraint(net, t.clock_guard);
            std::string vg = print_var_constraint(net, t.var_guard);
            if (!vg.empty()) guard += (guard.empty() ? "" : " and ") + vg;
            if (!guard.empty()) os << " when " << guard;
            if (!t.sync.is_tau())
                os << " sync " << net.channel_names.at(t.sync.channel)
                   << sync_kind_text(t.sync.kind);
            if (!t.resets.empty()) {
                os << " reset {";
                for (size_t i = 0; i < t.resets.size(); ++i) {
                    if (i) os << ", ";
                    os << net.clock_names.at(t.resets[i]);
                }
                os << "}";
            }
            if (!t.assignments.empty()) {
                os << " do {";
                for (size_t i = 0; i < t.assignments.size(); ++i) {
                    if (i) os << ", ";
                    os << net.variables.at(t.assignments[i].target).name << " := "
                       << print_int_expr(net, t.assignments[i].expr);
                }
                os << "}";
            }
            os << ";\n";
        }
        os << "}\n";
    }
    return os.str();
}

/// Cross-cutting checks over an already-built Network (the parser runs these
/// itself; exposed for networks constructed programmatically). Implemented by
/// printing and re-parsing, which keeps a single source of truth for the
/// rules; cheap at the model sizes this tool targets.
inline std::vector<Diagnostic> validate_network(const Network& net) {
    return parse_network(pretty_print_network(net)).diagnostics;
}

}  // namespace tabmc
