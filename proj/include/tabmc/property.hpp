#pragma once

#include "tabmc/encoder.hpp"
#include "tabmc/model.hpp"
#include "tabmc/semantics.hpp"

#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Safety and reachability queries over the encoded positions. A query is
// asserted as the existence of a violating (invariant) or witnessing
// (reachable) position inside the lasso, so a SAT answer always comes with a
// concrete position.

namespace tabmc {

/// Boolean state predicate: location membership, label membership and
/// variable comparisons, closed under !, && and ||.
struct StateFormula {
    enum class Kind { At, Label, VarCmp, Not, And, Or };

    Kind kind = Kind::At;
    AutomatonId aut = -1;      // At
    LocationId loc = -1;       // At
    LabelId label = -1;        // Label
    VarConstraint var_atom;    // VarCmp
    std::vector<StateFormula> children;

    static StateFormula at(AutomatonId a, LocationId q) {
        StateFormula f;
        f.kind = Kind::At;
        f.aut = a;
        f.loc = q;
        return f;
    }
    static StateFormula label_holds(LabelId l) {
        StateFormula f;
        f.kind = Kind::Label;
        f.label = l;
        return f;
    }
    static StateFormula var_cmp(VarConstraint c) {
        StateFormula f;
        f.kind = Kind::VarCmp;
        f.var_atom = std::move(c);
        return f;
    }
    static StateFormula negate(StateFormula inner) {
        StateFormula f;
        f.kind = Kind::Not;
        f.children.push_back(std::move(inner));
        return f;
    }
    static StateFormula conj(StateFormula a, StateFormula b) {
        StateFormula f;
        f.kind = Kind::And;
        f.children = {std::move(a), std::move(b)};
        return f;
    }
    static StateFormula disj(StateFormula a, StateFormula b) {
        StateFormula f;
        f.kind = Kind::Or;
        f.children = {std::move(a), std::move(b)};
        return f;
    }
};

struct Query {
    enum class Kind { Invariant, Reachable };

    Kind kind = Kind::Invariant;
    StateFormula formula;
};

/// Concrete evaluation of a state predicate on one configuration; the trace
/// layer uses this to confirm that decoded counterexamples really violate or
/// witness the query.
inline bool eval_state_formula(const Configuration& cfg, const Network& net,
                               const StateFormula& f) {
    switch (f.kind) {
        case StateFormula::Kind::At:
            return cfg.locations.at(f.aut) == f.loc;
        case StateFormula::Kind::Label: {
            for (size_t i = 0; i < net.automata.size(); ++i) {
                const auto& labels = net.automata[i].labels.at(cfg.locations.at(i));
                for (LabelId l : labels)
                    if (l == f.label) return true;
            }
            return false;
        }
        case StateFormula::Kind::VarCmp:
            return eval_var_constraint(cfg.var_values, f.var_atom);
        case StateFormula::Kind::Not:
            return !eval_state_formula(cfg, net, f.children.front());
        case StateFormula::Kind::And:
            for (const auto& c : f.children)
                if (!eval_state_formula(cfg, net, c)) return false;
            return true;
        case StateFormula::Kind::Or:
            for (const auto& c : f.children)
                if (eval_state_formula(cfg, net, c)) return true;
            return false;
    }
    return false;
}

/// Symbolic translation of a state predicate at position l.
inline Term state_formula_term(const PropertyHook& hook, const StateFormula& f, int l) {
    const auto& lay = hook.layout;
    switch (f.kind) {
        case StateFormula::Kind::At:
            return hook.location_active(f.aut, f.loc, l);
        case StateFormula::Kind::Label: {
            std::vector<Term> parts;
            const Network& net = hook.network();
            for (size_t i = 0; i < net.automata.size(); ++i) {
                const auto& aut = net.automata[i];
                for (LocationId q = 0; q < aut.location_count(); ++q) {
                    for (LabelId lab : aut.labels[q]) {
                        if (lab == f.label)
                            parts.push_back(
                                hook.location_active(static_cast<int>(i), q, l));
                    }
                }
            }
            return or_(std::move(parts));
        }
        case StateFormula::Kind::VarCmp:
            return lay.var_guard_term(l, f.var_atom);
        case StateFormula::Kind::Not:
            return not_(state_formula_term(hook, f.children.front(), l));
        case StateFormula::Kind::And: {
            std::vector<Term> parts;
            for (const auto& c : f.children)
                parts.push_back(state_formula_term(hook, c, l));
            return and_(std::move(parts));
        }
        case StateFormula::Kind::Or: {
            std::vector<Term> parts;
            for (const auto& c : f.children)
                parts.push_back(state_formula_term(hook, c, l));
            return or_(std::move(parts));
        }
    }
    throw std::logic_error("unhandled state formula kind");
}

/// Appends the query assertion: some position in [0, k+1] falsifies the
/// invariant (SAT = counterexample) or satisfies the reachability target
/// (SAT = witness). An UNSAT answer means the property holds on every lasso
/// run up to the bound.
inline void encode_query(const PropertyHook& hook, const Query& q, Script& script) {
    std::vector<Term> positions;
    for (int l = 0; l <= hook.bound() + 1; ++l) {
        Term at_l = state_formula_term(hook, q.formula, l);
        positions.push_back(q.kind == Query::Kind::Invariant ? not_(std::move(at_l))
                                                             : std::move(at_l));
    }
    script.comment(q.kind == Query::Kind::Invariant ? "query: invariant violation"
                                                    : "query: reachability witness");
    script.assert_term(or_(std::move(positions)));
}

// ---- query text parsing -----------------------------------------------------
//
//   invariant !(P1.cs && P2.cs)
//   reachable (n = 1) && A.q2
//
// Atoms: `A.q` (automaton A in location q), a bare identifier (label), and
// variable comparisons with <, =, and the derived <=, >=, >, !=.

class QueryParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace query_detail {

struct Cursor {
    std::string_view text;
    size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    bool eat(std::string_view s) {
        skip_ws();
        if (text.substr(pos, s.size()) == s) {
            pos += s.size();
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    std::optional<std::string> ident() {
        skip_ws();
        size_t start = pos;
        if (pos < text.size() &&
            (std::isalpha(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                    text[pos] == '_'))
                ++pos;
            return std::string(text.substr(start, pos - start));
        }
        return std::nullopt;
    }
    std::optional<long long> integer() {
        skip_ws();
        size_t start = pos;
        if (pos < text.size() && text[pos] == '-') ++pos;
        size_t digits = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (pos == digits) {
            pos = start;
            return std::nullopt;
        }
        return std::stoll(std::string(text.substr(start, pos - start)));
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw QueryParseError(msg + " at offset " + std::to_string(pos));
    }
};

class Parser {
public:
    Parser(std::string_view text, const Network& net) : cur_{text}, net_(net) {}

    Query parse() {
        Query q;
        auto kw = cur_.ident();
        if (kw && *kw == "invariant") q.kind = Query::Kind::Invariant;
        else if (kw && *kw == "reachable") q.kind = Query::Kind::Reachable;
        else cur_.fail("query must start with 'invariant' or 'reachable'");
        q.formula = disjunction();
        cur_.skip_ws();
        if (cur_.pos != cur_.text.size()) cur_.fail("trailing input in query");
        return q;
    }

private:
    StateFormula disjunction() {
        StateFormula f = conjunction();
        while (cur_.eat("||")) f = StateFormula::disj(std::move(f), conjunction());
        return f;
    }
    StateFormula conjunction() {
        StateFormula f = unary();
        while (cur_.eat("&&")) f = StateFormula::conj(std::move(f), unary());
        return f;
    }
    StateFormula unary() {
        if (cur_.eat('!')) return StateFormula::negate(unary());
        if (cur_.eat('(')) {
            StateFormula f = disjunction();
            if (!cur_.eat(')')) cur_.fail("expected ')'");
            return f;
        }
        return atom();
    }

    StateFormula atom() {
        auto name = cur_.ident();
        if (!name) cur_.fail("expected an atom");
        if (cur_.eat('.')) {
            auto loc = cur_.ident();
            if (!loc) cur_.fail("expected a location after '.'");
            auto aut = net_.find_automaton(*name);
            if (!aut) cur_.fail("unknown automaton '" + *name + "'");
            auto q = net_.automata[*aut].find_location(*loc);
            if (!q) cur_.fail("unknown location '" + *loc + "' of automaton '" + *name + "'");
            return StateFormula::at(*aut, *q);
        }
        // variable comparison?
        cur_.skip_ws();
        const char c = cur_.peek();
        if (c == '<' || c == '>' || c == '=' || c == '!') {
            // careful: '!' only if followed by '=' (otherwise it belongs to
            // the next unary formula and this atom is a label).
            if (c != '!' ||
                (cur_.pos + 1 < cur_.text.size() && cur_.text[cur_.pos + 1] == '=')) {
                auto v = net_.find_variable(*name);
                if (!v) cur_.fail("unknown variable '" + *name + "'");
                return var_atom(*v);
            }
        }
        auto lab = net_.find_label(*name);
        if (!lab) cur_.fail("unknown label '" + *name + "'");
        return StateFormula::label_holds(*lab);
    }

    // n < e | n <= e | n > e | n >= e | n = e | n != e, desugared onto the
    // {<, =} atoms of the variable-constraint grammar.
    StateFormula var_atom(VarId v) {
        enum class R { Lt, Le, Gt, Ge, Eq, Ne } rel;
        if (cur_.eat("<=")) rel = R::Le;
        else if (cur_.eat(">=")) rel = R::Ge;
        else if (cur_.eat("!=")) rel = R::Ne;
        else if (cur_.eat('<')) rel = R::Lt;
        else if (cur_.eat('>')) rel = R::Gt;
        else if (cur_.eat('=')) rel = R::Eq;
        else cur_.fail("expected a comparison operator");

        std::optional<VarId> rhs_var;
        long long rhs_const = 0;
        if (auto num = cur_.integer()) {
            rhs_const = *num;
        } else if (auto id = cur_.ident()) {
            auto w = net_.find_variable(*id);
            if (!w) cur_.fail("unknown variable '" + *id + "'");
            rhs_var = *w;
        } else {
            cur_.fail("expected a variable or integer after the comparison");
        }

        auto lt = [&]() {
            return rhs_var ? VarConstraint::cmp_var(v, VarRel::Lt, *rhs_var)
                           : VarConstraint::cmp_const(v, VarRel::Lt, rhs_const);
        };
        auto eq_atom = [&]() {
            return rhs_var ? VarConstraint::cmp_var(v, VarRel::Eq, *rhs_var)
                           : VarConstraint::cmp_const(v, VarRel::Eq, rhs_const);
        };
        switch (rel) {
            case R::Lt: return StateFormula::var_cmp(lt());
            case R::Eq: return StateFormula::var_cmp(eq_atom());
            case R::Ne: return StateFormula::negate(StateFormula::var_cmp(eq_atom()));
            case R::Ge: return StateFormula::negate(StateFormula::var_cmp(lt()));
            case R::Le:
                return StateFormula::disj(StateFormula::var_cmp(lt()),
                                          StateFormula::var_cmp(eq_atom()));
            case R::Gt:
                return StateFormula::conj(
                    StateFormula::negate(StateFormula::var_cmp(lt())),
                    StateFormula::negate(StateFormula::var_cmp(eq_atom())));
        }
        throw std::logic_error("unreachable");
    }

    query_detail::Cursor cur_;
    const Network& net_;
};

}  // namespace query_detail

/// Parses the CLI query syntax; throws QueryParseError with a description on
/// malformed input or unknown entities.
inline Query parse_query(std::string_view text, const Network& net) {
    return query_detail::Parser(text, net).parse();
}

}  // namespace tabmc
