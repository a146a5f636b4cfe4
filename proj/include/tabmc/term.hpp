#pragma once

#include "tabmc/rational.hpp"

#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Solver-agnostic symbolic IR over three sorts: Bool, fixed-width BitVectors
// and reals. Terms are immutable, well-sorted by construction, and freely
// shareable across threads. A deterministic SMT-LIB2 serializer and a small
// concrete evaluator (used by tests and the model re-check) live alongside.

namespace tabmc {

struct Sort {
    enum class Kind { Bool, BV, Real };

    Kind kind = Kind::Bool;
    int width = 0;  // BV only

    bool operator==(const Sort&) const = default;

    static Sort boolean() { return {Kind::Bool, 0}; }
    static Sort real() { return {Kind::Real, 0}; }
    static Sort bv(int w) {
        if (w < 1) throw std::invalid_argument("BitVector width must be >= 1");
        return {Kind::BV, w};
    }

    bool is_bool() const { return kind == Kind::Bool; }
    bool is_bv() const { return kind == Kind::BV; }
    bool is_real() const { return kind == Kind::Real; }

    std::string text() const {
        switch (kind) {
            case Kind::Bool: return "Bool";
            case Kind::Real: return "Real";
            case Kind::BV: return "(_ BitVec " + std::to_string(width) + ")";
        }
        return "?";
    }
};

enum class Op {
    Const,     // named constant
    BvLit,     // bit pattern literal
    RealLit,   // exact rational literal
    BoolLit,
    // BitVector
    BvNot, BvAnd, BvOr, BvXor, BvAdd, BvSub,
    BvSlt, BvSle, BvSgt, BvSge,
    BvUlt, BvUle, BvUgt, BvUge,
    Extract, SignExtend, Concat,
    // Real
    RealAdd, RealLt, RealLe, RealGt, RealGe,
    // Boolean / generic
    Eq, Not, And, Or, Implies,
};

class Term;

namespace term_detail {

struct Node {
    Op op;
    Sort sort;
    std::string name;           // Const
    std::vector<bool> bits;     // BvLit, LSB first
    Rational rat;               // RealLit
    bool bval = false;          // BoolLit
    int hi = 0, lo = 0;         // Extract; SignExtend stores extra bits in hi
    std::vector<Term> kids;
};

}  // namespace term_detail

class Term {
public:
    Term() = default;

    const term_detail::Node& node() const {
        if (!node_) throw std::logic_error("empty term");
        return *node_;
    }
    bool empty() const { return !node_; }
    Op op() const { return node().op; }
    const Sort& sort() const { return node().sort; }
    const std::vector<Term>& kids() const { return node().kids; }
    const std::string& name() const { return node().name; }

    static Term make(term_detail::Node n) {
        Term t;
        t.node_ = std::make_shared<const term_detail::Node>(std::move(n));
        return t;
    }

private:
    std::shared_ptr<const term_detail::Node> node_;
};

namespace term_detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline Term nary(Op op, Sort sort, std::vector<Term> kids) {
    Node n;
    n.op = op;
    n.sort = sort;
    n.kids = std::move(kids);
    return Term::make(std::move(n));
}

}  // namespace term_detail

// ---- leaves -------------------------------------------------------------------

inline Term bv_const(const std::string& name, int width) {
    term_detail::Node n;
    n.op = Op::Const;
    n.sort = Sort::bv(width);
    n.name = name;
    return Term::make(std::move(n));
}

inline Term real_const(const std::string& name) {
    term_detail::Node n;
    n.op = Op::Const;
    n.sort = Sort::real();
    n.name = name;
    return Term::make(std::move(n));
}

/// Bit-pattern literal. Non-negative values are read as unsigned, negative
/// values in two's complement; either way the value must be representable in
/// `width` bits.
inline Term bv_literal(long long value, int width) {
    if (width < 1 || width > 62)
        throw std::invalid_argument("unsupported BitVector literal width");
    const long long umax = (1LL << width) - 1;
    const long long smin = -(1LL << (width - 1));
    term_detail::require(value <= umax && value >= smin,
                         "literal " + std::to_string(value) + " not representable in " +
                             std::to_string(width) + " bits");
    term_detail::Node n;
    n.op = Op::BvLit;
    n.sort = Sort::bv(width);
    unsigned long long pattern = static_cast<unsigned long long>(value) &
                                 ((width == 64) ? ~0ULL : ((1ULL << width) - 1));
    for (int i = 0; i < width; ++i) n.bits.push_back((pattern >> i) & 1);
    return Term::make(std::move(n));
}

inline Term bv_zeros(int width) {
    term_detail::Node n;
    n.op = Op::BvLit;
    n.sort = Sort::bv(width);
    n.bits.assign(width, false);
    return Term::make(std::move(n));
}

inline Term bv_ones(int width) {
    term_detail::Node n;
    n.op = Op::BvLit;
    n.sort = Sort::bv(width);
    n.bits.assign(width, true);
    return Term::make(std::move(n));
}

inline Term real_literal(const Rational& r) {
    term_detail::Node n;
    n.op = Op::RealLit;
    n.sort = Sort::real();
    n.rat = r;
    return Term::make(std::move(n));
}

inline Term real_literal(long long v) { return real_literal(Rational(v)); }

inline Term bool_literal(bool b) {
    term_detail::Node n;
    n.op = Op::BoolLit;
    n.sort = Sort::boolean();
    n.bval = b;
    return Term::make(std::move(n));
}

// ---- BitVector operations -------------------------------------------------------

namespace term_detail {

inline Sort same_bv(const std::vector<Term>& kids, const char* what) {
    require(!kids.empty(), std::string(what) + " needs operands");
    const Sort s = kids.front().sort();
    require(s.is_bv(), std::string(what) + " needs BitVector operands");
    for (const auto& k : kids)
        require(k.sort() == s, std::string(what) + " operand widths differ");
    return s;
}

}  // namespace term_detail

inline Term bv_not(Term a) {
    term_detail::require(a.sort().is_bv(), "bvnot needs a BitVector");
    Sort s = a.sort();
    return term_detail::nary(Op::BvNot, s, {std::move(a)});
}

inline Term bv_and(std::vector<Term> kids) {
    if (kids.size() == 1) return kids.front();
    Sort s = term_detail::same_bv(kids, "bvand");
    return term_detail::nary(Op::BvAnd, s, std::move(kids));
}
inline Term bv_and(Term a, Term b) { return bv_and(std::vector<Term>{std::move(a), std::move(b)}); }

inline Term bv_or(std::vector<Term> kids) {
    if (kids.size() == 1) return kids.front();
    Sort s = term_detail::same_bv(kids, "bvor");
    return term_detail::nary(Op::BvOr, s, std::move(kids));
}
inline Term bv_or(Term a, Term b) { return bv_or(std::vector<Term>{std::move(a), std::move(b)}); }

inline Term bv_xor(Term a, Term b) {
    std::vector<Term> kids{std::move(a), std::move(b)};
    Sort s = term_detail::same_bv(kids, "bvxor");
    return term_detail::nary(Op::BvXor, s, std::move(kids));
}

inline Term bv_add(Term a, Term b) {
    std::vector<Term> kids{std::move(a), std::move(b)};
    Sort s = term_detail::same_bv(kids, "bvadd");
    return term_detail::nary(Op::BvAdd, s, std::move(kids));
}

inline Term bv_sub(Term a, Term b) {
    std::vector<Term> kids{std::move(a), std::move(b)};
    Sort s = term_detail::same_bv(kids, "bvsub");
    return term_detail::nary(Op::BvSub, s, std::move(kids));
}

namespace term_detail {

inline Term bv_cmp(Op op, Term a, Term b, const char* what) {
    std::vector<Term> kids{std::move(a), std::move(b)};
    same_bv(kids, what);
    return nary(op, Sort::boolean(), std::move(kids));
}

}  // namespace term_detail

inline Term bv_slt(Term a, Term b) { return term_detail::bv_cmp(Op::BvSlt, std::move(a), std::move(b), "bvslt"); }
inline Term bv_sle(Term a, Term b) { return term_detail::bv_cmp(Op::BvSle, std::move(a), std::move(b), "bvsle"); }
inline Term bv_sgt(Term a, Term b) { return term_detail::bv_cmp(Op::BvSgt, std::move(a), std::move(b), "bvsgt"); }
inline Term bv_sge(Term a, Term b) { return term_detail::bv_cmp(Op::BvSge, std::move(a), std::move(b), "bvsge"); }
inline Term bv_ult(Term a, Term b) { return term_detail::bv_cmp(Op::BvUlt, std::move(a), std::move(b), "bvult"); }
inline Term bv_ule(Term a, Term b) { return term_detail::bv_cmp(Op::BvUle, std::move(a), std::move(b), "bvule"); }
inline Term bv_ugt(Term a, Term b) { return term_detail::bv_cmp(Op::BvUgt, std::move(a), std::move(b), "bvugt"); }
inline Term bv_uge(Term a, Term b) { return term_detail::bv_cmp(Op::BvUge, std::move(a), std::move(b), "bvuge"); }

/// extract of bits [lo, hi]; slice(t, l, l) is the single-bit read. The
/// full-width slice is the identity and returns the term unchanged.
inline Term slice(Term t, int hi, int lo) {
    term_detail::require(t.sort().is_bv(), "extract needs a BitVector");
    const int w = t.sort().width;
    term_detail::require(0 <= lo && lo <= hi && hi < w,
                         "extract range [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "] invalid for width " +
                             std::to_string(w));
    if (lo == 0 && hi == w - 1) return t;
    term_detail::Node n;
    n.op = Op::Extract;
    n.sort = Sort::bv(hi - lo + 1);
    n.hi = hi;
    n.lo = lo;
    n.kids.push_back(std::move(t));
    return Term::make(std::move(n));
}

/// Sign-extends to `new_width` (identity when widths match).
inline Term sign_extend(Term t, int new_width) {
    term_detail::require(t.sort().is_bv(), "sign_extend needs a BitVector");
    const int w = t.sort().width;
    term_detail::require(new_width >= w, "sign_extend cannot shrink");
    if (new_width == w) return t;
    term_detail::Node n;
    n.op = Op::SignExtend;
    n.sort = Sort::bv(new_width);
    n.hi = new_width - w;  // number of extra bits
    n.kids.push_back(std::move(t));
    return Term::make(std::move(n));
}

/// Concatenation; `high` supplies the most significant bits.
inline Term concat(Term high, Term low) {
    term_detail::require(high.sort().is_bv() && low.sort().is_bv(),
                         "concat needs BitVectors");
    Sort s = Sort::bv(high.sort().width + low.sort().width);
    return term_detail::nary(Op::Concat, s, {std::move(high), std::move(low)});
}

// ---- Real operations -------------------------------------------------------------

namespace term_detail {

inline Term real_cmp(Op op, Term a, Term b, const char* what) {
    require(a.sort().is_real() && b.sort().is_real(),
            std::string(what) + " needs Real operands");
    return nary(op, Sort::boolean(), {std::move(a), std::move(b)});
}

}  // namespace term_detail

inline Term real_add(Term a, Term b) {
    term_detail::require(a.sort().is_real() && b.sort().is_real(),
                         "real + needs Real operands");
    return term_detail::nary(Op::RealAdd, Sort::real(), {std::move(a), std::move(b)});
}

inline Term real_lt(Term a, Term b) { return term_detail::real_cmp(Op::RealLt, std::move(a), std::move(b), "<"); }
inline Term real_le(Term a, Term b) { return term_detail::real_cmp(Op::RealLe, std::move(a), std::move(b), "<="); }
inline Term real_gt(Term a, Term b) { return term_detail::real_cmp(Op::RealGt, std::move(a), std::move(b), ">"); }
inline Term real_ge(Term a, Term b) { return term_detail::real_cmp(Op::RealGe, std::move(a), std::move(b), ">="); }

// ---- Boolean / generic -------------------------------------------------------------

inline Term eq(Term a, Term b) {
    term_detail::require(a.sort() == b.sort(), "= needs operands of one sort");
    return term_detail::nary(Op::Eq, Sort::boolean(), {std::move(a), std::move(b)});
}

inline Term not_(Term a) {
    term_detail::require(a.sort().is_bool(), "not needs a Bool");
    return term_detail::nary(Op::Not, Sort::boolean(), {std::move(a)});
}

namespace term_detail {

inline Term bool_nary(Op op, std::vector<Term> kids, bool empty_value) {
    if (kids.empty()) return bool_literal(empty_value);
    if (kids.size() == 1) return kids.front();
    for (const auto& k : kids)
        require(k.sort().is_bool(), "boolean connective needs Bool operands");
    return nary(op, Sort::boolean(), std::move(kids));
}

}  // namespace term_detail

inline Term and_(std::vector<Term> kids) {
    return term_detail::bool_nary(Op::And, std::move(kids), true);
}
inline Term and_(Term a, Term b) { return and_(std::vector<Term>{std::move(a), std::move(b)}); }

inline Term or_(std::vector<Term> kids) {
    return term_detail::bool_nary(Op::Or, std::move(kids), false);
}
inline Term or_(Term a, Term b) { return or_(std::vector<Term>{std::move(a), std::move(b)}); }

inline Term implies(Term a, Term b) {
    term_detail::require(a.sort().is_bool() && b.sort().is_bool(),
                         "=> needs Bool operands");
    return term_detail::nary(Op::Implies, Sort::boolean(), {std::move(a), std::move(b)});
}

// ---- scripts -------------------------------------------------------------------

/// Ordered declarations plus assertions. Emission order is insertion order,
/// so structurally equal scripts serialize to identical bytes.
class Script {
public:
    void declare(const std::string& name, Sort sort) {
        if (index_.count(name))
            throw std::invalid_argument("constant '" + name + "' declared twice");
        index_[name] = decls_.size();
        decls_.push_back({name, sort});
    }

    void assert_term(Term t) {
        if (!t.sort().is_bool())
            throw std::invalid_argument("assertions must have Bool sort");
        items_.push_back({Item::Kind::Assert, std::move(t), {}});
    }

    /// Section marker emitted as an SMT-LIB comment.
    void comment(std::string text) {
        items_.push_back({Item::Kind::Comment, {}, std::move(text)});
    }

    bool is_declared(const std::string& name) const { return index_.count(name) > 0; }
    const Sort* sort_of(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? nullptr : &decls_[it->second].second;
    }

    const std::vector<std::pair<std::string, Sort>>& declarations() const {
        return decls_;
    }
    std::vector<Term> assertions() const {
        std::vector<Term> out;
        for (const auto& i : items_)
            if (i.kind == Item::Kind::Assert) out.push_back(i.term);
        return out;
    }
    size_t assertion_count() const {
        size_t n = 0;
        for (const auto& i : items_)
            if (i.kind == Item::Kind::Assert) ++n;
        return n;
    }

    struct Item {
        enum class Kind { Assert, Comment };
        Kind kind;
        Term term;
        std::string text;
    };
    const std::vector<Item>& items() const { return items_; }

private:
    std::vector<std::pair<std::string, Sort>> decls_;
    std::map<std::string, size_t> index_;
    std::vector<Item> items_;
};

// ---- SMT-LIB2 serialization ----------------------------------------------------

namespace term_detail {

inline void emit_real_literal(std::ostream& os, const Rational& r) {
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    const bool neg = num < 0;
    const BigInt anum = neg ? BigInt(-num) : num;
    std::ostringstream body;
    if (den == 1) body << anum.str() << ".0";
    else body << "(/ " << anum.str() << ".0 " << den.str() << ".0)";
    if (neg) os << "(- " << body.str() << ")";
    else os << body.str();
}

inline void emit_term(std::ostream& os, const Term& t) {
    const auto& n = t.node();
    auto emit_app = [&](const char* sym) {
        os << "(" << sym;
        for (const auto& k : n.kids) {
            os << " ";
            emit_term(os, k);
        }
        os << ")";
    };
    switch (n.op) {
        case Op::Const: os << n.name; return;
        case Op::BoolLit: os << (n.bval ? "true" : "false"); return;
        case Op::RealLit: emit_real_literal(os, n.rat); return;
        case Op::BvLit: {
            os << "#b";
            for (int i = static_cast<int>(n.bits.size()) - 1; i >= 0; --i)
                os << (n.bits[i] ? '1' : '0');
            return;
        }
        case Op::Extract:
            os << "((_ extract " << n.hi << " " << n.lo << ") ";
            emit_term(os, n.kids.front());
            os << ")";
            return;
        case Op::SignExtend:
            os << "((_ sign_extend " << n.hi << ") ";
            emit_term(os, n.kids.front());
            os << ")";
            return;
        case Op::BvNot: emit_app("bvnot"); return;
        case Op::BvAnd: emit_app("bvand"); return;
        case Op::BvOr: emit_app("bvor"); return;
        case Op::BvXor: emit_app("bvxor"); return;
        case Op::BvAdd: emit_app("bvadd"); return;
        case Op::BvSub: emit_app("bvsub"); return;
        case Op::BvSlt: emit_app("bvslt"); return;
        case Op::BvSle: emit_app("bvsle"); return;
        case Op::BvSgt: emit_app("bvsgt"); return;
        case Op::BvSge: emit_app("bvsge"); return;
        case Op::BvUlt: emit_app("bvult"); return;
        case Op::BvUle: emit_app("bvule"); return;
        case Op::BvUgt: emit_app("bvugt"); return;
        case Op::BvUge: emit_app("bvuge"); return;
        case Op::Concat: emit_app("concat"); return;
        case Op::RealAdd: emit_app("+"); return;
        case Op::RealLt: emit_app("<"); return;
        case Op::RealLe: emit_app("<="); return;
        case Op::RealGt: emit_app(">"); return;
        case Op::RealGe: emit_app(">="); return;
        case Op::Eq: emit_app("="); return;
        case Op::Not: emit_app("not"); return;
        case Op::And: emit_app("and"); return;
        case Op::Or: emit_app("or"); return;
        case Op::Implies: emit_app("=>"); return;
    }
    throw std::logic_error("unhandled term op");
}

inline void collect_consts(const Term& t, std::map<std::string, Sort>& out) {
    if (t.op() == Op::Const) out.emplace(t.name(), t.sort());
    for (const auto& k : t.kids()) collect_consts(k, out);
}

}  // namespace term_detail

/// Serializes a script: set-logic, declarations, assertions, (check-sat).
/// Output is byte-identical for structurally equal scripts. Every constant
/// used by an assertion must be declared.
inline std::string emit_smtlib2(const Script& script, const std::string& logic) {
    std::map<std::string, Sort> used;
    for (const auto& item : script.items())
        if (item.kind == Script::Item::Kind::Assert)
            term_detail::collect_consts(item.term, used);
    for (const auto& [name, sort] : used) {
        const Sort* declared = script.sort_of(name);
        if (!declared)
            throw std::logic_error("constant '" + name + "' used but not declared");
        if (!(*declared == sort))
            throw std::logic_error("constant '" + name + "' used at a different sort");
    }

    std::ostringstream os;
    os << "(set-option :produce-models true)\n";
    os << "(set-logic " << logic << ")\n";
    for (const auto& [name, sort] : script.declarations())
        os << "(declare-const " << name << " " << sort.text() << ")\n";
    for (const auto& item : script.items()) {
        if (item.kind == Script::Item::Kind::Comment) {
            os << "; " << item.text << "\n";
        } else {
            os << "(assert ";
            term_detail::emit_term(os, item.term);
            os << ")\n";
        }
    }
    os << "(check-sat)\n";
    return os.str();
}

// ---- concrete evaluation ---------------------------------------------------------

/// Concrete BitVector value, LSB first.
struct BvValue {
    int width = 0;
    std::vector<bool> bits;

    bool operator==(const BvValue&) const = default;

    static BvValue from_unsigned(unsigned long long v, int width) {
        BvValue out;
        out.width = width;
        for (int i = 0; i < width; ++i) out.bits.push_back((v >> i) & 1);
        return out;
    }

    BigInt to_unsigned() const {
        BigInt v = 0;
        for (int i = width - 1; i >= 0; --i) v = v * 2 + (bits[i] ? 1 : 0);
        return v;
    }
    BigInt to_signed() const {
        BigInt v = to_unsigned();
        if (width > 0 && bits[width - 1]) v -= BigInt(1) << width;
        return v;
    }
};

using Value = std::variant<bool, BvValue, Rational>;

using Assignment = std::map<std::string, Value>;

namespace term_detail {

inline BvValue as_bv(const Value& v, const char* what) {
    if (const auto* b = std::get_if<BvValue>(&v)) return *b;
    throw std::invalid_argument(std::string(what) + ": BitVector value expected");
}
inline Rational as_real(const Value& v, const char* what) {
    if (const auto* r = std::get_if<Rational>(&v)) return *r;
    throw std::invalid_argument(std::string(what) + ": Real value expected");
}
inline bool as_bool(const Value& v, const char* what) {
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw std::invalid_argument(std::string(what) + ": Bool value expected");
}

inline BvValue bv_binop_add(const BvValue& a, const BvValue& b, bool subtract) {
    BvValue out;
    out.width = a.width;
    int carry = subtract ? 1 : 0;
    for (int i = 0; i < a.width; ++i) {
        const int x = a.bits[i] ? 1 : 0;
        const int y = (b.bits[i] ? 1 : 0) ^ (subtract ? 1 : 0);
        const int s = x + y + carry;
        out.bits.push_back(s & 1);
        carry = s >> 1;
    }
    return out;
}

}  // namespace term_detail

/// Evaluates a ground term under an assignment of constants to values.
/// Used by tests as an in-process oracle and by the solver driver to
/// re-substitute model values into the script's assertions.
inline Value eval_term(const Term& t, const Assignment& env) {
    using namespace term_detail;
    const auto& n = t.node();
    auto bv = [&](size_t i) { return as_bv(eval_term(n.kids[i], env), "operand"); };
    auto re = [&](size_t i) { return as_real(eval_term(n.kids[i], env), "operand"); };
    auto bo = [&](size_t i) { return as_bool(eval_term(n.kids[i], env), "operand"); };
    switch (n.op) {
        case Op::Const: {
            auto it = env.find(n.name);
            if (it == env.end())
                throw std::invalid_argument("no value for constant '" + n.name + "'");
            return it->second;
        }
        case Op::BoolLit: return n.bval;
        case Op::RealLit: return n.rat;
        case Op::BvLit: return BvValue{static_cast<int>(n.bits.size()), n.bits};
        case Op::BvNot: {
            BvValue v = bv(0);
            for (size_t i = 0; i < v.bits.size(); ++i) v.bits[i] = !v.bits[i];
            return v;
        }
        case Op::BvAnd:
        case Op::BvOr:
        case Op::BvXor: {
            BvValue acc = bv(0);
            for (size_t k = 1; k < n.kids.size(); ++k) {
                BvValue rhs = bv(k);
                for (int i = 0; i < acc.width; ++i) {
                    if (n.op == Op::BvAnd) acc.bits[i] = acc.bits[i] && rhs.bits[i];
                    else if (n.op == Op::BvOr) acc.bits[i] = acc.bits[i] || rhs.bits[i];
                    else acc.bits[i] = acc.bits[i] != rhs.bits[i];
                }
            }
            return acc;
        }
        case Op::BvAdd: return bv_binop_add(bv(0), bv(1), false);
        case Op::BvSub: return bv_binop_add(bv(0), bv(1), true);
        case Op::BvSlt: return bv(0).to_signed() < bv(1).to_signed();
        case Op::BvSle: return bv(0).to_signed() <= bv(1).to_signed();
        case Op::BvSgt: return bv(0).to_signed() > bv(1).to_signed();
        case Op::BvSge: return bv(0).to_signed() >= bv(1).to_signed();
        case Op::BvUlt: return bv(0).to_unsigned() < bv(1).to_unsigned();
        case Op::BvUle: return bv(0).to_unsigned() <= bv(1).to_unsigned();
        case Op::BvUgt: return bv(0).to_unsigned() > bv(1).to_unsigned();
        case Op::BvUge: return bv(0).to_unsigned() >= bv(1).to_unsigned();
        case Op::Extract: {
            BvValue v = bv(0);
            BvValue out;
            out.width = n.hi - n.lo + 1;
            for (int i = n.lo; i <= n.hi; ++i) out.bits.push_back(v.bits.at(i));
            return out;
        }
        case Op::SignExtend: {
            BvValue v = bv(0);
            const bool sign = v.bits.empty() ? false : v.bits.back();
            for (int i = 0; i < n.hi; ++i) v.bits.push_back(sign);
            v.width += n.hi;
            return v;
        }
        case Op::Concat: {
            BvValue high = bv(0), low = bv(1);
            BvValue out;
            out.width = high.width + low.width;
            out.bits = low.bits;
            out.bits.insert(out.bits.end(), high.bits.begin(), high.bits.end());
            return out;
        }
        case Op::RealAdd: return re(0) + re(1);
        case Op::RealLt: return re(0) < re(1);
        case Op::RealLe: return re(0) <= re(1);
        case Op::RealGt: return re(0) > re(1);
        case Op::RealGe: return re(0) >= re(1);
        case Op::Eq: {
            Value a = eval_term(n.kids[0], env);
            Value b = eval_term(n.kids[1], env);
            return a == b;
        }
        case Op::Not: return !bo(0);
        case Op::And: {
            for (size_t i = 0; i < n.kids.size(); ++i)
                if (!bo(i)) return false;
            return true;
        }
        case Op::Or: {
            for (size_t i = 0; i < n.kids.size(); ++i)
                if (bo(i)) return true;
            return false;
        }
        case Op::Implies: return !bo(0) || bo(1);
    }
    throw std::logic_error("unhandled term op in eval");
}

}  // namespace tabmc
