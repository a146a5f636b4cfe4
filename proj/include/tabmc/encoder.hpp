#pragma once

#include "tabmc/model.hpp"
#include "tabmc/semantics.hpp"
#include "tabmc/term.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Bounded encoding of a network of TA into a mixed BitVector / real
// arithmetic script. A run of length k+2 is laid out over positions
// 0..k+1; position l spans a signal interval that lasts delta(l) > 0, and
// the transitions active at position l fire at the instant between
// positions l and l+1 (so firings happen for l in 0..k). The last position
// k+1 repeats the state at the loop position, which yields a lasso.
//
// Term layout per automaton i (1-based in names):
//   tb_i_j     bit j of the active-transition number, one BitVector of
//              width k+2 per bit, over the transition set extended with one
//              null (stay-put) transition per location
//   edgeRC_i   one bit per position: 1 = right-closed firing, 0 = left-closed
// per variable n:  vb_n_j, bit j of the two's-complement value over time
// per clock x, position l:  x_<x>_<l>, a real constant
// per position l in 0..k:   delta_<l>, a positive real
// plus an unsigned BitVector `loop` of width k+2 holding the loop position.

namespace tabmc {

enum class EdgePolicy { Free, RightClosed };
enum class LivenessMode { None, StrongTransition };

struct EncodeOptions {
    int bound = 10;  // k; positions run 0..k+1
    EdgePolicy edges = EdgePolicy::RightClosed;
    LivenessMode liveness = LivenessMode::StrongTransition;
    std::string logic = "ALL";
};

// ---- reserved name scheme ---------------------------------------------------
//
// Generated names parse unambiguously from the right (the trailing _<int>
// fields contain no underscores), so they never collide with each other for
// any user identifiers; distinct prefixes separate the categories.

inline std::string tb_name(int aut_index, int j) {
    return "tb_" + std::to_string(aut_index + 1) + "_" + std::to_string(j);
}
inline std::string edge_vec_name(int aut_index) {
    return "edgeRC_" + std::to_string(aut_index + 1);
}
inline std::string vb_name(const std::string& var, int j) {
    return "vb_" + var + "_" + std::to_string(j);
}
inline std::string clock_value_name(const std::string& clock, int l) {
    return "x_" + clock + "_" + std::to_string(l);
}
inline std::string delta_value_name(int l) {
    return "delta_" + std::to_string(l);
}
inline constexpr const char* kLoopName = "loop";

/// One element of an automaton's extended transition set: either a declared
/// transition or the null transition of a location.
struct TransitionSlot {
    bool is_null = true;
    LocationId null_location = 0;  // when is_null
    int transition = -1;           // index into Automaton::transitions otherwise
    LocationId source = 0;
    LocationId target = 0;
};

/// Extends every automaton's transition set with one null transition per
/// location. Slot order is deterministic: null transitions first (by
/// location id), then declared transitions in declaration order.
inline std::vector<std::vector<TransitionSlot>> augment_with_null_transitions(
    const Network& net) {
    std::vector<std::vector<TransitionSlot>> out;
    for (const auto& aut : net.automata) {
        std::vector<TransitionSlot> slots;
        for (LocationId q = 0; q < aut.location_count(); ++q)
            slots.push_back({true, q, -1, q, q});
        for (size_t t = 0; t < aut.transitions.size(); ++t)
            slots.push_back({false, 0, static_cast<int>(t), aut.transitions[t].source,
                             aut.transitions[t].target});
        out.push_back(std::move(slots));
    }
    return out;
}

inline int bits_for_count(size_t count) {
    int bits = 0;
    while ((size_t{1} << bits) < count) ++bits;
    return bits;
}

/// Everything needed to build (or read back) the terms of an encoding:
/// shared by the constraint builder, the property encoder and the trace
/// decoder.
struct EncodingLayout {
    const Network* net = nullptr;
    int k = 0;
    std::vector<std::vector<TransitionSlot>> slots;
    std::vector<int> tb_counts;
    std::vector<int> var_widths;

    static EncodingLayout build(const Network& net, int k) {
        if (k < 2)
            throw std::invalid_argument(
                "bound must be at least 2 (no loop position exists below that)");
        if (k > 60)
            throw std::invalid_argument("bound above 60 is not supported");
        EncodingLayout lay;
        lay.net = &net;
        lay.k = k;
        lay.slots = augment_with_null_transitions(net);
        for (const auto& s : lay.slots)
            lay.tb_counts.push_back(bits_for_count(s.size()));
        for (const auto& v : net.variables)
            lay.var_widths.push_back(var_bit_width(v));
        return lay;
    }

    int width() const { return k + 2; }
    int automaton_count() const { return static_cast<int>(slots.size()); }

    Term tb(int i, int j) const { return bv_const(tb_name(i, j), width()); }
    Term edge_vec(int i) const { return bv_const(edge_vec_name(i), width()); }
    Term vb(VarId n, int j) const {
        return bv_const(vb_name(net->variables.at(n).name, j), width());
    }
    Term clock_value(ClockId x, int l) const {
        return real_const(clock_value_name(net->clock_names.at(x), l));
    }
    Term delta(int l) const { return real_const(delta_value_name(l)); }
    Term loop_term() const { return bv_const(kLoopName, width()); }

    /// Position-l bit of a width-(k+2) vector as a Bool.
    Term vec_bit(const Term& vec, int l) const {
        return eq(slice(vec, l, l), bv_literal(1, 1));
    }
    Term edge_bit_is(int i, int l, bool right_closed) const {
        return eq(slice(edge_vec(i), l, l), bv_literal(right_closed ? 1 : 0, 1));
    }
    Term edge_bits_equal(int i, int j, int l) const {
        return eq(slice(edge_vec(i), l, l), slice(edge_vec(j), l, l));
    }

    /// Bit-wise conjunction identifying one (k+2)-length activity vector per
    /// transition code; every position of the result is 1 exactly when the
    /// automaton's transition number equals `code` there.
    Term alias_for_code(int i, size_t code) const {
        const int m = tb_counts.at(i);
        if (m == 0) return bv_ones(width());
        std::vector<Term> parts;
        for (int j = 0; j < m; ++j) {
            Term v = tb(i, j);
            parts.push_back((code >> j) & 1 ? v : bv_not(v));
        }
        std::reverse(parts.begin(), parts.end());  // high bit first, as written
        return bv_and(std::move(parts));
    }

    Term transition_alias(int i, size_t slot) const {
        if (slot >= slots.at(i).size())
            throw std::out_of_range("transition slot out of range");
        return alias_for_code(i, slot);
    }

    /// Activity vector of a location: disjunction of the aliases of all
    /// transitions leaving it (never empty, the null transition qualifies).
    Term location_alias(int i, LocationId q) const {
        std::vector<Term> parts;
        for (size_t s = 0; s < slots.at(i).size(); ++s)
            if (slots[i][s].source == q) parts.push_back(transition_alias(i, s));
        return bv_or(std::move(parts));
    }

    /// Value of variable n at position l, assembled from the per-bit vectors
    /// (width = minimal two's-complement width of the declared range).
    Term var_value(VarId n, int l) const {
        const int w = var_widths.at(n);
        Term acc = slice(vb(n, w - 1), l, l);
        for (int j = w - 2; j >= 0; --j) acc = concat(acc, slice(vb(n, j), l, l));
        return acc;
    }

    /// Pre-transition clock value at the instant ending position l.
    Term clock_at_instant(ClockId x, int l) const {
        return real_add(clock_value(x, l), delta(l));
    }

    // ---- guard terms -----------------------------------------------------------

    /// Clock reference point for a guard: the start of the interval (value
    /// x(l)) or the firing instant that ends it (value x(l) + delta(l)).
    enum class ClockRef { Start, Instant };

    Term clock_guard_term(int l, const ClockConstraint& g, ClockRef ref,
                          SatMode mode) const {
        std::vector<Term> parts;
        for (const auto& atom : g.atoms) {
            Term lhs = ref == ClockRef::Start ? clock_value(atom.clock, l)
                                              : clock_at_instant(atom.clock, l);
            Term rhs = real_literal(atom.bound);
            ClockRel rel = atom.rel;
            if (mode == SatMode::Weak) {
                if (rel == ClockRel::Lt) rel = ClockRel::Le;
                if (rel == ClockRel::Gt) rel = ClockRel::Ge;
            }
            switch (rel) {
                case ClockRel::Lt: parts.push_back(real_lt(lhs, rhs)); break;
                case ClockRel::Gt: parts.push_back(real_gt(lhs, rhs)); break;
                case ClockRel::Le: parts.push_back(real_le(lhs, rhs)); break;
                case ClockRel::Ge: parts.push_back(real_ge(lhs, rhs)); break;
            }
        }
        return and_(std::move(parts));
    }

    /// Variable constraint at position l over signed BitVectors; operands of
    /// different widths sign-extend the narrower side.
    Term var_guard_term(int l, const VarConstraint& g) const {
        switch (g.kind) {
            case VarConstraint::Kind::True:
                return bool_literal(true);
            case VarConstraint::Kind::CmpConst: {
                const int w =
                    std::max(var_widths.at(g.lhs), const_bit_width(g.rhs_const));
                Term lhs = sign_extend(var_value(g.lhs, l), w);
                Term rhs = bv_literal(g.rhs_const, w);
                return g.rel == VarRel::Lt ? bv_slt(lhs, rhs) : eq(lhs, rhs);
            }
            case VarConstraint::Kind::CmpVar: {
                const int w = std::max(var_widths.at(g.lhs), var_widths.at(g.rhs_var));
                Term lhs = sign_extend(var_value(g.lhs, l), w);
                Term rhs = sign_extend(var_value(g.rhs_var, l), w);
                return g.rel == VarRel::Lt ? bv_slt(lhs, rhs) : eq(lhs, rhs);
            }
            case VarConstraint::Kind::Not:
                return not_(var_guard_term(l, g.children.front()));
            case VarConstraint::Kind::And: {
                std::vector<Term> parts;
                for (const auto& c : g.children)
                    parts.push_back(var_guard_term(l, c));
                return and_(std::move(parts));
            }
        }
        throw std::logic_error("unhandled variable constraint kind");
    }

    /// Assignment expression at position l, computed at the given width with
    /// all variables and constants sign-extended (or cast) to it.
    Term expr_term(int l, const IntExpr& e, int w) const {
        switch (e.kind) {
            case IntExpr::Kind::Const: {
                // Wide enough widths take the constant exactly; the value is
                // truncated otherwise (the range guard uses an exact width).
                long long v = e.value;
                if (const_bit_width(v) > w) {
                    const long long mask = (w >= 63) ? -1 : ((1LL << w) - 1);
                    v &= mask;
                }
                return bv_literal(v, w);
            }
            case IntExpr::Kind::Var:
                return sign_extend(var_value(e.var, l), w);
            case IntExpr::Kind::Add:
                return bv_add(expr_term(l, e.kids[0], w), expr_term(l, e.kids[1], w));
            case IntExpr::Kind::Sub:
                return bv_sub(expr_term(l, e.kids[0], w), expr_term(l, e.kids[1], w));
        }
        throw std::logic_error("unhandled expression kind");
    }

    /// Width at which the expression evaluates without any wraparound, so
    /// range checks observe the mathematical value.
    int exact_expr_width(const IntExpr& e) const {
        int base = 1, ops = 0;
        collect_width(e, base, ops);
        return base + ops + 1;
    }

private:
    void collect_width(const IntExpr& e, int& base, int& ops) const {
        switch (e.kind) {
            case IntExpr::Kind::Const:
                base = std::max(base, const_bit_width(e.value));
                break;
            case IntExpr::Kind::Var:
                base = std::max(base, var_widths.at(e.var));
                break;
            case IntExpr::Kind::Add:
            case IntExpr::Kind::Sub:
                ++ops;
                collect_width(e.kids[0], base, ops);
                collect_width(e.kids[1], base, ops);
                break;
        }
    }
};

/// Named handles the property layer needs: location activity bits, variable
/// values and transition occurrence bits per position. Names are stable for
/// a fixed network and bound.
struct PropertyHook {
    EncodingLayout layout;

    int bound() const { return layout.k; }
    const Network& network() const { return *layout.net; }

    Term location_active(AutomatonId i, LocationId q, int l) const {
        return layout.vec_bit(layout.location_alias(i, q), l);
    }
    Term var_value(VarId n, int l) const { return layout.var_value(n, l); }
    Term transition_active(AutomatonId i, size_t slot, int l) const {
        return layout.vec_bit(layout.transition_alias(i, slot), l);
    }
};

/// Builds the complete constraint system for one (network, bound) pair.
/// Construction is pure: identical inputs produce byte-identical scripts.
class Encoder {
public:
    Encoder(const Network& net, EncodeOptions opt)
        : net_(net), opt_(opt), lay_(EncodingLayout::build(net, opt.bound)) {
        // Cached vectors reused across constraint groups.
        alias_.resize(lay_.automaton_count());
        for (int i = 0; i < lay_.automaton_count(); ++i)
            for (size_t s = 0; s < lay_.slots[i].size(); ++s)
                alias_[i].push_back(lay_.transition_alias(i, s));
        loc_alias_.resize(lay_.automaton_count());
        for (int i = 0; i < lay_.automaton_count(); ++i)
            for (LocationId q = 0; q < net.automata[i].location_count(); ++q)
                loc_alias_[i].push_back(lay_.location_alias(i, q));

        std::vector<Term> any_declared;
        nonnull_.resize(lay_.automaton_count());
        for (int i = 0; i < lay_.automaton_count(); ++i) {
            std::vector<Term> parts;
            for (size_t s = 0; s < lay_.slots[i].size(); ++s)
                if (!lay_.slots[i][s].is_null) parts.push_back(alias_[i][s]);
            if (!parts.empty()) {
                nonnull_[i] = bv_or(parts);
                any_declared.push_back(*nonnull_[i]);
            }
        }
        if (!any_declared.empty()) fired_ = bv_or(std::move(any_declared));
    }

    const EncodingLayout& layout() const { return lay_; }

    /// Runs every constraint group in a fixed order and returns the script
    /// together with the handles for the property layer.
    std::pair<Script, PropertyHook> encode() {
        declare_all();
        initial_state();
        location_flow();
        transition_code_bounds();
        clock_guards();
        var_guards();
        clock_resets();
        var_assignments();
        invariants();
        frame_conditions();
        synchronization();
        loop_closure();
        liveness();
        edge_policy();
        return {std::move(script_), PropertyHook{lay_}};
    }

    // ---- constraint groups (public so tests can build them in isolation) ----

    void declare_all() {
        const int w = lay_.width();
        for (int i = 0; i < lay_.automaton_count(); ++i) {
            for (int j = 0; j < lay_.tb_counts[i]; ++j)
                script_.declare(tb_name(i, j), Sort::bv(w));
            script_.declare(edge_vec_name(i), Sort::bv(w));
        }
        for (VarId n = 0; n < net_.variable_count(); ++n)
            for (int j = 0; j < lay_.var_widths[n]; ++j)
                script_.declare(vb_name(net_.variables[n].name, j), Sort::bv(w));
        for (ClockId x = 0; x < net_.clock_count(); ++x)
            for (int l = 0; l <= lay_.k + 1; ++l)
                script_.declare(clock_value_name(net_.clock_names[x], l), Sort::real());
        for (int l = 0; l <= lay_.k; ++l)
            script_.declare(delta_value_name(l), Sort::real());
        script_.declare(kLoopName, Sort::bv(w));
    }

    /// Position 0 carries the initial locations, zero clocks, declared
    /// initial variable values, and satisfies the initial invariants.
    void initial_state() {
        script_.comment("initial state");
        for (int i = 0; i < lay_.automaton_count(); ++i)
            script_.assert_term(lay_.vec_bit(loc_alias_[i][0], 0));
        for (ClockId x = 0; x < net_.clock_count(); ++x)
            script_.assert_term(eq(lay_.clock_value(x, 0), real_literal(0)));
        for (VarId n = 0; n < net_.variable_count(); ++n)
            script_.assert_term(eq(lay_.var_value(n, 0),
                                   bv_literal(net_.variables[n].init, lay_.var_widths[n])));
        for (int i = 0; i < lay_.automaton_count(); ++i) {
            const auto& inv = net_.automata[i].invariants.at(0);
            if (!inv.is_true())
                script_.assert_term(lay_.clock_guard_term(
                    0, inv, EncodingLayout::ClockRef::Start, SatMode::Strict));
        }
    }

    /// A transition active at position l puts its destination among the
    /// active-at-l+1 locations: bit-wise implication between the shifted
    /// activity vectors.
    void location_flow() {
        script_.comment("location flow");
        const int k = lay_.k;
        for (int i = 0; i < lay_.automaton_count(); ++i) {
            for (size_t s = 0; s < lay_.slots[i].size(); ++s) {
                Term lhs = slice(alias_[i][s], k, 0);
                Term rhs = slice(loc_alias_[i][lay_.slots[i][s].target], k + 1, 1);
                script_.assert_term(
                    eq(bv_or(bv_not(std::move(lhs)), std::move(rhs)), bv_ones(k + 1)));
            }
        }
    }

    /// The transition number never takes one of the unused codes, so exactly
    /// one alias holds per automaton and position.
    void transition_code_bounds() {
        script_.comment("transition code bounds");
        for (int i = 0; i < lay_.automaton_count(); ++i) {
            const size_t used = lay_.slots[i].size();
            const size_t total = size_t{1} << lay_.tb_counts[i];
            for (size_t code = used; code < total; ++code)
                script_.assert_term(
                    eq(lay_.alias_for_code(i, code), bv_zeros(lay_.width())));
        }
    }

    /// Firing sees the pre-transition clock values at the instant, i.e.
    /// x(l) + delta(l).
    void clock_guards() {
        script_.comment("clock guards");
        for_each_declared([&](int i, size_t s, const Transition& t) {
            if (t.clock_guard.is_true()) return;
            for (int l = 0; l <= lay_.k; ++l)
                script_.assert_term(
                    implies(lay_.vec_bit(alias_[i][s], l),
                            lay_.clock_guard_term(l, t.clock_guard,
                                                  EncodingLayout::ClockRef::Instant,
                                                  SatMode::Strict)));
        });
    }

    void var_guards() {
        script_.comment("variable guards");
        for_each_declared([&](int i, size_t s, const Transition& t) {
            if (t.var_guard.is_true()) return;
            for (int l = 0; l <= lay_.k; ++l)
                script_.assert_term(implies(lay_.vec_bit(alias_[i][s], l),
                                            lay_.var_guard_term(l, t.var_guard)));
        });
    }

    void clock_resets() {
        script_.comment("clock resets");
        for_each_declared([&](int i, size_t s, const Transition& t) {
            for (ClockId x : t.resets)
                for (int l = 0; l <= lay_.k; ++l)
                    script_.assert_term(
                        implies(lay_.vec_bit(alias_[i][s], l),
                                eq(lay_.clock_value(x, l + 1), real_literal(0))));
        });
    }

    /// Assigned value appears at the next position; a range guard keeps the
    /// mathematical value inside the declared range (reject, not wrap), which
    /// also makes the narrow two's-complement equality exact.
    void var_assignments() {
        script_.comment("variable assignments");
        for_each_declared([&](int i, size_t s, const Transition& t) {
            for (const auto& a : t.assignments) {
                const int w = lay_.var_widths.at(a.target);
                const int wide = std::max(w, lay_.exact_expr_width(a.expr));
                if (wide > 62)
                    throw std::invalid_argument(
                        "assignment expression too wide to range-check exactly");
                const auto& decl = net_.variables[a.target];
                for (int l = 0; l <= lay_.k; ++l) {
                    Term value = lay_.expr_term(l, a.expr, w);
                    Term wide_value = lay_.expr_term(l, a.expr, wide);
                    Term in_range =
                        and_(bv_sle(bv_literal(decl.lo, wide), wide_value),
                             bv_sle(wide_value, bv_literal(decl.hi, wide)));
                    script_.assert_term(
                        implies(lay_.vec_bit(alias_[i][s], l),
                                and_(eq(lay_.var_value(a.target, l + 1), value),
                                     std::move(in_range))));
                }
            }
        });
    }

    /// Three families: (a) the active location's invariant holds weakly at
    /// the instant ending every position (time elapse); (b) firing relates
    /// source and destination invariants through the edge bit, strict on the
    /// closed side and weak on the open side; (c) an automaton staying put
    /// while some other automaton fires satisfies its invariant strictly on
    /// both sides of the instant.
    void invariants() {
        script_.comment("invariants: time elapse");
        for (int i = 0; i < lay_.automaton_count(); ++i) {
            for (LocationId q = 0; q < net_.automata[i].location_count(); ++q) {
                const auto& inv = net_.automata[i].invariants[q];
                if (inv.is_true()) continue;
                for (int l = 0; l <= lay_.k; ++l)
                    script_.assert_term(
                        implies(lay_.vec_bit(loc_alias_[i][q], l),
                                lay_.clock_guard_term(l, inv,
                                                      EncodingLayout::ClockRef::Instant,
                                                      SatMode::Weak)));
            }
        }

        script_.comment("invariants: firing edges");
        for_each_declared([&](int i, size_t s, const Transition& t) {
            const auto& src_inv = net_.automata[i].invariants.at(t.source);
            const auto& dst_inv = net_.automata[i].invariants.at(t.target);
            if (src_inv.is_true() && dst_inv.is_true()) return;
            for (int l = 0; l <= lay_.k; ++l) {
                Term right_closed =
                    and_({lay_.clock_guard_term(l, src_inv,
                                                EncodingLayout::ClockRef::Instant,
                                                SatMode::Strict),
                          lay_.clock_guard_term(l + 1, dst_inv,
                                                EncodingLayout::ClockRef::Start,
                                                SatMode::Weak),
                          lay_.edge_bit_is(i, l, true)});
                Term left_closed =
                    and_({lay_.clock_guard_term(l, src_inv,
                                                EncodingLayout::ClockRef::Instant,
                                                SatMode::Weak),
                          lay_.clock_guard_term(l + 1, dst_inv,
                                                EncodingLayout::ClockRef::Start,
                                                SatMode::Strict),
                          lay_.edge_bit_is(i, l, false)});
                script_.assert_term(
                    implies(lay_.vec_bit(alias_[i][s], l),
                            or_(std::move(right_closed), std::move(left_closed))));
            }
        });

        script_.comment("invariants: idle automata at discrete instants");
        if (fired_) {
            for (int i = 0; i < lay_.automaton_count(); ++i) {
                for (LocationId q = 0; q < net_.automata[i].location_count(); ++q) {
                    const auto& inv = net_.automata[i].invariants[q];
                    if (inv.is_true()) continue;
                    const Term& null_alias = alias_[i][q];  // null slots come first
                    for (int l = 0; l <= lay_.k; ++l) {
                        Term cond = and_(lay_.vec_bit(null_alias, l),
                                         lay_.vec_bit(*fired_, l));
                        Term strict_both =
                            and_(lay_.clock_guard_term(
                                     l, inv, EncodingLayout::ClockRef::Instant,
                                     SatMode::Strict),
                                 lay_.clock_guard_term(l + 1, inv,
                                                       EncodingLayout::ClockRef::Start,
                                                       SatMode::Strict));
                        script_.assert_term(
                            implies(std::move(cond), std::move(strict_both)));
                    }
                }
            }
        }
    }

    /// Delays are positive; clocks advance by exactly delta unless reset;
    /// variables keep their value unless some assigning transition fires.
    void frame_conditions() {
        script_.comment("frame conditions");
        for (int l = 0; l <= lay_.k; ++l)
            script_.assert_term(real_gt(lay_.delta(l), real_literal(0)));

        for (ClockId x = 0; x < net_.clock_count(); ++x) {
            std::vector<Term> resetters;
            for_each_declared([&](int i, size_t s, const Transition& t) {
                if (t.resets_clock(x)) resetters.push_back(alias_[i][s]);
            });
            for (int l = 0; l <= lay_.k; ++l) {
                Term progress = eq(lay_.clock_value(x, l + 1), lay_.clock_at_instant(x, l));
                if (resetters.empty()) {
                    script_.assert_term(std::move(progress));
                } else {
                    Term reset_active = lay_.vec_bit(bv_or(resetters), l);
                    Term reset_case = and_(std::move(reset_active),
                                           eq(lay_.clock_value(x, l + 1), real_literal(0)));
                    script_.assert_term(or_(std::move(progress), std::move(reset_case)));
                }
            }
        }

        for (VarId n = 0; n < net_.variable_count(); ++n) {
            std::vector<Term> writers;
            for_each_declared([&](int i, size_t s, const Transition& t) {
                if (t.assigns(n)) writers.push_back(alias_[i][s]);
            });
            for (int l = 0; l <= lay_.k; ++l) {
                Term keep = eq(lay_.var_value(n, l + 1), lay_.var_value(n, l));
                if (writers.empty()) {
                    script_.assert_term(std::move(keep));
                } else {
                    script_.assert_term(
                        or_(std::move(keep), lay_.vec_bit(bv_or(writers), l)));
                }
            }
        }
    }

    /// Channel discipline per position: a one-to-one send happens exactly
    /// when one receive does (and at most one of each); at most one broadcast
    /// sender, receivers only with a sender, and every automaton able to
    /// receive a broadcast does so. Transitions synchronizing on a channel,
    /// and transitions writing a common variable, agree on their edge bits.
    void synchronization() {
        script_.comment("synchronization");
        const int n_aut = lay_.automaton_count();
        for (ChannelId c = 0; c < static_cast<int>(net_.channel_names.size()); ++c) {
            // Per automaton: activity vectors for each sync kind on c.
            std::vector<std::optional<Term>> snd(n_aut), rcv(n_aut), bsnd(n_aut),
                brcv(n_aut), anyc(n_aut);
            for (int i = 0; i < n_aut; ++i) {
                std::vector<Term> sv, rv, bv, av, all;
                for (size_t s = 0; s < lay_.slots[i].size(); ++s) {
                    const auto& slot = lay_.slots[i][s];
                    if (slot.is_null) continue;
                    const auto& t = net_.automata[i].transitions[slot.transition];
                    if (t.sync.is_tau() || t.sync.channel != c) continue;
                    all.push_back(alias_[i][s]);
                    switch (t.sync.kind) {
                        case SyncKind::Send: sv.push_back(alias_[i][s]); break;
                        case SyncKind::Receive: rv.push_back(alias_[i][s]); break;
                        case SyncKind::BroadcastSend: bv.push_back(alias_[i][s]); break;
                        case SyncKind::BroadcastReceive: av.push_back(alias_[i][s]); break;
                    }
                }
                if (!sv.empty()) snd[i] = bv_or(std::move(sv));
                if (!rv.empty()) rcv[i] = bv_or(std::move(rv));
                if (!bv.empty()) bsnd[i] = bv_or(std::move(bv));
                if (!av.empty()) brcv[i] = bv_or(std::move(av));
                if (!all.empty()) anyc[i] = bv_or(std::move(all));
            }

            for (int l = 0; l <= lay_.k; ++l) {
                auto bits_of = [&](const std::vector<std::optional<Term>>& vecs) {
                    std::vector<Term> bits;
                    for (int i = 0; i < n_aut; ++i)
                        if (vecs[i]) bits.push_back(lay_.vec_bit(*vecs[i], l));
                    return bits;
                };
                auto at_most_one = [&](const std::vector<Term>& bits) {
                    for (size_t a = 0; a < bits.size(); ++a)
                        for (size_t b = a + 1; b < bits.size(); ++b)
                            script_.assert_term(not_(and_(bits[a], bits[b])));
                };

                const auto send_bits = bits_of(snd);
                const auto recv_bits = bits_of(rcv);
                if (!send_bits.empty() || !recv_bits.empty()) {
                    at_most_one(send_bits);
                    at_most_one(recv_bits);
                    script_.assert_term(eq(or_(send_bits), or_(recv_bits)));
                }

                const auto bsend_bits = bits_of(bsnd);
                const auto brecv_bits = bits_of(brcv);
                at_most_one(bsend_bits);
                if (!brecv_bits.empty())
                    script_.assert_term(implies(or_(brecv_bits), or_(bsend_bits)));
                // Obligation: an automaton with an enabled receive fires one
                // when some other automaton sends the broadcast.
                for (int j = 0; j < n_aut; ++j) {
                    if (!brcv[j]) continue;
                    std::vector<Term> other_senders;
                    for (int i = 0; i < n_aut; ++i)
                        if (i != j && bsnd[i])
                            other_senders.push_back(lay_.vec_bit(*bsnd[i], l));
                    if (other_senders.empty()) continue;
                    for (size_t s = 0; s < lay_.slots[j].size(); ++s) {
                        const auto& slot = lay_.slots[j][s];
                        if (slot.is_null) continue;
                        const auto& t = net_.automata[j].transitions[slot.transition];
                        if (t.sync.is_tau() || t.sync.channel != c ||
                            t.sync.kind != SyncKind::BroadcastReceive)
                            continue;
                        Term enabled =
                            and_({lay_.vec_bit(loc_alias_[j][t.source], l),
                                  lay_.clock_guard_term(l, t.clock_guard,
                                                        EncodingLayout::ClockRef::Instant,
                                                        SatMode::Strict),
                                  lay_.var_guard_term(l, t.var_guard)});
                        script_.assert_term(
                            implies(and_(or_(other_senders), std::move(enabled)),
                                    lay_.vec_bit(*brcv[j], l)));
                    }
                }

                // Edge agreement between same-channel participants.
                for (int i = 0; i < n_aut; ++i) {
                    for (int j = i + 1; j < n_aut; ++j) {
                        if (!anyc[i] || !anyc[j]) continue;
                        script_.assert_term(
                            implies(and_(lay_.vec_bit(*anyc[i], l),
                                         lay_.vec_bit(*anyc[j], l)),
                                    lay_.edge_bits_equal(i, j, l)));
                    }
                }
            }
        }

        // Edge agreement between simultaneous writers of a shared variable.
        script_.comment("shared-variable edge agreement");
        for (VarId n = 0; n < net_.variable_count(); ++n) {
            struct Writer { int aut; size_t slot; };
            std::vector<Writer> writers;
            for_each_declared([&](int i, size_t s, const Transition& t) {
                if (t.assigns(n)) writers.push_back({i, s});
            });
            for (size_t a = 0; a < writers.size(); ++a) {
                for (size_t b = a + 1; b < writers.size(); ++b) {
                    if (writers[a].aut == writers[b].aut) continue;
                    for (int l = 0; l <= lay_.k; ++l) {
                        Term both = and_(
                            lay_.vec_bit(alias_[writers[a].aut][writers[a].slot], l),
                            lay_.vec_bit(alias_[writers[b].aut][writers[b].slot], l));
                        script_.assert_term(implies(
                            std::move(both),
                            lay_.edge_bits_equal(writers[a].aut, writers[b].aut, l)));
                    }
                }
            }
        }
    }

    /// The loop position sits strictly between 0 and k, and the state at
    /// position k+1 repeats the state at the loop position: transition and
    /// edge bits, variable values and clock values all match, so the
    /// repeated segment is a legal continuation.
    void loop_closure() {
        script_.comment("lasso closure");
        const int w = lay_.width();
        Term loop = lay_.loop_term();
        script_.assert_term(bv_ugt(loop, bv_zeros(w)));
        script_.assert_term(bv_ult(loop, bv_literal(lay_.k, w)));
        for (int p = 1; p <= lay_.k - 1; ++p) {
            std::vector<Term> same;
            for (int i = 0; i < lay_.automaton_count(); ++i) {
                for (int j = 0; j < lay_.tb_counts[i]; ++j) {
                    Term v = lay_.tb(i, j);
                    same.push_back(
                        eq(slice(v, lay_.k + 1, lay_.k + 1), slice(v, p, p)));
                }
                Term e = lay_.edge_vec(i);
                same.push_back(eq(slice(e, lay_.k + 1, lay_.k + 1), slice(e, p, p)));
            }
            for (VarId n = 0; n < net_.variable_count(); ++n)
                same.push_back(eq(lay_.var_value(n, lay_.k + 1), lay_.var_value(n, p)));
            for (ClockId x = 0; x < net_.clock_count(); ++x)
                same.push_back(eq(lay_.clock_value(x, lay_.k + 1), lay_.clock_value(x, p)));
            script_.assert_term(
                implies(eq(loop, bv_literal(p, w)), and_(std::move(same))));
        }
    }

    /// Strong transition liveness: every automaton takes at least one
    /// non-null transition inside the repeated segment [loop, k].
    void liveness() {
        if (opt_.liveness == LivenessMode::None) return;
        script_.comment("strong transition liveness");
        Term loop = lay_.loop_term();
        for (int p = 1; p <= lay_.k - 1; ++p) {
            std::vector<Term> all;
            for (int i = 0; i < lay_.automaton_count(); ++i) {
                if (!nonnull_[i]) {
                    all.push_back(bool_literal(false));
                    continue;
                }
                Term window = slice(*nonnull_[i], lay_.k, p);
                all.push_back(not_(eq(std::move(window), bv_zeros(lay_.k - p + 1))));
            }
            script_.assert_term(
                implies(eq(loop, bv_literal(p, lay_.width())), and_(std::move(all))));
        }
    }

    void edge_policy() {
        if (opt_.edges != EdgePolicy::RightClosed) return;
        script_.comment("all edges right-closed");
        for (int i = 0; i < lay_.automaton_count(); ++i)
            script_.assert_term(eq(lay_.edge_vec(i), bv_ones(lay_.width())));
    }

    Script& script() { return script_; }

private:
    template <typename F>
    void for_each_declared(F&& f) {
        for (int i = 0; i < lay_.automaton_count(); ++i) {
            for (size_t s = 0; s < lay_.slots[i].size(); ++s) {
                const auto& slot = lay_.slots[i][s];
                if (slot.is_null) continue;
                f(i, s, net_.automata[i].transitions[slot.transition]);
            }
        }
    }

    const Network& net_;
    EncodeOptions opt_;
    EncodingLayout lay_;
    Script script_;
    std::vector<std::vector<Term>> alias_;
    std::vector<std::vector<Term>> loc_alias_;
    std::vector<std::optional<Term>> nonnull_;
    std::optional<Term> fired_;
};

/// One-call composition of the full network encoding.
inline std::pair<Script, PropertyHook> encode_network(const Network& net,
                                                      const EncodeOptions& opt) {
    Encoder enc(net, opt);
    return enc.encode();
}

}  // namespace tabmc
