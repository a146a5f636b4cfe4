#pragma once

#include "tabmc/rational.hpp"

#include <optional>
#include <string>
#include <vector>

// Static model types for networks of timed automata with bounded integer
// variables and channel synchronization, plus the dynamic snapshot types
// (Configuration, StepLabel) used by the executable semantics.

namespace tabmc {

// Dense indices. Clocks, variables, channels and labels are network-global;
// locations and transitions are automaton-local. Location 0 is always the
// initial location of its automaton.
using ClockId = int;
using VarId = int;
using ChannelId = int;
using LabelId = int;
using LocationId = int;
using AutomatonId = int;

enum class ClockRel { Lt, Gt, Le, Ge };

inline const char* clock_rel_text(ClockRel r) {
    switch (r) {
        case ClockRel::Lt: return "<";
        case ClockRel::Gt: return ">";
        case ClockRel::Le: return "<=";
        case ClockRel::Ge: return ">=";
    }
    return "?";
}

/// One atom `x ~ c` of a clock constraint; c is a natural number.
struct ClockAtom {
    ClockId clock = -1;
    ClockRel rel = ClockRel::Lt;
    long long bound = 0;

    bool operator==(const ClockAtom&) const = default;
};

/// Conjunction of clock atoms. Empty conjunction is true. The grammar has
/// no disjunction, negation, or equality atoms.
struct ClockConstraint {
    std::vector<ClockAtom> atoms;

    bool is_true() const { return atoms.empty(); }
    bool operator==(const ClockConstraint&) const = default;
};

enum class VarRel { Lt, Eq };

/// Variable constraint tree: atoms `n ~ c` and `n ~ n'` with ~ in {<, =},
/// closed under negation and conjunction.
struct VarConstraint {
    enum class Kind { True, CmpConst, CmpVar, Not, And };

    Kind kind = Kind::True;
    VarRel rel = VarRel::Eq;   // CmpConst / CmpVar
    VarId lhs = -1;            // CmpConst / CmpVar
    VarId rhs_var = -1;        // CmpVar
    long long rhs_const = 0;   // CmpConst
    std::vector<VarConstraint> children;  // Not: 1, And: >= 2

    bool is_true() const { return kind == Kind::True; }
    bool operator==(const VarConstraint&) const = default;

    static VarConstraint truth() { return VarConstraint{}; }
    static VarConstraint cmp_const(VarId v, VarRel r, long long c) {
        VarConstraint g;
        g.kind = Kind::CmpConst;
        g.lhs = v;
        g.rel = r;
        g.rhs_const = c;
        return g;
    }
    static VarConstraint cmp_var(VarId v, VarRel r, VarId w) {
        VarConstraint g;
        g.kind = Kind::CmpVar;
        g.lhs = v;
        g.rel = r;
        g.rhs_var = w;
        return g;
    }
    static VarConstraint negate(VarConstraint inner) {
        VarConstraint g;
        g.kind = Kind::Not;
        g.children.push_back(std::move(inner));
        return g;
    }
    static VarConstraint conj(std::vector<VarConstraint> parts) {
        if (parts.empty()) return truth();
        if (parts.size() == 1) return std::move(parts.front());
        VarConstraint g;
        g.kind = Kind::And;
        g.children = std::move(parts);
        return g;
    }
};

/// Integer expression tree: exp + exp | exp - exp | var | const.
struct IntExpr {
    enum class Kind { Const, Var, Add, Sub };

    Kind kind = Kind::Const;
    long long value = 0;  // Const
    VarId var = -1;       // Var
    std::vector<IntExpr> kids;  // Add/Sub: exactly 2

    bool operator==(const IntExpr&) const = default;

    static IntExpr constant(long long c) {
        IntExpr e;
        e.kind = Kind::Const;
        e.value = c;
        return e;
    }
    static IntExpr variable(VarId v) {
        IntExpr e;
        e.kind = Kind::Var;
        e.var = v;
        return e;
    }
    static IntExpr add(IntExpr a, IntExpr b) {
        IntExpr e;
        e.kind = Kind::Add;
        e.kids = {std::move(a), std::move(b)};
        return e;
    }
    static IntExpr sub(IntExpr a, IntExpr b) {
        IntExpr e;
        e.kind = Kind::Sub;
        e.kids = {std::move(a), std::move(b)};
        return e;
    }
};

/// Assignment `n := exp` taken when a transition fires.
struct VarAssignment {
    VarId target = -1;
    IntExpr expr;

    bool operator==(const VarAssignment&) const = default;
};

enum class SyncKind {
    Send,              // c!
    Receive,           // c?
    BroadcastSend,     // c#
    BroadcastReceive,  // c@
};

inline const char* sync_kind_text(SyncKind k) {
    switch (k) {
        case SyncKind::Send: return "!";
        case SyncKind::Receive: return "?";
        case SyncKind::BroadcastSend: return "#";
        case SyncKind::BroadcastReceive: return "@";
    }
    return "?";
}

/// Either the null event or a (channel, kind) pair.
struct SyncLabel {
    ChannelId channel = -1;  // -1 encodes the null event
    SyncKind kind = SyncKind::Send;

    bool is_tau() const { return channel < 0; }
    bool operator==(const SyncLabel&) const = default;

    static SyncLabel tau() { return SyncLabel{}; }
    static SyncLabel on(ChannelId c, SyncKind k) { return SyncLabel{c, k}; }
};

struct Transition {
    std::string name;
    LocationId source = 0;
    LocationId target = 0;
    SyncLabel sync = SyncLabel::tau();
    ClockConstraint clock_guard;
    VarConstraint var_guard;
    std::vector<ClockId> resets;            // sorted, unique
    std::vector<VarAssignment> assignments;  // at most one per target variable

    bool operator==(const Transition&) const = default;

    bool assigns(VarId v) const {
        for (const auto& a : assignments)
            if (a.target == v) return true;
        return false;
    }
    bool resets_clock(ClockId c) const {
        for (ClockId r : resets)
            if (r == c) return true;
        return false;
    }
};

struct Automaton {
    std::string name;
    std::vector<std::string> location_names;        // index = LocationId, 0 = initial
    std::vector<ClockConstraint> invariants;        // one per location (maybe true)
    std::vector<std::vector<LabelId>> labels;       // per location, sorted
    std::vector<Transition> transitions;

    bool operator==(const Automaton&) const = default;

    int location_count() const { return static_cast<int>(location_names.size()); }
    std::optional<LocationId> find_location(const std::string& n) const {
        for (size_t i = 0; i < location_names.size(); ++i)
            if (location_names[i] == n) return static_cast<LocationId>(i);
        return std::nullopt;
    }
};

/// Bounded integer variable: declared range and initial value.
struct VariableDecl {
    std::string name;
    long long lo = 0;
    long long hi = 0;
    long long init = 0;

    bool operator==(const VariableDecl&) const = default;
};

/// A network of timed automata sharing clocks, variables and channels.
struct Network {
    std::vector<std::string> clock_names;
    std::vector<VariableDecl> variables;
    std::vector<std::string> channel_names;
    std::vector<std::string> label_names;
    std::vector<Automaton> automata;

    bool operator==(const Network&) const = default;

    int automaton_count() const { return static_cast<int>(automata.size()); }
    int clock_count() const { return static_cast<int>(clock_names.size()); }
    int variable_count() const { return static_cast<int>(variables.size()); }

    std::optional<AutomatonId> find_automaton(const std::string& n) const {
        for (size_t i = 0; i < automata.size(); ++i)
            if (automata[i].name == n) return static_cast<AutomatonId>(i);
        return std::nullopt;
    }
    std::optional<ClockId> find_clock(const std::string& n) const {
        for (size_t i = 0; i < clock_names.size(); ++i)
            if (clock_names[i] == n) return static_cast<ClockId>(i);
        return std::nullopt;
    }
    std::optional<VarId> find_variable(const std::string& n) const {
        for (size_t i = 0; i < variables.size(); ++i)
            if (variables[i].name == n) return static_cast<VarId>(i);
        return std::nullopt;
    }
    std::optional<ChannelId> find_channel(const std::string& n) const {
        for (size_t i = 0; i < channel_names.size(); ++i)
            if (channel_names[i] == n) return static_cast<ChannelId>(i);
        return std::nullopt;
    }
    std::optional<LabelId> find_label(const std::string& n) const {
        for (size_t i = 0; i < label_names.size(); ++i)
            if (label_names[i] == n) return static_cast<LabelId>(i);
        return std::nullopt;
    }
};

/// Dynamic snapshot: one location per automaton, total valuations for all
/// declared variables and clocks. Clock values are exact rationals.
struct Configuration {
    std::vector<LocationId> locations;
    std::vector<long long> var_values;
    std::vector<Rational> clock_values;

    bool operator==(const Configuration&) const = default;
};

inline Configuration initial_configuration(const Network& net) {
    Configuration cfg;
    cfg.locations.assign(net.automata.size(), 0);
    for (const auto& v : net.variables) cfg.var_values.push_back(v.init);
    cfg.clock_values.assign(net.clock_names.size(), Rational(0));
    return cfg;
}

/// Whether the interval that ends at a firing instant is right-closed
/// ("](", the old configuration holds at the instant) or left-closed
/// (")[", the new configuration holds at the instant).
enum class Edge { RightClosed, LeftClosed };

inline const char* edge_text(Edge e) {
    return e == Edge::RightClosed ? "](" : ")[";
}

/// Per-automaton entry of a discrete step: either "does not fire" or an
/// (action, edge) pair.
struct StepEntry {
    bool fires = false;
    SyncLabel action = SyncLabel::tau();
    Edge edge = Edge::RightClosed;

    bool operator==(const StepEntry&) const = default;

    static StepEntry idle() { return StepEntry{}; }
    static StepEntry firing(SyncLabel a, Edge e) { return StepEntry{true, a, e}; }
};

/// Discrete-step label: one entry per automaton in network order.
struct StepLabel {
    std::vector<StepEntry> entries;

    bool operator==(const StepLabel&) const = default;

    bool all_idle() const {
        for (const auto& e : entries)
            if (e.fires) return false;
        return true;
    }
};

/// Minimal two's-complement width able to represent every value of [lo, hi].
inline int var_bit_width(long long lo, long long hi) {
    for (int w = 1; w <= 62; ++w) {
        const long long min = -(1LL << (w - 1));
        const long long max = (1LL << (w - 1)) - 1;
        if (lo >= min && hi <= max) return w;
    }
    throw std::invalid_argument("variable range too wide for 62-bit encoding");
}

inline int var_bit_width(const VariableDecl& v) { return var_bit_width(v.lo, v.hi); }

/// Minimal two's-complement width of a single integer constant.
inline int const_bit_width(long long c) { return var_bit_width(c, c); }

}  // namespace tabmc
