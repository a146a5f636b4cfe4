#pragma once

#include "tabmc/model.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Executable semantics for networks of TA: guard evaluation, weak
// satisfaction, discrete and time configuration changes, synchronization
// enabledness. This is both the parser's validator back-end and the oracle
// that decoded solver traces are replayed against. All functions are pure.

namespace tabmc {

/// Strict is ordinary satisfaction; Weak additionally accepts equality with
/// the constant in every atom (so only < and > atoms are relaxed).
enum class SatMode { Strict, Weak };

struct Violation {
    std::string clause;   // stable machine-readable tag
    std::string message;  // human description

    bool operator==(const Violation&) const = default;
};

namespace detail {

inline void check_clock_id(const std::vector<Rational>& clocks, ClockId c) {
    if (c < 0 || static_cast<size_t>(c) >= clocks.size())
        throw std::out_of_range("unknown clock id " + std::to_string(c));
}

inline void check_var_id(const std::vector<long long>& vars, VarId v) {
    if (v < 0 || static_cast<size_t>(v) >= vars.size())
        throw std::out_of_range("unknown variable id " + std::to_string(v));
}

}  // namespace detail

inline bool eval_clock_atom(const Rational& value, ClockRel rel, long long bound,
                            SatMode mode) {
    const Rational b(bound);
    if (mode == SatMode::Weak && value == b) return true;
    switch (rel) {
        case ClockRel::Lt: return value < b;
        case ClockRel::Gt: return value > b;
        case ClockRel::Le: return value <= b;
        case ClockRel::Ge: return value >= b;
    }
    return false;
}

inline bool eval_clock_constraint(const std::vector<Rational>& clocks,
                                  const ClockConstraint& g, SatMode mode) {
    for (const auto& atom : g.atoms) {
        detail::check_clock_id(clocks, atom.clock);
        if (!eval_clock_atom(clocks[atom.clock], atom.rel, atom.bound, mode))
            return false;
    }
    return true;
}

inline bool eval_var_constraint(const std::vector<long long>& vars,
                                const VarConstraint& g) {
    switch (g.kind) {
        case VarConstraint::Kind::True:
            return true;
        case VarConstraint::Kind::CmpConst:
            detail::check_var_id(vars, g.lhs);
            return g.rel == VarRel::Lt ? vars[g.lhs] < g.rhs_const
                                       : vars[g.lhs] == g.rhs_const;
        case VarConstraint::Kind::CmpVar:
            detail::check_var_id(vars, g.lhs);
            detail::check_var_id(vars, g.rhs_var);
            return g.rel == VarRel::Lt ? vars[g.lhs] < vars[g.rhs_var]
                                       : vars[g.lhs] == vars[g.rhs_var];
        case VarConstraint::Kind::Not:
            return !eval_var_constraint(vars, g.children.at(0));
        case VarConstraint::Kind::And:
            for (const auto& c : g.children)
                if (!eval_var_constraint(vars, c)) return false;
            return true;
    }
    return false;
}

/// Integer value of an expression tree over the pre-state valuation. No
/// truncation happens here; range enforcement is a separate check.
inline long long eval_int_expr(const std::vector<long long>& vars, const IntExpr& e) {
    switch (e.kind) {
        case IntExpr::Kind::Const:
            return e.value;
        case IntExpr::Kind::Var:
            detail::check_var_id(vars, e.var);
            return vars[e.var];
        case IntExpr::Kind::Add:
            return eval_int_expr(vars, e.kids.at(0)) + eval_int_expr(vars, e.kids.at(1));
        case IntExpr::Kind::Sub:
            return eval_int_expr(vars, e.kids.at(0)) - eval_int_expr(vars, e.kids.at(1));
    }
    return 0;
}

/// A transition is enabled when the automaton sits in its source location and
/// both guards hold (strictly) in the given configuration. Used directly for
/// the broadcast-receive obligation.
inline bool transition_enabled(const Network& net, const Configuration& cfg,
                               AutomatonId i, const Transition& t) {
    (void)net;
    return cfg.locations.at(i) == t.source &&
           eval_clock_constraint(cfg.clock_values, t.clock_guard, SatMode::Strict) &&
           eval_var_constraint(cfg.var_values, t.var_guard);
}

/// Result of checking a discrete step: the violation list (empty means the
/// step is accepted) and, on success, which transition was selected for each
/// firing automaton.
struct DiscreteStepResult {
    std::vector<Violation> violations;
    std::vector<std::optional<int>> chosen;  // transition index per automaton

    bool ok() const { return violations.empty(); }
};

namespace detail {

inline std::string loc_name(const Network& net, AutomatonId i, LocationId q) {
    return net.automata[i].name + "." + net.automata[i].location_names.at(q);
}

struct Candidate {
    int transition = -1;
};

}  // namespace detail

/// Checks a time transition: locations and variables unchanged, every clock
/// advanced by exactly delta, every location invariant weakly satisfied
/// after the delay.
inline std::vector<Violation> check_time_step(const Network& net,
                                              const Configuration& cfg,
                                              const Rational& delta,
                                              const Configuration& next) {
    std::vector<Violation> out;
    if (delta <= 0)
        out.push_back({"delay-positive", "delay must be strictly positive, got " +
                                             rational_to_string(delta)});
    if (next.locations != cfg.locations)
        out.push_back({"location-frame", "locations changed during a time step"});
    if (next.var_values != cfg.var_values)
        out.push_back({"var-frame", "variable values changed during a time step"});
    for (size_t x = 0; x < cfg.clock_values.size(); ++x) {
        if (next.clock_values.at(x) != cfg.clock_values[x] + delta) {
            out.push_back({"clock-progress",
                           "clock " + net.clock_names[x] + " did not advance by " +
                               rational_to_string(delta)});
        }
    }
    for (size_t i = 0; i < net.automata.size(); ++i) {
        const auto& inv = net.automata[i].invariants.at(cfg.locations.at(i));
        if (!eval_clock_constraint(next.clock_values, inv, SatMode::Weak)) {
            out.push_back({"invariant-delay",
                           "invariant of " + detail::loc_name(net, static_cast<int>(i),
                                                              cfg.locations[i]) +
                               " not weakly satisfied after the delay"});
        }
    }
    return out;
}

/// Checks a discrete step from `cfg` (the valuation at the firing instant)
/// to `next`. For each firing automaton there must exist a transition that
/// matches the action and locations and satisfies guards, resets,
/// assignments, the edge-conditioned invariant obligations, and the range
/// policy; idle automata keep their location and satisfy their invariant
/// strictly on both sides; unwritten clocks and variables are unchanged;
/// synchronization must be well formed; co-writers of a shared variable and
/// same-channel sync participants must agree on their edges.
inline DiscreteStepResult check_discrete_step(const Network& net,
                                              const Configuration& cfg,
                                              const StepLabel& label,
                                              const Configuration& next) {
    DiscreteStepResult res;
    res.chosen.assign(net.automata.size(), std::nullopt);
    auto fail = [&](std::string clause, std::string msg) {
        res.violations.push_back({std::move(clause), std::move(msg)});
    };

    if (label.entries.size() != net.automata.size()) {
        fail("step-shape", "step label length differs from automaton count");
        return res;
    }
    if (label.all_idle()) {
        fail("degenerate-step", "a discrete step needs at least one firing automaton");
        return res;
    }

    // Per-automaton clauses; collect the locally valid candidates for firing
    // automata.
    std::vector<std::vector<int>> candidates(net.automata.size());
    for (size_t i = 0; i < net.automata.size(); ++i) {
        const auto& aut = net.automata[i];
        const auto& entry = label.entries[i];
        const LocationId here = cfg.locations.at(i);
        const LocationId there = next.locations.at(i);
        if (!entry.fires) {
            if (there != here)
                fail("location-frame",
                     aut.name + " changed location without firing");
            const auto& inv = aut.invariants.at(here);
            if (!eval_clock_constraint(cfg.clock_values, inv, SatMode::Strict))
                fail("invariant-idle",
                     "invariant of " + detail::loc_name(net, i, here) +
                         " violated at the instant for the idle automaton");
            if (!eval_clock_constraint(next.clock_values, inv, SatMode::Strict))
                fail("invariant-idle",
                     "invariant of " + detail::loc_name(net, i, here) +
                         " violated after the instant for the idle automaton");
            continue;
        }

        std::vector<std::string> why;  // failures of structurally matching transitions
        for (size_t ti = 0; ti < aut.transitions.size(); ++ti) {
            const auto& t = aut.transitions[ti];
            if (t.source != here || t.target != there || !(t.sync == entry.action))
                continue;
            bool ok = true;
            auto reject = [&](const std::string& clause, const std::string& msg) {
                why.push_back(t.name + ": [" + clause + "] " + msg);
                ok = false;
            };
            if (!eval_clock_constraint(cfg.clock_values, t.clock_guard, SatMode::Strict))
                reject("guard", "clock guard fails at the firing instant");
            if (!eval_var_constraint(cfg.var_values, t.var_guard))
                reject("guard", "variable guard fails");
            for (ClockId x : t.resets) {
                if (next.clock_values.at(x) != 0)
                    reject("reset", "clock " + net.clock_names[x] + " not 0 after reset");
            }
            for (const auto& a : t.assignments) {
                const long long v = eval_int_expr(cfg.var_values, a.expr);
                if (next.var_values.at(a.target) != v)
                    reject("assignment",
                           net.variables[a.target].name + " expected " + std::to_string(v));
                const auto& decl = net.variables.at(a.target);
                if (v < decl.lo || v > decl.hi)
                    reject("range", net.variables[a.target].name + " := " +
                                        std::to_string(v) + " leaves [" +
                                        std::to_string(decl.lo) + ", " +
                                        std::to_string(decl.hi) + "]");
            }
            const auto& src_inv = aut.invariants.at(t.source);
            const auto& dst_inv = aut.invariants.at(t.target);
            if (entry.edge == Edge::LeftClosed) {
                // Old interval open at the instant: weak at the source, strict
                // at the destination.
                if (!eval_clock_constraint(cfg.clock_values, src_inv, SatMode::Weak))
                    reject("invariant-edge", "source invariant not weakly satisfied");
                if (!eval_clock_constraint(next.clock_values, dst_inv, SatMode::Strict))
                    reject("invariant-edge", "destination invariant not satisfied");
            } else {
                if (!eval_clock_constraint(cfg.clock_values, src_inv, SatMode::Strict))
                    reject("invariant-edge", "source invariant not satisfied");
                if (!eval_clock_constraint(next.clock_values, dst_inv, SatMode::Weak))
                    reject("invariant-edge",
                           "destination invariant not weakly satisfied");
            }
            if (ok) candidates[i].push_back(static_cast<int>(ti));
        }
        if (candidates[i].empty()) {
            std::ostringstream msg;
            msg << aut.name << " has no transition "
                << detail::loc_name(net, i, here) << " -> "
                << detail::loc_name(net, i, there) << " matching the step";
            if (!why.empty()) {
                msg << " (";
                for (size_t w = 0; w < why.size(); ++w)
                    msg << (w ? "; " : "") << why[w];
                msg << ")";
            }
            fail("no-matching-transition", msg.str());
        }
    }

    // Synchronization well-formedness depends only on the step's actions.
    for (ChannelId c = 0; c < static_cast<int>(net.channel_names.size()); ++c) {
        std::vector<int> senders, receivers, bsenders, breceivers;
        for (size_t i = 0; i < label.entries.size(); ++i) {
            const auto& e = label.entries[i];
            if (!e.fires || e.action.channel != c) continue;
            switch (e.action.kind) {
                case SyncKind::Send: senders.push_back(i); break;
                case SyncKind::Receive: receivers.push_back(i); break;
                case SyncKind::BroadcastSend: bsenders.push_back(i); break;
                case SyncKind::BroadcastReceive: breceivers.push_back(i); break;
            }
        }
        const std::string& cn = net.channel_names[c];
        if (senders.size() > 1)
            fail("sync-pairing", "channel " + cn + " has several senders in one step");
        if (receivers.size() > 1)
            fail("sync-pairing", "channel " + cn + " has several receivers in one step");
        if (senders.size() != receivers.size())
            fail("sync-pairing", "channel " + cn + " send/receive not paired");
        if (bsenders.size() > 1)
            fail("sync-pairing", "channel " + cn + " has several broadcast senders");
        if (bsenders.empty() && !breceivers.empty())
            fail("sync-broadcast-orphan",
                 "broadcast receive on " + cn + " without a sender");
        if (!bsenders.empty()) {
            for (size_t j = 0; j < net.automata.size(); ++j) {
                const int ji = static_cast<int>(j);
                if (std::find(bsenders.begin(), bsenders.end(), ji) != bsenders.end())
                    continue;
                if (std::find(breceivers.begin(), breceivers.end(), ji) !=
                    breceivers.end())
                    continue;
                bool able = false;
                for (const auto& t : net.automata[j].transitions) {
                    if (t.sync.channel == c && t.sync.kind == SyncKind::BroadcastReceive &&
                        transition_enabled(net, cfg, ji, t)) {
                        able = true;
                        break;
                    }
                }
                if (able)
                    fail("sync-broadcast-obligation",
                         net.automata[j].name + " is able to receive broadcast " + cn +
                             " but stays idle");
            }
        }
        // Same-channel participants observe one instant: their edges agree.
        std::vector<int> participants = senders;
        participants.insert(participants.end(), receivers.begin(), receivers.end());
        participants.insert(participants.end(), bsenders.begin(), bsenders.end());
        participants.insert(participants.end(), breceivers.begin(), breceivers.end());
        for (size_t a = 0; a + 1 < participants.size(); ++a) {
            if (label.entries[participants[a]].edge !=
                label.entries[participants[a + 1]].edge) {
                fail("edge-consistency",
                     "transitions synchronizing on " + cn + " disagree on the edge");
                break;
            }
        }
    }

    if (!res.violations.empty()) return res;

    // Joint clauses depend on which candidate fires per automaton: the frame
    // conditions and the edge agreement between co-writers of a variable.
    // Candidate sets are small; search the product for one accepted combo.
    std::vector<size_t> firing;
    for (size_t i = 0; i < candidates.size(); ++i)
        if (label.entries[i].fires) firing.push_back(i);

    std::vector<Violation> combo_fail;
    std::vector<int> pick(firing.size(), 0);
    bool found = false;
    while (true) {
        std::vector<const Transition*> chosen(net.automata.size(), nullptr);
        for (size_t f = 0; f < firing.size(); ++f)
            chosen[firing[f]] = &net.automata[firing[f]]
                                     .transitions[candidates[firing[f]][pick[f]]];
        std::vector<Violation> fails;
        for (ClockId x = 0; x < net.clock_count(); ++x) {
            bool written = false;
            for (const auto* t : chosen)
                if (t && t->resets_clock(x)) written = true;
            if (!written && next.clock_values.at(x) != cfg.clock_values.at(x))
                fails.push_back({"clock-frame", "clock " + net.clock_names[x] +
                                                    " changed without a reset"});
        }
        for (VarId n = 0; n < net.variable_count(); ++n) {
            bool written = false;
            for (const auto* t : chosen)
                if (t && t->assigns(n)) written = true;
            if (!written && next.var_values.at(n) != cfg.var_values.at(n))
                fails.push_back({"var-frame", "variable " + net.variables[n].name +
                                                  " changed without an assignment"});
        }
        for (size_t a = 0; a < firing.size(); ++a) {
            for (size_t b = a + 1; b < firing.size(); ++b) {
                const auto* ta = chosen[firing[a]];
                const auto* tb = chosen[firing[b]];
                bool share = false;
                for (const auto& asg : ta->assignments)
                    if (tb->assigns(asg.target)) share = true;
                if (share && label.entries[firing[a]].edge != label.entries[firing[b]].edge)
                    fails.push_back(
                        {"edge-consistency",
                         net.automata[firing[a]].name + " and " +
                             net.automata[firing[b]].name +
                             " write a common variable with different edges"});
            }
        }
        if (fails.empty()) {
            found = true;
            for (size_t f = 0; f < firing.size(); ++f)
                res.chosen[firing[f]] = candidates[firing[f]][pick[f]];
            break;
        }
        if (combo_fail.empty()) combo_fail = fails;
        // next combination
        size_t f = 0;
        for (; f < firing.size(); ++f) {
            if (++pick[f] < static_cast<int>(candidates[firing[f]].size())) break;
            pick[f] = 0;
        }
        if (f == firing.size()) break;
    }
    if (!found)
        res.violations.insert(res.violations.end(), combo_fail.begin(), combo_fail.end());
    return res;
}

}  // namespace tabmc
