#pragma once

#include "tabmc/encoder.hpp"
#include "tabmc/model.hpp"
#include "tabmc/semantics.hpp"
#include "tabmc/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Decoding of solver models into concrete lasso traces, independent
// re-validation of those traces against the executable semantics, and the
// projection onto piecewise-constant signals.

namespace tabmc {

/// Concrete lasso-shaped run: k+2 configurations, one delay and one
/// transition choice per automaton for positions 0..k, and the loop
/// position. The configuration at k+1 equals the one at the loop position.
struct LassoTrace {
    int k = 0;
    int loop = 0;
    std::vector<Configuration> configs;           // size k+2
    std::vector<Rational> deltas;                 // size k+1
    std::vector<std::vector<int>> slot_choice;    // [l][automaton] -> slot
    std::vector<std::vector<Edge>> edges;         // [l][automaton]

    /// Start time of position l (the instant the interval begins).
    Rational start_time(int l) const {
        Rational t(0);
        for (int j = 0; j < l && j < static_cast<int>(deltas.size()); ++j)
            t += deltas[j];
        return t;
    }
    Rational total_time() const { return start_time(k + 1); }
};

/// Reconstructs the trace from a sat model by the reserved name scheme. A
/// transition number outside the automaton's range indicates an encoder bug
/// and raises immediately.
inline LassoTrace decode_trace(const SolverModel& model, const Network& net, int k) {
    const EncodingLayout lay = EncodingLayout::build(net, k);
    LassoTrace tr;
    tr.k = k;

    const BvValue loop_bits = std::get<BvValue>(model.at(kLoopName));
    const BigInt loop_value = loop_bits.to_unsigned();
    if (loop_value <= 0 || loop_value >= k)
        throw std::runtime_error("decoded loop position " + loop_value.str() +
                                 " outside (0, " + std::to_string(k) + ")");
    tr.loop = static_cast<int>(loop_value);

    const int n_aut = lay.automaton_count();
    std::vector<std::vector<size_t>> code(k + 2, std::vector<size_t>(n_aut, 0));
    for (int i = 0; i < n_aut; ++i) {
        std::vector<BvValue> tb_bits;
        for (int j = 0; j < lay.tb_counts[i]; ++j)
            tb_bits.push_back(std::get<BvValue>(model.at(tb_name(i, j))));
        for (int l = 0; l <= k + 1; ++l) {
            size_t c = 0;
            for (int j = 0; j < lay.tb_counts[i]; ++j)
                if (tb_bits[j].bits.at(l)) c |= size_t{1} << j;
            if (c >= lay.slots[i].size())
                throw std::runtime_error(
                    "decoded transition number " + std::to_string(c) + " of " +
                    net.automata[i].name + " at position " + std::to_string(l) +
                    " exceeds the transition count (encoder bug)");
            code[l][i] = c;
        }
    }

    std::vector<BvValue> edge_bits;
    for (int i = 0; i < n_aut; ++i)
        edge_bits.push_back(std::get<BvValue>(model.at(edge_vec_name(i))));

    for (int l = 0; l <= k + 1; ++l) {
        Configuration cfg;
        for (int i = 0; i < n_aut; ++i)
            cfg.locations.push_back(lay.slots[i][code[l][i]].source);
        for (VarId n = 0; n < net.variable_count(); ++n) {
            const int w = lay.var_widths[n];
            BvValue value;
            value.width = w;
            for (int j = 0; j < w; ++j) {
                const BvValue vb_bits =
                    std::get<BvValue>(model.at(vb_name(net.variables[n].name, j)));
                value.bits.push_back(vb_bits.bits.at(l));
            }
            cfg.var_values.push_back(static_cast<long long>(value.to_signed()));
        }
        for (ClockId x = 0; x < net.clock_count(); ++x)
            cfg.clock_values.push_back(
                std::get<Rational>(model.at(clock_value_name(net.clock_names[x], l))));
        tr.configs.push_back(std::move(cfg));
    }

    for (int l = 0; l <= k; ++l) {
        tr.deltas.push_back(std::get<Rational>(model.at(delta_value_name(l))));
        std::vector<int> slots_l;
        std::vector<Edge> edges_l;
        for (int i = 0; i < n_aut; ++i) {
            slots_l.push_back(static_cast<int>(code[l][i]));
            edges_l.push_back(edge_bits[i].bits.at(l) ? Edge::RightClosed
                                                      : Edge::LeftClosed);
        }
        tr.slot_choice.push_back(std::move(slots_l));
        tr.edges.push_back(std::move(edges_l));
    }
    return tr;
}

/// Builds the step label decoded at position l (idle entries for null
/// transitions).
inline StepLabel step_label_at(const LassoTrace& tr, const Network& net,
                               const EncodingLayout& lay, int l) {
    StepLabel label;
    for (size_t i = 0; i < net.automata.size(); ++i) {
        const auto& slot = lay.slots[i][tr.slot_choice[l][i]];
        if (slot.is_null) {
            label.entries.push_back(StepEntry::idle());
        } else {
            const auto& t = net.automata[i].transitions[slot.transition];
            label.entries.push_back(StepEntry::firing(t.sync, tr.edges[l][i]));
        }
    }
    return label;
}

/// Replays the whole trace against the executable semantics: initial
/// conditions, alternating time and discrete steps (all-idle positions are
/// pure delays), and the loop wrap back to the loop position. Any violation
/// points at an encoder or decoder bug.
inline std::vector<Violation> validate_trace(const LassoTrace& tr, const Network& net) {
    std::vector<Violation> out;
    auto fail = [&](int pos, const std::string& clause, const std::string& msg) {
        out.push_back({clause, "position " + std::to_string(pos) + ": " + msg});
    };

    const int k = tr.k;
    if (static_cast<int>(tr.configs.size()) != k + 2 ||
        static_cast<int>(tr.deltas.size()) != k + 1 ||
        static_cast<int>(tr.slot_choice.size()) != k + 1) {
        out.push_back({"trace-shape", "trace arrays do not match the bound"});
        return out;
    }
    if (tr.loop <= 0 || tr.loop >= k)
        out.push_back({"loop-range", "loop position " + std::to_string(tr.loop) +
                                         " outside (0, k)"});

    EncodingLayout lay = EncodingLayout::build(net, k);

    // Start of the run: initial locations, zero clocks, declared variable
    // values, invariants satisfied.
    const Configuration& c0 = tr.configs[0];
    for (size_t i = 0; i < net.automata.size(); ++i)
        if (c0.locations.at(i) != 0)
            fail(0, "init", net.automata[i].name + " does not start in its initial location");
    for (ClockId x = 0; x < net.clock_count(); ++x)
        if (c0.clock_values.at(x) != 0)
            fail(0, "init", "clock " + net.clock_names[x] + " does not start at 0");
    for (VarId n = 0; n < net.variable_count(); ++n)
        if (c0.var_values.at(n) != net.variables[n].init)
            fail(0, "init", "variable " + net.variables[n].name +
                                " does not start at its declared value");
    for (size_t i = 0; i < net.automata.size(); ++i) {
        const auto& inv = net.automata[i].invariants.at(c0.locations.at(i));
        if (!eval_clock_constraint(c0.clock_values, inv, SatMode::Strict))
            fail(0, "init", "initial invariant of " + net.automata[i].name + " violated");
    }

    for (int l = 0; l <= k; ++l) {
        const Configuration& here = tr.configs[l];
        const Configuration& next = tr.configs[l + 1];

        Configuration mid = here;
        for (auto& cv : mid.clock_values) cv += tr.deltas[l];
        for (const auto& v : check_time_step(net, here, tr.deltas[l], mid))
            fail(l, v.clause, v.message);

        StepLabel label = step_label_at(tr, net, lay, l);
        if (label.all_idle()) {
            if (!(next == mid))
                fail(l, "pure-delay",
                     "no automaton fires but the next configuration is not the "
                     "delayed one");
        } else {
            const auto step = check_discrete_step(net, mid, label, next);
            for (const auto& v : step.violations) fail(l, v.clause, v.message);
        }
    }

    if (!(tr.configs[k + 1] == tr.configs[tr.loop]))
        fail(k + 1, "loop-wrap",
             "configuration at k+1 differs from the one at the loop position");

    // Non-Zeno by construction: each delay is positive, checked above, and
    // the repeated segment spans at least one delay.
    return out;
}

// ---- signal projection ---------------------------------------------------------

/// Observable value of the signal: the true propositions and the variable
/// valuation (clock values are not part of the signal).
struct SignalValue {
    std::vector<LabelId> labels;  // sorted
    std::vector<long long> vars;

    bool operator==(const SignalValue&) const = default;
};

struct SignalInterval {
    Rational start, end;
    bool closed_start = true, closed_end = false;
    SignalValue value;
};

/// Piecewise-constant signal over [0, total) plus the loop entry time; the
/// suffix from loop_start repeats forever.
struct Signal {
    std::vector<SignalInterval> intervals;
    Rational loop_start;
    Rational total;
};

namespace trace_detail {

inline SignalValue observable(const Network& net, const Configuration& cfg) {
    SignalValue v;
    std::set<LabelId> labels;
    for (size_t i = 0; i < net.automata.size(); ++i)
        for (LabelId lab : net.automata[i].labels.at(cfg.locations.at(i)))
            labels.insert(lab);
    v.labels.assign(labels.begin(), labels.end());
    v.vars = cfg.var_values;
    return v;
}

/// Value at a firing instant: per automaton, a right-closed edge (and idleness)
/// contributes the old location's labels, a left-closed edge the new ones; a
/// variable takes its new value exactly when some writer fires left-closed.
inline SignalValue instant_value(const Network& net, const EncodingLayout& lay,
                                 const LassoTrace& tr, int l) {
    SignalValue v;
    const Configuration& before = tr.configs[l];
    const Configuration& after = tr.configs[l + 1];

    std::set<LabelId> labels;
    for (size_t i = 0; i < net.automata.size(); ++i) {
        const auto& slot = lay.slots[i][tr.slot_choice[l][i]];
        const bool left_closed = !slot.is_null && tr.edges[l][i] == Edge::LeftClosed;
        const LocationId q = left_closed ? after.locations.at(i) : before.locations.at(i);
        for (LabelId lab : net.automata[i].labels.at(q)) labels.insert(lab);
    }
    v.labels.assign(labels.begin(), labels.end());

    for (VarId n = 0; n < net.variable_count(); ++n) {
        bool new_value = false, old_value = false;
        for (size_t i = 0; i < net.automata.size(); ++i) {
            const auto& slot = lay.slots[i][tr.slot_choice[l][i]];
            if (slot.is_null) continue;
            const auto& t = net.automata[i].transitions[slot.transition];
            if (!t.assigns(n)) continue;
            if (tr.edges[l][i] == Edge::LeftClosed) new_value = true;
            else old_value = true;
        }
        if (new_value && old_value)
            throw std::logic_error(
                "writers of one variable fire with different edges in a validated "
                "trace");
        v.vars.push_back(new_value ? after.var_values.at(n) : before.var_values.at(n));
    }
    return v;
}

}  // namespace trace_detail

/// Projects a validated trace onto its signal. All-idle positions extend the
/// running interval; at each firing instant the observed value follows the
/// edge flags, producing complementary closedness on the two sides (or a
/// point interval when the instant matches neither neighbour).
inline Signal project_signal(const LassoTrace& tr, const Network& net) {
    const EncodingLayout lay = EncodingLayout::build(net, tr.k);
    Signal sig;
    sig.loop_start = tr.start_time(tr.loop);
    sig.total = tr.total_time();

    SignalInterval cur;
    cur.start = Rational(0);
    cur.closed_start = true;
    cur.value = trace_detail::observable(net, tr.configs[0]);

    for (int l = 0; l <= tr.k; ++l) {
        StepLabel label = step_label_at(tr, net, lay, l);
        if (label.all_idle()) continue;  // the interval keeps running

        const Rational t = tr.start_time(l + 1);
        const SignalValue inst = trace_detail::instant_value(net, lay, tr, l);
        const SignalValue next = trace_detail::observable(net, tr.configs[l + 1]);
        if (inst == cur.value && next == cur.value) continue;  // nothing observable

        if (inst == cur.value) {
            cur.end = t;
            cur.closed_end = true;
            sig.intervals.push_back(cur);
            cur = SignalInterval{t, {}, false, false, next};
        } else if (inst == next) {
            cur.end = t;
            cur.closed_end = false;
            sig.intervals.push_back(cur);
            cur = SignalInterval{t, {}, true, false, next};
        } else {
            cur.end = t;
            cur.closed_end = false;
            sig.intervals.push_back(cur);
            sig.intervals.push_back(SignalInterval{t, t, true, true, inst});
            cur = SignalInterval{t, {}, false, false, next};
        }
    }
    cur.end = sig.total;
    cur.closed_end = false;
    sig.intervals.push_back(cur);
    return sig;
}

// ---- rendering -----------------------------------------------------------------

namespace trace_detail {

inline std::string pad(const std::string& s, size_t w) {
    return s + std::string(s.size() < w ? w - s.size() : 1, ' ');
}

}  // namespace trace_detail

/// Human-readable table, one column per position: per-automaton location and
/// transition rows, an edge row, the variables, clocks and delays.
inline std::string render_trace_table(const LassoTrace& tr, const Network& net) {
    const EncodingLayout lay = EncodingLayout::build(net, tr.k);
    const int cols = tr.k + 2;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> names;

    auto add_row = [&](const std::string& name) -> std::vector<std::string>& {
        names.push_back(name);
        rows.emplace_back(cols);
        return rows.back();
    };

    auto& pos_row = add_row("pos");
    for (int l = 0; l < cols; ++l) {
        pos_row[l] = std::to_string(l);
        if (l == tr.loop) pos_row[l] += "*";  // loop entry
    }
    auto& time_row = add_row("time");
    for (int l = 0; l < cols; ++l) time_row[l] = rational_to_string(tr.start_time(l));
    auto& delta_row = add_row("delta");
    for (int l = 0; l <= tr.k; ++l) delta_row[l] = rational_to_string(tr.deltas[l]);

    for (size_t i = 0; i < net.automata.size(); ++i) {
        const auto& aut = net.automata[i];
        auto& p_row = add_row(aut.name + ".p");
        for (int l = 0; l < cols; ++l)
            p_row[l] = aut.location_names.at(tr.configs[l].locations.at(i));
        auto& t_row = add_row(aut.name + ".t");
        auto& e_row = add_row(aut.name + ".edge");
        for (int l = 0; l <= tr.k; ++l) {
            const auto& slot = lay.slots[i][tr.slot_choice[l][i]];
            t_row[l] = slot.is_null ? "#" : aut.transitions[slot.transition].name;
            e_row[l] = slot.is_null ? "." : edge_text(tr.edges[l][i]);
        }
    }
    for (VarId n = 0; n < net.variable_count(); ++n) {
        auto& row = add_row(net.variables[n].name);
        for (int l = 0; l < cols; ++l)
            row[l] = std::to_string(tr.configs[l].var_values.at(n));
    }
    for (ClockId x = 0; x < net.clock_count(); ++x) {
        auto& row = add_row(net.clock_names[x]);
        for (int l = 0; l < cols; ++l)
            row[l] = rational_to_string(tr.configs[l].clock_values.at(x));
    }

    std::vector<size_t> widths(cols, 1);
    size_t name_width = 1;
    for (size_t r = 0; r < rows.size(); ++r) {
        name_width = std::max(name_width, names[r].size());
        for (int l = 0; l < cols; ++l) widths[l] = std::max(widths[l], rows[r][l].size());
    }
    std::ostringstream os;
    for (size_t r = 0; r < rows.size(); ++r) {
        os << trace_detail::pad(names[r], name_width + 2);
        for (int l = 0; l < cols; ++l)
            os << trace_detail::pad(rows[r][l], widths[l] + 2);
        os << "\n";
    }
    os << "loop: position " << tr.loop << " (t=" << rational_to_string(tr.start_time(tr.loop))
       << "), repeated segment [" << tr.loop << ", " << tr.k << "]\n";
    return os.str();
}

/// Machine-readable document with fixed field names: positions, loop, delta,
/// transitions, edges, locations, vars, clocks.
inline std::string render_trace_structured(const LassoTrace& tr, const Network& net) {
    const EncodingLayout lay = EncodingLayout::build(net, tr.k);
    nlohmann::json doc;
    doc["positions"] = tr.k + 2;
    doc["loop"] = tr.loop;
    doc["delta"] = nlohmann::json::array();
    for (const auto& d : tr.deltas) doc["delta"].push_back(rational_to_string(d));

    doc["transitions"] = nlohmann::json::array();
    doc["edges"] = nlohmann::json::array();
    for (int l = 0; l <= tr.k; ++l) {
        nlohmann::json trans = nlohmann::json::array();
        nlohmann::json edges = nlohmann::json::array();
        for (size_t i = 0; i < net.automata.size(); ++i) {
            const auto& slot = lay.slots[i][tr.slot_choice[l][i]];
            if (slot.is_null) {
                trans.push_back(nullptr);
                edges.push_back(nullptr);
            } else {
                trans.push_back(net.automata[i].transitions[slot.transition].name);
                edges.push_back(edge_text(tr.edges[l][i]));
            }
        }
        doc["transitions"].push_back(std::move(trans));
        doc["edges"].push_back(std::move(edges));
    }

    doc["locations"] = nlohmann::json::array();
    for (int l = 0; l <= tr.k + 1; ++l) {
        nlohmann::json locs = nlohmann::json::array();
        for (size_t i = 0; i < net.automata.size(); ++i)
            locs.push_back(
                net.automata[i].location_names.at(tr.configs[l].locations.at(i)));
        doc["locations"].push_back(std::move(locs));
    }

    doc["vars"] = nlohmann::json::object();
    for (VarId n = 0; n < net.variable_count(); ++n) {
        nlohmann::json values = nlohmann::json::array();
        for (int l = 0; l <= tr.k + 1; ++l)
            values.push_back(tr.configs[l].var_values.at(n));
        doc["vars"][net.variables[n].name] = std::move(values);
    }
    doc["clocks"] = nlohmann::json::object();
    for (ClockId x = 0; x < net.clock_count(); ++x) {
        nlohmann::json values = nlohmann::json::array();
        for (int l = 0; l <= tr.k + 1; ++l)
            values.push_back(rational_to_string(tr.configs[l].clock_values.at(x)));
        doc["clocks"][net.clock_names[x]] = std::move(values);
    }
    return doc.dump(2) + "\n";
}

/// Textual rendering of a projected signal; a constant looping suffix is
/// reported as extending to infinity.
inline std::string render_signal(const Signal& sig, const Network& net) {
    std::ostringstream os;
    auto print_value = [&](const SignalValue& v) {
        os << "{";
        for (size_t i = 0; i < v.labels.size(); ++i) {
            if (i) os << ", ";
            os << net.label_names.at(v.labels[i]);
        }
        os << "}";
        for (VarId n = 0; n < net.variable_count(); ++n)
            os << " " << net.variables[n].name << "=" << v.vars.at(n);
    };

    const bool constant_loop =
        sig.intervals.size() == 1 ||
        (!sig.intervals.empty() && sig.intervals.back().start <= sig.loop_start);
    for (size_t i = 0; i < sig.intervals.size(); ++i) {
        const auto& iv = sig.intervals[i];
        const bool last = i + 1 == sig.intervals.size();
        os << (iv.closed_start ? "[" : "(") << rational_to_string(iv.start) << ", ";
        if (last && constant_loop) os << "inf)";
        else os << rational_to_string(iv.end) << (iv.closed_end ? "]" : ")");
        os << "  ";
        print_value(iv.value);
        os << "\n";
    }
    if (!constant_loop)
        os << "repeats forever from t=" << rational_to_string(sig.loop_start) << " (signal of ["
           << rational_to_string(sig.loop_start) << ", " << rational_to_string(sig.total)
           << "))\n";
    return os.str();
}

}  // namespace tabmc
