#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

// Generators for the desk-scale benchmark models, emitting model-format
// text. Timing constants are the classic choices (write window shorter than
// the test delay), not values taken from anywhere else.

namespace tabmc {

/// Fischer's mutual exclusion protocol over one shared variable `id`:
/// n identical processes that differ only in the value they write. Each
/// process requests (a -> b, allowed while id = 0), writes its own id within
/// one time unit (b -> c), waits more than two time units and re-checks the
/// id before entering the critical section (c -> cs). With `broken` the
/// id re-check on entering cs is dropped, which breaks mutual exclusion.
inline std::string gen_fischer(int processes, bool broken = false) {
    if (processes < 2)
        throw std::invalid_argument("fischer needs at least 2 processes");
    std::ostringstream os;
    os << "// Fischer mutual exclusion, " << processes << " processes"
       << (broken ? " (broken: id re-check removed)" : "") << "\n";
    os << "// suggested check: invariant !(P1.cs && P2.cs)\n";
    os << "var id : [0, " << processes << "] = 0;\n";
    for (int p = 1; p <= processes; ++p) os << "clock x" << p << ";\n";
    for (int p = 1; p <= processes; ++p) {
        const std::string x = "x" + std::to_string(p);
        os << "automaton P" << p << " {\n";
        os << "  init a;\n";
        os << "  location a;\n";
        os << "  location b inv (" << x << " <= 1);\n";
        os << "  location c;\n";
        os << "  location cs labels {crit" << p << "};\n";
        os << "  trans t1: a -> b when (id = 0) reset {" << x << "};\n";
        os << "  trans t2: b -> c reset {" << x << "} do {id := " << p << "};\n";
        if (broken)
            os << "  trans t3: c -> cs when (" << x << " > 2);\n";
        else
            os << "  trans t3: c -> cs when (" << x << " > 2) and (id = " << p << ");\n";
        os << "  trans t4: c -> b when (id = 0) reset {" << x << "};\n";
        os << "  trans t5: cs -> a do {id := 0};\n";
        os << "}\n";
    }
    return os.str();
}

/// Token ring: one ring process that owns the token and lends it to the
/// agents in ring order over one-to-one channels; each agent holds the token
/// for at most two time units. Exclusive ownership is a location property:
/// two agents are never simultaneously busy.
inline std::string gen_token_ring(int agents) {
    if (agents < 2) throw std::invalid_argument("token ring needs at least 2 agents");
    std::ostringstream os;
    os << "// Token ring, " << agents << " agents plus the ring process\n";
    os << "// suggested check: invariant !(A1.busy && A2.busy)\n";
    for (int a = 1; a <= agents; ++a) os << "clock y" << a << ";\n";
    for (int a = 1; a <= agents; ++a) os << "channel tok" << a << ";\n";
    for (int a = 1; a <= agents; ++a) os << "channel ret" << a << ";\n";

    os << "automaton Ring {\n";
    os << "  init at1;\n";
    for (int a = 1; a <= agents; ++a) {
        os << "  location at" << a << ";\n";
        os << "  location lent" << a << ";\n";
    }
    for (int a = 1; a <= agents; ++a) {
        const int next = a % agents + 1;
        os << "  trans give" << a << ": at" << a << " -> lent" << a << " sync tok" << a
           << "!;\n";
        os << "  trans take" << a << ": lent" << a << " -> at" << next << " sync ret" << a
           << "?;\n";
    }
    os << "}\n";

    for (int a = 1; a <= agents; ++a) {
        os << "automaton A" << a << " {\n";
        os << "  init idle;\n";
        os << "  location idle;\n";
        os << "  location busy inv (y" << a << " <= 2);\n";
        os << "  trans get: idle -> busy sync tok" << a << "? reset {y" << a << "};\n";
        os << "  trans put: busy -> idle sync ret" << a << "!;\n";
        os << "}\n";
    }
    return os.str();
}

}  // namespace tabmc
