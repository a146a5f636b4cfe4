#pragma once

#include "tabmc/term.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Driver for external SMT-LIB2 solvers: runs one child process per random
// seed concurrently, takes the first definitive answer, and parses
// (get-model) output into a name -> value map.

namespace tabmc {

enum class Verdict { Sat, Unsat, Unknown, Timeout, Error };

inline const char* verdict_text(Verdict v) {
    switch (v) {
        case Verdict::Sat: return "sat";
        case Verdict::Unsat: return "unsat";
        case Verdict::Unknown: return "unknown";
        case Verdict::Timeout: return "timeout";
        case Verdict::Error: return "error";
    }
    return "?";
}

struct SolverConfig {
    std::string executable;           // empty = TABMC_SOLVER env, then "z3"
    std::vector<std::string> extra_args;
    double timeout_seconds = 300.0;
    std::vector<int> seeds = {1, 2};  // one child per seed
    bool pass_via_stdin = false;      // default: temp file argument
    size_t recheck_max_assertions = 20000;  // model re-substitution limit

    std::string resolved_executable() const {
        if (!executable.empty()) return executable;
        if (const char* env = std::getenv("TABMC_SOLVER"); env && *env) return env;
        return "z3";
    }
};

/// Values of the declared constants from a sat answer, exact: bit patterns
/// for BV sorts, rationals for Real sorts.
struct SolverModel {
    std::map<std::string, Value> values;
    std::vector<std::string> warnings;  // e.g. undeclared names in the output

    const Value& at(const std::string& name) const {
        auto it = values.find(name);
        if (it == values.end())
            throw std::runtime_error("model has no value for '" + name + "'");
        return it->second;
    }
    bool has(const std::string& name) const { return values.count(name) > 0; }
};

struct SolveResult {
    Verdict verdict = Verdict::Error;
    SolverModel model;          // filled on Sat
    std::string output;         // winning child's stdout
    std::string error_text;     // diagnostics on Error
    double seconds = 0.0;
    std::vector<pid_t> children;  // every spawned pid (all reaped on return)
};

// ---- S-expression reading for solver output -----------------------------------

namespace smt_out {

struct Node {
    bool is_atom = true;
    std::string atom;
    std::vector<Node> kids;
};

inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == ';') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == '(' || c == ')') {
            out.emplace_back(1, c);
            ++i;
        } else if (c == '"') {
            size_t j = i + 1;
            while (j < text.size() && text[j] != '"') ++j;
            out.push_back(text.substr(i, j - i + 1));
            i = j + 1;
        } else if (c == '|') {
            size_t j = i + 1;
            while (j < text.size() && text[j] != '|') ++j;
            out.push_back(text.substr(i, j - i + 1));
            i = j + 1;
        } else {
            size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
                   text[j] != '(' && text[j] != ')')
                ++j;
            out.push_back(text.substr(i, j - i));
            i = j;
        }
    }
    return out;
}

inline Node parse_one(const std::vector<std::string>& toks, size_t& i) {
    Node n;
    if (toks.at(i) == "(") {
        n.is_atom = false;
        ++i;
        while (i < toks.size() && toks[i] != ")") n.kids.push_back(parse_one(toks, i));
        if (i < toks.size()) ++i;  // consume ')'
        return n;
    }
    n.atom = toks[i++];
    return n;
}

inline std::vector<Node> parse_all(const std::string& text) {
    auto toks = tokenize(text);
    std::vector<Node> out;
    size_t i = 0;
    while (i < toks.size()) {
        if (toks[i] == ")") { ++i; continue; }  // stray closer: be tolerant
        out.push_back(parse_one(toks, i));
    }
    return out;
}

inline std::optional<BvValue> read_bv(const Node& n, int width) {
    if (n.is_atom) {
        const std::string& a = n.atom;
        if (a.size() > 2 && a[0] == '#' && a[1] == 'b') {
            BvValue v;
            v.width = static_cast<int>(a.size()) - 2;
            for (size_t i = a.size(); i > 2; --i) v.bits.push_back(a[i - 1] == '1');
            if (v.width != width) return std::nullopt;
            return v;
        }
        if (a.size() > 2 && a[0] == '#' && a[1] == 'x') {
            BvValue v;
            v.width = 4 * (static_cast<int>(a.size()) - 2);
            for (size_t i = a.size(); i > 2; --i) {
                const char h = static_cast<char>(
                    std::tolower(static_cast<unsigned char>(a[i - 1])));
                const int d = h <= '9' ? h - '0' : h - 'a' + 10;
                for (int b = 0; b < 4; ++b) v.bits.push_back((d >> b) & 1);
            }
            if (v.width != width) return std::nullopt;
            return v;
        }
        return std::nullopt;
    }
    // (_ bv<decimal> <width>)
    if (n.kids.size() == 3 && n.kids[0].is_atom && n.kids[0].atom == "_" &&
        n.kids[1].is_atom && n.kids[1].atom.rfind("bv", 0) == 0) {
        BigInt value(n.kids[1].atom.substr(2));
        const int w = std::stoi(n.kids[2].atom);
        if (w != width) return std::nullopt;
        BvValue v;
        v.width = w;
        for (int i = 0; i < w; ++i) {
            v.bits.push_back((value & 1) != 0);
            value >>= 1;
        }
        return v;
    }
    return std::nullopt;
}

inline std::optional<Rational> read_real(const Node& n) {
    if (n.is_atom) {
        const std::string& a = n.atom;
        if (a.empty()) return std::nullopt;
        try {
            if (a.find('.') != std::string::npos) return rational_from_decimal(a);
            if (a.find('/') != std::string::npos) return Rational(a);
            return Rational(BigInt(a));
        } catch (...) {
            return std::nullopt;
        }
    }
    if (n.kids.empty() || !n.kids[0].is_atom) return std::nullopt;
    const std::string& head = n.kids[0].atom;
    if (head == "-" && n.kids.size() == 2) {
        auto inner = read_real(n.kids[1]);
        if (!inner) return std::nullopt;
        return Rational(-*inner);
    }
    if (head == "/" && n.kids.size() == 3) {
        auto num = read_real(n.kids[1]);
        auto den = read_real(n.kids[2]);
        if (!num || !den || *den == 0) return std::nullopt;
        return Rational(*num / *den);
    }
    if (head == "to_real" && n.kids.size() == 2) return read_real(n.kids[1]);
    return std::nullopt;
}

}  // namespace smt_out

/// Parses `(get-model)` output against the script's declarations. Tolerant
/// of define-fun formatting differences between mainstream solvers; BV
/// values in #b/#x/(_ bv..) forms, reals in decimal and (/ p q) forms.
/// Names in the output that were never declared are skipped with a warning;
/// a declared name missing from the output is an error.
inline SolverModel parse_model(const std::string& output,
                               const std::vector<std::pair<std::string, Sort>>& decls) {
    SolverModel model;
    std::map<std::string, Sort> by_name(decls.begin(), decls.end());

    auto nodes = smt_out::parse_all(output);
    std::vector<const smt_out::Node*> defs;
    auto scan = [&](const smt_out::Node& n, auto&& self) -> void {
        if (n.is_atom) return;
        if (n.kids.size() >= 5 && n.kids[0].is_atom && n.kids[0].atom == "define-fun") {
            defs.push_back(&n);
            return;
        }
        for (const auto& k : n.kids) self(k, self);
    };
    for (const auto& n : nodes) scan(n, scan);

    for (const auto* def : defs) {
        const auto& kids = def->kids;
        if (!kids[1].is_atom) continue;
        std::string name = kids[1].atom;
        if (name.size() >= 2 && name.front() == '|' && name.back() == '|')
            name = name.substr(1, name.size() - 2);
        auto it = by_name.find(name);
        if (it == by_name.end()) {
            model.warnings.push_back("ignoring undeclared name '" + name + "'");
            continue;
        }
        const Sort& sort = it->second;
        const smt_out::Node& value = kids.back();
        if (sort.is_bv()) {
            auto v = smt_out::read_bv(value, sort.width);
            if (!v)
                throw std::runtime_error("cannot read BitVector value of '" + name + "'");
            model.values[name] = *v;
        } else if (sort.is_real()) {
            auto v = smt_out::read_real(value);
            if (!v)
                throw std::runtime_error("cannot read Real value of '" + name + "'");
            model.values[name] = *v;
        } else {
            if (!value.is_atom)
                throw std::runtime_error("cannot read Bool value of '" + name + "'");
            model.values[name] = value.atom == "true";
        }
    }

    for (const auto& [name, sort] : decls) {
        (void)sort;
        if (!model.values.count(name))
            throw std::runtime_error("declared constant '" + name +
                                     "' missing from the solver model");
    }
    return model;
}

// ---- child process handling ------------------------------------------------------

namespace proc_detail {

struct Child {
    pid_t pid = -1;
    int out_fd = -1;
    int err_fd = -1;
    std::string out, err;
    bool out_eof = false, err_eof = false;
    bool exited = false;
    int status = 0;
    bool exec_failed = false;
};

inline void set_nonblock(int fd) {
    fcntl(fd, F_SETFL, fcntl(fd, F_GETFL, 0) | O_NONBLOCK);
}

inline bool drain(int fd, std::string& into) {
    // returns true on EOF
    char buf[4096];
    while (true) {
        const ssize_t n = read(fd, buf, sizeof buf);
        if (n > 0) {
            into.append(buf, static_cast<size_t>(n));
            continue;
        }
        if (n == 0) return true;
        if (errno == EAGAIN || errno == EWOULDBLOCK) return false;
        return true;  // treat read errors as EOF
    }
}

/// Spawns `argv` with stdout/stderr pipes; optional stdin payload. Reports
/// exec failure through a CLOEXEC pipe so "no such executable" is a clean
/// error rather than a garbled child.
inline std::optional<Child> spawn(const std::vector<std::string>& argv,
                                  const std::optional<std::string>& stdin_payload,
                                  std::string& error) {
    int out_pipe[2], err_pipe[2], exec_pipe[2], in_pipe[2] = {-1, -1};
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0 || pipe(exec_pipe) != 0) {
        error = "pipe() failed";
        return std::nullopt;
    }
    if (stdin_payload && pipe(in_pipe) != 0) {
        error = "pipe() failed";
        return std::nullopt;
    }
    fcntl(exec_pipe[1], F_SETFD, FD_CLOEXEC);

    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    const pid_t pid = fork();
    if (pid < 0) {
        error = "fork() failed";
        return std::nullopt;
    }
    if (pid == 0) {
        if (stdin_payload) dup2(in_pipe[0], STDIN_FILENO);
        else {
            int devnull = open("/dev/null", O_RDONLY);
            if (devnull >= 0) dup2(devnull, STDIN_FILENO);
        }
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]); close(out_pipe[1]);
        close(err_pipe[0]); close(err_pipe[1]);
        close(exec_pipe[0]);
        if (in_pipe[0] >= 0) { close(in_pipe[0]); close(in_pipe[1]); }
        execvp(cargv[0], cargv.data());
        const int err_no = errno;
        ssize_t ignored = write(exec_pipe[1], &err_no, sizeof err_no);
        (void)ignored;
        _exit(127);
    }
    close(out_pipe[1]);
    close(err_pipe[1]);
    close(exec_pipe[1]);
    if (stdin_payload) {
        close(in_pipe[0]);
        signal(SIGPIPE, SIG_IGN);
        size_t off = 0;
        while (off < stdin_payload->size()) {
            const ssize_t n = write(in_pipe[1], stdin_payload->data() + off,
                                    stdin_payload->size() - off);
            if (n <= 0) break;
            off += static_cast<size_t>(n);
        }
        close(in_pipe[1]);
    }

    // Did exec succeed? EOF on the exec pipe says yes.
    int child_errno = 0;
    const ssize_t n = read(exec_pipe[0], &child_errno, sizeof child_errno);
    close(exec_pipe[0]);
    Child c;
    c.pid = pid;
    c.out_fd = out_pipe[0];
    c.err_fd = err_pipe[0];
    set_nonblock(c.out_fd);
    set_nonblock(c.err_fd);
    if (n > 0) {
        c.exec_failed = true;
        error = "cannot execute '" + argv[0] + "': " + std::strerror(child_errno);
    }
    return c;
}

inline void close_child(Child& c) {
    if (c.out_fd >= 0) close(c.out_fd);
    if (c.err_fd >= 0) close(c.err_fd);
    c.out_fd = c.err_fd = -1;
}

inline void kill_and_reap(Child& c) {
    if (c.pid > 0 && !c.exited) {
        kill(c.pid, SIGKILL);
        waitpid(c.pid, &c.status, 0);
        c.exited = true;
    }
    close_child(c);
}

}  // namespace proc_detail

namespace solver_detail {

inline std::optional<Verdict> verdict_from_output(const std::string& out) {
    std::istringstream is(out);
    std::string line;
    while (std::getline(is, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (line == "sat") return Verdict::Sat;
        if (line == "unsat") return Verdict::Unsat;
        if (line == "unknown") return Verdict::Unknown;
    }
    return std::nullopt;
}

inline std::vector<std::string> seed_arguments(const std::string& executable, int seed) {
    const std::string base = std::filesystem::path(executable).filename().string();
    if (base.find("z3") != std::string::npos) {
        return {"smt.random_seed=" + std::to_string(seed),
                "sat.random_seed=" + std::to_string(seed)};
    }
    if (base.find("cvc") != std::string::npos) {
        return {"--seed=" + std::to_string(seed)};
    }
    return {};  // unknown solver: caller falls back to a single run
}

inline bool supports_seeds(const std::string& executable) {
    return !seed_arguments(executable, 0).empty();
}

struct TempFile {
    std::string path;

    explicit TempFile(const std::string& contents) {
        char name[] = "/tmp/tabmc-XXXXXX";
        const int fd = mkstemp(name);
        if (fd < 0) throw std::runtime_error("mkstemp failed");
        path = name;
        size_t off = 0;
        while (off < contents.size()) {
            const ssize_t n = write(fd, contents.data() + off, contents.size() - off);
            if (n <= 0) break;
            off += static_cast<size_t>(n);
        }
        close(fd);
    }
    ~TempFile() { ::unlink(path.c_str()); }
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;
};

}  // namespace solver_detail

/// Runs the script through the configured solver, racing one child per seed;
/// the first definitive sat/unsat answer wins and the remaining children are
/// killed. The script must end with (check-sat); a (get-model) is appended so
/// sat answers carry a model.
inline SolveResult solve(const std::string& script_text, const SolverConfig& cfg) {
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();

    SolveResult result;
    if (cfg.timeout_seconds <= 0 || cfg.seeds.empty()) {
        result.error_text = "solver configuration needs a positive timeout and >= 1 seed";
        return result;
    }
    const std::string exe = cfg.resolved_executable();
    std::string text = script_text;
    if (text.find("(check-sat)") == std::string::npos) {
        result.error_text = "script does not contain (check-sat)";
        return result;
    }
    text += "(get-model)\n";

    std::vector<int> seeds = cfg.seeds;
    if (!solver_detail::supports_seeds(exe) && seeds.size() > 1)
        seeds.resize(1);  // unknown solver: single run

    std::optional<solver_detail::TempFile> file;
    if (!cfg.pass_via_stdin) file.emplace(text);

    std::vector<proc_detail::Child> children;
    std::string spawn_error;
    for (int seed : seeds) {
        std::vector<std::string> argv{exe};
        for (const auto& a : solver_detail::seed_arguments(exe, seed)) argv.push_back(a);
        for (const auto& a : cfg.extra_args) argv.push_back(a);
        if (cfg.pass_via_stdin) {
            const std::string base = std::filesystem::path(exe).filename().string();
            if (base.find("z3") != std::string::npos) argv.push_back("-in");
        } else {
            argv.push_back(file->path);
        }
        auto child = proc_detail::spawn(
            argv, cfg.pass_via_stdin ? std::optional<std::string>(text) : std::nullopt,
            spawn_error);
        if (!child) {
            result.error_text = spawn_error;
            for (auto& c : children) proc_detail::kill_and_reap(c);
            return result;
        }
        children.push_back(std::move(*child));
        result.children.push_back(children.back().pid);
    }

    const auto deadline =
        started + std::chrono::duration_cast<clock::duration>(
                      std::chrono::duration<double>(cfg.timeout_seconds));

    auto finish = [&](Verdict v, const std::string& out, const std::string& err) {
        for (auto& c : children) proc_detail::kill_and_reap(c);
        result.verdict = v;
        result.output = out;
        if (v == Verdict::Error) result.error_text = err;
        result.seconds =
            std::chrono::duration<double>(clock::now() - started).count();
    };

    size_t finished = 0;
    std::string last_error;
    while (true) {
        bool all_done_now = true;
        for (auto& c : children) {
            if (c.exited && c.out_eof) continue;
            all_done_now = false;
            if (c.out_fd >= 0 && proc_detail::drain(c.out_fd, c.out)) {
                c.out_eof = true;
                close(c.out_fd);
                c.out_fd = -1;
            }
            if (c.err_fd >= 0 && proc_detail::drain(c.err_fd, c.err)) {
                c.err_eof = true;
                close(c.err_fd);
                c.err_fd = -1;
            }
            if (!c.exited) {
                const pid_t r = waitpid(c.pid, &c.status, WNOHANG);
                if (r == c.pid) c.exited = true;
            }
            if (c.exited && c.out_eof) {
                ++finished;
                if (c.exec_failed) {
                    last_error = spawn_error.empty() ? "solver failed to start"
                                                     : spawn_error;
                    continue;
                }
                auto verdict = solver_detail::verdict_from_output(c.out);
                if (verdict && (*verdict == Verdict::Sat || *verdict == Verdict::Unsat)) {
                    finish(*verdict, c.out, "");
                    return result;
                }
                if (verdict && *verdict == Verdict::Unknown) {
                    last_error = "solver answered unknown";
                } else {
                    std::ostringstream err;
                    err << "solver produced no verdict (exit status " << c.status << ")";
                    if (!c.err.empty()) err << "; stderr: " << c.err;
                    if (!c.out.empty()) err << "; stdout: " << c.out;
                    last_error = err.str();
                }
            }
        }
        if (all_done_now) break;
        if (clock::now() >= deadline) {
            finish(Verdict::Timeout, "", "");
            return result;
        }
        struct pollfd fds[64];
        nfds_t nfds = 0;
        for (auto& c : children) {
            if (c.out_fd >= 0 && nfds < 64) fds[nfds++] = {c.out_fd, POLLIN, 0};
            if (c.err_fd >= 0 && nfds < 64) fds[nfds++] = {c.err_fd, POLLIN, 0};
        }
        poll(fds, nfds, 20);
    }

    // Every child finished without a definitive answer.
    bool any_unknown = false;
    for (auto& c : children) {
        auto v = solver_detail::verdict_from_output(c.out);
        if (v && *v == Verdict::Unknown) any_unknown = true;
        proc_detail::kill_and_reap(c);
    }
    result.verdict = any_unknown ? Verdict::Unknown : Verdict::Error;
    result.error_text = any_unknown ? "" : last_error;
    result.seconds = std::chrono::duration<double>(clock::now() - started).count();
    return result;
}

/// Emits, solves and (on sat) parses and cross-checks the model: the values
/// are substituted back into the script's assertions with the term evaluator
/// when the script is small enough, guarding against solver or parser drift.
inline SolveResult solve_script(const Script& script, const std::string& logic,
                                const SolverConfig& cfg) {
    SolveResult res = solve(emit_smtlib2(script, logic), cfg);
    if (res.verdict != Verdict::Sat) return res;
    res.model = parse_model(res.output, script.declarations());
    if (script.assertion_count() <= cfg.recheck_max_assertions) {
        Assignment env(res.model.values.begin(), res.model.values.end());
        size_t index = 0;
        for (const auto& a : script.assertions()) {
            const Value v = eval_term(a, env);
            if (!std::get<bool>(v))
                throw std::runtime_error(
                    "solver model does not satisfy assertion #" + std::to_string(index) +
                    " (solver/parser drift)");
            ++index;
        }
    }
    return res;
}

}  // namespace tabmc
