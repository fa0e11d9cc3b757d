#ifndef STRATAL_RUN_HPP
#define STRATAL_RUN_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "stratal/step.hpp"

namespace stratal {

struct SeededScheduler {
    std::uint64_t seed = 0;
};
struct ExhaustiveScheduler {
    long state_budget = 100000;
};

struct RunConfig {
    long fuel = 100000; // max -> steps (seeded runs)
    int instants = 64;  // max instants executed (an instant = run to quiescence)
    std::variant<SeededScheduler, ExhaustiveScheduler> scheduler = SeededScheduler{0};
};

struct TraceRecord {
    long step = 0;   // -> steps taken so far (ticks do not increment)
    int instant = 0; // instant index the event belongs to
    int thread_id = -1;
    std::string rule;
    std::string redex;
    std::optional<RegionName> delta_region; // set only: region that grew
    std::optional<std::string> delta_value; // set only: rendered value added
    std::string state_hash;                 // alpha-canonical hash after the event
};

struct Outcome {
    enum class Kind { Terminated, FuelExhausted, StateBudgetExhausted, CycleDetected };
    Kind kind = Kind::Terminated;
    Program final_program; // terminal state, or the recurring state for cycles
    long steps = 0;        // -> steps (seeded) / explored edges (exhaustive)
    int instants = 0;      // instants executed (max over paths for exhaustive)

    std::string kind_name() const {
        switch (kind) {
        case Kind::Terminated: return "terminated";
        case Kind::FuelExhausted: return "fuel-exhausted";
        case Kind::StateBudgetExhausted: return "state-budget-exhausted";
        case Kind::CycleDetected: return "cycle-detected";
        }
        return "?";
    }
};

struct RunResult {
    Outcome outcome;
    std::vector<TraceRecord> trace;
};

inline std::string state_hash(const Program& p) {
    std::uint64_t h = std::hash<std::string>{}(p.canonical());
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

inline TraceRecord record_of(const StepEvent& ev, long steps, int instant,
                             const Program& after) {
    TraceRecord rec;
    rec.step = steps;
    rec.instant = instant;
    rec.thread_id = ev.thread_id;
    rec.rule = step_rule_name(ev.rule);
    rec.redex = ev.redex;
    if (ev.rule == StepRule::Set && ev.region) {
        rec.delta_region = ev.region;
        rec.delta_value = print_term(*ev.value);
    }
    rec.state_hash = state_hash(after);
    return rec;
}

inline TraceRecord tick_record(long steps, int new_instant, const Program& after) {
    TraceRecord rec;
    rec.step = steps;
    rec.instant = new_instant;
    rec.thread_id = -1;
    rec.rule = "tick";
    rec.state_hash = state_hash(after);
    return rec;
}

inline RunResult run_seeded(Program state, const RunConfig& cfg, std::uint64_t seed) {
    RunResult res;
    std::mt19937_64 rng(seed);
    long steps = 0;
    int instant = 0;
    while (true) {
        auto succs = program_successors(state);
        if (!succs.empty()) {
            if (steps >= cfg.fuel) {
                res.outcome = {Outcome::Kind::FuelExhausted, state, steps, instant};
                return res;
            }
            std::uniform_int_distribution<std::size_t> dist(0, succs.size() - 1);
            auto& pick = succs[dist(rng)];
            state = pick.program;
            ++steps;
            res.trace.push_back(record_of(pick.event, steps, instant, state));
            continue;
        }
        // quiescent: the current instant is complete
        int executed = instant + 1;
        if (executed >= cfg.instants) {
            res.outcome = {Outcome::Kind::Terminated, state, steps, executed};
            return res;
        }
        TickResult t = tick(state);
        if (t.status == TickResult::Status::Undefined)
            throw std::logic_error("tick undefined on a quiescent program: " + t.reason);
        if (t.program.alpha_equal(state)) { // quiescent fixpoint
            res.outcome = {Outcome::Kind::Terminated, state, steps, executed};
            return res;
        }
        state = t.program;
        ++instant;
        res.trace.push_back(tick_record(steps, instant, state));
    }
}

// Depth-first exploration of every interleaving, memoized on alpha-canonical
// (state, instant) keys. A key that recurs on the current path is a cycle
// (within-instant recurrence: instants only grow along a path).
inline RunResult run_exhaustive(const Program& start, const RunConfig& cfg,
                                long state_budget) {
    RunResult res;
    struct NodeState {
        Program program;
        int instant;
        std::vector<ProgramSuccessor> succs; // filled on first visit
        std::size_t next = 0;
        bool tick_edge = false;
        std::string key;
    };

    std::set<std::string> on_path;
    std::set<std::string> done;
    long created = 0;
    long edges = 0;
    int max_instants = 0;
    bool have_terminal = false;
    Program first_terminal;

    auto key_of = [](const Program& p, int instant) {
        return std::to_string(instant) + "#" + p.canonical();
    };

    std::vector<NodeState> stack;
    auto push_node = [&](Program p, int instant) -> bool {
        // returns false when the state budget is exhausted
        if (++created > state_budget) return false;
        NodeState n;
        n.key = key_of(p, instant);
        n.program = std::move(p);
        n.instant = instant;
        on_path.insert(n.key);
        stack.push_back(std::move(n));
        return true;
    };

    if (!push_node(start, 0)) {
        res.outcome = {Outcome::Kind::StateBudgetExhausted, start, 0, 0};
        return res;
    }

    auto expand = [&](NodeState& n) {
        n.succs = program_successors(n.program);
        n.tick_edge = false;
        if (!n.succs.empty()) return;
        int executed = n.instant + 1;
        max_instants = std::max(max_instants, executed);
        if (executed >= cfg.instants) {
            if (!have_terminal) { have_terminal = true; first_terminal = n.program; }
            return;
        }
        TickResult t = tick(n.program);
        if (t.status == TickResult::Status::Undefined)
            throw std::logic_error("tick undefined on a quiescent program: " + t.reason);
        if (t.program.alpha_equal(n.program)) {
            if (!have_terminal) { have_terminal = true; first_terminal = n.program; }
            return;
        }
        StepEvent ev;
        ev.rule = StepRule::Tick;
        n.succs.push_back({std::move(t.program), std::move(ev)});
        n.tick_edge = true;
    };

    expand(stack.back());
    while (!stack.empty()) {
        NodeState& top = stack.back();
        if (top.next >= top.succs.size()) {
            on_path.erase(top.key);
            done.insert(top.key);
            stack.pop_back();
            continue;
        }
        ProgramSuccessor& succ = top.succs[top.next++];
        int next_instant = top.instant + (top.tick_edge ? 1 : 0);
        std::string k = key_of(succ.program, next_instant);
        ++edges;
        if (top.tick_edge)
            res.trace.push_back(tick_record(edges, next_instant, succ.program));
        else
            res.trace.push_back(record_of(succ.event, edges, top.instant, succ.program));
        if (on_path.count(k)) {
            res.outcome = {Outcome::Kind::CycleDetected, succ.program, edges,
                           std::max(max_instants, next_instant + 1)};
            return res;
        }
        if (done.count(k)) continue;
        if (!push_node(succ.program, next_instant)) {
            res.outcome = {Outcome::Kind::StateBudgetExhausted, succ.program, edges,
                           std::max(max_instants, next_instant + 1)};
            return res;
        }
        expand(stack.back());
    }

    res.outcome = {Outcome::Kind::Terminated, have_terminal ? first_terminal : start,
                   edges, std::max(max_instants, 1)};
    return res;
}

} // namespace detail

// Run a closed |-ef-typable program to completion under the configured
// scheduler. Seeded runs pick uniformly among all (thread, successor) pairs;
// exhaustive runs explore every interleaving and detect cycles.
inline RunResult run(const Program& p, const RunConfig& cfg) {
    if (cfg.fuel <= 0) throw std::invalid_argument("fuel must be positive");
    RunConfig checked = cfg;
    checked.instants = std::max(cfg.instants, 1);
    if (auto* seeded = std::get_if<SeededScheduler>(&cfg.scheduler))
        return detail::run_seeded(p, checked, seeded->seed);
    auto budget = std::get<ExhaustiveScheduler>(cfg.scheduler).state_budget;
    if (budget <= 0) throw std::invalid_argument("state budget must be positive");
    return detail::run_exhaustive(p, checked, budget);
}

} // namespace stratal

#endif // STRATAL_RUN_HPP
