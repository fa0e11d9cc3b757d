#ifndef STRATAL_STEP_HPP
#define STRATAL_STEP_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stratal/decompose.hpp"
#include "stratal/print.hpp"
#include "stratal/store.hpp"

namespace stratal {

enum class StepRule { Beta, Get, Set, Prim, Tick };

inline const char* step_rule_name(StepRule r) {
    switch (r) {
    case StepRule::Beta: return "beta";
    case StepRule::Get: return "get";
    case StepRule::Set: return "set";
    case StepRule::Prim: return "prim";
    case StepRule::Tick: return "tick";
    }
    return "?";
}

// What happened in one reduction step (for traces and replay).
struct StepEvent {
    int thread_id = -1;
    StepRule rule = StepRule::Beta;
    std::optional<RegionName> region; // get/set
    std::string redex;                // rendering of the fired redex
    std::optional<Term> value;        // value read (get) or written (set)
};

struct ThreadSuccessor {
    Term term;
    Store store;
    StepEvent event;
};

namespace detail {

inline Term eval_prim(const Term& t) {
    if (t.kind() == Term::Kind::IfZero)
        return t.cond().int_value() == 0 ? t.then_branch() : t.else_branch();
    const auto& args = t.prim_args();
    switch (t.prim_op()) {
    case PrimOp::Add: return Term::int_lit(args[0].int_value() + args[1].int_value());
    case PrimOp::Sub: return Term::int_lit(args[0].int_value() - args[1].int_value());
    case PrimOp::Mul: return Term::int_lit(args[0].int_value() * args[1].int_value());
    case PrimOp::IsZero: return Term::int_lit(args[0].int_value() == 0 ? 1 : 0);
    }
    return t;
}

} // namespace detail

// All successors of a single thread in one reduction step. Empty iff the
// thread is stuck (a value, a blocked read, or a pending elsenext value).
// get on a region holding n alpha-distinct values yields n successors.
inline std::vector<ThreadSuccessor> step_thread(const Term& t, const Store& store) {
    DecomposeResult dr = decompose(t);
    if (std::holds_alternative<DecompositionFailure>(dr)) return {};
    const Decomposition& d = std::get<Decomposition>(dr);
    if (d.which == Decomposition::Case::IsValue) return {};
    if (redex_is_value(*d.delta)) return {}; // (V elsenext N): waits for the tick

    EvalContext target = red(d.full_context());
    std::vector<ThreadSuccessor> out;
    std::visit(
        [&](const auto& rx) {
            using T = std::decay_t<decltype(rx)>;
            if constexpr (std::is_same_v<T, redex::Beta>) {
                Term reduced = substitute(rx.fn.body(), rx.fn.param(), rx.arg);
                StepEvent ev{-1, StepRule::Beta, std::nullopt,
                             print_term(Term::app(rx.fn, rx.arg)), std::nullopt};
                out.push_back({plug(target, std::move(reduced)), store, std::move(ev)});
            } else if constexpr (std::is_same_v<T, redex::GetRegion>) {
                for (const auto& v : store.values(rx.region)) {
                    StepEvent ev{-1, StepRule::Get, rx.region,
                                 "get #" + rx.region.str(), v};
                    out.push_back({plug(target, v), store, std::move(ev)});
                }
            } else if constexpr (std::is_same_v<T, redex::SetRegion>) {
                Store next = store;
                next.add(rx.region, rx.value);
                StepEvent ev{-1, StepRule::Set, rx.region,
                             print_term(Term::set(Term::region(rx.region), rx.value)),
                             rx.value};
                out.push_back({plug(target, Term::star()), std::move(next), std::move(ev)});
            } else if constexpr (std::is_same_v<T, redex::Prim>) {
                StepEvent ev{-1, StepRule::Prim, std::nullopt, print_term(rx.term),
                             std::nullopt};
                out.push_back(
                    {plug(target, detail::eval_prim(rx.term)), store, std::move(ev)});
            }
        },
        *d.delta);
    return out;
}

// One program step: P -> P' by reducing one thread (store shared).
struct ProgramSuccessor {
    Program program;
    StepEvent event;
};

inline std::vector<ProgramSuccessor> program_successors(const Program& p) {
    std::vector<ProgramSuccessor> out;
    for (std::size_t i = 0; i < p.threads().size(); ++i) {
        const auto& th = p.threads()[i];
        for (auto& succ : step_thread(th.term, p.store())) {
            StepEvent ev = succ.event;
            ev.thread_id = th.id;
            Program next = p.with_thread(i, succ.term).with_store(succ.store);
            out.push_back({std::move(next), std::move(ev)});
        }
    }
    return out;
}

inline bool quiescent(const Program& p) { return program_successors(p).empty(); }

// ---- end of instant ------------------------------------------------------------

// Result of the tick relation: the next-instant program, or NotQuiescent when
// the computation can still progress, or Undefined when some thread matches
// no tick rule (impossible for closed well-typed programs).
struct TickResult {
    enum class Status { Ticked, NotQuiescent, Undefined };
    Status status;
    Program program;  // when Ticked
    int failed_thread = -1;
    std::string reason;

    bool ticked() const { return status == Status::Ticked; }
};

inline TickResult tick(const Program& p) {
    if (!quiescent(p)) return {TickResult::Status::NotQuiescent, {}, -1, "program can step"};
    std::vector<Term> next;
    next.reserve(p.threads().size());
    for (const auto& th : p.threads()) {
        if (is_value(th.term)) { // V tick V
            next.push_back(th.term);
            continue;
        }
        DecomposeResult dr = decompose(th.term);
        if (std::holds_alternative<DecompositionFailure>(dr))
            return {TickResult::Status::Undefined, {}, th.id,
                    std::get<DecompositionFailure>(dr).reason};
        const Decomposition& d = std::get<Decomposition>(dr);
        switch (d.which) {
        case Decomposition::Case::IsValue:
            next.push_back(th.term);
            break;
        case Decomposition::Case::Redex:
            // quiescent, so this can only be a read on an empty region: M tick M
            if (!redex_is_get(*d.delta))
                return {TickResult::Status::Undefined, {}, th.id,
                        "non-get redex in a quiescent program"};
            next.push_back(th.term);
            break;
        case Decomposition::Case::UnderElseNext:
            // E[(E'[Delta]) elsenext N] with Delta a value or a blocked get:
            // resume with E[N] in the next instant.
            if (!redex_is_value(*d.delta) && !redex_is_get(*d.delta))
                return {TickResult::Status::Undefined, {}, th.id,
                        "non-quiescent delta under elsenext"};
            next.push_back(plug(d.outer, d.later));
            break;
        }
    }
    Program out = p.with_each_thread(std::move(next)); // splits any top-level par
    return {TickResult::Status::Ticked, std::move(out), -1, ""};
}

} // namespace stratal

#endif // STRATAL_STEP_HPP
