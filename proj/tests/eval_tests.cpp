#include <doctest.h>

#include "stratal/print.hpp"
#include "stratal/run.hpp"
#include "stratal/step.hpp"
#include "stratal/transform.hpp"
#include "stratal/typing.hpp"

#include "generators.hpp"

using namespace stratal;

namespace {

const RegionName R_r("r");
const RegionName R_rp("r'");

Term unit_id() { return Term::lam("x", Type::unit(), Term::var("x")); }

Term diverging_term() {
    // get (ref_r (\x. (get r) x)) *
    Term inner = Term::lam("x", Type::unit(),
                           Term::app(Term::get(Term::region(R_r)), Term::var("x")));
    return Term::app(Term::get(expand_ref(R_r, inner)), Term::star());
}

Decomposition must_decompose(DecomposeResult r) {
    REQUIRE(std::holds_alternative<Decomposition>(r));
    return std::get<Decomposition>(std::move(r));
}

} // namespace

TEST_SUITE("eval") {

TEST_CASE("decompose: beta redex in the empty context") {
    DecomposeResult r = decompose(Term::app(unit_id(), Term::star()));
    const Decomposition& d = must_decompose(r);
    CHECK(d.which == Decomposition::Case::Redex);
    CHECK(d.outer.empty());
    CHECK(std::holds_alternative<redex::Beta>(*d.delta));
}

TEST_CASE("decompose: the 3.3 term fires its set innermost-first") {
    DecomposeResult r = decompose(diverging_term());
    const Decomposition& d = must_decompose(r);
    CHECK(d.which == Decomposition::Case::Redex);
    REQUIRE(std::holds_alternative<redex::SetRegion>(*d.delta));
    CHECK(std::get<redex::SetRegion>(*d.delta).region == R_r);
    // plugging the redex back reconstructs the term
    Term redex_term = Term::set(Term::region(R_r), std::get<redex::SetRegion>(*d.delta).value);
    CHECK(alpha_eq(plug(d.full_context(), redex_term), diverging_term()));
}

TEST_CASE("decompose: redex directly under an elsenext") {
    Term t = Term::else_next(Term::app(Term::lam("x", Type::unit(), Term::star()), Term::star()),
                             Term::var("n"));
    const Decomposition& d = must_decompose(decompose(t));
    CHECK(d.which == Decomposition::Case::UnderElseNext);
    CHECK(d.outer.empty());
    CHECK(d.inner.empty());
    CHECK(std::holds_alternative<redex::Beta>(*d.delta));
    CHECK(alpha_eq(d.later, Term::var("n")));
}

TEST_CASE("decompose: value under elsenext waits for the tick") {
    Term t = Term::else_next(Term::star(), Term::var("n"));
    const Decomposition& d = must_decompose(decompose(t));
    CHECK(d.which == Decomposition::Case::UnderElseNext);
    CHECK(redex_is_value(*d.delta));
    CHECK(step_thread(t, {}).empty());
}

TEST_CASE("decompose: nested elsenext splits at the outermost frame") {
    Term inner = Term::else_next(Term::get(Term::region(R_r)), Term::star());
    Term t = Term::else_next(inner, Term::var("n"));
    const Decomposition& d = must_decompose(decompose(t));
    CHECK(d.which == Decomposition::Case::UnderElseNext);
    CHECK(d.outer.empty());
    CHECK(d.inner.depth() == 1); // the inner elsenext frame
    CHECK(alpha_eq(d.later, Term::var("n")));
    REQUIRE(std::holds_alternative<redex::GetRegion>(*d.delta));
}

TEST_CASE("decompose: failures signal open or non-grammatical inputs") {
    CHECK(std::holds_alternative<DecompositionFailure>(decompose(Term::var("x"))));
    CHECK(std::holds_alternative<DecompositionFailure>(
        decompose(Term::par({Term::star(), Term::star()}))));
    CHECK(std::holds_alternative<DecompositionFailure>(
        decompose(Term::app(Term::star(), Term::star()))));
}

TEST_CASE("step: get yields one successor per alpha-distinct stored value") {
    Store s;
    s.add(R_r, unit_id());
    Term t = Term::get(Term::region(R_r));
    auto succ = step_thread(t, s);
    REQUIRE(succ.size() == 1);
    CHECK(alpha_eq(succ[0].term, unit_id()));
    CHECK(succ[0].store.alpha_equal(s)); // store unchanged

    s.add(R_r, Term::lam("y", Type::unit(), Term::star()));
    CHECK(step_thread(t, s).size() == 2);

    // empty region: stuck, not an error
    CHECK(step_thread(Term::get(Term::region(RegionName("empty"))), s).empty());
}

TEST_CASE("step: set adds rather than updates; re-adding keeps the store alpha-equal") {
    Store s;
    Term v = unit_id();
    auto succ = step_thread(Term::set(Term::region(R_r), v), s);
    REQUIRE(succ.size() == 1);
    CHECK(alpha_eq(succ[0].term, Term::star()));
    CHECK(succ[0].store.values(R_r).size() == 1);

    Store grown = succ[0].store;
    auto again = step_thread(Term::set(Term::region(R_r),
                                       Term::lam("w", Type::unit(), Term::var("w"))),
                             grown);
    REQUIRE(again.size() == 1);
    CHECK(again[0].store.alpha_equal(grown));
}

TEST_CASE("step: beta under elsenext drops the pending branch") {
    Term t = Term::else_next(Term::app(unit_id(), Term::star()), Term::var("n"));
    auto succ = step_thread(t, {});
    REQUIRE(succ.size() == 1);
    CHECK(alpha_eq(succ[0].term, Term::star())); // red(E) removed the elsenext frame
}

TEST_CASE("step: the 3.3 cycle recurs after two more steps") {
    // trace the displayed sequence: config after step 2 alpha-recurs after step 4
    Term t0 = diverging_term();
    Store s0;
    auto s1 = step_thread(t0, s0); // fire the set
    REQUIRE(s1.size() == 1);
    auto s2 = step_thread(s1[0].term, s1[0].store); // beta of (\x.r) *
    REQUIRE(s2.size() == 1);
    CHECK(alpha_eq(s2[0].term, Term::app(Term::get(Term::region(R_r)), Term::star())));
    auto s3 = step_thread(s2[0].term, s2[0].store); // get picks the stored closure
    REQUIRE(s3.size() == 1);
    auto s4 = step_thread(s3[0].term, s3[0].store); // beta
    REQUIRE(s4.size() == 1);
    CHECK(alpha_eq(s4[0].term, s2[0].term));
    CHECK(s4[0].store.alpha_equal(s2[0].store));
}

TEST_CASE("step_program: exhaustive successor counts") {
    // single stuck thread
    Program stuck({Term::get(Term::region(R_r))}, {});
    CHECK(program_successors(stuck).empty());
    CHECK(quiescent(stuck));

    // two independent beta threads -> 2 successors
    Term beta = Term::app(unit_id(), Term::star());
    Program two({beta, beta}, {});
    CHECK(program_successors(two).size() == 2);

    // a get over two alpha-distinct values -> 2 successors
    Store s;
    s.add(R_r, unit_id());
    s.add(R_r, Term::lam("y", Type::unit(), Term::star()));
    Program getter({Term::get(Term::region(R_r))}, s);
    CHECK(program_successors(getter).size() == 2);
}

TEST_CASE("tick: unconditional elsenext fires at the end of the instant") {
    Program p({Term::else_next(Term::star(), Term::get(Term::region(R_r)))}, {});
    TickResult t = tick(p);
    REQUIRE(t.ticked());
    REQUIRE(t.program.threads().size() == 1);
    CHECK(alpha_eq(t.program.threads()[0].term, Term::get(Term::region(R_r))));
    CHECK(t.program.threads()[0].id == p.threads()[0].id); // identity is stable
}

TEST_CASE("tick: blocked read under elsenext resumes with the branch") {
    Term blocked = Term::else_next(
        Term::app(Term::lam("x", Type::unit(), Term::star()), Term::get(Term::region(R_r))),
        Term::var("n"));
    Program p({blocked}, {});
    TickResult t = tick(p);
    REQUIRE(t.ticked());
    CHECK(alpha_eq(t.program.threads()[0].term, Term::var("n")));
}

TEST_CASE("tick: bare blocked reads and values persist; stores are unchanged") {
    Store s;
    s.add(R_rp, Term::star());
    Program p({Term::get(Term::region(R_r)), Term::star()}, s);
    TickResult t = tick(p);
    REQUIRE(t.ticked());
    CHECK(t.program.alpha_equal(p));
}

TEST_CASE("tick: refuses non-quiescent programs") {
    Program p({Term::app(unit_id(), Term::star())}, {});
    CHECK(tick(p).status == TickResult::Status::NotQuiescent);
}

TEST_CASE("run: the 3.3 program exhausts fuel seeded and cycles exhaustively") {
    Program p({diverging_term()}, {});
    RunConfig seeded;
    seeded.fuel = 1000;
    seeded.scheduler = SeededScheduler{42};
    RunResult sr = run(p, seeded);
    CHECK(sr.outcome.kind == Outcome::Kind::FuelExhausted);
    CHECK(sr.outcome.steps == 1000);

    RunConfig ex;
    ex.scheduler = ExhaustiveScheduler{100000};
    RunResult er = run(p, ex);
    CHECK(er.outcome.kind == Outcome::Kind::CycleDetected);
    // the recurring state is the paper's: get r *, r <= {\x. (get r) x}
    Store expected_store;
    expected_store.add(R_r, Term::lam("x", Type::unit(),
                                      Term::app(Term::get(Term::region(R_r)), Term::var("x"))));
    Program expected({Term::app(Term::get(Term::region(R_r)), Term::star())}, expected_store);
    CHECK(er.outcome.final_program.alpha_equal(expected));
}

TEST_CASE("run: factorial through the unstratified fix terminates with the right value") {
    // M = \x. ifz(x){1}{x * f(x - 1)}, region r : Int -{r}> Int
    Type int_t = Type::integer();
    Term m = Term::lam(
        "x", int_t,
        Term::if_zero(Term::var("x"), Term::int_lit(1),
                      Term::prim(PrimOp::Mul,
                                 {Term::var("x"),
                                  Term::app(Term::var("f"),
                                            Term::prim(PrimOp::Sub, {Term::var("x"),
                                                                     Term::int_lit(1)}))})));
    Term fix = expand_fix(R_r, "f", int_t, {R_r}, int_t, m);

    RegionContext R{{R_r, Type::arrow(int_t, {R_r}, int_t)}};
    CheckResult ty = synth_term(R, {}, fix, {SystemMode::Unstratified, true});
    REQUIRE(ty.ok());

    for (auto [input, expected] : {std::pair<long, long>{1, 1}, {3, 6}, {5, 120}}) {
        Program p({Term::app(fix, Term::int_lit(input))}, {});
        RunConfig cfg;
        cfg.scheduler = ExhaustiveScheduler{100000};
        cfg.instants = 1;
        RunResult r = run(p, cfg);
        REQUIRE(r.outcome.kind == Outcome::Kind::Terminated);
        REQUIRE(r.outcome.final_program.threads().size() == 1);
        const Term& result = r.outcome.final_program.threads()[0].term;
        REQUIRE(result.kind() == Term::Kind::IntLit);
        CHECK(result.int_value() == expected);
    }
}

TEST_CASE("run: the stratified clock writes i at instant i") {
    // M = \x. (\z. (* elsenext f(x+1))) (set(r', x)) under r':Int, r:Int -{r'}> Unit
    Type int_t = Type::integer();
    Term m = Term::lam(
        "x", int_t,
        Term::app(Term::lam("z", Type::unit(),
                            Term::else_next(Term::star(),
                                            Term::app(Term::var("f"),
                                                      Term::prim(PrimOp::Add,
                                                                 {Term::var("x"),
                                                                  Term::int_lit(1)})))),
                  Term::set(Term::region(R_rp), Term::var("x"))));
    Term fix = expand_fix(R_r, "f", int_t, {R_rp}, Type::unit(), m);
    RegionContext R{{R_rp, int_t}, {R_r, Type::arrow(int_t, {R_rp}, Type::unit())}};
    REQUIRE(synth_term(R, {}, fix, {SystemMode::Stratified, true}).ok());

    Program p({Term::app(fix, Term::int_lit(1))}, {});
    RunConfig cfg;
    cfg.instants = 3;
    cfg.scheduler = SeededScheduler{7};
    RunResult r = run(p, cfg);
    REQUIRE(r.outcome.kind == Outcome::Kind::Terminated);
    CHECK(r.outcome.instants == 3);
    const auto& written = r.outcome.final_program.store().values(R_rp);
    std::set<long> ints;
    for (const auto& v : written) ints.insert(v.int_value());
    CHECK(ints == std::set<long>{1, 2, 3});
}

TEST_CASE("run: state budgets and configuration validation") {
    Program p({diverging_term()}, {});
    RunConfig tiny;
    tiny.scheduler = ExhaustiveScheduler{2};
    CHECK(run(p, tiny).outcome.kind == Outcome::Kind::StateBudgetExhausted);

    RunConfig bad_fuel;
    bad_fuel.fuel = 0;
    CHECK_THROWS_AS(run(p, bad_fuel), std::invalid_argument);
    RunConfig bad_budget;
    bad_budget.scheduler = ExhaustiveScheduler{0};
    CHECK_THROWS_AS(run(p, bad_budget), std::invalid_argument);
}

TEST_CASE("property: decomposition is total and unique on generated typed terms") {
    testgen::Rng rng(51);
    int accepted = 0;
    for (int i = 0; i < 4000 && accepted < 1000; ++i) {
        RegionContext R = testgen::random_region_context(rng, 2);
        testgen::TermGen gen(rng, R);
        Term t = gen.gen(testgen::random_type(rng, R, 2), 3);
        if (!check_effect_free(R, {}, t).ok()) continue;
        if (t.kind() == Term::Kind::Par) continue; // threads split before stepping
        ++accepted;
        DecomposeResult dr = decompose(t);
        REQUIRE_MESSAGE(std::holds_alternative<Decomposition>(dr),
                        (print_term(t) + ": " +
                         (std::holds_alternative<DecompositionFailure>(dr)
                              ? std::get<DecompositionFailure>(dr).reason
                              : std::string())));
        const Decomposition& d = std::get<Decomposition>(dr);

        // independent oracle: exactly one situation applies
        testgen::OracleVerdict v = testgen::decomposition_oracle(t);
        int situations = (v.situation_value ? 1 : 0) +
                         (v.situation_redex_witnesses > 0 ? 1 : 0) +
                         (v.situation_else_next_witnesses > 0 ? 1 : 0);
        REQUIRE_MESSAGE(situations == 1, print_term(t));
        CHECK(v.situation_redex_witnesses <= 1);
        CHECK(v.situation_else_next_witnesses <= 1);

        switch (d.which) {
        case Decomposition::Case::IsValue: CHECK(v.situation_value); break;
        case Decomposition::Case::Redex:
            CHECK(v.situation_redex_witnesses == 1);
            CHECK(d.outer.time_insensitive());
            break;
        case Decomposition::Case::UnderElseNext:
            CHECK(v.situation_else_next_witnesses == 1);
            CHECK(d.outer.time_insensitive());
            break;
        }
    }
    CHECK(accepted >= 1000);
}

TEST_CASE("property: plugging a decomposition reconstructs the term") {
    testgen::Rng rng(52);
    int accepted = 0;
    for (int i = 0; i < 2000 && accepted < 500; ++i) {
        RegionContext R = testgen::random_region_context(rng, 2);
        testgen::TermGen gen(rng, R);
        Term t = gen.gen(testgen::random_type(rng, R, 2), 3);
        if (!check_effect_free(R, {}, t).ok() || t.kind() == Term::Kind::Par) continue;
        ++accepted;
        DecomposeResult dr = decompose(t);
        REQUIRE(std::holds_alternative<Decomposition>(dr));
        const Decomposition& d = std::get<Decomposition>(dr);
        if (d.which == Decomposition::Case::IsValue) {
            CHECK(alpha_eq(d.value, t));
            continue;
        }
        Term hole = std::visit(
            [&](const auto& rx) -> Term {
                using T = std::decay_t<decltype(rx)>;
                if constexpr (std::is_same_v<T, redex::Beta>)
                    return Term::app(rx.fn, rx.arg);
                else if constexpr (std::is_same_v<T, redex::GetRegion>)
                    return Term::get(Term::region(rx.region));
                else if constexpr (std::is_same_v<T, redex::SetRegion>)
                    return Term::set(Term::region(rx.region), rx.value);
                else if constexpr (std::is_same_v<T, redex::Prim>)
                    return rx.term;
                else
                    return rx.value;
            },
            *d.delta);
        CHECK(alpha_eq(plug(d.full_context(), hole), t));
    }
    CHECK(accepted >= 500);
}

TEST_CASE("property: readiness — interacting redexes appear in the synthesized effect") {
    testgen::Rng rng(53);
    int interactions = 0;
    for (int i = 0; i < 2000 && interactions < 400; ++i) {
        RegionContext R = testgen::random_region_context(rng, 2);
        testgen::TermGen gen(rng, R);
        // build E[get r] / E[set(r, V)] directly, wrapped in well-typed layers
        const auto& [region, content] = R.entries()[testgen::pick(rng, R.size())];
        Term t = testgen::chance(rng, 0.5)
                     ? Term::get(Term::region(region))
                     : Term::set(Term::region(region), gen.gen_value(content));
        Type t_ty = t.kind() == Term::Kind::Get ? content : Type::unit();
        for (int layer = static_cast<int>(testgen::pick(rng, 3)); layer > 0; --layer)
            t = Term::app(Term::lam("w", t_ty, Term::var("w")), t);
        CheckResult ty = synth_term(R, {}, t, {SystemMode::Unstratified, true});
        if (!ty.ok()) continue;
        DecomposeResult dr = decompose(t);
        REQUIRE(std::holds_alternative<Decomposition>(dr));
        const Decomposition& d = std::get<Decomposition>(dr);
        REQUIRE(d.which == Decomposition::Case::Redex);
        if (auto* g = std::get_if<redex::GetRegion>(&*d.delta)) {
            ++interactions;
            CHECK(ty.get().effect.contains(g->region));
        } else if (auto* s = std::get_if<redex::SetRegion>(&*d.delta)) {
            ++interactions;
            CHECK(ty.get().effect.contains(s->region));
        }
    }
    CHECK(interactions >= 400);
}

TEST_CASE("property: stores only grow along reduction steps") {
    testgen::Rng rng(54);
    int steps_checked = 0;
    for (int i = 0; i < 300; ++i) {
        RegionContext R = testgen::random_region_context(rng, 2);
        testgen::TermGen gen(rng, R);
        std::vector<Term> threads;
        for (int k = 0; k < 2; ++k) {
            Term t = gen.gen(Type::unit(), 3);
            if (check_effect_free(R, {}, t).ok() && t.kind() != Term::Kind::Par)
                threads.push_back(t);
        }
        if (threads.empty()) continue;
        Store store;
        for (const auto& [name, ty] : R.entries()) store.add(name, gen.gen_value(ty));
        Program p(threads, store);
        for (int depth = 0; depth < 6; ++depth) {
            auto succs = program_successors(p);
            if (succs.empty()) break;
            for (const auto& s : succs) {
                ++steps_checked;
                CHECK(p.store().contained_in(s.program.store()));
            }
            p = succs[testgen::pick(rng, succs.size())].program;
        }
    }
    CHECK(steps_checked > 200);
}

TEST_CASE("property: tick/progress duality on reachable states") {
    testgen::Rng rng(55);
    int quiescent_seen = 0, live_seen = 0;
    for (int i = 0; i < 400; ++i) {
        RegionContext R = testgen::random_region_context(rng, 2);
        testgen::TermGen gen(rng, R);
        Term t = gen.gen(Type::unit(), 3);
        if (!check_effect_free(R, {}, t).ok() || t.kind() == Term::Kind::Par) continue;
        Program p({t}, {});
        for (int depth = 0; depth < 8; ++depth) {
            auto succs = program_successors(p);
            TickResult tr = tick(p);
            if (succs.empty()) {
                ++quiescent_seen;
                REQUIRE_MESSAGE(tr.status != TickResult::Status::Undefined, tr.reason);
                CHECK(tr.ticked());
                break;
            }
            ++live_seen;
            CHECK(tr.status == TickResult::Status::NotQuiescent);
            p = succs[0].program;
        }
    }
    CHECK(quiescent_seen > 100);
    CHECK(live_seen > 100);
}

TEST_CASE("property: every seeded trace is a path in the exhaustive graph") {
    // nondeterministic program: two readers over a two-valued region
    Store s;
    s.add(R_r, Term::star());
    s.add(R_r, unit_id()); // two alpha-distinct values
    Term reader = Term::app(Term::lam("v", Type::unit(), Term::star()),
                            Term::app(Term::lam("u", Type::unit(), Term::star()),
                                      Term::get(Term::region(R_r))));
    // make the region type consistent: both stored values must share a type;
    // use unit-typed star and an identity — fine for |-ef stepping purposes
    Program p({reader, reader}, s);
    for (std::uint64_t seed : {1ull, 7ull, 99ull}) {
        RunConfig cfg;
        cfg.scheduler = SeededScheduler{seed};
        cfg.instants = 2;
        RunResult r = run(p, cfg);
        // replay the trace as a path in the exhaustive successor graph
        Program state = p;
        for (const auto& rec : r.trace) {
            if (rec.rule == "tick") {
                TickResult t = tick(state);
                REQUIRE(t.ticked());
                CHECK(state_hash(t.program) == rec.state_hash);
                state = t.program;
                continue;
            }
            bool found = false;
            for (const auto& succ : program_successors(state)) {
                if (state_hash(succ.program) == rec.state_hash) {
                    state = succ.program;
                    found = true;
                    break;
                }
            }
            REQUIRE_MESSAGE(found, ("trace step " + std::to_string(rec.step) +
                                    " is not an exhaustive edge"));
        }
        CHECK(r.outcome.kind == Outcome::Kind::Terminated);
    }
    // and the seeded runner itself replays deterministically
    RunConfig cfg;
    cfg.scheduler = SeededScheduler{5};
    cfg.instants = 2;
    RunResult a = run(p, cfg);
    RunResult b = run(p, cfg);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i)
        CHECK(a.trace[i].state_hash == b.trace[i].state_hash);
}

TEST_CASE("subject reduction along explored transitions") {
    // producer/consumer over a channel-as-region
    RegionContext R{{R_r, Type::unit()}};
    Term producer = Term::set(Term::region(R_r), Term::star());
    Term consumer = Term::app(Term::lam("v", Type::unit(), Term::star()),
                              Term::get(Term::region(R_r)));
    Program p({producer, consumer, consumer}, {});
    CheckResult initial = check_program(R, {}, p, {SystemMode::Stratified, true});
    REQUIRE(initial.ok());
    TypeAndEffect expected = initial.get();

    std::vector<Program> frontier = {p};
    int states = 0;
    for (int depth = 0; depth < 8 && !frontier.empty(); ++depth) {
        std::vector<Program> next;
        for (const auto& state : frontier) {
            for (const auto& succ : program_successors(state)) {
                ++states;
                CheckResult again = check_program(R, {}, succ.program,
                                                  {SystemMode::Stratified, true});
                REQUIRE(again.ok());
                CHECK(subtype(R, again.get(), expected));
                // the touched region belongs to the instant's effect
                if (succ.event.region) CHECK(expected.effect.contains(*succ.event.region));
                next.push_back(succ.program);
            }
        }
        frontier = std::move(next);
    }
    CHECK(states > 4);
}

} // TEST_SUITE
