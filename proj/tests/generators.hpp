// Test-only random generators and brute-force oracles. Nothing here is used
// by the library itself; the oracles deliberately re-derive properties from
// first principles so they stay independent of the implementation they check.
#ifndef STRATAL_TESTS_GENERATORS_HPP
#define STRATAL_TESTS_GENERATORS_HPP

#include <array>
#include <optional>
#include <random>
#include <vector>

#include "stratal/context.hpp"
#include "stratal/decompose.hpp"
#include "stratal/term.hpp"
#include "stratal/typing.hpp"

namespace stratal::testgen {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}
inline bool chance(Rng& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

// ---- types and contexts ------------------------------------------------------

inline Effect random_effect(Rng& rng, const RegionContext& r_ctx) {
    Effect e;
    for (const auto& [name, ty] : r_ctx.entries())
        if (chance(rng, 0.3)) e.insert(name);
    return e;
}

// A random value type over the given regions. Domains never get behaviour
// codomains, matching well-formedness.
inline Type random_type(Rng& rng, const RegionContext& r_ctx, int depth,
                        bool allow_behaviour_codomain = false) {
    if (depth <= 0 || chance(rng, 0.35)) {
        switch (pick(rng, r_ctx.size() ? 3 : 2)) {
        case 0: return Type::unit();
        case 1: return Type::integer();
        default: {
            const auto& [name, ty] = r_ctx.entries()[pick(rng, r_ctx.size())];
            return Type::region(name, ty);
        }
        }
    }
    Type domain = random_type(rng, r_ctx, depth - 1, false);
    Type codomain = allow_behaviour_codomain && chance(rng, 0.15)
                        ? Type::behaviour()
                        : random_type(rng, r_ctx, depth - 1, allow_behaviour_codomain);
    return Type::arrow(std::move(domain), random_effect(rng, r_ctx), std::move(codomain));
}

// A random stratified region context: entry i's type is built over the prefix,
// so the result is well formed in both systems.
inline RegionContext random_region_context(Rng& rng, std::size_t n, int type_depth = 3) {
    RegionContext out;
    for (std::size_t i = 0; i < n; ++i) {
        Type ty = random_type(rng, out, type_depth);
        out.push(RegionName("g" + std::to_string(i)), std::move(ty));
    }
    return out;
}

// ---- subtype chains ------------------------------------------------------------

// Widen t within dom(R): result t' with t <= t'.
inline Type widen(Rng& rng, const RegionContext& r_ctx, const Type& t);
// Narrow t within dom(R): result t' with t' <= t.
inline Type narrow(Rng& rng, const RegionContext& r_ctx, const Type& t);

inline Effect widen_effect(Rng& rng, const RegionContext& r_ctx, const Effect& e) {
    Effect out = e;
    for (const auto& [name, ty] : r_ctx.entries())
        if (chance(rng, 0.25)) out.insert(name);
    return out;
}

inline Effect narrow_effect(Rng& rng, const Effect& e) {
    Effect out;
    for (const auto& r : e)
        if (!chance(rng, 0.3)) out.insert(r);
    return out;
}

inline Type widen(Rng& rng, const RegionContext& r_ctx, const Type& t) {
    if (!t.is_arrow() || chance(rng, 0.2)) return t; // only reflexivity elsewhere
    return Type::arrow(narrow(rng, r_ctx, t.domain()), widen_effect(rng, r_ctx, t.effect()),
                       widen(rng, r_ctx, t.codomain()));
}

inline Type narrow(Rng& rng, const RegionContext& r_ctx, const Type& t) {
    if (!t.is_arrow() || chance(rng, 0.2)) return t;
    return Type::arrow(widen(rng, r_ctx, t.domain()), narrow_effect(rng, t.effect()),
                       narrow(rng, r_ctx, t.codomain()));
}

// ---- well-typed closed terms ------------------------------------------------------

// Generates a random closed candidate term intended to check against
// (target, any effect) under the unstratified system. Callers filter with the
// checker; the generator is biased to produce valid terms but need not be
// perfect.
class TermGen {
  public:
    struct Binding {
        std::string name;
        Type type;
    };

    TermGen(Rng& rng, const RegionContext& r_ctx, bool with_else_next = true)
        : rng_(rng), r_ctx_(r_ctx), with_else_next_(with_else_next) {}

    Term gen(const Type& target, int depth) { return gen(target, depth, {}); }
    // Open term over the given scope (for substitution-property tests).
    Term gen_open(const Type& target, int depth, std::vector<Binding> scope) {
        return gen(target, depth, std::move(scope));
    }
    Term gen_value(const Type& target) { return value_of(target, {}); }

  private:

    Term gen(const Type& target, int depth, std::vector<Binding> scope) {
        if (depth <= 0) return value_of(target, scope);
        switch (pick(rng_, 8)) {
        case 0: return value_of(target, scope);
        case 1: { // variable of the right type
            std::vector<const Binding*> fits;
            for (const auto& b : scope)
                if (b.type == target) fits.push_back(&b);
            if (fits.empty()) return value_of(target, scope);
            return Term::var(fits[pick(rng_, fits.size())]->name);
        }
        case 2: { // beta redex returning target
            Type domain = random_type(rng_, r_ctx_, 1);
            std::string x = fresh(scope);
            std::vector<Binding> inner = scope;
            inner.push_back({x, domain});
            Term body = gen(target, depth - 1, inner);
            Term arg = gen(domain, depth - 1, scope);
            return Term::app(Term::lam(x, domain, std::move(body)), std::move(arg));
        }
        case 3: { // read a region whose content is the target
            for (const auto& [name, ty] : r_ctx_.entries())
                if (ty == target) return Term::get(Term::region(name));
            return value_of(target, scope);
        }
        case 4: { // write then continue (only at unit type)
            if (!target.is_unit() || r_ctx_.size() == 0) return value_of(target, scope);
            const auto& [name, ty] = r_ctx_.entries()[pick(rng_, r_ctx_.size())];
            return Term::set(Term::region(name), gen(ty, depth - 1, scope));
        }
        case 5: { // elsenext
            if (!with_else_next_) return value_of(target, scope);
            Term now = gen(target, depth - 1, scope);
            Term later = gen(target, depth - 1, scope);
            return Term::else_next(std::move(now), std::move(later));
        }
        case 6: { // arithmetic
            if (!(target == Type::integer())) return value_of(target, scope);
            Term a = gen(Type::integer(), depth - 1, scope);
            Term b = gen(Type::integer(), depth - 1, scope);
            PrimOp op = std::array{PrimOp::Add, PrimOp::Sub, PrimOp::Mul}[pick(rng_, 3)];
            return Term::prim(op, {std::move(a), std::move(b)});
        }
        default: { // ifz
            Term c = gen(Type::integer(), depth - 1, scope);
            Term t1 = gen(target, depth - 1, scope);
            Term t2 = gen(target, depth - 1, scope);
            return Term::if_zero(std::move(c), std::move(t1), std::move(t2));
        }
        }
    }

    Term value_of(const Type& target, const std::vector<Binding>& scope) {
        switch (target.kind()) {
        case Type::Kind::Unit: return Term::star();
        case Type::Kind::Int:
            return Term::int_lit(static_cast<long>(pick(rng_, 5)));
        case Type::Kind::Region: return Term::region(target.region_name());
        case Type::Kind::Arrow: {
            std::string x = fresh(scope);
            std::vector<Binding> inner = scope;
            inner.push_back({x, target.domain()});
            // constant-ish function; small bodies keep filtering cheap
            Term body = gen(target.codomain(), 1, inner);
            return Term::lam(x, target.domain(), std::move(body));
        }
        case Type::Kind::Behaviour: {
            Term a = value_of(Type::unit(), scope);
            Term b = value_of(Type::unit(), scope);
            return Term::par({std::move(a), std::move(b)});
        }
        }
        return Term::star();
    }

    std::string fresh(const std::vector<Binding>& scope) {
        return "t" + std::to_string(scope.size()) + "_" + std::to_string(counter_++);
    }

    Rng& rng_;
    const RegionContext& r_ctx_;
    bool with_else_next_;
    int counter_ = 0;
};

// ---- brute-force decomposition oracle ------------------------------------------------

// Every grammar split t = plug(E, hole): enumerated directly from
//   E ::= [] | EM | VE | get E | set(E,M) | set(V,E) | (E elsenext M) | prim frames
struct Split {
    EvalContext ctx;
    Term hole;
};

inline void all_splits(const Term& t, std::vector<Split>& out) {
    out.push_back({EvalContext{}, t});
    auto sub = [&](Frame f, const Term& inner) {
        std::vector<Split> inner_splits;
        all_splits(inner, inner_splits);
        for (auto& s : inner_splits) {
            EvalContext ctx;
            ctx.push_inner(f);
            out.push_back({ctx.composed_with(s.ctx), s.hole});
        }
    };
    switch (t.kind()) {
    case Term::Kind::App:
        sub(frame::AppFun{t.arg()}, t.fn());
        if (is_value(t.fn())) sub(frame::AppArg{t.fn()}, t.arg());
        break;
    case Term::Kind::Get: sub(frame::GetFrame{}, t.get_target()); break;
    case Term::Kind::Set:
        sub(frame::SetTarget{t.set_value()}, t.set_target());
        if (is_value(t.set_target())) sub(frame::SetValue{t.set_target()}, t.set_value());
        break;
    case Term::Kind::ElseNext:
        sub(frame::ElseNextFrame{t.later_branch()}, t.now_branch());
        break;
    case Term::Kind::Prim: {
        const auto& args = t.prim_args();
        for (std::size_t i = 0; i < args.size(); ++i) {
            bool prefix_values = true;
            for (std::size_t j = 0; j < i; ++j) prefix_values = prefix_values && is_value(args[j]);
            if (!prefix_values) break;
            frame::PrimFrame f{t.prim_op(), {}, {}};
            for (std::size_t j = 0; j < i; ++j) f.done.push_back(args[j]);
            for (std::size_t j = i + 1; j < args.size(); ++j) f.rest.push_back(args[j]);
            sub(std::move(f), args[i]);
        }
        break;
    }
    case Term::Kind::IfZero:
        sub(frame::IfZeroFrame{t.then_branch(), t.else_branch()}, t.cond());
        break;
    default: break;
    }
}

inline bool redex_shaped(const Term& t) {
    switch (t.kind()) {
    case Term::Kind::App:
        return t.fn().kind() == Term::Kind::Lam && is_value(t.arg());
    case Term::Kind::Get:
        return t.get_target().kind() == Term::Kind::Region;
    case Term::Kind::Set:
        return t.set_target().kind() == Term::Kind::Region && is_value(t.set_value());
    case Term::Kind::Prim: {
        for (const auto& a : t.prim_args())
            if (a.kind() != Term::Kind::IntLit) return false;
        return true;
    }
    case Term::Kind::IfZero: return t.cond().kind() == Term::Kind::IntLit;
    default: return false;
    }
}

// Which of the proposition's three situations apply, counted independently of
// decompose(). Exactly one must hold for closed |-ef-typable terms.
struct OracleVerdict {
    bool situation_value = false;
    int situation_redex_witnesses = 0;     // case 2: time-insensitive E, redex hole
    int situation_else_next_witnesses = 0; // case 3: outermost elsenext on the path
};

inline OracleVerdict decomposition_oracle(const Term& t) {
    OracleVerdict v;
    v.situation_value = is_value(t);
    std::vector<Split> splits;
    all_splits(t, splits);
    for (const auto& s : splits) {
        if (!s.ctx.time_insensitive()) continue;
        if (redex_shaped(s.hole)) ++v.situation_redex_witnesses;
        if (s.hole.kind() == Term::Kind::ElseNext) {
            const Term& now = s.hole.now_branch();
            if (is_value(now)) {
                ++v.situation_else_next_witnesses;
            } else {
                // does now contain a redex through some (arbitrary) context,
                // or a value directly under a nested elsenext?
                std::vector<Split> inner;
                all_splits(now, inner);
                bool found = false;
                for (const auto& is : inner) {
                    if (redex_shaped(is.hole)) { found = true; break; }
                    if (is.hole.kind() == Term::Kind::ElseNext &&
                        is_value(is.hole.now_branch())) {
                        found = true;
                        break;
                    }
                }
                if (found) ++v.situation_else_next_witnesses;
            }
        }
    }
    return v;
}

} // namespace stratal::testgen

#endif // STRATAL_TESTS_GENERATORS_HPP
