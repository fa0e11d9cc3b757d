#ifndef STRATAL_DECOMPOSE_HPP
#define STRATAL_DECOMPOSE_HPP

#include <optional>
#include <string>
#include <variant>

#include "stratal/context.hpp"
#include "stratal/term.hpp"

namespace stratal {

// The redex Delta found at the hole of a decomposition.
namespace redex {
struct Beta {
    Term fn;  // a lambda
    Term arg; // a value
};
struct GetRegion {
    RegionName region;
};
struct SetRegion {
    RegionName region;
    Term value;
};
struct Prim {
    Term term; // a Prim or IfZero node with value operands
};
// Case 3 only: the term under the elsenext is already a value.
struct IsValueDelta {
    Term value;
};
} // namespace redex

using Redex = std::variant<redex::Beta, redex::GetRegion, redex::SetRegion, redex::Prim,
                           redex::IsValueDelta>;

inline bool redex_is_value(const Redex& d) {
    return std::holds_alternative<redex::IsValueDelta>(d);
}
inline bool redex_is_get(const Redex& d) {
    return std::holds_alternative<redex::GetRegion>(d);
}

inline const char* redex_name(const Redex& d) {
    if (std::holds_alternative<redex::Beta>(d)) return "beta";
    if (std::holds_alternative<redex::GetRegion>(d)) return "get";
    if (std::holds_alternative<redex::SetRegion>(d)) return "set";
    if (std::holds_alternative<redex::Prim>(d)) return "prim";
    return "value";
}

// Unique decomposition of a closed |-ef-typable term. Exactly one variant
// applies:
//   1. the term is a value;
//   2. E[Delta] with E time insensitive and Delta a real redex;
//   3. E[(E'[Delta]) elsenext N] with E time insensitive; Delta may also be a
//      value (then E' is empty).
struct Decomposition {
    enum class Case { IsValue, Redex, UnderElseNext };
    Case which;

    Term value;        // IsValue
    EvalContext outer; // Redex: the whole context; UnderElseNext: the part above
    EvalContext inner; // UnderElseNext: the context below the first elsenext
    std::optional<Redex> delta;
    Term later; // UnderElseNext: the pending branch

    // The full evaluation context around delta (outer ++ elsenext ++ inner).
    EvalContext full_context() const {
        if (which == Case::Redex) return outer;
        EvalContext full = outer;
        full.push_inner(frame::ElseNextFrame{later});
        return full.composed_with(inner);
    }
};

struct DecompositionFailure {
    std::string reason;
    Term at;
};

using DecomposeResult = std::variant<Decomposition, DecompositionFailure>;

namespace detail {

inline DecomposeResult decompose_impl(const Term& t) {
    auto failure = [&](std::string why) -> DecomposeResult {
        return DecompositionFailure{std::move(why), t};
    };
    auto redex_here = [&](Redex d) -> DecomposeResult {
        Decomposition out;
        out.which = Decomposition::Case::Redex;
        out.delta = std::move(d);
        return out;
    };
    // Recurse into `sub` under one elementary frame.
    auto under = [&](Frame f, const Term& sub) -> DecomposeResult {
        DecomposeResult r = decompose_impl(sub);
        if (std::holds_alternative<DecompositionFailure>(r)) return r;
        Decomposition d = std::get<Decomposition>(std::move(r));
        if (d.which == Decomposition::Case::IsValue)
            return failure("no redex under frame"); // caller prevents this
        d.outer.push_outer(std::move(f));
        return d;
    };

    switch (t.kind()) {
    case Term::Kind::Var: return failure("open term");
    case Term::Kind::Par: return failure("behaviour (par) in redex position");
    case Term::Kind::RefMacro:
    case Term::Kind::FixMacro: return failure("unexpanded macro");
    case Term::Kind::Region:
    case Term::Kind::Star:
    case Term::Kind::IntLit:
    case Term::Kind::Lam: {
        Decomposition out;
        out.which = Decomposition::Case::IsValue;
        out.value = t;
        return out;
    }
    case Term::Kind::App: {
        const Term& f = t.fn();
        const Term& a = t.arg();
        if (!is_value(f)) return under(frame::AppFun{a}, f);
        if (!is_value(a)) return under(frame::AppArg{f}, a);
        if (f.kind() != Term::Kind::Lam) return failure("application of a non-lambda value");
        return redex_here(redex::Beta{f, a});
    }
    case Term::Kind::Get: {
        const Term& target = t.get_target();
        if (!is_value(target)) return under(frame::GetFrame{}, target);
        if (target.kind() != Term::Kind::Region) return failure("get on a non-region value");
        return redex_here(redex::GetRegion{target.region_name()});
    }
    case Term::Kind::Set: {
        const Term& target = t.set_target();
        const Term& value = t.set_value();
        if (!is_value(target)) return under(frame::SetTarget{value}, target);
        if (!is_value(value)) return under(frame::SetValue{target}, value);
        if (target.kind() != Term::Kind::Region) return failure("set on a non-region value");
        return redex_here(redex::SetRegion{target.region_name(), value});
    }
    case Term::Kind::Prim: {
        const auto& args = t.prim_args();
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (is_value(args[i])) continue;
            frame::PrimFrame f{t.prim_op(), {}, {}};
            for (std::size_t j = 0; j < i; ++j) f.done.push_back(args[j]);
            for (std::size_t j = i + 1; j < args.size(); ++j) f.rest.push_back(args[j]);
            return under(std::move(f), args[i]);
        }
        for (const auto& a : args)
            if (a.kind() != Term::Kind::IntLit) return failure("arithmetic on a non-integer");
        return redex_here(redex::Prim{t});
    }
    case Term::Kind::IfZero: {
        const Term& c = t.cond();
        if (!is_value(c)) return under(frame::IfZeroFrame{t.then_branch(), t.else_branch()}, c);
        if (c.kind() != Term::Kind::IntLit) return failure("ifz on a non-integer");
        return redex_here(redex::Prim{t});
    }
    case Term::Kind::ElseNext: {
        DecomposeResult sub = decompose_impl(t.now_branch());
        if (std::holds_alternative<DecompositionFailure>(sub)) return sub;
        Decomposition d = std::get<Decomposition>(std::move(sub));
        Decomposition out;
        out.which = Decomposition::Case::UnderElseNext;
        out.later = t.later_branch();
        switch (d.which) {
        case Decomposition::Case::IsValue:
            out.delta = redex::IsValueDelta{d.value};
            return out;
        case Decomposition::Case::Redex:
            out.inner = std::move(d.outer);
            out.delta = std::move(d.delta);
            return out;
        case Decomposition::Case::UnderElseNext: {
            // The nearest elsenext is this one: everything below, including
            // the sub-decomposition's own elsenext frame, becomes `inner`.
            EvalContext inner = std::move(d.outer);
            inner.push_inner(frame::ElseNextFrame{d.later});
            out.inner = inner.composed_with(d.inner);
            out.delta = std::move(d.delta);
            return out;
        }
        }
        return failure("unreachable");
    }
    }
    return failure("unreachable term kind");
}

} // namespace detail

inline DecomposeResult decompose(const Term& t) { return detail::decompose_impl(t); }

} // namespace stratal

#endif // STRATAL_DECOMPOSE_HPP
