#ifndef STRATAL_TYPING_HPP
#define STRATAL_TYPING_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stratal/store.hpp"
#include "stratal/term.hpp"
#include "stratal/type.hpp"

namespace stratal {

// Which judgement family is in force. EffectFree is the erased system |-ef:
// all effects dropped, no subtyping.
enum class SystemMode { Unstratified, Stratified, EffectFree };

inline const char* system_name(SystemMode m) {
    switch (m) {
    case SystemMode::Unstratified: return "unstratified";
    case SystemMode::Stratified: return "stratified";
    case SystemMode::EffectFree: return "effect-free";
    }
    return "?";
}

// Ordered association of regions to content types. Order is significant in
// stratified mode (each entry's type may mention only earlier regions) and
// irrelevant in unstratified mode.
class RegionContext {
  public:
    RegionContext() = default;
    RegionContext(std::initializer_list<std::pair<RegionName, Type>> entries)
        : entries_(entries) {}

    void push(RegionName r, Type content) {
        entries_.emplace_back(std::move(r), std::move(content));
    }

    const std::vector<std::pair<RegionName, Type>>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    bool has(const RegionName& r) const { return lookup(r).has_value(); }
    std::optional<Type> lookup(const RegionName& r) const {
        for (const auto& [name, ty] : entries_)
            if (name == r) return ty;
        return std::nullopt;
    }

    Effect dom() const {
        Effect out;
        for (const auto& [name, ty] : entries_) out.insert(name);
        return out;
    }

    RegionContext prefix(std::size_t n) const {
        RegionContext out;
        for (std::size_t i = 0; i < n && i < entries_.size(); ++i)
            out.entries_.push_back(entries_[i]);
        return out;
    }

    RegionContext extended(const RegionContext& more) const {
        RegionContext out = *this;
        for (const auto& e : more.entries_) out.entries_.push_back(e);
        return out;
    }

    RegionContext erased() const {
        RegionContext out;
        for (const auto& [name, ty] : entries_) out.push(name, ty.erased());
        return out;
    }

  private:
    std::vector<std::pair<RegionName, Type>> entries_;
};

// Variable typing context Gamma.
class TypingContext {
  public:
    TypingContext() = default;
    TypingContext(std::initializer_list<std::pair<std::string, Type>> entries)
        : entries_(entries) {}

    TypingContext with(std::string name, Type ty) const {
        TypingContext out = *this;
        for (auto& [n, t] : out.entries_) {
            if (n == name) { // inner binding shadows
                t = std::move(ty);
                return out;
            }
        }
        out.entries_.emplace_back(std::move(name), std::move(ty));
        return out;
    }

    std::optional<Type> lookup(const std::string& name) const {
        for (const auto& [n, t] : entries_)
            if (n == name) return t;
        return std::nullopt;
    }

    const std::vector<std::pair<std::string, Type>>& entries() const { return entries_; }

    TypingContext erased() const {
        TypingContext out;
        for (const auto& [n, t] : entries_) out.entries_.emplace_back(n, t.erased());
        return out;
    }

  private:
    std::vector<std::pair<std::string, Type>> entries_;
};

// ---- diagnostics -------------------------------------------------------------

enum class TypeErrorKind {
    UnboundVariable,
    UnboundRegion,
    IllFormedRegionContext,
    StratificationViolation,
    EffectNotInScope,
    DomainMismatch,
    NotAFunction,
    BehaviourNotAllowed,
    StoreValueIllTyped,
};

inline const char* type_error_kind_name(TypeErrorKind k) {
    switch (k) {
    case TypeErrorKind::UnboundVariable: return "unbound-variable";
    case TypeErrorKind::UnboundRegion: return "unbound-region";
    case TypeErrorKind::IllFormedRegionContext: return "region-context-ill-formed";
    case TypeErrorKind::StratificationViolation: return "stratification-violation";
    case TypeErrorKind::EffectNotInScope: return "effect-not-in-scope";
    case TypeErrorKind::DomainMismatch: return "domain-mismatch";
    case TypeErrorKind::NotAFunction: return "not-a-function";
    case TypeErrorKind::BehaviourNotAllowed: return "behaviour-in-domain";
    case TypeErrorKind::StoreValueIllTyped: return "store-value-ill-typed";
    }
    return "?";
}

struct TypeError {
    TypeErrorKind kind = TypeErrorKind::DomainMismatch;
    std::string rule;     // name of the failing rule
    Span span;            // best-effort source location
    std::string expected; // rendered expectation, may be empty
    std::string actual;   // rendered actual, may be empty
    std::string detail;   // human-readable message

    std::string to_string() const {
        std::string out = std::string(type_error_kind_name(kind)) + " [" + rule + "]";
        if (span.valid()) out += " at " + span.to_string();
        out += ": " + detail;
        if (!expected.empty()) out += " (expected " + expected + ", got " + actual + ")";
        return out;
    }
};

namespace detail {
struct TypeErrorException {
    TypeError error;
};
[[noreturn]] inline void fail(TypeErrorKind kind, std::string rule, Span span,
                              std::string detail, std::string expected = "",
                              std::string actual = "") {
    throw TypeErrorException{TypeError{kind, std::move(rule), span, std::move(expected),
                                       std::move(actual), std::move(detail)}};
}
} // namespace detail

// Result of a judgement: a pair (alpha, e) or the first error found along a
// leftmost-innermost traversal.
struct CheckResult {
    std::optional<TypeAndEffect> value;
    std::optional<TypeError> error;

    bool ok() const { return value.has_value(); }
    const TypeAndEffect& get() const {
        if (!value) throw std::logic_error("CheckResult::get on error: " + error->to_string());
        return *value;
    }
};

struct CheckOptions {
    SystemMode mode = SystemMode::Unstratified;
    bool subsumption = true; // --no-subsumption disables the subtyping rule
};

// ---- well-formedness ----------------------------------------------------------

namespace detail {

// Domain positions accept types A that are neither Beh nor an arrow whose
// codomain is Beh.
inline bool valid_domain_type(const Type& t) {
    if (t.is_behaviour()) return false;
    if (t.is_arrow() && t.codomain().is_behaviour()) return false;
    return true;
}

// Compatibility walk shared by the unstratified R -| A judgement and the
// stratified R |- A judgement (they differ only in which R they receive).
// `full_dom` is used to tell stratification violations from unbound regions.
inline void compat_type(const RegionContext& r_ctx, const Type& t, SystemMode mode,
                        const Effect* full_dom, const char* rule) {
    switch (t.kind()) {
    case Type::Kind::Unit:
    case Type::Kind::Int:
    case Type::Kind::Behaviour: return;
    case Type::Kind::Region: {
        auto content = r_ctx.lookup(t.region_name());
        if (!content) {
            if (full_dom && full_dom->contains(t.region_name()))
                fail(TypeErrorKind::StratificationViolation, rule, {},
                     "region " + t.region_name().str() +
                         " may only be mentioned by later entries");
            fail(TypeErrorKind::UnboundRegion, rule, {},
                 "region " + t.region_name().str() + " is not bound in the region context");
        }
        Type want = mode == SystemMode::EffectFree ? content->erased() : *content;
        Type have = mode == SystemMode::EffectFree ? t.content().erased() : t.content();
        if (!(want == have))
            fail(TypeErrorKind::IllFormedRegionContext, rule, {},
                 "content of Reg[" + t.region_name().str() + "] does not match the region context",
                 want.to_string(), have.to_string());
        return;
    }
    case Type::Kind::Arrow: {
        if (!valid_domain_type(t.domain()))
            fail(TypeErrorKind::BehaviourNotAllowed, rule, {},
                 "behaviour types cannot appear in a domain position");
        compat_type(r_ctx, t.domain(), mode, full_dom, rule);
        compat_type(r_ctx, t.codomain(), mode, full_dom, rule);
        if (mode != SystemMode::EffectFree) {
            for (const auto& reg : t.effect()) {
                if (r_ctx.has(reg)) continue;
                if (full_dom && full_dom->contains(reg))
                    fail(TypeErrorKind::StratificationViolation, rule, {},
                         "effect on region " + reg.str() +
                             " refers to the entry itself or a later one");
                fail(TypeErrorKind::EffectNotInScope, rule, {},
                     "effect region " + reg.str() + " is not bound in the region context");
            }
        }
        return;
    }
    }
}

inline void wf_region_context_impl(const RegionContext& r_ctx, SystemMode mode) {
    // names pairwise distinct in every mode
    for (std::size_t i = 0; i < r_ctx.size(); ++i)
        for (std::size_t j = i + 1; j < r_ctx.size(); ++j)
            if (r_ctx.entries()[i].first == r_ctx.entries()[j].first)
                fail(TypeErrorKind::IllFormedRegionContext, "wf-region-context", {},
                     "duplicate region " + r_ctx.entries()[i].first.str());
    for (const auto& [name, ty] : r_ctx.entries())
        if (ty.is_behaviour())
            fail(TypeErrorKind::BehaviourNotAllowed, "wf-region-context", {},
                 "region " + name.str() + " cannot hold behaviours");

    if (mode == SystemMode::Stratified) {
        Effect full = r_ctx.dom();
        for (std::size_t i = 0; i < r_ctx.size(); ++i) {
            RegionContext prefix = r_ctx.prefix(i);
            compat_type(prefix, r_ctx.entries()[i].second, mode, &full, "wf-stratified");
        }
    } else {
        for (const auto& [name, ty] : r_ctx.entries())
            compat_type(r_ctx, ty, mode, nullptr, "wf-compatible");
    }
}

inline void wf_type_impl(const RegionContext& r_ctx, const Type& t, SystemMode mode) {
    // In both systems a standalone type may mention all of dom(R); the
    // stratified order constrains only context formation.
    compat_type(r_ctx, t, mode, nullptr, "wf-type");
}

} // namespace detail

inline std::optional<TypeError> wf_region_context(const RegionContext& r_ctx, SystemMode mode) {
    try {
        detail::wf_region_context_impl(r_ctx, mode);
        return std::nullopt;
    } catch (const detail::TypeErrorException& e) {
        return e.error;
    }
}

inline std::optional<TypeError> wf_type(const RegionContext& r_ctx, const Type& t,
                                        SystemMode mode) {
    try {
        detail::wf_type_impl(r_ctx, t, mode);
        return std::nullopt;
    } catch (const detail::TypeErrorException& e) {
        return e.error;
    }
}

inline std::optional<TypeError> wf_type_effect(const RegionContext& r_ctx, const Type& t,
                                               const Effect& e, SystemMode mode) {
    try {
        detail::wf_type_impl(r_ctx, t, mode);
        if (mode != SystemMode::EffectFree) {
            for (const auto& reg : e)
                if (!r_ctx.has(reg))
                    detail::fail(TypeErrorKind::EffectNotInScope, "wf-pair", {},
                                 "effect region " + reg.str() +
                                     " is not bound in the region context");
        }
        return std::nullopt;
    } catch (const detail::TypeErrorException& e2) {
        return e2.error;
    }
}

// ---- subtyping -----------------------------------------------------------------

// alpha <= alpha': reflexivity plus the arrow rule (contravariant domain,
// covariant codomain, effect inclusion). Transitivity is derived, not a rule.
inline bool subtype_type(const RegionContext&, const Type& a, const Type& b) {
    if (a == b) return true;
    if (a.is_arrow() && b.is_arrow()) {
        return subtype_type({}, b.domain(), a.domain()) &&
               subtype_type({}, a.codomain(), b.codomain()) &&
               a.effect().subset_of(b.effect());
    }
    return false;
}

// (alpha, e) <= (alpha', e')
inline bool subtype(const RegionContext& r_ctx, const TypeAndEffect& a, const TypeAndEffect& b) {
    return subtype_type(r_ctx, a.type, b.type) && a.effect.subset_of(b.effect);
}

// ---- term / store / program checking --------------------------------------------

namespace detail {

class Checker {
  public:
    Checker(const RegionContext& r_ctx, CheckOptions opts)
        : opts_(opts),
          r_ctx_(opts.mode == SystemMode::EffectFree ? r_ctx.erased() : r_ctx) {}

    const RegionContext& region_context() const { return r_ctx_; }
    bool effect_free() const { return opts_.mode == SystemMode::EffectFree; }

    // Coercion used at the four subsumption positions (on the type part).
    bool coercible(const Type& from, const Type& to) const {
        if (effect_free()) return from == to; // everything is erased already
        if (opts_.subsumption) return subtype_type(r_ctx_, from, to);
        return from == to;
    }

    bool pair_coercible(const TypeAndEffect& from, const TypeAndEffect& to) const {
        if (effect_free()) return from.type == to.type;
        if (opts_.subsumption)
            return subtype_type(r_ctx_, from.type, to.type) &&
                   from.effect.subset_of(to.effect);
        return from == to;
    }

    Effect eff(Effect e) const { return effect_free() ? Effect{} : std::move(e); }

    TypeAndEffect synth(const TypingContext& gamma, const Term& t) {
        switch (t.kind()) {
        case Term::Kind::Var: {
            auto ty = gamma.lookup(t.var_name());
            if (!ty)
                fail(TypeErrorKind::UnboundVariable, "var", t.span(),
                     "variable " + t.var_name() + " is not bound");
            return {*ty, Effect{}};
        }
        case Term::Kind::Region: {
            auto content = r_ctx_.lookup(t.region_name());
            if (!content)
                fail(TypeErrorKind::UnboundRegion, "region", t.span(),
                     "region " + t.region_name().str() + " is not bound in the region context");
            return {Type::region(t.region_name(), *content), Effect{}};
        }
        case Term::Kind::Star: return {Type::unit(), Effect{}};
        case Term::Kind::IntLit: return {Type::integer(), Effect{}};
        case Term::Kind::Lam: {
            Type ann = effect_free() ? t.annotation().erased() : t.annotation();
            if (!valid_domain_type(ann))
                fail(TypeErrorKind::BehaviourNotAllowed, "lam", t.span(),
                     "lambda domain annotations must be value types without behaviour codomain");
            wf_type_impl(r_ctx_, ann, opts_.mode);
            TypeAndEffect body = synth(gamma.with(t.param(), ann), t.body());
            return {Type::arrow(ann, body.effect, body.type), Effect{}};
        }
        case Term::Kind::App: {
            TypeAndEffect fn = synth(gamma, t.fn());
            if (!fn.type.is_arrow())
                fail(TypeErrorKind::NotAFunction, "app", t.span(),
                     "application of a non-function", "arrow type", fn.type.to_string());
            TypeAndEffect arg = synth(gamma, t.arg());
            if (!coercible(arg.type, fn.type.domain()))
                fail(TypeErrorKind::DomainMismatch, "app", t.span(),
                     "argument does not fit the function domain",
                     fn.type.domain().to_string(), arg.type.to_string());
            return {fn.type.codomain(),
                    eff(fn.effect.unioned(fn.type.effect()).unioned(arg.effect))};
        }
        case Term::Kind::Get: {
            TypeAndEffect target = synth(gamma, t.get_target());
            if (!target.type.is_region())
                fail(TypeErrorKind::DomainMismatch, "get", t.span(),
                     "get expects a region", "Reg[...]", target.type.to_string());
            Effect e = target.effect;
            e.insert(target.type.region_name());
            return {target.type.content(), eff(std::move(e))};
        }
        case Term::Kind::Set: {
            TypeAndEffect target = synth(gamma, t.set_target());
            if (!target.type.is_region())
                fail(TypeErrorKind::DomainMismatch, "set", t.span(),
                     "set expects a region", "Reg[...]", target.type.to_string());
            TypeAndEffect payload = synth(gamma, t.set_value());
            if (!coercible(payload.type, target.type.content()))
                fail(TypeErrorKind::DomainMismatch, "set", t.span(),
                     "stored value does not fit the region content type",
                     target.type.content().to_string(), payload.type.to_string());
            Effect e = target.effect.unioned(payload.effect);
            e.insert(target.type.region_name());
            return {Type::unit(), eff(std::move(e))};
        }
        case Term::Kind::ElseNext: {
            TypeAndEffect now = synth(gamma, t.now_branch());
            if (now.type.is_behaviour())
                fail(TypeErrorKind::BehaviourNotAllowed, "elsenext", t.span(),
                     "elsenext branches must be value-typed");
            TypeAndEffect later = synth(gamma, t.later_branch());
            if (!coercible(later.type, now.type))
                fail(TypeErrorKind::DomainMismatch, "elsenext", t.span(),
                     "elsenext branches must share a type", now.type.to_string(),
                     later.type.to_string());
            // only the first-instant effect is recorded
            return {now.type, eff(now.effect)};
        }
        case Term::Kind::Par: {
            Effect e;
            for (const auto& th : t.par_threads()) e = e.unioned(synth(gamma, th).effect);
            return {Type::behaviour(), eff(std::move(e))};
        }
        case Term::Kind::Prim: {
            Effect e;
            for (const auto& a : t.prim_args()) {
                TypeAndEffect at = synth(gamma, a);
                if (!(at.type == Type::integer()))
                    fail(TypeErrorKind::DomainMismatch, "prim", t.span(),
                         "arithmetic expects integers", "Int", at.type.to_string());
                e = e.unioned(at.effect);
            }
            return {Type::integer(), eff(std::move(e))};
        }
        case Term::Kind::IfZero: {
            TypeAndEffect c = synth(gamma, t.cond());
            if (!(c.type == Type::integer()))
                fail(TypeErrorKind::DomainMismatch, "ifz", t.span(),
                     "ifz scrutinee must be an integer", "Int", c.type.to_string());
            TypeAndEffect tb = synth(gamma, t.then_branch());
            TypeAndEffect eb = synth(gamma, t.else_branch());
            Type joined = tb.type;
            if (coercible(eb.type, tb.type)) {
                joined = tb.type;
            } else if (coercible(tb.type, eb.type)) {
                joined = eb.type;
            } else {
                fail(TypeErrorKind::DomainMismatch, "ifz", t.span(),
                     "ifz branches must share a type", tb.type.to_string(),
                     eb.type.to_string());
            }
            return {joined, eff(c.effect.unioned(tb.effect).unioned(eb.effect))};
        }
        case Term::Kind::RefMacro:
        case Term::Kind::FixMacro:
            throw std::logic_error("macro node reached the checker; expand first");
        }
        throw std::logic_error("unreachable term kind");
    }

    void check_store(const TypingContext& gamma, const Store& store) {
        for (const auto& [r, values] : store) {
            if (values.empty()) continue;
            auto content = r_ctx_.lookup(r);
            if (!content)
                fail(TypeErrorKind::UnboundRegion, "store", {},
                     "store binds region " + r.str() + " outside the region context");
            for (const auto& v : values) {
                if (!is_value(v))
                    fail(TypeErrorKind::StoreValueIllTyped, "store", v.span(),
                         "stored terms must be values at region " + r.str());
                TypeAndEffect got = synth(gamma, v);
                Type want = effect_free() ? content->erased() : *content;
                if (!coercible(got.type, want))
                    fail(TypeErrorKind::StoreValueIllTyped, "store", v.span(),
                         "value stored at region " + r.str() + " has the wrong type",
                         want.to_string(), got.type.to_string());
            }
        }
    }

    TypeAndEffect check_program(const TypingContext& gamma, const Program& p) {
        check_store(gamma, p.store());
        Effect e;
        for (const auto& th : p.threads()) e = e.unioned(synth(gamma, th.term).effect);
        return {Type::behaviour(), eff(std::move(e))};
    }

  private:
    CheckOptions opts_;
    RegionContext r_ctx_;
};

} // namespace detail

// Synthesize the minimal derivable type-and-effect of `t`, or check `t`
// against `expected` (subsumption applied at the top level).
inline CheckResult check_term(const RegionContext& r_ctx, const TypingContext& gamma,
                              const Term& t, std::optional<TypeAndEffect> expected,
                              CheckOptions opts) {
    try {
        detail::Checker checker(r_ctx, opts);
        TypingContext g = opts.mode == SystemMode::EffectFree ? gamma.erased() : gamma;
        TypeAndEffect got = checker.synth(g, t);
        if (expected) {
            TypeAndEffect want = *expected;
            if (opts.mode == SystemMode::EffectFree)
                want = {want.type.erased(), Effect{}};
            if (!checker.pair_coercible(got, want))
                detail::fail(TypeErrorKind::DomainMismatch, "check", t.span(),
                             "term does not have the expected type-and-effect",
                             want.to_string(), got.to_string());
            return {want, std::nullopt};
        }
        return {got, std::nullopt};
    } catch (const detail::TypeErrorException& e) {
        return {std::nullopt, e.error};
    }
}

inline CheckResult synth_term(const RegionContext& r_ctx, const TypingContext& gamma,
                              const Term& t, CheckOptions opts) {
    return check_term(r_ctx, gamma, t, std::nullopt, opts);
}

inline std::optional<TypeError> check_store(const RegionContext& r_ctx,
                                            const TypingContext& gamma, const Store& s,
                                            CheckOptions opts) {
    try {
        detail::Checker checker(r_ctx, opts);
        checker.check_store(opts.mode == SystemMode::EffectFree ? gamma.erased() : gamma, s);
        return std::nullopt;
    } catch (const detail::TypeErrorException& e) {
        return e.error;
    }
}

inline CheckResult check_program(const RegionContext& r_ctx, const TypingContext& gamma,
                                 const Program& p, CheckOptions opts) {
    try {
        detail::Checker checker(r_ctx, opts);
        TypingContext g = opts.mode == SystemMode::EffectFree ? gamma.erased() : gamma;
        return {checker.check_program(g, p), std::nullopt};
    } catch (const detail::TypeErrorException& e) {
        return {std::nullopt, e.error};
    }
}

// Typability in the erased system |-ef (decomposition's precondition).
inline CheckResult check_effect_free(const RegionContext& r_ctx, const TypingContext& gamma,
                                     const Term& t) {
    return synth_term(r_ctx, gamma, t, CheckOptions{SystemMode::EffectFree, false});
}

} // namespace stratal

#endif // STRATAL_TYPING_HPP
