#ifndef STRATAL_TERM_HPP
#define STRATAL_TERM_HPP

#include <cassert>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stratal/basics.hpp"
#include "stratal/type.hpp"

namespace stratal {

class Term;

enum class PrimOp { Add, Sub, Mul, IsZero };

inline int prim_arity(PrimOp op) { return op == PrimOp::IsZero ? 1 : 2; }

inline const char* prim_name(PrimOp op) {
    switch (op) {
    case PrimOp::Add: return "+";
    case PrimOp::Sub: return "-";
    case PrimOp::Mul: return "*";
    case PrimOp::IsZero: return "iszero";
    }
    return "?";
}

// Abstract syntax of terms. A Term is a value-semantic handle over an
// immutable shared node, so subterms are shared freely and rebuilds reuse
// unchanged children.
class Term {
  public:
    enum class Kind {
        Var,
        Region,
        Star,
        Lam,
        App,
        Get,
        Set,
        ElseNext,
        Par,
        IntLit,
        Prim,
        IfZero,
        RefMacro,
        FixMacro,
    };

    Term() : Term(star()) {}

    // -- constructors --
    static Term var(std::string name, Span sp = {}) {
        return make(Kind::Var, sp, [&](Node& n) { n.name = std::move(name); });
    }
    static Term region(RegionName r, Span sp = {}) {
        return make(Kind::Region, sp, [&](Node& n) { n.region = std::move(r); });
    }
    static Term star(Span sp = {}) {
        return make(Kind::Star, sp, [](Node&) {});
    }
    static Term lam(std::string param, Type annotation, Term body, Span sp = {}) {
        return make(Kind::Lam, sp, [&](Node& n) {
            n.name = std::move(param);
            n.annotation = std::move(annotation);
            n.children = {std::move(body)};
        });
    }
    static Term app(Term fn, Term arg, Span sp = {}) {
        return make(Kind::App, sp,
                    [&](Node& n) { n.children = {std::move(fn), std::move(arg)}; });
    }
    static Term get(Term target, Span sp = {}) {
        return make(Kind::Get, sp, [&](Node& n) { n.children = {std::move(target)}; });
    }
    static Term set(Term target, Term value, Span sp = {}) {
        return make(Kind::Set, sp,
                    [&](Node& n) { n.children = {std::move(target), std::move(value)}; });
    }
    static Term else_next(Term now, Term later, Span sp = {}) {
        return make(Kind::ElseNext, sp,
                    [&](Node& n) { n.children = {std::move(now), std::move(later)}; });
    }
    static Term par(std::vector<Term> threads, Span sp = {}) {
        assert(threads.size() >= 2 && "par needs at least two threads");
        return make(Kind::Par, sp, [&](Node& n) { n.children = std::move(threads); });
    }
    static Term int_lit(long value, Span sp = {}) {
        return make(Kind::IntLit, sp, [&](Node& n) { n.int_value = value; });
    }
    static Term prim(PrimOp op, std::vector<Term> args, Span sp = {}) {
        assert(static_cast<int>(args.size()) == prim_arity(op));
        return make(Kind::Prim, sp, [&](Node& n) {
            n.op = op;
            n.children = std::move(args);
        });
    }
    static Term if_zero(Term cond, Term then_branch, Term else_branch, Span sp = {}) {
        return make(Kind::IfZero, sp, [&](Node& n) {
            n.children = {std::move(cond), std::move(then_branch), std::move(else_branch)};
        });
    }
    // Surface macro nodes; removed by transform::expand_macros before
    // typing/evaluation.
    static Term ref_macro(RegionName r, Term body, Span sp = {}) {
        return make(Kind::RefMacro, sp, [&](Node& n) {
            n.region = std::move(r);
            n.children = {std::move(body)};
        });
    }
    static Term fix_macro(RegionName r, std::string fname, Type domain, Effect effect,
                          Type codomain, Term body, Span sp = {}) {
        return make(Kind::FixMacro, sp, [&](Node& n) {
            n.region = std::move(r);
            n.name = std::move(fname);
            n.annotation = std::move(domain);
            n.effect = std::move(effect);
            n.codomain = std::move(codomain);
            n.children = {std::move(body)};
        });
    }

    // -- inspectors --
    Kind kind() const { return node_->kind; }
    Span span() const { return node_->span; }

    const std::string& var_name() const { return expect(Kind::Var).name; }
    const RegionName& region_name() const {
        assert(kind() == Kind::Region || kind() == Kind::RefMacro || kind() == Kind::FixMacro);
        return node_->region;
    }
    const std::string& param() const { return expect(Kind::Lam).name; }
    const Type& annotation() const { return expect(Kind::Lam).annotation; }
    const Term& body() const { return expect(Kind::Lam).children[0]; }
    const Term& fn() const { return expect(Kind::App).children[0]; }
    const Term& arg() const { return expect(Kind::App).children[1]; }
    const Term& get_target() const { return expect(Kind::Get).children[0]; }
    const Term& set_target() const { return expect(Kind::Set).children[0]; }
    const Term& set_value() const { return expect(Kind::Set).children[1]; }
    const Term& now_branch() const { return expect(Kind::ElseNext).children[0]; }
    const Term& later_branch() const { return expect(Kind::ElseNext).children[1]; }
    const std::vector<Term>& par_threads() const { return expect(Kind::Par).children; }
    long int_value() const { return expect(Kind::IntLit).int_value; }
    PrimOp prim_op() const { return expect(Kind::Prim).op; }
    const std::vector<Term>& prim_args() const { return expect(Kind::Prim).children; }
    const Term& cond() const { return expect(Kind::IfZero).children[0]; }
    const Term& then_branch() const { return expect(Kind::IfZero).children[1]; }
    const Term& else_branch() const { return expect(Kind::IfZero).children[2]; }
    const Term& macro_body() const {
        assert(kind() == Kind::RefMacro || kind() == Kind::FixMacro);
        return node_->children[0];
    }
    const std::string& fix_fname() const { return expect(Kind::FixMacro).name; }
    const Type& fix_domain() const { return expect(Kind::FixMacro).annotation; }
    const Effect& fix_effect() const { return expect(Kind::FixMacro).effect; }
    const Type& fix_codomain() const { return expect(Kind::FixMacro).codomain; }

    Term with_span(Span sp) const {
        Node n = *node_;
        n.span = sp;
        return Term(std::make_shared<const Node>(std::move(n)));
    }

    // Identity of the underlying node (used for cheap same-object shortcuts).
    bool same_node(const Term& other) const { return node_ == other.node_; }

    const std::vector<Term>& children() const { return node_->children; }

  private:
    struct Node {
        Kind kind;
        Span span;
        std::string name;    // Var / Lam param / FixMacro fname
        RegionName region;   // Region / RefMacro / FixMacro
        Type annotation;     // Lam domain / FixMacro domain
        Effect effect;       // FixMacro annotation effect
        Type codomain;       // FixMacro annotation codomain
        long int_value = 0;  // IntLit
        PrimOp op = PrimOp::Add;
        std::vector<Term> children;
    };

    template <class F> static Term make(Kind k, Span sp, F&& fill) {
        Node n;
        n.kind = k;
        n.span = sp;
        fill(n);
        return Term(std::make_shared<const Node>(std::move(n)));
    }
    explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    const Node& expect(Kind k) const {
        assert(kind() == k);
        return *node_;
    }

    std::shared_ptr<const Node> node_;
};

// ---- syntactic classes -----------------------------------------------------

// V ::= r | * | \x.M  (and integer literals under the int extension).
inline bool is_value(const Term& t) {
    switch (t.kind()) {
    case Term::Kind::Region:
    case Term::Kind::Star:
    case Term::Kind::Lam:
    case Term::Kind::IntLit: return true;
    default: return false;
    }
}

inline bool contains_macros(const Term& t) {
    if (t.kind() == Term::Kind::RefMacro || t.kind() == Term::Kind::FixMacro) return true;
    for (const auto& c : t.children())
        if (contains_macros(c)) return true;
    return false;
}

inline bool contains_else_next(const Term& t) {
    if (t.kind() == Term::Kind::ElseNext) return true;
    for (const auto& c : t.children())
        if (contains_else_next(c)) return true;
    return false;
}

// ---- free variables / free regions ----------------------------------------

namespace detail {
inline void free_vars_into(const Term& t, std::set<std::string>& bound,
                           std::set<std::string>& out) {
    switch (t.kind()) {
    case Term::Kind::Var:
        if (!bound.count(t.var_name())) out.insert(t.var_name());
        return;
    case Term::Kind::Lam: {
        bool inserted = bound.insert(t.param()).second;
        free_vars_into(t.body(), bound, out);
        if (inserted) bound.erase(t.param());
        return;
    }
    case Term::Kind::FixMacro: {
        bool inserted = bound.insert(t.fix_fname()).second;
        free_vars_into(t.macro_body(), bound, out);
        if (inserted) bound.erase(t.fix_fname());
        return;
    }
    default:
        for (const auto& c : t.children()) free_vars_into(c, bound, out);
        return;
    }
}
} // namespace detail

inline std::set<std::string> free_vars(const Term& t) {
    std::set<std::string> bound, out;
    detail::free_vars_into(t, bound, out);
    return out;
}

inline bool is_closed(const Term& t) { return free_vars(t).empty(); }

// Every region name occurring in the term, including type annotations.
inline Effect free_regions(const Term& t) {
    Effect out;
    struct Walk {
        Effect& out;
        void operator()(const Term& t) {
            switch (t.kind()) {
            case Term::Kind::Region: out.insert(t.region_name()); break;
            case Term::Kind::Lam: t.annotation().collect_regions(out); break;
            case Term::Kind::RefMacro: out.insert(t.region_name()); break;
            case Term::Kind::FixMacro: {
                out.insert(t.region_name());
                t.fix_domain().collect_regions(out);
                out = out.unioned(t.fix_effect());
                t.fix_codomain().collect_regions(out);
                break;
            }
            default: break;
            }
            for (const auto& c : t.children()) (*this)(c);
        }
    };
    Walk{out}(t);
    return out;
}

// ---- substitution -----------------------------------------------------------

// Picks a name based on `base` avoiding everything in `avoid`.
inline std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
    if (!avoid.count(base)) return base;
    for (int i = 1;; ++i) {
        std::string cand = base + std::to_string(i);
        if (!avoid.count(cand)) return cand;
    }
}

namespace detail {

inline Term rebuild(const Term& t, std::vector<Term> children) {
    switch (t.kind()) {
    case Term::Kind::Lam:
        return Term::lam(t.param(), t.annotation(), std::move(children[0]), t.span());
    case Term::Kind::App:
        return Term::app(std::move(children[0]), std::move(children[1]), t.span());
    case Term::Kind::Get: return Term::get(std::move(children[0]), t.span());
    case Term::Kind::Set:
        return Term::set(std::move(children[0]), std::move(children[1]), t.span());
    case Term::Kind::ElseNext:
        return Term::else_next(std::move(children[0]), std::move(children[1]), t.span());
    case Term::Kind::Par: return Term::par(std::move(children), t.span());
    case Term::Kind::Prim: return Term::prim(t.prim_op(), std::move(children), t.span());
    case Term::Kind::IfZero:
        return Term::if_zero(std::move(children[0]), std::move(children[1]),
                             std::move(children[2]), t.span());
    case Term::Kind::RefMacro:
        return Term::ref_macro(t.region_name(), std::move(children[0]), t.span());
    case Term::Kind::FixMacro:
        return Term::fix_macro(t.region_name(), t.fix_fname(), t.fix_domain(),
                               t.fix_effect(), t.fix_codomain(), std::move(children[0]),
                               t.span());
    default: return t;
    }
}

// Rename a binder (Lam or FixMacro) so that its bound name avoids `avoid`.
inline Term substitute_impl(const Term& body, const std::string& var, const Term& repl,
                            const std::set<std::string>& repl_free);

inline Term subst_under_binder(const Term& t, const std::string& bound,
                               const Term& inner, const std::string& var,
                               const Term& repl, const std::set<std::string>& repl_free,
                               auto rebuild_binder) {
    if (bound == var) return t; // shadowed: nothing to do below
    if (repl_free.count(bound)) {
        // capture: rename the binder first
        std::set<std::string> avoid = repl_free;
        auto fv = free_vars(inner);
        avoid.insert(fv.begin(), fv.end());
        avoid.insert(var);
        std::string renamed = fresh_name(bound, avoid);
        std::set<std::string> rn_free = {renamed};
        Term inner2 = substitute_impl(inner, bound, Term::var(renamed), rn_free);
        Term inner3 = substitute_impl(inner2, var, repl, repl_free);
        return rebuild_binder(renamed, std::move(inner3));
    }
    Term inner2 = substitute_impl(inner, var, repl, repl_free);
    if (inner2.same_node(inner)) return t;
    return rebuild_binder(bound, std::move(inner2));
}

inline Term substitute_impl(const Term& t, const std::string& var, const Term& repl,
                            const std::set<std::string>& repl_free) {
    switch (t.kind()) {
    case Term::Kind::Var: return t.var_name() == var ? repl : t;
    case Term::Kind::Region:
    case Term::Kind::Star:
    case Term::Kind::IntLit: return t;
    case Term::Kind::Lam:
        return subst_under_binder(t, t.param(), t.body(), var, repl, repl_free,
                                  [&](std::string p, Term b) {
                                      return Term::lam(std::move(p), t.annotation(),
                                                       std::move(b), t.span());
                                  });
    case Term::Kind::FixMacro:
        return subst_under_binder(t, t.fix_fname(), t.macro_body(), var, repl, repl_free,
                                  [&](std::string f, Term b) {
                                      return Term::fix_macro(t.region_name(), std::move(f),
                                                             t.fix_domain(), t.fix_effect(),
                                                             t.fix_codomain(), std::move(b),
                                                             t.span());
                                  });
    default: {
        std::vector<Term> out;
        out.reserve(t.children().size());
        bool changed = false;
        for (const auto& c : t.children()) {
            Term c2 = substitute_impl(c, var, repl, repl_free);
            changed = changed || !c2.same_node(c);
            out.push_back(std::move(c2));
        }
        if (!changed) return t;
        return rebuild(t, std::move(out));
    }
    }
}

} // namespace detail

// Capture-avoiding substitution [replacement/var]body.
inline Term substitute(const Term& body, const std::string& var, const Term& replacement) {
    return detail::substitute_impl(body, var, replacement, free_vars(replacement));
}

// ---- alpha-equivalence / canonical form -------------------------------------

namespace detail {

inline bool alpha_eq_impl(const Term& a, const Term& b,
                          std::map<std::string, std::string>& ab,
                          std::map<std::string, std::string>& ba) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
    case Term::Kind::Var: {
        auto ita = ab.find(a.var_name());
        auto itb = ba.find(b.var_name());
        if (ita != ab.end() || itb != ba.end())
            return ita != ab.end() && itb != ba.end() && ita->second == b.var_name() &&
                   itb->second == a.var_name();
        return a.var_name() == b.var_name(); // both free
    }
    case Term::Kind::Region: return a.region_name() == b.region_name();
    case Term::Kind::Star: return true;
    case Term::Kind::IntLit: return a.int_value() == b.int_value();
    case Term::Kind::Lam:
    case Term::Kind::FixMacro: {
        bool is_lam = a.kind() == Term::Kind::Lam;
        if (is_lam) {
            if (a.annotation() != b.annotation()) return false;
        } else {
            if (a.region_name() != b.region_name() || a.fix_domain() != b.fix_domain() ||
                a.fix_effect() != b.fix_effect() || a.fix_codomain() != b.fix_codomain())
                return false;
        }
        const std::string& na = is_lam ? a.param() : a.fix_fname();
        const std::string& nb = is_lam ? b.param() : b.fix_fname();
        const Term& ba_body = is_lam ? a.body() : a.macro_body();
        const Term& bb_body = is_lam ? b.body() : b.macro_body();
        auto olda = ab.find(na) != ab.end() ? std::optional(ab[na]) : std::nullopt;
        auto oldb = ba.find(nb) != ba.end() ? std::optional(ba[nb]) : std::nullopt;
        ab[na] = nb;
        ba[nb] = na;
        bool ok = alpha_eq_impl(ba_body, bb_body, ab, ba);
        if (olda) ab[na] = *olda; else ab.erase(na);
        if (oldb) ba[nb] = *oldb; else ba.erase(nb);
        return ok;
    }
    case Term::Kind::Prim:
        if (a.prim_op() != b.prim_op()) return false;
        break;
    case Term::Kind::RefMacro:
        if (a.region_name() != b.region_name()) return false;
        break;
    default: break;
    }
    if (a.children().size() != b.children().size()) return false;
    for (std::size_t i = 0; i < a.children().size(); ++i)
        if (!alpha_eq_impl(a.children()[i], b.children()[i], ab, ba)) return false;
    return true;
}

// Compact canonical serialization: binders renumbered $0,$1,... in preorder.
// Used for hashing, store dedup, and state memoization.
inline void canonical_key_into(const Term& t, std::map<std::string, std::string>& env,
                               int& counter, std::string& out) {
    switch (t.kind()) {
    case Term::Kind::Var: {
        auto it = env.find(t.var_name());
        out += "v:";
        out += it != env.end() ? it->second : t.var_name();
        out += ";";
        return;
    }
    case Term::Kind::Region:
        out += "r:" + t.region_name().str() + ";";
        return;
    case Term::Kind::Star: out += "*;"; return;
    case Term::Kind::IntLit:
        out += "i:" + std::to_string(t.int_value()) + ";";
        return;
    case Term::Kind::Lam:
    case Term::Kind::FixMacro: {
        bool is_lam = t.kind() == Term::Kind::Lam;
        const std::string& name = is_lam ? t.param() : t.fix_fname();
        const Term& body = is_lam ? t.body() : t.macro_body();
        std::string canon = "$" + std::to_string(counter++);
        if (is_lam) {
            out += "L[" + t.annotation().to_string() + "](";
        } else {
            out += "F[" + t.region_name().str() + ":" + t.fix_domain().to_string() + "-" +
                   t.fix_effect().to_string() + ">" + t.fix_codomain().to_string() + "](";
        }
        auto old = env.find(name) != env.end() ? std::optional(env[name]) : std::nullopt;
        env[name] = canon;
        canonical_key_into(body, env, counter, out);
        if (old) env[name] = *old; else env.erase(name);
        out += ")";
        return;
    }
    case Term::Kind::App: out += "A("; break;
    case Term::Kind::Get: out += "G("; break;
    case Term::Kind::Set: out += "S("; break;
    case Term::Kind::ElseNext: out += "E("; break;
    case Term::Kind::Par: out += "P("; break;
    case Term::Kind::Prim:
        out += std::string("O[") + prim_name(t.prim_op()) + "](";
        break;
    case Term::Kind::IfZero: out += "Z("; break;
    case Term::Kind::RefMacro: out += "R[" + t.region_name().str() + "]("; break;
    }
    for (const auto& c : t.children()) canonical_key_into(c, env, counter, out);
    out += ")";
}

} // namespace detail

inline bool alpha_eq(const Term& a, const Term& b) {
    if (a.same_node(b)) return true;
    std::map<std::string, std::string> ab, ba;
    return detail::alpha_eq_impl(a, b, ab, ba);
}

// Canonical serialization; two terms are alpha-equivalent iff keys are equal.
inline std::string canonical_key(const Term& t) {
    std::map<std::string, std::string> env;
    int counter = 0;
    std::string out;
    detail::canonical_key_into(t, env, counter, out);
    return out;
}

} // namespace stratal

#endif // STRATAL_TERM_HPP
