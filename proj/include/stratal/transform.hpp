#ifndef STRATAL_TRANSFORM_HPP
#define STRATAL_TRANSFORM_HPP

#include <set>
#include <string>
#include <vector>

#include "stratal/store.hpp"
#include "stratal/term.hpp"

namespace stratal {

namespace detail {

inline void all_names_into(const Term& t, std::set<std::string>& out) {
    switch (t.kind()) {
    case Term::Kind::Var: out.insert(t.var_name()); break;
    case Term::Kind::Lam: out.insert(t.param()); break;
    case Term::Kind::FixMacro: out.insert(t.fix_fname()); break;
    default: break;
    }
    for (const auto& c : t.children()) all_names_into(c, out);
}

// Monotone fresh-name source scoped to one expansion pass; avoids every name
// occurring anywhere in the input so expanded binders never shadow user code.
struct FreshNames {
    std::set<std::string> used;
    int counter = 0;

    explicit FreshNames(const Term& scope) { all_names_into(scope, used); }

    std::string next(const std::string& hint) {
        while (true) {
            std::string cand = "_" + hint + std::to_string(counter++);
            if (used.insert(cand).second) return cand;
        }
    }
};

} // namespace detail

// ref_r M  ==  (\x:Unit. r)(set(r, M))   — returns the region handle instead
// of unit.
inline Term expand_ref(const RegionName& r, const Term& m, detail::FreshNames& fresh) {
    std::string x = fresh.next("x");
    return Term::app(Term::lam(x, Type::unit(), Term::region(r)),
                     Term::set(Term::region(r), m));
}

inline Term expand_ref(const RegionName& r, const Term& m) {
    detail::FreshNames fresh(m);
    return expand_ref(r, m, fresh);
}

// fix_r f.M  ==  \x:A. (get (ref_r (\y:A. ([\z:A. (get r) z / f] M) y))) x
//
// The annotation (A, e, B) is the region's content arrow r : A -{e}> B; only A
// is needed for the inner domain annotations. Under the unstratified derived
// rule (r in e) the whole term checks at (A -{e}> B, {}); under the stratified
// one it checks at (A -{e u {r}}> B, {}).
inline Term expand_fix(const RegionName& r, const std::string& f, const Type& domain,
                       const Effect& /*effect*/, const Type& /*codomain*/, const Term& m,
                       detail::FreshNames& fresh) {
    std::string z = fresh.next("z");
    Term unfold = Term::lam(z, domain, Term::app(Term::get(Term::region(r)), Term::var(z)));
    Term substituted = substitute(m, f, unfold);
    std::string y = fresh.next("y");
    Term stored = Term::lam(y, domain, Term::app(substituted, Term::var(y)));
    Term handle = expand_ref(r, stored, fresh);
    std::string x = fresh.next("x");
    return Term::lam(x, domain, Term::app(Term::get(handle), Term::var(x)));
}

inline Term expand_fix(const RegionName& r, const std::string& f, const Type& domain,
                       const Effect& effect, const Type& codomain, const Term& m) {
    detail::FreshNames fresh(m);
    return expand_fix(r, f, domain, effect, codomain, m, fresh);
}

namespace detail {

inline Term expand_macros_impl(const Term& t, FreshNames& fresh) {
    std::vector<Term> children;
    children.reserve(t.children().size());
    bool changed = false;
    for (const auto& c : t.children()) {
        Term c2 = expand_macros_impl(c, fresh);
        changed = changed || !c2.same_node(c);
        children.push_back(std::move(c2));
    }
    switch (t.kind()) {
    case Term::Kind::RefMacro: return expand_ref(t.region_name(), children[0], fresh);
    case Term::Kind::FixMacro:
        return expand_fix(t.region_name(), t.fix_fname(), t.fix_domain(), t.fix_effect(),
                          t.fix_codomain(), children[0], fresh);
    default: return changed ? rebuild(t, std::move(children)) : t;
    }
}

} // namespace detail

// Remove every RefMacro/FixMacro node. Total; the result evaluates and types
// like the written-out abbreviation.
inline Term expand_macros(const Term& t) {
    detail::FreshNames fresh(t);
    return detail::expand_macros_impl(t, fresh);
}

// ---- elsenext elimination: [[M elsenext N]] = [[M]], homomorphic elsewhere ----

inline Term translate(const Term& t) {
    if (t.kind() == Term::Kind::ElseNext) return translate(t.now_branch());
    std::vector<Term> children;
    children.reserve(t.children().size());
    bool changed = false;
    for (const auto& c : t.children()) {
        Term c2 = translate(c);
        changed = changed || !c2.same_node(c);
        children.push_back(std::move(c2));
    }
    return changed ? detail::rebuild(t, std::move(children)) : t;
}

inline Store translate(const Store& s) {
    Store out;
    for (const auto& [r, vs] : s)
        for (const auto& v : vs) out.add(r, translate(v));
    return out;
}

inline Program translate(const Program& p) {
    std::vector<Term> threads;
    threads.reserve(p.threads().size());
    for (const auto& th : p.threads()) threads.push_back(translate(th.term));
    return Program(std::move(threads), translate(p.store()));
}

} // namespace stratal

#endif // STRATAL_TRANSFORM_HPP
