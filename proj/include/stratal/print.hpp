#ifndef STRATAL_PRINT_HPP
#define STRATAL_PRINT_HPP

#include <string>

#include "stratal/store.hpp"
#include "stratal/term.hpp"

namespace stratal {

// Precedence levels, loosest first:
//   0 elsenext / fun / fix bodies
//   1 additive (+ -)
//   2 multiplicative (*)
//   3 application and `get`
//   4 atoms
namespace detail {

inline int term_level(const Term& t) {
    switch (t.kind()) {
    case Term::Kind::Lam:
    case Term::Kind::FixMacro:
    case Term::Kind::ElseNext: return 0;
    case Term::Kind::Prim:
        switch (t.prim_op()) {
        case PrimOp::Add:
        case PrimOp::Sub: return 1;
        case PrimOp::Mul: return 2;
        case PrimOp::IsZero: return 4;
        }
        return 1;
    case Term::Kind::App:
    case Term::Kind::Get: return 3;
    default: return 4;
    }
}

inline void print_into(const Term& t, int min_level, std::string& out);

inline void print_at(const Term& t, int min_level, std::string& out) {
    bool parens = term_level(t) < min_level;
    if (parens) out += "(";
    print_into(t, 0, out);
    if (parens) out += ")";
}

inline void print_into(const Term& t, int /*unused*/, std::string& out) {
    switch (t.kind()) {
    case Term::Kind::Var: out += t.var_name(); return;
    case Term::Kind::Region: out += "#" + t.region_name().str(); return;
    case Term::Kind::Star: out += "unit"; return;
    case Term::Kind::IntLit:
        if (t.int_value() < 0)
            out += "(" + std::to_string(t.int_value()) + ")";
        else
            out += std::to_string(t.int_value());
        return;
    case Term::Kind::Lam:
        out += "fun (" + t.param() + " : " + t.annotation().to_string() + ") -> ";
        print_at(t.body(), 0, out);
        return;
    case Term::Kind::App:
        print_at(t.fn(), 3, out);
        out += " ";
        print_at(t.arg(), 4, out);
        return;
    case Term::Kind::Get:
        out += "get ";
        print_at(t.get_target(), 4, out);
        return;
    case Term::Kind::Set:
        out += "set(";
        print_at(t.set_target(), 0, out);
        out += ", ";
        print_at(t.set_value(), 0, out);
        out += ")";
        return;
    case Term::Kind::ElseNext:
        print_at(t.now_branch(), 1, out);
        out += " elsenext ";
        print_at(t.later_branch(), 0, out);
        return;
    case Term::Kind::Par: {
        out += "par{";
        bool first = true;
        for (const auto& th : t.par_threads()) {
            if (!first) out += ", ";
            print_at(th, 0, out);
            first = false;
        }
        out += "}";
        return;
    }
    case Term::Kind::Prim:
        switch (t.prim_op()) {
        case PrimOp::Add:
        case PrimOp::Sub:
            print_at(t.prim_args()[0], 1, out);
            out += t.prim_op() == PrimOp::Add ? " + " : " - ";
            print_at(t.prim_args()[1], 2, out);
            return;
        case PrimOp::Mul:
            print_at(t.prim_args()[0], 2, out);
            out += " * ";
            print_at(t.prim_args()[1], 3, out);
            return;
        case PrimOp::IsZero:
            out += "iszero(";
            print_at(t.prim_args()[0], 0, out);
            out += ")";
            return;
        }
        return;
    case Term::Kind::IfZero:
        out += "ifz(";
        print_at(t.cond(), 0, out);
        out += "){";
        print_at(t.then_branch(), 0, out);
        out += "}{";
        print_at(t.else_branch(), 0, out);
        out += "}";
        return;
    case Term::Kind::RefMacro:
        out += "ref[" + t.region_name().str() + "](";
        print_at(t.macro_body(), 0, out);
        out += ")";
        return;
    case Term::Kind::FixMacro:
        out += "fix[" + t.region_name().str() + "](" + t.fix_fname() + " : " +
               t.fix_domain().to_string() + " -" + t.fix_effect().to_string() + "> " +
               t.fix_codomain().to_string() + ") -> ";
        print_at(t.macro_body(), 0, out);
        return;
    }
}

} // namespace detail

inline std::string print_term(const Term& t) {
    std::string out;
    detail::print_at(t, 0, out);
    return out;
}

inline std::string print_store(const Store& s) {
    std::string out;
    for (const auto& [r, vs] : s) {
        if (vs.empty()) continue;
        out += "store " + r.str() + " <= { ";
        bool first = true;
        for (const auto& v : vs) {
            if (!first) out += ", ";
            out += print_term(v);
            first = false;
        }
        out += " };\n";
    }
    return out;
}

inline std::string print_program(const Program& p) {
    std::string out;
    bool first = true;
    for (const auto& th : p.threads()) {
        if (!first) out += " | ";
        out += print_term(th.term);
        first = false;
    }
    if (!p.store().empty()) {
        out += "\n";
        out += print_store(p.store());
    }
    return out;
}

} // namespace stratal

#endif // STRATAL_PRINT_HPP
