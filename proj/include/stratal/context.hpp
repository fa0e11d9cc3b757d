#ifndef STRATAL_CONTEXT_HPP
#define STRATAL_CONTEXT_HPP

#include <cassert>
#include <variant>
#include <vector>

#include "stratal/term.hpp"

namespace stratal {

// Elementary evaluation-context frames:
//   E ::= [] | EM | VE | get E | set(E,M) | set(V,E) | (E elsenext M)
// plus left-to-right frames for the integer extension.
namespace frame {
struct AppFun {
    Term arg;
};
struct AppArg {
    Term fn; // a value
};
struct GetFrame {};
struct SetTarget {
    Term rhs;
};
struct SetValue {
    Term target; // a value
};
struct ElseNextFrame {
    Term later;
};
struct PrimFrame {
    PrimOp op;
    std::vector<Term> done; // evaluated operands (values)
    std::vector<Term> rest; // operands still to evaluate
};
struct IfZeroFrame {
    Term then_branch;
    Term else_branch;
};
} // namespace frame

using Frame =
    std::variant<frame::AppFun, frame::AppArg, frame::GetFrame, frame::SetTarget,
                 frame::SetValue, frame::ElseNextFrame, frame::PrimFrame, frame::IfZeroFrame>;

inline Term plug_frame(const Frame& f, Term hole) {
    return std::visit(
        [&](const auto& fr) -> Term {
            using T = std::decay_t<decltype(fr)>;
            if constexpr (std::is_same_v<T, frame::AppFun>)
                return Term::app(std::move(hole), fr.arg);
            else if constexpr (std::is_same_v<T, frame::AppArg>)
                return Term::app(fr.fn, std::move(hole));
            else if constexpr (std::is_same_v<T, frame::GetFrame>)
                return Term::get(std::move(hole));
            else if constexpr (std::is_same_v<T, frame::SetTarget>)
                return Term::set(std::move(hole), fr.rhs);
            else if constexpr (std::is_same_v<T, frame::SetValue>)
                return Term::set(fr.target, std::move(hole));
            else if constexpr (std::is_same_v<T, frame::ElseNextFrame>)
                return Term::else_next(std::move(hole), fr.later);
            else if constexpr (std::is_same_v<T, frame::PrimFrame>) {
                std::vector<Term> args = fr.done;
                args.push_back(std::move(hole));
                args.insert(args.end(), fr.rest.begin(), fr.rest.end());
                return Term::prim(fr.op, std::move(args));
            } else {
                return Term::if_zero(std::move(hole), fr.then_branch, fr.else_branch);
            }
        },
        f);
}

inline bool is_else_next_frame(const Frame& f) {
    return std::holds_alternative<frame::ElseNextFrame>(f);
}

// An evaluation context: frames listed outermost first.
class EvalContext {
  public:
    EvalContext() = default;
    explicit EvalContext(std::vector<Frame> frames) : frames_(std::move(frames)) {}

    const std::vector<Frame>& frames() const { return frames_; }
    bool empty() const { return frames_.empty(); }
    std::size_t depth() const { return frames_.size(); }

    void push_inner(Frame f) { frames_.push_back(std::move(f)); }
    void push_outer(Frame f) { frames_.insert(frames_.begin(), std::move(f)); }

    // E is time insensitive iff it contains no elsenext frame (red(E) = E).
    bool time_insensitive() const {
        for (const auto& f : frames_)
            if (is_else_next_frame(f)) return false;
        return true;
    }

    EvalContext composed_with(const EvalContext& inner) const {
        EvalContext out = *this;
        out.frames_.insert(out.frames_.end(), inner.frames_.begin(), inner.frames_.end());
        return out;
    }

  private:
    std::vector<Frame> frames_;
};

// plug(E, M): wrap M in E's frames, innermost last.
inline Term plug(const EvalContext& ctx, Term t) {
    for (auto it = ctx.frames().rbegin(); it != ctx.frames().rend(); ++it)
        t = plug_frame(*it, std::move(t));
    return t;
}

// red(E): drop every pending elsenext branch, keeping frame order.
inline EvalContext red(const EvalContext& ctx) {
    std::vector<Frame> out;
    out.reserve(ctx.frames().size());
    for (const auto& f : ctx.frames())
        if (!is_else_next_frame(f)) out.push_back(f);
    return EvalContext(std::move(out));
}

} // namespace stratal

#endif // STRATAL_CONTEXT_HPP
