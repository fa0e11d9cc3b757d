#ifndef STRATAL_TYPE_HPP
#define STRATAL_TYPE_HPP

#include <cassert>
#include <memory>
#include <string>
#include <utility>

#include "stratal/basics.hpp"

namespace stratal {

// A type-or-behaviour (the paper's alpha): Unit, Int, Reg[r] A, A -{e}> alpha,
// or the behaviour type Beh given to thread multisets and stores.
//
// Value-semantic handle over an immutable shared node. Structural equality.
class Type {
  public:
    enum class Kind { Unit, Int, Behaviour, Region, Arrow };

    Type() : Type(unit()) {}

    static Type unit() { return Type(Node{Kind::Unit, {}, {}, {}, {}, {}}); }
    static Type integer() { return Type(Node{Kind::Int, {}, {}, {}, {}, {}}); }
    static Type behaviour() { return Type(Node{Kind::Behaviour, {}, {}, {}, {}, {}}); }
    static Type region(RegionName r, Type content) {
        assert(content.is_value_type() && "region content must be a value type");
        return Type(Node{Kind::Region, std::move(r), std::make_shared<Type>(std::move(content)), {}, {}, {}});
    }
    static Type arrow(Type domain, Effect effect, Type codomain) {
        return Type(Node{Kind::Arrow, {}, {},
                         std::make_shared<Type>(std::move(domain)), std::move(effect),
                         std::make_shared<Type>(std::move(codomain))});
    }

    Kind kind() const { return node_->kind; }
    bool is_unit() const { return kind() == Kind::Unit; }
    bool is_int() const { return kind() == Kind::Int; }
    bool is_behaviour() const { return kind() == Kind::Behaviour; }
    bool is_region() const { return kind() == Kind::Region; }
    bool is_arrow() const { return kind() == Kind::Arrow; }

    // A type A (as opposed to the behaviour Beh).
    bool is_value_type() const { return !is_behaviour(); }

    const RegionName& region_name() const {
        assert(is_region());
        return node_->region;
    }
    const Type& content() const {
        assert(is_region());
        return *node_->content;
    }
    const Type& domain() const {
        assert(is_arrow());
        return *node_->domain;
    }
    const Effect& effect() const {
        assert(is_arrow());
        return node_->effect;
    }
    const Type& codomain() const {
        assert(is_arrow());
        return *node_->codomain;
    }

    friend bool operator==(const Type& a, const Type& b) {
        if (a.node_ == b.node_) return true;
        if (a.kind() != b.kind()) return false;
        switch (a.kind()) {
        case Kind::Unit:
        case Kind::Int:
        case Kind::Behaviour: return true;
        case Kind::Region:
            return a.region_name() == b.region_name() && a.content() == b.content();
        case Kind::Arrow:
            return a.domain() == b.domain() && a.effect() == b.effect() &&
                   a.codomain() == b.codomain();
        }
        return false;
    }
    friend bool operator!=(const Type& a, const Type& b) { return !(a == b); }

    // Concrete syntax: Unit | Int | Beh | Reg[r] | A -{e}> B. Region content is
    // elided (it is pinned to R(r) in any well-formed context). Arrows are
    // right-associative; arrow domains get parenthesized when they are arrows.
    std::string to_string() const {
        switch (kind()) {
        case Kind::Unit: return "Unit";
        case Kind::Int: return "Int";
        case Kind::Behaviour: return "Beh";
        case Kind::Region: return "Reg[" + region_name().str() + "]";
        case Kind::Arrow: {
            std::string dom = domain().to_string();
            if (domain().is_arrow()) dom = "(" + dom + ")";
            std::string eff = effect().to_string();
            // {r1,r2} -> -{r1,r2}>
            return dom + " -" + eff + "> " + codomain().to_string();
        }
        }
        return "?";
    }

    // Regions mentioned anywhere in the type (for scope validation).
    void collect_regions(Effect& out) const {
        switch (kind()) {
        case Kind::Unit:
        case Kind::Int:
        case Kind::Behaviour: return;
        case Kind::Region:
            out.insert(region_name());
            content().collect_regions(out);
            return;
        case Kind::Arrow:
            domain().collect_regions(out);
            out = out.unioned(effect());
            codomain().collect_regions(out);
            return;
        }
    }

    // The effect-erased image of this type (every effect set dropped to {}).
    Type erased() const {
        switch (kind()) {
        case Kind::Unit:
        case Kind::Int:
        case Kind::Behaviour: return *this;
        case Kind::Region: return Type::region(region_name(), content().erased());
        case Kind::Arrow:
            return Type::arrow(domain().erased(), Effect{}, codomain().erased());
        }
        return *this;
    }

  private:
    struct Node {
        Kind kind;
        RegionName region;
        std::shared_ptr<Type> content;
        std::shared_ptr<Type> domain;
        Effect effect;
        std::shared_ptr<Type> codomain;
    };
    explicit Type(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

    std::shared_ptr<const Node> node_;
};

// A type together with an effect: the pair (alpha, e).
struct TypeAndEffect {
    Type type;
    Effect effect;

    friend bool operator==(const TypeAndEffect&, const TypeAndEffect&) = default;

    std::string to_string() const {
        return "(" + type.to_string() + ", " + effect.to_string() + ")";
    }
};

} // namespace stratal

#endif // STRATAL_TYPE_HPP
