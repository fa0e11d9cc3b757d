#ifndef STRATAL_BASICS_HPP
#define STRATAL_BASICS_HPP

#include <compare>
#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>

namespace stratal {

// Source position; line 0 marks synthetic nodes.
struct Span {
    int line = 0;
    int column = 0;
    bool valid() const { return line > 0; }
    std::string to_string() const {
        if (!valid()) return "<synthetic>";
        return std::to_string(line) + ":" + std::to_string(column);
    }
};

// Region constants r, s, ... Names live in their own namespace, disjoint
// from term variables; equality is by name.
class RegionName {
  public:
    RegionName() = default;
    explicit RegionName(std::string name) : name_(std::move(name)) {
        if (name_.empty()) throw std::invalid_argument("empty region name");
    }
    const std::string& str() const { return name_; }
    bool empty() const { return name_.empty(); }
    friend auto operator<=>(const RegionName&, const RegionName&) = default;

  private:
    std::string name_;
};

// A finite set of regions (the effect e of a term).
class Effect {
  public:
    Effect() = default;
    Effect(std::initializer_list<RegionName> rs) : regions_(rs) {}
    explicit Effect(std::set<RegionName> rs) : regions_(std::move(rs)) {}

    static Effect single(RegionName r) { return Effect{std::move(r)}; }

    bool contains(const RegionName& r) const { return regions_.count(r) != 0; }
    bool subset_of(const Effect& other) const {
        for (const auto& r : regions_)
            if (!other.contains(r)) return false;
        return true;
    }
    Effect unioned(const Effect& other) const {
        Effect out = *this;
        out.regions_.insert(other.regions_.begin(), other.regions_.end());
        return out;
    }
    void insert(RegionName r) { regions_.insert(std::move(r)); }

    bool empty() const { return regions_.empty(); }
    std::size_t size() const { return regions_.size(); }
    auto begin() const { return regions_.begin(); }
    auto end() const { return regions_.end(); }

    friend bool operator==(const Effect&, const Effect&) = default;

    // Rendered as "{r1,r2}" with names in lexicographic order.
    std::string to_string() const {
        std::string out = "{";
        bool first = true;
        for (const auto& r : regions_) {
            if (!first) out += ",";
            out += r.str();
            first = false;
        }
        out += "}";
        return out;
    }

  private:
    std::set<RegionName> regions_;
};

inline Effect effect_union(const Effect& a, const Effect& b) { return a.unioned(b); }

} // namespace stratal

#endif // STRATAL_BASICS_HPP
