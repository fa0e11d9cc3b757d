#ifndef STRATAL_STORE_HPP
#define STRATAL_STORE_HPP

#include <algorithm>
#include <cassert>
#include <map>
#include <string>
#include <vector>

#include "stratal/term.hpp"

namespace stratal {

// A store S: each region is bound to a set of closed values, deduplicated up
// to alpha-equivalence. set(r,V) adds rather than updates, so bindings only
// grow within an instant.
class Store {
  public:
    Store() = default;

    bool has(const RegionName& r) const {
        auto it = bindings_.find(r);
        return it != bindings_.end() && !it->second.empty();
    }
    // Values at r, in insertion order (empty if unbound).
    const std::vector<Term>& values(const RegionName& r) const {
        static const std::vector<Term> none;
        auto it = bindings_.find(r);
        return it == bindings_.end() ? none : it->second;
    }

    // Add a value; alpha-variants of an already-present value are dropped.
    void add(const RegionName& r, const Term& v) {
        assert(is_value(v));
        std::string key = canonical_key(v);
        auto& vec = bindings_[r];
        for (const auto& existing : vec)
            if (canonical_key(existing) == key) return;
        vec.push_back(v);
    }

    void merge(const Store& other) {
        for (const auto& [r, vs] : other.bindings_)
            for (const auto& v : vs) add(r, v);
    }

    std::vector<RegionName> domain() const {
        std::vector<RegionName> out;
        for (const auto& [r, vs] : bindings_)
            if (!vs.empty()) out.push_back(r);
        return out;
    }

    // The store restricted to the given region set.
    Store restricted(const Effect& regions) const {
        Store out;
        for (const auto& [r, vs] : bindings_)
            if (regions.contains(r)) out.bindings_[r] = vs;
        return out;
    }

    void clear() { bindings_.clear(); }
    bool empty() const {
        for (const auto& [r, vs] : bindings_)
            if (!vs.empty()) return false;
        return true;
    }

    // True if every binding of this store appears in `other` (up to alpha).
    bool contained_in(const Store& other) const {
        for (const auto& [r, vs] : bindings_) {
            for (const auto& v : vs) {
                bool found = false;
                for (const auto& w : other.values(r))
                    if (alpha_eq(v, w)) { found = true; break; }
                if (!found) return false;
            }
        }
        return true;
    }

    bool alpha_equal(const Store& other) const {
        return canonical() == other.canonical();
    }

    // Canonical serialization: regions sorted, values sorted by canonical key.
    std::string canonical() const {
        std::string out;
        for (const auto& [r, vs] : bindings_) {
            if (vs.empty()) continue;
            std::vector<std::string> keys;
            keys.reserve(vs.size());
            for (const auto& v : vs) keys.push_back(canonical_key(v));
            std::sort(keys.begin(), keys.end());
            out += r.str() + "<=[";
            for (const auto& k : keys) out += k + "|";
            out += "];";
        }
        return out;
    }

    auto begin() const { return bindings_.begin(); }
    auto end() const { return bindings_.end(); }

  private:
    std::map<RegionName, std::vector<Term>> bindings_;
};

// One thread of a program; ids stay stable within a run for tracing.
struct ProgramThread {
    int id = 0;
    Term term;
};

// A program: a nonempty multiset of threads plus a store. `,` is treated as
// associative-commutative, so canonical keys sort threads.
class Program {
  public:
    Program() = default;
    Program(std::vector<Term> threads, Store store) : store_(std::move(store)) {
        for (auto& t : threads) push_thread(std::move(t));
        flatten_par();
    }

    const std::vector<ProgramThread>& threads() const { return threads_; }
    const Store& store() const { return store_; }
    Store& store_mut() { return store_; }

    // Replace thread `index` with `t`, then split any top-level par nodes
    // into separate threads (fresh ids, inserted in place).
    Program with_thread(std::size_t index, Term t) const {
        Program out = *this;
        out.threads_[index].term = std::move(t);
        out.flatten_par();
        return out;
    }
    Program with_store(Store s) const {
        Program out = *this;
        out.store_ = std::move(s);
        return out;
    }
    Program with_threads(std::vector<Term> terms) const {
        Program out = *this;
        out.threads_.clear();
        for (std::size_t i = 0; i < terms.size(); ++i)
            out.threads_.push_back({out.next_id_++, std::move(terms[i])});
        out.flatten_par();
        return out;
    }
    // Replace every thread's term positionally, keeping ids stable.
    Program with_each_thread(std::vector<Term> terms) const {
        assert(terms.size() == threads_.size());
        Program out = *this;
        for (std::size_t i = 0; i < terms.size(); ++i)
            out.threads_[i].term = std::move(terms[i]);
        out.flatten_par();
        return out;
    }

    bool all_values() const {
        for (const auto& th : threads_)
            if (!is_value(th.term)) return false;
        return true;
    }

    // Canonical whole-state serialization (threads as a multiset, store
    // deduplicated); ids are excluded so alpha-equal states collide.
    std::string canonical() const {
        std::vector<std::string> keys;
        keys.reserve(threads_.size());
        for (const auto& th : threads_) keys.push_back(canonical_key(th.term));
        std::sort(keys.begin(), keys.end());
        std::string out = "T[";
        for (const auto& k : keys) out += k + "|";
        out += "]";
        out += store_.canonical();
        return out;
    }

    bool alpha_equal(const Program& other) const { return canonical() == other.canonical(); }

  private:
    void push_thread(Term t) { threads_.push_back({next_id_++, std::move(t)}); }

    void flatten_par() {
        bool changed = true;
        while (changed) {
            changed = false;
            std::vector<ProgramThread> out;
            out.reserve(threads_.size());
            for (auto& th : threads_) {
                if (th.term.kind() == Term::Kind::Par) {
                    for (const auto& sub : th.term.par_threads())
                        out.push_back({next_id_++, sub});
                    changed = true;
                } else {
                    out.push_back(th);
                }
            }
            threads_ = std::move(out);
        }
    }

    std::vector<ProgramThread> threads_;
    Store store_;
    int next_id_ = 0;
};

} // namespace stratal

#endif // STRATAL_STORE_HPP
