#ifndef STRATAL_SURFACE_HPP
#define STRATAL_SURFACE_HPP

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stratal/run.hpp"
#include "stratal/step.hpp"

namespace stratal {

// The three concrete disciplines regions abstract:
//  - Reference: writing replaces the previous value; reading keeps it.
//  - Channel: the store is a multiset; reading consumes one occurrence.
//  - Signal: values persist within an instant and disappear at the tick.
enum class Discipline { Reference, Channel, Signal };

inline const char* discipline_name(Discipline d) {
    switch (d) {
    case Discipline::Reference: return "ref";
    case Discipline::Channel: return "chan";
    case Discipline::Signal: return "sig";
    }
    return "?";
}

// Store with discipline-dependent update rules. Channel bindings are
// multisets (duplicates kept); Reference keeps at most one value per region;
// Signal behaves like the core set-store but clears at the tick.
class SurfaceStore {
  public:
    const std::vector<Term>& values(const RegionName& r) const {
        static const std::vector<Term> none;
        auto it = bindings_.find(r);
        return it == bindings_.end() ? none : it->second;
    }

    void write(const RegionName& r, const Term& v, Discipline d) {
        auto& vec = bindings_[r];
        switch (d) {
        case Discipline::Reference:
            vec.clear();
            vec.push_back(v);
            break;
        case Discipline::Channel: vec.push_back(v); break;
        case Discipline::Signal: {
            std::string key = canonical_key(v);
            for (const auto& e : vec)
                if (canonical_key(e) == key) return;
            vec.push_back(v);
            break;
        }
        }
    }

    // Remove one occurrence alpha-equal to v (channel consumption).
    bool consume(const RegionName& r, const Term& v) {
        auto it = bindings_.find(r);
        if (it == bindings_.end()) return false;
        std::string key = canonical_key(v);
        auto& vec = it->second;
        for (auto vi = vec.begin(); vi != vec.end(); ++vi) {
            if (canonical_key(*vi) == key) {
                vec.erase(vi);
                return true;
            }
        }
        return false;
    }

    void clear() { bindings_.clear(); }
    bool empty() const {
        for (const auto& [r, vs] : bindings_)
            if (!vs.empty()) return false;
        return true;
    }

    std::string canonical() const {
        std::string out;
        for (const auto& [r, vs] : bindings_) {
            if (vs.empty()) continue;
            std::vector<std::string> keys;
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

struct SurfaceProgram {
    std::vector<Term> threads;
    SurfaceStore store;

    std::string canonical() const {
        std::vector<std::string> keys;
        for (const auto& t : threads) keys.push_back(canonical_key(t));
        std::sort(keys.begin(), keys.end());
        std::string out = "T[";
        for (const auto& k : keys) out += k + "|";
        out += "]";
        return out + store.canonical();
    }

    void flatten_par() {
        bool changed = true;
        while (changed) {
            changed = false;
            std::vector<Term> out;
            for (const auto& t : threads) {
                if (t.kind() == Term::Kind::Par) {
                    for (const auto& s : t.par_threads()) out.push_back(s);
                    changed = true;
                } else {
                    out.push_back(t);
                }
            }
            threads = std::move(out);
        }
    }
};

// Every surface successor of thread `t` under discipline `d`. Beta and
// arithmetic match the core rules; only get/set differ.
inline std::vector<std::pair<Term, SurfaceStore>> surface_step(const Term& t,
                                                               const SurfaceStore& s,
                                                               Discipline d) {
    DecomposeResult dr = decompose(t);
    if (std::holds_alternative<DecompositionFailure>(dr)) return {};
    const Decomposition& dec = std::get<Decomposition>(dr);
    if (dec.which == Decomposition::Case::IsValue) return {};
    if (redex_is_value(*dec.delta)) return {};

    EvalContext target = red(dec.full_context());
    std::vector<std::pair<Term, SurfaceStore>> out;
    std::visit(
        [&](const auto& rx) {
            using T = std::decay_t<decltype(rx)>;
            if constexpr (std::is_same_v<T, redex::Beta>) {
                out.emplace_back(plug(target, substitute(rx.fn.body(), rx.fn.param(), rx.arg)),
                                 s);
            } else if constexpr (std::is_same_v<T, redex::GetRegion>) {
                // one successor per alpha-distinct readable value
                std::set<std::string> seen;
                for (const auto& v : s.values(rx.region)) {
                    if (!seen.insert(canonical_key(v)).second) continue;
                    SurfaceStore next = s;
                    if (d == Discipline::Channel) next.consume(rx.region, v);
                    out.emplace_back(plug(target, v), std::move(next));
                }
            } else if constexpr (std::is_same_v<T, redex::SetRegion>) {
                SurfaceStore next = s;
                next.write(rx.region, rx.value, d);
                out.emplace_back(plug(target, Term::star()), std::move(next));
            } else if constexpr (std::is_same_v<T, redex::Prim>) {
                out.emplace_back(plug(target, detail::eval_prim(rx.term)), s);
            }
        },
        *dec.delta);
    return out;
}

inline std::vector<SurfaceProgram> surface_successors(const SurfaceProgram& p, Discipline d) {
    std::vector<SurfaceProgram> out;
    for (std::size_t i = 0; i < p.threads.size(); ++i) {
        for (auto& [term, store] : surface_step(p.threads[i], p.store, d)) {
            SurfaceProgram next = p;
            next.threads[i] = term;
            next.store = store;
            next.flatten_par();
            out.push_back(std::move(next));
        }
    }
    return out;
}

// End of instant: threads tick like the core calculus; signal stores clear.
struct SurfaceTickResult {
    bool ticked = false;
    SurfaceProgram program;
};

inline SurfaceTickResult surface_tick(const SurfaceProgram& p, Discipline d) {
    if (!surface_successors(p, d).empty()) return {false, {}};
    SurfaceProgram out = p;
    for (auto& t : out.threads) {
        if (is_value(t)) continue;
        DecomposeResult dr = decompose(t);
        if (std::holds_alternative<DecompositionFailure>(dr)) return {false, {}};
        const Decomposition& dec = std::get<Decomposition>(dr);
        if (dec.which == Decomposition::Case::UnderElseNext &&
            (redex_is_value(*dec.delta) || redex_is_get(*dec.delta)))
            t = plug(dec.outer, dec.later);
        // blocked reads and values stay put
    }
    if (d == Discipline::Signal) out.store.clear();
    out.flatten_par();
    return {true, std::move(out)};
}

// Map a surface configuration onto the calculus with regions: same threads,
// and every surface binding poured into the grow-only region store.
inline Program abstract_to_regions(const SurfaceProgram& p) {
    Store store;
    for (const auto& [r, vs] : p.store)
        for (const auto& v : vs) store.add(r, v);
    return Program(p.threads, std::move(store));
}

// The abstraction relation: identical thread multisets, and per region the
// surface store contents are contained in the region store (up to alpha).
inline bool abstraction_holds(const SurfaceProgram& surface, const Program& core) {
    std::vector<std::string> sk, ck;
    for (const auto& t : surface.threads) sk.push_back(canonical_key(t));
    for (const auto& th : core.threads()) ck.push_back(canonical_key(th.term));
    std::sort(sk.begin(), sk.end());
    std::sort(ck.begin(), ck.end());
    if (sk != ck) return false;
    for (const auto& [r, vs] : surface.store) {
        for (const auto& v : vs) {
            bool found = false;
            for (const auto& w : core.store().values(r))
                if (alpha_eq(v, w)) { found = true; break; }
            if (!found) return false;
        }
    }
    return true;
}

struct SimulationReport {
    bool ok = true;
    long surface_states = 0;
    long surface_steps = 0;
    int max_core_steps_used = 0;
    std::string counterexample;

    std::string to_string() const {
        if (ok)
            return "simulation ok: " + std::to_string(surface_steps) +
                   " surface steps over " + std::to_string(surface_states) +
                   " states, each matched within " +
                   std::to_string(max_core_steps_used) + " core step(s)";
        return "simulation FAILED: " + counterexample;
    }
};

// Explore the surface graph within one instant (up to `budget` states) and
// verify that every surface step is matched by 1..k core steps preserving
// the abstraction relation.
inline SimulationReport check_simulation(const SurfaceProgram& start, Discipline d,
                                         long budget, int k_max = 4) {
    SimulationReport report;
    struct Item {
        SurfaceProgram surface;
        Program core;
    };
    std::deque<Item> work;
    std::set<std::string> seen;

    SurfaceProgram s0 = start;
    s0.flatten_par();
    Program c0 = abstract_to_regions(s0);
    if (!abstraction_holds(s0, c0)) {
        report.ok = false;
        report.counterexample = "abstraction fails on the initial configuration";
        return report;
    }
    work.push_back({s0, c0});
    seen.insert(s0.canonical() + "&" + c0.canonical());
    report.surface_states = 1;

    while (!work.empty()) {
        Item item = std::move(work.front());
        work.pop_front();
        for (auto& s_next : surface_successors(item.surface, d)) {
            ++report.surface_steps;
            // find a matching core run of 1..k_max steps
            std::vector<Program> frontier = {item.core};
            std::optional<Program> matched;
            int used = 0;
            for (int depth = 1; depth <= k_max && !matched; ++depth) {
                std::vector<Program> next_frontier;
                for (const auto& c : frontier) {
                    for (auto& succ : program_successors(c)) {
                        if (abstraction_holds(s_next, succ.program)) {
                            matched = succ.program;
                            used = depth;
                            break;
                        }
                        next_frontier.push_back(std::move(succ.program));
                    }
                    if (matched) break;
                }
                frontier = std::move(next_frontier);
            }
            if (!matched) {
                report.ok = false;
                report.counterexample =
                    "surface step not simulated within " + std::to_string(k_max) +
                    " core steps; surface successor:\n" + [&] {
                        std::string out;
                        for (const auto& t : s_next.threads) out += print_term(t) + " | ";
                        return out;
                    }();
                return report;
            }
            report.max_core_steps_used = std::max(report.max_core_steps_used, used);
            std::string key = s_next.canonical() + "&" + matched->canonical();
            if (!seen.insert(key).second) continue;
            if (report.surface_states >= budget) continue; // explored enough
            ++report.surface_states;
            work.push_back({std::move(s_next), std::move(*matched)});
        }
    }
    return report;
}

} // namespace stratal

#endif // STRATAL_SURFACE_HPP
