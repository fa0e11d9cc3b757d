#ifndef STRATAL_CORPUS_HPP
#define STRATAL_CORPUS_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "stratal/parse.hpp"
#include "stratal/print.hpp"
#include "stratal/run.hpp"
#include "stratal/transform.hpp"
#include "stratal/typing.hpp"

namespace stratal {

// The runnable program of a source file: definitions substituted (at parse
// time) and macros expanded.
inline Program assembled_program(const SourceFile& sf) {
    std::vector<Term> threads;
    threads.reserve(sf.main_threads.size());
    for (const auto& t : sf.main_threads) threads.push_back(expand_macros(t));
    Store store;
    for (const auto& [r, vs] : sf.initial_store)
        for (const auto& v : vs) store.add(r, expand_macros(v));
    return Program(std::move(threads), std::move(store));
}

// The file's judgement: single thread with an empty store reports the term
// judgement; anything else reports the program judgement (Beh, e).
inline CheckResult file_judgement(const SourceFile& sf, CheckOptions opts) {
    if (auto err = wf_region_context(sf.regions, opts.mode))
        return {std::nullopt, err};
    Program p = assembled_program(sf);
    if (p.threads().size() == 1 && p.store().empty())
        return synth_term(sf.regions, {}, p.threads()[0].term, opts);
    return check_program(sf.regions, {}, p, opts);
}

inline std::string normalize_spaces(const std::string& s) {
    std::string out;
    bool in_space = true;
    for (char c : s) {
        if (c == ' ' || c == '\t') {
            if (!out.empty()) in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out += ' ';
        in_space = false;
        out += c;
    }
    return out;
}

struct FileReport {
    std::string name;
    bool passed = true;
    std::vector<std::string> lines;

    void note(bool ok, const std::string& what) {
        passed = passed && ok;
        lines.push_back(std::string(ok ? "  ok: " : "  FAIL: ") + what);
    }
};

struct CorpusDefaults {
    long fuel = 100000;
    long state_budget = 100000;
    int instants = 16;
};

// Check every `//! expect:` header of one parsed file.
inline FileReport run_expectations(const std::string& name, const SourceFile& sf,
                                   CorpusDefaults defaults = {}) {
    FileReport report;
    report.name = name;
    if (sf.expectations.empty()) {
        report.note(false, "no //! expect: headers");
        return report;
    }
    RunConfig base;
    base.fuel = defaults.fuel;
    base.instants = sf.instants_cap.value_or(defaults.instants);

    for (const auto& e : sf.expectations) {
        switch (e.kind) {
        case Expectation::Kind::CheckOk: {
            CheckResult r = file_judgement(sf, {e.system, e.subsumption});
            if (!r.ok()) {
                report.note(false, e.raw + " — check failed: " + r.error->to_string());
                break;
            }
            if (e.judgement &&
                normalize_spaces(*e.judgement) != normalize_spaces(r.get().to_string())) {
                report.note(false, e.raw + " — judgement is " + r.get().to_string());
                break;
            }
            report.note(true, e.raw);
            break;
        }
        case Expectation::Kind::CheckFail: {
            CheckResult r = file_judgement(sf, {e.system, e.subsumption});
            if (r.ok()) {
                report.note(false, e.raw + " — unexpectedly checked at " + r.get().to_string());
                break;
            }
            if (e.error_kind && *e.error_kind != type_error_kind_name(r.error->kind)) {
                report.note(false, e.raw + " — failed with " +
                                       std::string(type_error_kind_name(r.error->kind)) +
                                       " instead");
                break;
            }
            report.note(true, e.raw);
            break;
        }
        case Expectation::Kind::Diverges:
        case Expectation::Kind::Terminates: {
            CheckResult ef = file_judgement(sf, {SystemMode::EffectFree, false});
            if (!ef.ok()) {
                report.note(false, e.raw + " — not |-ef-typable: " + ef.error->to_string());
                break;
            }
            RunConfig cfg = base;
            cfg.scheduler = ExhaustiveScheduler{defaults.state_budget};
            RunResult rr = run(assembled_program(sf), cfg);
            if (e.kind == Expectation::Kind::Diverges) {
                bool ok = rr.outcome.kind == Outcome::Kind::CycleDetected;
                report.note(ok, e.raw + (ok ? "" : " — outcome " + rr.outcome.kind_name()));
            } else {
                bool ok = rr.outcome.kind == Outcome::Kind::Terminated;
                if (ok && e.max_instants && rr.outcome.instants > *e.max_instants) {
                    report.note(false, e.raw + " — took " +
                                           std::to_string(rr.outcome.instants) + " instants");
                    break;
                }
                report.note(ok, e.raw + (ok ? "" : " — outcome " + rr.outcome.kind_name()));
            }
            break;
        }
        }
    }
    return report;
}

inline std::variant<SourceFile, ParseError> load_source_file(const std::string& path,
                                                             ParseOptions opts = {}) {
    std::ifstream in(path);
    if (!in) return ParseError{{}, "cannot open " + path, ""};
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_source(buf.str(), opts);
}

// Render a program back to concrete .str syntax under the file's region
// declarations (used by the expand/translate subcommands; reparseable).
inline std::string render_source_file(const SourceFile& sf, const Program& p) {
    std::string out;
    if (sf.int_prelude) out += "//! prelude: int\n";
    for (const auto& [name, ty] : sf.regions.entries())
        out += "region " + name.str() + " : " + ty.to_string() + ";\n";
    out += print_store(p.store());
    out += "main = ";
    bool first = true;
    for (const auto& th : p.threads()) {
        if (!first) out += "\n     | ";
        out += print_term(th.term);
        first = false;
    }
    out += ";\n";
    return out;
}

} // namespace stratal

#endif // STRATAL_CORPUS_HPP
