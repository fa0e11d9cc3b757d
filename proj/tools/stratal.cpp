// stratal — typechecker, interpreter, and simulators for a lambda-calculus
// with regions, timed instants, and elsenext.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stratal/stratal.hpp"
#include "stratal/trace_json.hpp"

namespace fs = std::filesystem;
using namespace stratal;

namespace {

struct CommonFlags {
    std::string file;
    std::string system; // empty: file pragma or stratified
    bool no_subsumption = false;
    bool json = false;
    std::string prelude;
};

int fail_usage(const std::string& msg) {
    std::cerr << "error: " << msg << "\n";
    return 2;
}

std::optional<SourceFile> load_or_report(const CommonFlags& flags, int& exit_code) {
    ParseOptions opts;
    opts.int_prelude = flags.prelude == "int";
    auto parsed = load_source_file(flags.file, opts);
    if (auto* err = std::get_if<ParseError>(&parsed)) {
        std::cerr << flags.file << ": " << err->to_string() << "\n";
        exit_code = 1;
        return std::nullopt;
    }
    exit_code = 0;
    return std::get<SourceFile>(parsed);
}

SystemMode resolve_system(const CommonFlags& flags, const SourceFile& sf) {
    if (flags.system == "stratified") return SystemMode::Stratified;
    if (flags.system == "unstratified") return SystemMode::Unstratified;
    if (flags.system == "effect-free") return SystemMode::EffectFree;
    return sf.default_system.value_or(SystemMode::Stratified);
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("STRATAL_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

void print_diagnostic(const std::string& file, const TypeError& err) {
    std::cerr << file << ": " << err.to_string() << "\n";
    std::cerr << "  rule: " << err.rule << "\n";
    if (err.span.valid()) std::cerr << "  span: " << err.span.to_string() << "\n";
    if (!err.expected.empty()) {
        std::cerr << "  expected: " << err.expected << "\n";
        std::cerr << "  actual: " << err.actual << "\n";
    }
}

nlohmann::json error_json(const TypeError& err) {
    return {{"kind", type_error_kind_name(err.kind)},
            {"rule", err.rule},
            {"line", err.span.line},
            {"column", err.span.column},
            {"expected", err.expected},
            {"actual", err.actual},
            {"detail", err.detail}};
}

int cmd_check(const CommonFlags& flags) {
    int code = 0;
    auto sf = load_or_report(flags, code);
    if (!sf) return code;
    CheckOptions opts{resolve_system(flags, *sf), !flags.no_subsumption};
    CheckResult r = file_judgement(*sf, opts);
    if (flags.json) {
        nlohmann::json out;
        out["ok"] = r.ok();
        if (r.ok())
            out["judgement"] = r.get().to_string();
        else
            out["error"] = error_json(*r.error);
        std::cout << out.dump() << "\n";
        return r.ok() ? 0 : 1;
    }
    if (!r.ok()) {
        print_diagnostic(flags.file, *r.error);
        return 1;
    }
    std::cout << r.get().to_string() << "\n";
    return 0;
}

struct RunFlags {
    long fuel = 100000;
    int instants = 64;
    bool instants_given = false; // explicit --instants beats the file pragma
    std::uint64_t seed = default_seed();
    bool all_schedules = false;
    long budget = 100000;
    std::string out;
};

int run_checked(const CommonFlags& flags, const RunFlags& rf, bool emit_trace) {
    int code = 0;
    auto sf = load_or_report(flags, code);
    if (!sf) return code;
    SystemMode mode = resolve_system(flags, *sf);
    CheckResult r = file_judgement(*sf, {mode, !flags.no_subsumption});
    if (!r.ok()) {
        print_diagnostic(flags.file, *r.error);
        return 1;
    }
    RunConfig cfg;
    cfg.fuel = rf.fuel;
    cfg.instants =
        rf.instants_given ? rf.instants : sf->instants_cap.value_or(rf.instants);
    if (rf.all_schedules)
        cfg.scheduler = ExhaustiveScheduler{rf.budget};
    else
        cfg.scheduler = SeededScheduler{rf.seed};
    RunResult result = run(assembled_program(*sf), cfg);

    bool trace_on_stdout = emit_trace && rf.out.empty();
    if (emit_trace) {
        if (trace_on_stdout) {
            write_trace(std::cout, result.trace);
        } else {
            std::ofstream f(rf.out);
            if (!f) return fail_usage("cannot open " + rf.out);
            write_trace(f, result.trace);
        }
    }
    // keep stdout pure JSON-lines when the trace goes there
    std::ostream& report = trace_on_stdout ? std::cerr : std::cout;
    report << "judgement: " << r.get().to_string() << "\n";
    report << "outcome: " << result.outcome.kind_name() << " steps=" << result.outcome.steps
           << " instants=" << result.outcome.instants << "\n";
    const Program& final_p = result.outcome.final_program;
    if (result.outcome.kind == Outcome::Kind::CycleDetected)
        report << "recurring state:\n" << print_program(final_p) << "\n";
    else
        report << "final state:\n" << print_program(final_p) << "\n";
    return 0;
}

int cmd_expand(const CommonFlags& flags) {
    int code = 0;
    auto sf = load_or_report(flags, code);
    if (!sf) return code;
    std::cout << render_source_file(*sf, assembled_program(*sf));
    return 0;
}

int cmd_translate(const CommonFlags& flags) {
    int code = 0;
    auto sf = load_or_report(flags, code);
    if (!sf) return code;
    std::cout << render_source_file(*sf, translate(assembled_program(*sf)));
    return 0;
}

int cmd_simulate(const CommonFlags& flags, const std::string& discipline, long budget) {
    int code = 0;
    auto sf = load_or_report(flags, code);
    if (!sf) return code;
    Discipline d;
    if (discipline == "ref") d = Discipline::Reference;
    else if (discipline == "chan") d = Discipline::Channel;
    else if (discipline == "sig") d = Discipline::Signal;
    else return fail_usage("unknown discipline " + discipline + " (ref|chan|sig)");

    CheckResult ef = file_judgement(*sf, {SystemMode::EffectFree, false});
    if (!ef.ok()) {
        print_diagnostic(flags.file, *ef.error);
        return 1;
    }
    Program p = assembled_program(*sf);
    SurfaceProgram sp;
    for (const auto& th : p.threads()) sp.threads.push_back(th.term);
    for (const auto& [r, vs] : p.store())
        for (const auto& v : vs) sp.store.write(r, v, d);
    SimulationReport report = check_simulation(sp, d, budget);
    std::cout << "discipline: " << discipline_name(d) << "\n" << report.to_string() << "\n";
    return report.ok ? 0 : 1;
}

int cmd_corpus(const std::string& dir) {
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec))
        if (entry.path().extension() == ".str") files.push_back(entry.path());
    if (ec) return fail_usage("cannot read directory " + dir);
    std::sort(files.begin(), files.end());
    if (files.empty()) return fail_usage("no .str files in " + dir);

    int failures = 0;
    for (const auto& path : files) {
        auto parsed = load_source_file(path.string());
        if (auto* err = std::get_if<ParseError>(&parsed)) {
            std::cout << "FAIL " << path.filename().string() << ": " << err->to_string()
                      << "\n";
            ++failures;
            continue;
        }
        FileReport report =
            run_expectations(path.filename().string(), std::get<SourceFile>(parsed));
        std::cout << (report.passed ? "PASS " : "FAIL ") << report.name << "\n";
        if (!report.passed)
            for (const auto& line : report.lines) std::cout << line << "\n";
        if (!report.passed) ++failures;
    }
    std::cout << (files.size() - failures) << "/" << files.size() << " files passed\n";
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lambda-calculus with regions: type-and-effect checking, timed "
                 "evaluation, and surface-discipline simulation"};
    app.require_subcommand(1);

    CommonFlags flags;
    RunFlags rf;
    std::string discipline = "ref";
    long sim_budget = 200;
    std::string corpus_dir;

    auto add_common = [&](CLI::App* cmd, bool with_system = true) {
        cmd->add_option("file", flags.file, "input .str file")->required();
        if (with_system) {
            cmd->add_option("--system", flags.system,
                            "stratified|unstratified|effect-free (default: file pragma or stratified)");
            cmd->add_flag("--no-subsumption", flags.no_subsumption,
                          "disable the subtyping rule");
        }
        cmd->add_option("--prelude", flags.prelude, "enable language preludes (int)");
    };

    auto* check = app.add_subcommand("check", "typecheck a file and print its judgement");
    add_common(check);
    check->add_flag("--json", flags.json, "emit the judgement or diagnostic as JSON");

    auto add_run_flags = [&](CLI::App* cmd) {
        cmd->add_option("--fuel", rf.fuel, "max -> steps (seeded runs)");
        cmd->add_option("--instants", rf.instants, "max instants executed")
            ->each([&](const std::string&) { rf.instants_given = true; });
        cmd->add_option("--seed", rf.seed, "scheduler seed (default: $STRATAL_SEED or 0)");
        cmd->add_flag("--all-schedules", rf.all_schedules, "explore every interleaving");
        cmd->add_option("--budget", rf.budget, "state budget for --all-schedules");
    };

    auto* runc = app.add_subcommand("run", "evaluate a file and print the outcome");
    add_common(runc);
    add_run_flags(runc);

    auto* tracec = app.add_subcommand("trace", "run and emit JSON-lines trace records");
    add_common(tracec);
    add_run_flags(tracec);
    tracec->add_option("--out", rf.out, "write the trace to a file instead of stdout");

    auto* expandc = app.add_subcommand("expand", "print the macro-expanded core program");
    add_common(expandc, false);

    auto* translatec =
        app.add_subcommand("translate", "print the elsenext-eliminated program");
    add_common(translatec, false);

    auto* simulatec =
        app.add_subcommand("simulate", "check the region simulation of a surface discipline");
    add_common(simulatec, false);
    simulatec->add_option("--discipline", discipline, "ref|chan|sig")->required();
    simulatec->add_option("--budget", sim_budget, "surface state budget");

    auto* corpusc = app.add_subcommand("corpus", "run every .str file against its //! expect: headers");
    corpusc->add_option("dir", corpus_dir, "directory of .str files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (check->parsed()) return cmd_check(flags);
        if (runc->parsed()) return run_checked(flags, rf, false);
        if (tracec->parsed()) return run_checked(flags, rf, true);
        if (expandc->parsed()) return cmd_expand(flags);
        if (translatec->parsed()) return cmd_translate(flags);
        if (simulatec->parsed()) return cmd_simulate(flags, discipline, sim_budget);
        if (corpusc->parsed()) return cmd_corpus(corpus_dir);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
