#ifndef STRATAL_PARSE_HPP
#define STRATAL_PARSE_HPP

#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "stratal/store.hpp"
#include "stratal/term.hpp"
#include "stratal/typing.hpp"

namespace stratal {

struct ParseError {
    Span span;
    std::string message;
    std::string expected; // expected-token set, may be empty

    std::string to_string() const {
        std::string out = "parse error at " + span.to_string() + ": " + message;
        if (!expected.empty()) out += " (expected " + expected + ")";
        return out;
    }
};

// What a corpus file claims about itself (`//! expect: ...`).
struct Expectation {
    enum class Kind { CheckOk, CheckFail, Diverges, Terminates };
    Kind kind = Kind::CheckOk;
    SystemMode system = SystemMode::Stratified; // Check* only
    bool subsumption = true;                    // "no-subsumption" modifier
    std::optional<std::string> judgement;       // CheckOk: expected rendering
    std::optional<std::string> error_kind;      // CheckFail: expected kind name
    std::optional<int> max_instants;            // Terminates: instants<=K
    std::string raw;
};

// A parsed .str file: declared regions (elaborated, in declaration order),
// named definitions, an initial store, and the main thread list. Definitions
// are transparent abbreviations, already substituted into later items.
struct SourceFile {
    RegionContext regions;
    std::vector<std::pair<std::string, Term>> defs;
    Store initial_store;
    std::vector<Term> main_threads;
    bool int_prelude = false;
    std::optional<SystemMode> default_system; // //! system: ...
    std::optional<int> instants_cap;          // //! instants: K
    std::vector<Expectation> expectations;
    std::vector<std::string> pragmas; // raw //! payloads

    Program program() const { return Program(main_threads, initial_store); }
};

struct ParseOptions {
    bool int_prelude = false; // --prelude=int
};

namespace detail {

// ---- lexer ------------------------------------------------------------------

enum class Tok {
    Ident,
    HashIdent,
    Int,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Pipe,
    Plus,
    Minus,
    Star,
    Arrow,     // ->
    EffOpen,   // -{
    EffClose,  // }>
    StoreArrow,// <=
    Equals,
    End,
};

inline const char* tok_name(Tok t) {
    switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::HashIdent: return "region constant";
    case Tok::Int: return "integer literal";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Pipe: return "'|'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Arrow: return "'->'";
    case Tok::EffOpen: return "'-{'";
    case Tok::EffClose: return "'}>'";
    case Tok::StoreArrow: return "'<='";
    case Tok::Equals: return "'='";
    case Tok::End: return "end of input";
    }
    return "?";
}

struct Token {
    Tok type;
    std::string text;
    long int_value = 0;
    Span span;
};

struct ParseErrorException {
    ParseError error;
};

[[noreturn]] inline void parse_fail(Span span, std::string message, std::string expected = "") {
    throw ParseErrorException{ParseError{span, std::move(message), std::move(expected)}};
}

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

struct LexOutput {
    std::vector<Token> tokens;
    std::vector<std::string> pragmas;
};

inline LexOutput lex(const std::string& src) {
    LexOutput out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto span = [&]() { return Span{line, col}; };
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i + k] == '\n') { ++line; col = 1; }
            else ++col;
        }
        i += n;
    };
    auto prev_ends_expr = [&]() {
        if (out.tokens.empty()) return false;
        switch (out.tokens.back().type) {
        case Tok::Ident:
        case Tok::HashIdent:
        case Tok::Int:
        case Tok::RParen:
        case Tok::RBrace:
        case Tok::RBracket: return true;
        default: return false;
        }
    };

    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { advance(1); continue; }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            std::size_t j = i;
            while (j < src.size() && src[j] != '\n') ++j;
            std::string comment = src.substr(i, j - i);
            if (comment.rfind("//!", 0) == 0) {
                std::string payload = comment.substr(3);
                std::size_t b = payload.find_first_not_of(" \t");
                std::size_t e = payload.find_last_not_of(" \t\r");
                out.pragmas.push_back(
                    b == std::string::npos ? "" : payload.substr(b, e - b + 1));
            }
            advance(j - i);
            continue;
        }
        Span sp = span();
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < src.size() && ident_char(src[j])) ++j;
            out.tokens.push_back({Tok::Ident, src.substr(i, j - i), 0, sp});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            Token t{Tok::Int, src.substr(i, j - i), 0, sp};
            t.int_value = std::stol(t.text);
            out.tokens.push_back(std::move(t));
            advance(j - i);
            continue;
        }
        if (c == '#') {
            std::size_t j = i + 1;
            if (j >= src.size() || !ident_start(src[j]))
                parse_fail(sp, "'#' must be followed by a region name");
            while (j < src.size() && ident_char(src[j])) ++j;
            out.tokens.push_back({Tok::HashIdent, src.substr(i + 1, j - i - 1), 0, sp});
            advance(j - i);
            continue;
        }
        if (c == '-') {
            if (i + 1 < src.size() && src[i + 1] == '>') {
                out.tokens.push_back({Tok::Arrow, "->", 0, sp});
                advance(2);
                continue;
            }
            if (i + 1 < src.size() && src[i + 1] == '{') {
                out.tokens.push_back({Tok::EffOpen, "-{", 0, sp});
                advance(2);
                continue;
            }
            if (i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])) &&
                !prev_ends_expr()) {
                std::size_t j = i + 1;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                Token t{Tok::Int, src.substr(i, j - i), 0, sp};
                t.int_value = std::stol(t.text);
                out.tokens.push_back(std::move(t));
                advance(j - i);
                continue;
            }
            out.tokens.push_back({Tok::Minus, "-", 0, sp});
            advance(1);
            continue;
        }
        if (c == '}' && i + 1 < src.size() && src[i + 1] == '>') {
            out.tokens.push_back({Tok::EffClose, "}>", 0, sp});
            advance(2);
            continue;
        }
        if (c == '<' && i + 1 < src.size() && src[i + 1] == '=') {
            out.tokens.push_back({Tok::StoreArrow, "<=", 0, sp});
            advance(2);
            continue;
        }
        Tok single;
        switch (c) {
        case '(': single = Tok::LParen; break;
        case ')': single = Tok::RParen; break;
        case '[': single = Tok::LBracket; break;
        case ']': single = Tok::RBracket; break;
        case '{': single = Tok::LBrace; break;
        case '}': single = Tok::RBrace; break;
        case ',': single = Tok::Comma; break;
        case ';': single = Tok::Semi; break;
        case ':': single = Tok::Colon; break;
        case '|': single = Tok::Pipe; break;
        case '+': single = Tok::Plus; break;
        case '*': single = Tok::Star; break;
        case '=': single = Tok::Equals; break;
        default:
            parse_fail(sp, std::string("unexpected character '") + c + "'");
        }
        out.tokens.push_back({single, std::string(1, c), 0, sp});
        advance(1);
    }
    out.tokens.push_back({Tok::End, "", 0, span()});
    return out;
}

// ---- syntactic types (Reg[r] content resolved after all regions are known) ----

struct STy {
    Type::Kind kind = Type::Kind::Unit;
    RegionName region;                 // Reg
    std::shared_ptr<STy> domain;       // Arrow
    Effect effect;                     // Arrow
    std::shared_ptr<STy> codomain;     // Arrow
    Span span;
};

inline const std::set<std::string>& keywords() {
    static const std::set<std::string> kw = {
        "fun", "get", "set", "elsenext", "par",  "ref",   "fix",  "ifz", "iszero",
        "unit", "region", "def", "store", "main", "Unit", "Int", "Beh", "Reg"};
    return kw;
}

class Parser {
  public:
    Parser(std::vector<Token> tokens, bool int_prelude)
        : tokens_(std::move(tokens)), int_prelude_(int_prelude) {}

    // ---- token plumbing ----
    const Token& peek(int ahead = 0) const {
        std::size_t idx = pos_ + ahead;
        return idx < tokens_.size() ? tokens_[idx] : tokens_.back();
    }
    const Token& next() {
        const Token& t = peek();
        if (t.type != Tok::End) ++pos_;
        return t;
    }
    bool at(Tok t) const { return peek().type == t; }
    bool at_keyword(const std::string& kw) const {
        return at(Tok::Ident) && peek().text == kw;
    }
    const Token& expect(Tok t, const std::string& what) {
        if (!at(t))
            parse_fail(peek().span, "found " + describe(peek()) + " while parsing " + what,
                       tok_name(t));
        return next();
    }
    void expect_keyword(const std::string& kw) {
        if (!at_keyword(kw))
            parse_fail(peek().span, "found " + describe(peek()), "'" + kw + "'");
        next();
    }
    static std::string describe(const Token& t) {
        if (t.type == Tok::Ident) return "'" + t.text + "'";
        return tok_name(t.type);
    }
    void require_prelude(Span sp, const std::string& feature) const {
        if (!int_prelude_)
            parse_fail(sp, feature + " requires the integer prelude (--prelude=int or '//! prelude: int')");
    }
    bool done() const { return at(Tok::End); }
    std::size_t position() const { return pos_; }
    void rewind(std::size_t p) { pos_ = p; }
    void skip_to_semi() {
        while (!at(Tok::Semi) && !at(Tok::End)) next();
        if (at(Tok::Semi)) next();
    }

    // ---- types ----
    STy parse_sty() {
        STy left = parse_sty_atom();
        if (at(Tok::EffOpen)) {
            Span sp = next().span;
            Effect e;
            if (!at(Tok::EffClose)) {
                while (true) {
                    const Token& r = expect(Tok::Ident, "an effect region list");
                    e.insert(RegionName(r.text));
                    if (at(Tok::Comma)) { next(); continue; }
                    break;
                }
            }
            expect(Tok::EffClose, "an effect arrow");
            STy out;
            out.kind = Type::Kind::Arrow;
            out.domain = std::make_shared<STy>(std::move(left));
            out.effect = std::move(e);
            out.codomain = std::make_shared<STy>(parse_sty());
            out.span = sp;
            return out;
        }
        return left;
    }

    STy parse_sty_atom() {
        Span sp = peek().span;
        if (at(Tok::LParen)) {
            next();
            STy inner = parse_sty();
            expect(Tok::RParen, "a parenthesized type");
            return inner;
        }
        if (at_keyword("Unit")) { next(); return STy{Type::Kind::Unit, {}, {}, {}, {}, sp}; }
        if (at_keyword("Beh")) { next(); return STy{Type::Kind::Behaviour, {}, {}, {}, {}, sp}; }
        if (at_keyword("Int")) {
            require_prelude(sp, "type Int");
            next();
            return STy{Type::Kind::Int, {}, {}, {}, {}, sp};
        }
        if (at_keyword("Reg")) {
            next();
            expect(Tok::LBracket, "a region type");
            const Token& r = expect(Tok::Ident, "a region type");
            expect(Tok::RBracket, "a region type");
            return STy{Type::Kind::Region, RegionName(r.text), {}, {}, {}, sp};
        }
        parse_fail(sp, "found " + describe(peek()), "a type");
    }

    // ---- terms (resolver elaborates Reg[...] annotations) ----
    using Resolver = std::function<Type(const RegionName&, Span)>;

    Term parse_term(const Resolver& resolve) {
        if (at_keyword("fun")) return parse_fun(resolve);
        if (at_keyword("fix")) return parse_fix(resolve);
        return parse_elsenext(resolve);
    }

    Term parse_fun(const Resolver& resolve) {
        Span sp = peek().span;
        expect_keyword("fun");
        expect(Tok::LParen, "a lambda parameter");
        const Token& x = expect(Tok::Ident, "a lambda parameter");
        if (keywords().count(x.text))
            parse_fail(x.span, "'" + x.text + "' is a keyword and cannot bind");
        expect(Tok::Colon, "a lambda annotation");
        Type ann = elaborate(parse_sty(), resolve);
        expect(Tok::RParen, "a lambda parameter");
        expect(Tok::Arrow, "a lambda body");
        Term body = parse_term(resolve);
        return Term::lam(x.text, std::move(ann), std::move(body), sp);
    }

    Term parse_fix(const Resolver& resolve) {
        Span sp = peek().span;
        expect_keyword("fix");
        expect(Tok::LBracket, "a fix region");
        const Token& r = expect(Tok::Ident, "a fix region");
        expect(Tok::RBracket, "a fix region");
        expect(Tok::LParen, "a fix binder");
        const Token& f = expect(Tok::Ident, "a fix binder");
        if (keywords().count(f.text))
            parse_fail(f.span, "'" + f.text + "' is a keyword and cannot bind");
        expect(Tok::Colon, "a fix annotation");
        STy ann = parse_sty();
        if (ann.kind != Type::Kind::Arrow)
            parse_fail(ann.span, "fix annotations must be arrow types (A -{e}> B)");
        expect(Tok::RParen, "a fix binder");
        expect(Tok::Arrow, "a fix body");
        Term body = parse_term(resolve);
        Type domain = elaborate(*ann.domain, resolve);
        Type codomain = elaborate(*ann.codomain, resolve);
        return Term::fix_macro(RegionName(r.text), f.text, std::move(domain), ann.effect,
                               std::move(codomain), std::move(body), sp);
    }

    Term parse_elsenext(const Resolver& resolve) {
        Term left = parse_additive(resolve);
        if (at_keyword("elsenext")) {
            Span sp = next().span;
            Term right = parse_term(resolve); // right-assoc, lowest precedence
            return Term::else_next(std::move(left), std::move(right), sp);
        }
        return left;
    }

    Term parse_additive(const Resolver& resolve) {
        Term left = parse_multiplicative(resolve);
        while (at(Tok::Plus) || at(Tok::Minus)) {
            Span sp = peek().span;
            require_prelude(sp, "integer arithmetic");
            PrimOp op = at(Tok::Plus) ? PrimOp::Add : PrimOp::Sub;
            next();
            Term right = parse_multiplicative(resolve);
            left = Term::prim(op, {std::move(left), std::move(right)}, sp);
        }
        return left;
    }

    Term parse_multiplicative(const Resolver& resolve) {
        Term left = parse_app(resolve);
        while (at(Tok::Star)) {
            Span sp = peek().span;
            require_prelude(sp, "integer arithmetic");
            next();
            Term right = parse_app(resolve);
            left = Term::prim(PrimOp::Mul, {std::move(left), std::move(right)}, sp);
        }
        return left;
    }

    bool starts_item() const {
        switch (peek().type) {
        case Tok::LParen: return true;
        case Tok::HashIdent: return true;
        case Tok::Int: return true;
        case Tok::Ident: {
            const std::string& w = peek().text;
            if (!keywords().count(w)) return true;
            return w == "get" || w == "set" || w == "par" || w == "ref" || w == "ifz" ||
                   w == "iszero" || w == "unit";
        }
        default: return false;
        }
    }

    Term parse_app(const Resolver& resolve) {
        Term left = parse_item(resolve);
        while (starts_item()) {
            Span sp = peek().span;
            Term arg = parse_item(resolve);
            left = Term::app(std::move(left), std::move(arg), sp);
        }
        return left;
    }

    Term parse_item(const Resolver& resolve) {
        if (at_keyword("get")) {
            Span sp = next().span;
            Term target = parse_atom(resolve);
            return Term::get(std::move(target), sp);
        }
        return parse_atom(resolve);
    }

    Term parse_atom(const Resolver& resolve) {
        Span sp = peek().span;
        switch (peek().type) {
        case Tok::LParen: {
            next();
            Term t = parse_term(resolve);
            expect(Tok::RParen, "a parenthesized term");
            return t;
        }
        case Tok::HashIdent: return Term::region(RegionName(next().text), sp);
        case Tok::Int: {
            require_prelude(sp, "integer literals");
            return Term::int_lit(next().int_value, sp);
        }
        case Tok::Ident: break;
        default: parse_fail(sp, "found " + describe(peek()), "a term");
        }
        const std::string& w = peek().text;
        if (w == "unit") { next(); return Term::star(sp); }
        if (w == "set") {
            next();
            expect(Tok::LParen, "set");
            Term target = parse_term(resolve);
            expect(Tok::Comma, "set");
            Term value = parse_term(resolve);
            expect(Tok::RParen, "set");
            return Term::set(std::move(target), std::move(value), sp);
        }
        if (w == "par") {
            next();
            expect(Tok::LBrace, "par");
            std::vector<Term> threads;
            threads.push_back(parse_term(resolve));
            while (at(Tok::Comma)) {
                next();
                threads.push_back(parse_term(resolve));
            }
            expect(Tok::RBrace, "par");
            if (threads.size() < 2)
                parse_fail(sp, "par needs at least two threads");
            return Term::par(std::move(threads), sp);
        }
        if (w == "ref") {
            next();
            expect(Tok::LBracket, "ref");
            const Token& r = expect(Tok::Ident, "ref");
            expect(Tok::RBracket, "ref");
            expect(Tok::LParen, "ref");
            Term body = parse_term(resolve);
            expect(Tok::RParen, "ref");
            return Term::ref_macro(RegionName(r.text), std::move(body), sp);
        }
        if (w == "ifz") {
            require_prelude(sp, "ifz");
            next();
            expect(Tok::LParen, "ifz");
            Term c = parse_term(resolve);
            expect(Tok::RParen, "ifz");
            expect(Tok::LBrace, "ifz");
            Term then_branch = parse_term(resolve);
            expect(Tok::RBrace, "ifz");
            expect(Tok::LBrace, "ifz");
            Term else_branch = parse_term(resolve);
            expect(Tok::RBrace, "ifz");
            return Term::if_zero(std::move(c), std::move(then_branch), std::move(else_branch), sp);
        }
        if (w == "iszero") {
            require_prelude(sp, "iszero");
            next();
            expect(Tok::LParen, "iszero");
            Term a = parse_term(resolve);
            expect(Tok::RParen, "iszero");
            return Term::prim(PrimOp::IsZero, {std::move(a)}, sp);
        }
        if (keywords().count(w))
            parse_fail(sp, "keyword '" + w + "' cannot appear here", "a term");
        next();
        return Term::var(w, sp);
    }

    static Type elaborate(const STy& sty, const Resolver& resolve) {
        switch (sty.kind) {
        case Type::Kind::Unit: return Type::unit();
        case Type::Kind::Int: return Type::integer();
        case Type::Kind::Behaviour: return Type::behaviour();
        case Type::Kind::Region: return Type::region(sty.region, resolve(sty.region, sty.span));
        case Type::Kind::Arrow:
            return Type::arrow(elaborate(*sty.domain, resolve), sty.effect,
                               elaborate(*sty.codomain, resolve));
        }
        parse_fail(sty.span, "unreachable type kind");
    }

  private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    bool int_prelude_;
};

// ---- pragmas -------------------------------------------------------------------

inline std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline SystemMode parse_system_name(const std::string& w, Span sp) {
    if (w == "stratified") return SystemMode::Stratified;
    if (w == "unstratified") return SystemMode::Unstratified;
    if (w == "effect-free") return SystemMode::EffectFree;
    parse_fail(sp, "unknown system '" + w + "'", "stratified|unstratified|effect-free");
}

inline Expectation parse_expectation(const std::string& payload) {
    Expectation e;
    e.raw = payload;
    auto words = split_words(payload);
    if (words.empty()) parse_fail({}, "empty //! expect: pragma");
    std::size_t i = 1;
    if (words[0] == "check" || words[0] == "check-fail") {
        e.kind = words[0] == "check" ? Expectation::Kind::CheckOk : Expectation::Kind::CheckFail;
        if (i >= words.size()) parse_fail({}, "expect: " + words[0] + " needs a system name");
        e.system = parse_system_name(words[i++], {});
        if (i < words.size() && words[i] == "no-subsumption") {
            e.subsumption = false;
            ++i;
        }
        if (e.kind == Expectation::Kind::CheckOk) {
            if (i < words.size() && words[i] == "=>") {
                ++i;
                std::string rest;
                for (; i < words.size(); ++i) {
                    if (!rest.empty()) rest += " ";
                    rest += words[i];
                }
                e.judgement = rest;
            }
        } else if (i < words.size()) {
            e.error_kind = words[i++];
        }
        return e;
    }
    if (words[0] == "diverges") {
        e.kind = Expectation::Kind::Diverges;
        return e;
    }
    if (words[0] == "terminates") {
        e.kind = Expectation::Kind::Terminates;
        if (i < words.size()) {
            const std::string& w = words[i];
            const std::string prefix = "instants<=";
            if (w.rfind(prefix, 0) == 0)
                e.max_instants = std::stoi(w.substr(prefix.size()));
            else
                parse_fail({}, "unknown terminates qualifier '" + w + "'", "instants<=K");
        }
        return e;
    }
    parse_fail({}, "unknown expectation '" + words[0] + "'",
               "check|check-fail|diverges|terminates");
}

} // namespace detail

// ---- public entry points ---------------------------------------------------------

inline std::variant<SourceFile, ParseError> parse_source(const std::string& text,
                                                         ParseOptions opts = {}) {
    using namespace detail;
    try {
        LexOutput lexed = lex(text);

        SourceFile out;
        out.int_prelude = opts.int_prelude;
        for (const auto& p : lexed.pragmas) {
            out.pragmas.push_back(p);
            auto words = split_words(p);
            if (words.empty()) continue;
            if (words[0] == "prelude:" && words.size() > 1 && words[1] == "int")
                out.int_prelude = true;
            else if (words[0] == "system:" && words.size() > 1)
                out.default_system = parse_system_name(words[1], {});
            else if (words[0] == "instants:" && words.size() > 1)
                out.instants_cap = std::stoi(words[1]);
            else if (words[0] == "expect:")
                out.expectations.push_back(parse_expectation(p.substr(7)));
        }

        // pass 1: region declarations only
        struct RawRegion {
            RegionName name;
            STy sty;
            Span span;
        };
        std::vector<RawRegion> raw_regions;
        {
            Parser p(lexed.tokens, out.int_prelude);
            while (!p.done()) {
                if (p.at_keyword("region")) {
                    Span sp = p.peek().span;
                    p.expect_keyword("region");
                    const Token& name = p.expect(Tok::Ident, "a region declaration");
                    p.expect(Tok::Colon, "a region declaration");
                    STy sty = p.parse_sty();
                    p.expect(Tok::Semi, "a region declaration");
                    for (const auto& rr : raw_regions)
                        if (rr.name.str() == name.text)
                            parse_fail(sp, "region " + name.text + " declared twice");
                    raw_regions.push_back({RegionName(name.text), std::move(sty), sp});
                } else {
                    p.skip_to_semi();
                }
            }
        }

        // elaborate region contents (Reg[r] pulls in R(r); cycles are an error)
        std::map<std::string, const STy*> decl_of;
        for (const auto& rr : raw_regions) decl_of[rr.name.str()] = &rr.sty;
        std::map<std::string, Type> resolved;
        std::set<std::string> in_progress;
        std::function<Type(const RegionName&, Span)> resolve =
            [&](const RegionName& r, Span sp) -> Type {
            auto it = resolved.find(r.str());
            if (it != resolved.end()) return it->second;
            auto decl = decl_of.find(r.str());
            if (decl == decl_of.end())
                parse_fail(sp, "region " + r.str() + " is not declared");
            if (!in_progress.insert(r.str()).second)
                parse_fail(sp, "region " + r.str() + " has a cyclic content type");
            Type t = Parser::elaborate(*decl->second, resolve);
            in_progress.erase(r.str());
            resolved.emplace(r.str(), t);
            return t;
        };
        for (const auto& rr : raw_regions)
            out.regions.push(rr.name, resolve(rr.name, rr.span));

        // pass 2: definitions, stores, main
        Parser p(lexed.tokens, out.int_prelude);
        auto apply_defs = [&](Term t) {
            for (const auto& [name, body] : out.defs) t = substitute(t, name, body);
            return t;
        };
        bool saw_main = false;
        while (!p.done()) {
            if (p.at_keyword("region")) {
                p.skip_to_semi();
                continue;
            }
            if (p.at_keyword("def")) {
                p.expect_keyword("def");
                const Token& name = p.expect(Tok::Ident, "a definition");
                if (keywords().count(name.text))
                    parse_fail(name.span, "'" + name.text + "' is a keyword");
                p.expect(Tok::Equals, "a definition");
                Term body = apply_defs(p.parse_term(resolve));
                p.expect(Tok::Semi, "a definition");
                for (const auto& [n, b] : out.defs)
                    if (n == name.text)
                        parse_fail(name.span, "definition " + name.text + " repeated");
                out.defs.emplace_back(name.text, std::move(body));
                continue;
            }
            if (p.at_keyword("store")) {
                Span sp = p.peek().span;
                p.expect_keyword("store");
                const Token& r = p.expect(Tok::Ident, "a store declaration");
                p.expect(Tok::StoreArrow, "a store declaration");
                p.expect(Tok::LBrace, "a store declaration");
                std::vector<Term> values;
                values.push_back(apply_defs(p.parse_term(resolve)));
                while (p.at(Tok::Comma)) {
                    p.next();
                    values.push_back(apply_defs(p.parse_term(resolve)));
                }
                p.expect(Tok::RBrace, "a store declaration");
                p.expect(Tok::Semi, "a store declaration");
                if (!out.regions.has(RegionName(r.text)))
                    parse_fail(sp, "store binds undeclared region " + r.text);
                for (auto& v : values) {
                    if (!is_value(v))
                        parse_fail(sp, "store literals must contain values");
                    if (!is_closed(v))
                        parse_fail(sp, "store literals must be closed");
                    out.initial_store.add(RegionName(r.text), v);
                }
                continue;
            }
            if (p.at_keyword("main")) {
                Span sp = p.peek().span;
                if (saw_main) parse_fail(sp, "main declared twice");
                saw_main = true;
                p.expect_keyword("main");
                p.expect(Tok::Equals, "the main program");
                out.main_threads.push_back(apply_defs(p.parse_term(resolve)));
                while (p.at(Tok::Pipe)) {
                    p.next();
                    out.main_threads.push_back(apply_defs(p.parse_term(resolve)));
                }
                p.expect(Tok::Semi, "the main program");
                continue;
            }
            parse_fail(p.peek().span, "found " + Parser::describe(p.peek()),
                       "region|def|store|main");
        }
        if (!saw_main) parse_fail({}, "missing main program");

        // every region used is declared
        Effect declared = out.regions.dom();
        auto check_scoped = [&](const Term& t, const char* what) {
            for (const auto& r : free_regions(t))
                if (!declared.contains(r))
                    parse_fail(t.span(), std::string(what) + " mentions undeclared region " +
                                             r.str());
        };
        for (const auto& th : out.main_threads) check_scoped(th, "main");
        for (const auto& [r, vs] : out.initial_store)
            for (const auto& v : vs) check_scoped(v, "store");

        return out;
    } catch (const detail::ParseErrorException& e) {
        return e.error;
    }
}

// Parse a single term (annotations may mention the given regions).
inline std::variant<Term, ParseError> parse_term_string(const std::string& text,
                                                        const RegionContext& regions,
                                                        bool int_prelude = true) {
    using namespace detail;
    try {
        LexOutput lexed = lex(text);
        Parser p(lexed.tokens, int_prelude);
        auto resolve = [&](const RegionName& r, Span sp) -> Type {
            auto t = regions.lookup(r);
            if (!t) parse_fail(sp, "region " + r.str() + " is not declared");
            return *t;
        };
        Term t = p.parse_term(resolve);
        if (!p.done()) parse_fail(p.peek().span, "trailing input after term");
        return t;
    } catch (const detail::ParseErrorException& e) {
        return e.error;
    }
}

inline std::variant<Type, ParseError> parse_type_string(const std::string& text,
                                                        const RegionContext& regions,
                                                        bool int_prelude = true) {
    using namespace detail;
    try {
        LexOutput lexed = lex(text);
        Parser p(lexed.tokens, int_prelude);
        auto resolve = [&](const RegionName& r, Span sp) -> Type {
            auto t = regions.lookup(r);
            if (!t) parse_fail(sp, "region " + r.str() + " is not declared");
            return *t;
        };
        STy sty = p.parse_sty();
        if (!p.done()) parse_fail(p.peek().span, "trailing input after type");
        return Parser::elaborate(sty, resolve);
    } catch (const detail::ParseErrorException& e) {
        return e.error;
    }
}

} // namespace stratal

#endif // STRATAL_PARSE_HPP
