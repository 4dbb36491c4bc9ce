#include "parser.hpp"

#include <algorithm>
#include <cctype>

#include "errors.hpp"

namespace jetvar {

namespace {

struct Token {
    enum Kind { Ident, Int, Punct, End } kind = End;
    std::string text;
    long value = 0;
    int line = 1, col = 1;
};

class Lexer {
public:
    Lexer(const std::string& s, int line0, int col0) : s_(s), line_(line0), col_(col0) {}

    Token next() {
        skip_ws();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= s_.size()) return t;
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) advance();
            t.kind = Token::Int;
            t.text = s_.substr(start, pos_ - start);
            t.value = std::stol(t.text);
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                advance();
            t.kind = Token::Ident;
            t.text = s_.substr(start, pos_ - start);
            return t;
        }
        if (std::string("+-*/^()[];,").find(c) != std::string::npos) {
            t.kind = Token::Punct;
            t.text = std::string(1, c);
            advance();
            return t;
        }
        throw parse_error(std::string("unexpected character '") + c + "'", line_, col_);
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) advance();
    }
    void advance() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    const std::string& s_;
    size_t pos_ = 0;
    int line_, col_;
};

class Parser {
public:
    Parser(const JetContext* ctx, const std::string& text, int line0, int col0)
        : ctx_(ctx), lex_(text, line0, col0) {
        cur_ = lex_.next();
    }

    Expr parse() {
        Expr e = additive();
        expect_end();
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) { throw parse_error(msg, cur_.line, cur_.col); }

    void bump() { cur_ = lex_.next(); }

    bool punct(const char* p) const { return cur_.kind == Token::Punct && cur_.text == p; }

    void expect_punct(const char* p) {
        if (!punct(p)) fail(std::string("expected '") + p + "'");
        bump();
    }

    void expect_end() {
        if (cur_.kind != Token::End) fail("unexpected trailing input '" + cur_.text + "'");
    }

    long expect_int() {
        bool neg = false;
        if (punct("-")) {
            neg = true;
            bump();
        }
        if (cur_.kind != Token::Int) fail("expected integer");
        long v = cur_.value;
        bump();
        return neg ? -v : v;
    }

    Expr additive() {
        Expr e = multiplicative();
        while (punct("+") || punct("-")) {
            bool minus = cur_.text == "-";
            bump();
            Expr rhs = multiplicative();
            e = minus ? e - rhs : e + rhs;
        }
        return e;
    }

    Expr multiplicative() {
        Expr e = unary();
        while (punct("*") || punct("/")) {
            bool div = cur_.text == "/";
            bump();
            Expr rhs = unary();
            if (div) {
                if (rhs.is_constant()) {
                    Rational c = rhs.constant_value();
                    if (c == 0) fail("division by zero");
                    e = e.scaled(Rational(1) / c);
                } else {
                    e = e * rhs.pow(-1);
                }
            } else {
                e = e * rhs;
            }
        }
        return e;
    }

    Expr unary() {
        if (punct("-")) {
            bump();
            return -unary();
        }
        if (punct("+")) {
            bump();
            return unary();
        }
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (punct("^")) {
            bump();
            long e = expect_int();
            if (e < -64 || e > 64) fail("exponent out of range");
            return base.pow(static_cast<int>(e));
        }
        return base;
    }

    /// "x1 x3^2" style derivative labels up to ']' or ')'.
    MultiIndex parse_labels() {
        MultiIndex alpha(ctx_->n());
        while (cur_.kind == Token::Ident) {
            const std::string& t = cur_.text;
            if (t.size() < 2 || t[0] != 'x') fail("expected derivative label like x1");
            int sigma = 0;
            for (size_t i = 1; i < t.size(); ++i) {
                if (!std::isdigit(static_cast<unsigned char>(t[i]))) fail("expected derivative label like x1");
                sigma = sigma * 10 + (t[i] - '0');
            }
            if (sigma < 1 || sigma > ctx_->n()) fail("derivative label " + t + " out of range");
            bump();
            int rep = 1;
            if (punct("^")) {
                bump();
                long r = expect_int();
                if (r < 1 || r > 255) fail("derivative power out of range");
                rep = static_cast<int>(r);
            }
            for (int k = 0; k < rep; ++k) alpha = alpha.plus(sigma);
        }
        return alpha;
    }

    Expr primary() {
        if (cur_.kind == Token::Int) {
            Rational c(cur_.value);
            bump();
            return Expr::constant(ctx_, c);
        }
        if (punct("(")) {
            bump();
            Expr e = additive();
            expect_punct(")");
            return e;
        }
        if (cur_.kind != Token::Ident) fail("expected expression");
        std::string name = cur_.text;
        int line = cur_.line, col = cur_.col;
        bump();

        if (name == "D" && punct("(")) {
            bump();
            Expr inner = additive();
            expect_punct(";");
            MultiIndex alpha = parse_labels();
            expect_punct(")");
            return total_derivative_multi(inner, alpha);
        }

        // base coordinate written x[k] or xk
        if (name == "x" && punct("[")) {
            bump();
            long sigma = expect_int();
            expect_punct("]");
            if (sigma < 1 || sigma > ctx_->n())
                throw parse_error("base coordinate index out of range", line, col);
            return Expr::symbol(ctx_, ctx_->sym_base(static_cast<int>(sigma)));
        }
        if (name.size() >= 2 && name[0] == 'x' &&
            std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) &&
            ctx_->field_id(name) < 0 && ctx_->param_id(name) < 0 && ctx_->derived_family_id(name) < 0) {
            int sigma = std::stoi(name.substr(1));
            if (sigma < 1 || sigma > ctx_->n()) throw parse_error("base coordinate index out of range", line, col);
            return Expr::symbol(ctx_, ctx_->sym_base(sigma));
        }

        std::vector<int> idx;
        MultiIndex alpha(ctx_->n());
        bool bracket = false;
        if (punct("[")) {
            bracket = true;
            bump();
            while (cur_.kind == Token::Int) {
                idx.push_back(static_cast<int>(cur_.value));
                bump();
            }
            if (punct(";")) {
                bump();
                alpha = parse_labels();
            }
            expect_punct("]");
        }

        if (int fid = ctx_->field_id(name); fid >= 0) {
            const FieldDecl& fd = ctx_->fields()[fid];
            if (idx.empty()) {
                if (fd.shape == FieldShape::Scalar && fd.count == 1)
                    idx = {1};
                else
                    throw parse_error("field " + name + " requires component indices", line, col);
            }
            (void)bracket;
            int comp = ctx_->component_of_indices(fid, idx);
            return Expr::symbol(ctx_, ctx_->sym_jet(fid, comp, alpha));
        }
        if (int pid = ctx_->param_id(name); pid >= 0) {
            if (bracket) throw parse_error("constant " + name + " takes no indices", line, col);
            return Expr::symbol(ctx_, ctx_->sym_param(pid));
        }
        if (int did = ctx_->derived_family_id(name); did >= 0) {
            const DerivedFamily& fam = ctx_->derived_families()[did];
            if (!alpha.is_zero()) throw parse_error("derived symbol " + name + " has no jet coordinates", line, col);
            if (static_cast<int>(idx.size()) != fam.index_arity)
                throw parse_error("derived symbol " + name + " expects " + std::to_string(fam.index_arity) +
                                      " indices",
                                  line, col);
            int comp = 0;
            if (fam.index_arity == 2) {
                comp = ctx_->metric_pair_component(idx[0], idx[1]);
            } else if (fam.index_arity == 3) {
                if (idx[0] < 1 || idx[0] > ctx_->n())
                    throw parse_error("derived symbol index out of range", line, col);
                comp = (idx[0] - 1) * (ctx_->n() * (ctx_->n() + 1) / 2) + ctx_->metric_pair_component(idx[1], idx[2]);
            }
            return Expr::symbol(ctx_, ctx_->sym_derived(did, comp));
        }
        throw parse_error("unknown identifier '" + name + "'", line, col);
    }

    const JetContext* ctx_;
    Lexer lex_;
    Token cur_;
};

} // namespace

Expr parse_expr(const JetContext* ctx, const std::string& text, int line0, int col0) {
    return Parser(ctx, text, line0, col0).parse();
}

} // namespace jetvar
