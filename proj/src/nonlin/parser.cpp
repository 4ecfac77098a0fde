#include <cctype>
#include <cmath>
#include <cstdlib>

#include "qpkdv/nonlin.hpp"

namespace qpkdv::nonlin {
namespace {

// Recursive descent over
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' integer)?
//   base   := number | ident | '(' expr ')' | func '(' expr ')' | ('-'|'+') base
class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    Expr parse() {
        Expr e = expr();
        skip();
        if (pos_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
        return e;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (accept('+')) e = add(e, term());
            else if (accept('-')) e = sub(e, term());
            else return e;
        }
    }

    Expr term() {
        Expr e = factor();
        for (;;) {
            if (accept('*')) e = mul(e, factor());
            else if (accept('/')) e = div(e, factor());
            else return e;
        }
    }

    Expr factor() {
        Expr b = base();
        if (!accept('^')) return b;
        skip();
        const std::size_t at = pos_;
        int sign = 1;
        if (accept('-')) sign = -1;
        skip();
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
            ++pos_;
        const std::string tok = s_.substr(start, pos_ - start);
        if (tok.empty()) throw ParseError("expected integer exponent", at);
        if (tok.find('.') != std::string::npos) {
            const double v = std::strtod(tok.c_str(), nullptr);
            if (v != std::floor(v)) throw ParseError("non-integer exponent", at);
        }
        return pow(b, sign * static_cast<int>(std::strtod(tok.c_str(), nullptr)));
    }

    Expr base() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = s_[pos_];
        if (c == '-') {
            ++pos_;
            return neg(base());
        }
        if (c == '+') {
            ++pos_;
            return base();
        }
        if (c == '(') {
            const std::size_t open = pos_++;
            Expr e = expr();
            if (!accept(')')) throw ParseError("unbalanced parenthesis", open);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(s_.c_str() + pos_, &end);
            if (end == s_.c_str() + pos_) throw ParseError("malformed number", pos_);
            pos_ = static_cast<std::size_t>(end - s_.c_str());
            return num(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            const std::string id = s_.substr(start, pos_ - start);
            if (id == "sin" || id == "cos" || id == "exp") {
                skip();
                const std::size_t open = pos_;
                if (!accept('(')) throw ParseError("expected '(' after " + id, pos_);
                Expr arg = expr();
                if (!accept(')')) throw ParseError("unbalanced parenthesis", open);
                const auto k = id == "sin" ? Node::Kind::sin : id == "cos" ? Node::Kind::cos
                                                                          : Node::Kind::exp;
                return call(k, arg);
            }
            if (id == "x") return var(kX);
            if (id.size() == 2 && id[0] == 'z' && id[1] >= '0' && id[1] <= '3') return var(kZ0 + (id[1] - '0'));
            if (id.size() == 5 && id.rfind("phi_", 0) == 0 && id[4] >= '1' && id[4] <= '9')
                return var(kPhi1 + (id[4] - '1'));
            throw ParseError("unknown identifier '" + id + "'", start);
        }
        throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(const std::string& text) { return Parser(text).parse(); }

}  // namespace qpkdv::nonlin
