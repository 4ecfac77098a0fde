#include <algorithm>
#include <cmath>
#include <sstream>

#include "qpkdv/nonlin.hpp"

namespace qpkdv::nonlin {

using K = Node::Kind;

namespace {

Expr make(K k, Expr a = nullptr, Expr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

bool is_num(const Expr& e, double v) { return e->kind == K::num && e->value == v; }
bool is_num(const Expr& e) { return e->kind == K::num; }

double checked_div(double a, double b) {
    if (std::abs(b) < 1e-14) throw DomainError("division by |denominator| < 1e-14");
    return a / b;
}

double ipow(double a, int n) {
    if (n < 0) return checked_div(1.0, std::pow(a, -n));
    return std::pow(a, n);
}

}  // namespace

Expr num(double v) {
    auto n = std::make_shared<Node>();
    n->kind = K::num;
    n->value = v;
    return n;
}

Expr var(int slot) {
    auto n = std::make_shared<Node>();
    n->kind = K::var;
    n->var = slot;
    return n;
}

Expr add(Expr a, Expr b) {
    if (is_num(a) && is_num(b)) return num(a->value + b->value);
    if (is_num(a, 0)) return b;
    if (is_num(b, 0)) return a;
    return make(K::add, a, b);
}

Expr sub(Expr a, Expr b) {
    if (is_num(a) && is_num(b)) return num(a->value - b->value);
    if (is_num(b, 0)) return a;
    if (is_num(a, 0)) return neg(b);
    return make(K::sub, a, b);
}

Expr mul(Expr a, Expr b) {
    if (is_num(a) && is_num(b)) return num(a->value * b->value);
    if (is_num(a, 0) || is_num(b, 0)) return num(0);
    if (is_num(a, 1)) return b;
    if (is_num(b, 1)) return a;
    return make(K::mul, a, b);
}

Expr div(Expr a, Expr b) {
    if (is_num(a) && is_num(b) && b->value != 0) return num(a->value / b->value);
    if (is_num(a, 0)) return num(0);
    if (is_num(b, 1)) return a;
    return make(K::div, a, b);
}

Expr pow(Expr a, int n) {
    if (n == 0) return num(1);
    if (n == 1) return a;
    if (is_num(a) && (n > 0 || a->value != 0)) return num(std::pow(a->value, n));
    auto e = std::make_shared<Node>();
    e->kind = K::pow;
    e->a = std::move(a);
    e->power = n;
    return e;
}

Expr neg(Expr a) {
    if (is_num(a)) return num(-a->value);
    if (a->kind == K::neg) return a->a;
    return make(K::neg, a);
}

Expr call(K fn, Expr a) {
    if (is_num(a)) {
        switch (fn) {
            case K::sin: return num(std::sin(a->value));
            case K::cos: return num(std::cos(a->value));
            case K::exp: return num(std::exp(a->value));
            default: break;
        }
    }
    return make(fn, a);
}

bool is_zero(const Expr& e) { return is_num(e, 0); }

bool depends_on(const Expr& e, int slot) {
    if (!e) return false;
    if (e->kind == K::var) return e->var == slot;
    return depends_on(e->a, slot) || depends_on(e->b, slot);
}

int max_phi_index(const Expr& e) {
    if (!e) return 0;
    if (e->kind == K::var) return e->var >= kPhi1 ? e->var - kPhi1 + 1 : 0;
    return std::max(max_phi_index(e->a), max_phi_index(e->b));
}

Expr diff(const Expr& e, int s) {
    switch (e->kind) {
        case K::num: return num(0);
        case K::var: return num(e->var == s ? 1 : 0);
        case K::add: return add(diff(e->a, s), diff(e->b, s));
        case K::sub: return sub(diff(e->a, s), diff(e->b, s));
        case K::mul: return add(mul(diff(e->a, s), e->b), mul(e->a, diff(e->b, s)));
        case K::div: {
            const Expr da = diff(e->a, s), db = diff(e->b, s);
            if (is_zero(db)) return div(da, e->b);
            return div(sub(mul(da, e->b), mul(e->a, db)), pow(e->b, 2));
        }
        case K::pow: return mul(mul(num(e->power), pow(e->a, e->power - 1)), diff(e->a, s));
        case K::neg: return neg(diff(e->a, s));
        case K::sin: return mul(call(K::cos, e->a), diff(e->a, s));
        case K::cos: return mul(neg(call(K::sin, e->a)), diff(e->a, s));
        case K::exp: return mul(e, diff(e->a, s));
    }
    return num(0);
}

Expr total_dx(const Expr& e) {
    if (depends_on(e, kZ0 + 3)) throw DomainError("total x-derivative of an expression in z3");
    Expr d = diff(e, kX);
    for (int i = 0; i < 3; ++i) d = add(d, mul(var(kZ0 + i + 1), diff(e, kZ0 + i)));
    return d;
}

std::string to_string(const Expr& e) {
    std::ostringstream os;
    switch (e->kind) {
        case K::num: os << e->value; break;
        case K::var:
            if (e->var < kX) os << 'z' << e->var;
            else if (e->var == kX) os << 'x';
            else os << "phi_" << (e->var - kPhi1 + 1);
            break;
        case K::add: os << '(' << to_string(e->a) << " + " << to_string(e->b) << ')'; break;
        case K::sub: os << '(' << to_string(e->a) << " - " << to_string(e->b) << ')'; break;
        case K::mul: os << to_string(e->a) << '*' << to_string(e->b); break;
        case K::div: os << to_string(e->a) << "/(" << to_string(e->b) << ')'; break;
        case K::pow: os << '(' << to_string(e->a) << ")^" << e->power; break;
        case K::neg: os << "-(" << to_string(e->a) << ')'; break;
        case K::sin: os << "sin(" << to_string(e->a) << ')'; break;
        case K::cos: os << "cos(" << to_string(e->a) << ')'; break;
        case K::exp: os << "exp(" << to_string(e->a) << ')'; break;
    }
    return os.str();
}

double eval(const Expr& e, std::span<const double> v) {
    switch (e->kind) {
        case K::num: return e->value;
        case K::var: return v[e->var];
        case K::add: return eval(e->a, v) + eval(e->b, v);
        case K::sub: return eval(e->a, v) - eval(e->b, v);
        case K::mul: return eval(e->a, v) * eval(e->b, v);
        case K::div: return checked_div(eval(e->a, v), eval(e->b, v));
        case K::pow: return ipow(eval(e->a, v), e->power);
        case K::neg: return -eval(e->a, v);
        case K::sin: return std::sin(eval(e->a, v));
        case K::cos: return std::cos(eval(e->a, v));
        case K::exp: return std::exp(eval(e->a, v));
    }
    return 0;
}

std::vector<double> eval(const Expr& e, const std::array<const double*, kVarCount>& vars,
                         std::size_t n) {
    std::vector<double> out(n);
    switch (e->kind) {
        case K::num: std::fill(out.begin(), out.end(), e->value); return out;
        case K::var: {
            const double* src = vars[e->var];
            if (!src) throw DimensionError("expression references an unavailable variable");
            std::copy(src, src + n, out.begin());
            return out;
        }
        default: break;
    }
    auto a = eval(e->a, vars, n);
    if (e->kind == K::add || e->kind == K::sub || e->kind == K::mul || e->kind == K::div) {
        const auto b = eval(e->b, vars, n);
        for (std::size_t i = 0; i < n; ++i) {
            switch (e->kind) {
                case K::add: a[i] += b[i]; break;
                case K::sub: a[i] -= b[i]; break;
                case K::mul: a[i] *= b[i]; break;
                default: a[i] = checked_div(a[i], b[i]); break;
            }
        }
        return a;
    }
    for (auto& x : a) {
        switch (e->kind) {
            case K::pow: x = ipow(x, e->power); break;
            case K::neg: x = -x; break;
            case K::sin: x = std::sin(x); break;
            case K::cos: x = std::cos(x); break;
            case K::exp: x = std::exp(x); break;
            default: break;
        }
    }
    return a;
}

}  // namespace qpkdv::nonlin
