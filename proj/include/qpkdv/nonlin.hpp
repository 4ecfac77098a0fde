#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpkdv/spectral.hpp"

namespace qpkdv::nonlin {

using spectral::FourierField;
using spectral::Frequency;

// Variable slots: z0..z3, x, phi_1..phi_9.
inline constexpr int kZ0 = 0;
inline constexpr int kX = 4;
inline constexpr int kPhi1 = 5;
inline constexpr int kVarCount = kPhi1 + spectral::kMaxNu;

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { num, var, add, sub, mul, div, pow, neg, sin, cos, exp };
    Kind kind;
    double value = 0;  // num
    int var = -1;      // var
    int power = 0;     // pow
    Expr a, b;
};

Expr num(double v);
Expr var(int slot);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr pow(Expr a, int n);
Expr neg(Expr a);
Expr call(Node::Kind fn, Expr a);

bool is_zero(const Expr& e);
bool depends_on(const Expr& e, int slot);
int max_phi_index(const Expr& e);  // 0 when no phi appears
Expr diff(const Expr& e, int slot);
Expr total_dx(const Expr& e);  // d/dx with z_i' = z_{i+1}
std::string to_string(const Expr& e);

double eval(const Expr& e, std::span<const double> vars);
// Vectorized evaluation: vars[slot] points to n samples (or is null if unused).
std::vector<double> eval(const Expr& e, const std::array<const double*, kVarCount>& vars,
                         std::size_t n);

Expr parse_expression(const std::string& text);

enum class DeclaredForm { raw_f, dx_of_g, hamiltonian_F };
DeclaredForm form_from_string(const std::string& s);
std::string to_string(DeclaredForm f);

struct NonlinearitySpec {
    std::string text;
    DeclaredForm form = DeclaredForm::raw_f;
    double epsilon = 0;
    Expr source;
    Expr f;
    std::array<Expr, 4> df;  // d f / d z_i
    int max_phi = 0;
};

NonlinearitySpec parse_nonlinearity(const std::string& text, DeclaredForm form, double epsilon);
NonlinearitySpec builtin_nonlinearity(const std::string& name, double epsilon);
std::vector<std::string> builtin_names();

struct StructureFlags {
    bool cond_F = false;
    bool cond_Q = false;
    bool alpha_constant = true;
    double alpha = 0;                       // valid when alpha_constant
    std::optional<FourierField> alpha_field;  // phi-only witness otherwise
    bool reversible = false;
    bool total_derivative = false;
    bool hamiltonian = false;
    std::string diagnostic;
};

StructureFlags structure_flags(const NonlinearitySpec& spec, int nu);

struct LinearCoeffs {
    FourierField a3, a2, a1, a0;
};

FourierField residual(const NonlinearitySpec& spec, const Frequency& w, const FourierField& u);
LinearCoeffs linearized_coefficients(const NonlinearitySpec& spec, const FourierField& u);

// L h = omega.d_phi h + (1 + a3) h_xxx + a2 h_xx + a1 h_x + a0 h.
FourierField apply_linear(const LinearCoeffs& c, const Frequency& w, const FourierField& h);

}  // namespace qpkdv::nonlin
