#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qpkdv/errors.hpp"

namespace qpkdv::spectral {

using cplx = std::complex<double>;

inline constexpr int kMaxNu = 9;
using Multi = std::array<int, kMaxNu>;

// Rectangular truncation |l_i| <= n_phi, |j| <= n_x on T^nu x T.
struct Truncation {
    int nu = 1;
    int n_phi = 1;
    int n_x = 1;
    int oversample = 2;

    void validate() const;
    int phi_width() const { return 2 * n_phi + 1; }
    int x_width() const { return 2 * n_x + 1; }
    std::size_t phi_count() const;
    std::size_t size() const { return phi_count() * static_cast<std::size_t>(x_width()); }
    int grid_phi() const;
    int grid_x() const;
    double s0() const { return (nu + 2) / 2.0; }

    friend bool operator==(const Truncation&, const Truncation&) = default;
};

// Mixed-radix helpers for multi-indices with entries in [-n, n].
std::size_t multi_flat(const Multi& l, int nu, int n);
Multi multi_unflat(std::size_t idx, int nu, int n);
std::size_t multi_count(int nu, int n);
int sup_norm(const Multi& l, int nu);
bool multi_in_range(const Multi& l, int nu, int n);
double bracket(const Multi& l, int nu, int j);  // max(1, |l|, |j|)

class FourierField {
public:
    FourierField() = default;
    explicit FourierField(const Truncation& t);

    const Truncation& trunc() const { return trunc_; }
    int nu() const { return trunc_.nu; }
    std::size_t size() const { return c_.size(); }

    std::vector<cplx>& coeffs() { return c_; }
    const std::vector<cplx>& coeffs() const { return c_; }
    cplx& operator[](std::size_t i) { return c_[i]; }
    cplx operator[](std::size_t i) const { return c_[i]; }

    bool contains(const Multi& l, int j) const;
    std::size_t index(const Multi& l, int j) const;
    std::size_t partner(std::size_t i) const { return c_.size() - 1 - i; }
    Multi phi_of(std::size_t i) const;
    int j_of(std::size_t i) const;

    cplx get(const Multi& l, int j) const;
    // Sets (l,j) and its conjugate partner so the field stays real.
    void set_real_pair(const Multi& l, int j, cplx v);

    FourierField& operator+=(const FourierField& o);
    FourierField& operator-=(const FourierField& o);
    FourierField& operator*=(double a);
    FourierField& operator*=(cplx a);

    FourierField resized(const Truncation& t) const;
    double max_abs() const;
    double reality_defect() const;
    void make_real();
    cplx mean() const;

    static FourierField constant(const Truncation& t, double c);

private:
    void require_same(const FourierField& o) const;

    Truncation trunc_;
    std::vector<cplx> c_;
};

FourierField operator+(FourierField a, const FourierField& b);
FourierField operator-(FourierField a, const FourierField& b);
FourierField operator*(double s, FourierField a);
FourierField operator-(FourierField a);

double sobolev_norm(const FourierField& u, double s);
double sup_norm(const FourierField& u);  // max over the default grid

// Diophantine frequency omega = lambda * omega_bar.
class Frequency {
public:
    Frequency(std::vector<double> omega_bar, double lambda, double gamma0, double tau0,
              int check_range);

    static std::vector<double> preset(int nu);

    int nu() const { return static_cast<int>(omega_bar_.size()); }
    const std::vector<double>& omega_bar() const { return omega_bar_; }
    double lambda() const { return lambda_; }
    double gamma0() const { return gamma0_; }
    double tau0() const { return tau0_; }
    int check_range() const { return check_range_; }
    double omega(int i) const { return lambda_ * omega_bar_[i]; }
    double norm() const;  // |omega|
    double dot(const Multi& l) const;
    double bar_dot(const Multi& l) const;
    Frequency with_lambda(double lambda) const;

private:
    std::vector<double> omega_bar_;
    double lambda_;
    double gamma0_;
    double tau0_;
    int check_range_;
};

FourierField dx_pow(const FourierField& u, int k);
FourierField omega_dphi(const FourierField& u, const Frequency& w);
FourierField omega_dphi_inv(const FourierField& u, const Frequency& w, double floor_rel = 1e-10);
FourierField pi0(const FourierField& u);         // drop the x-average
FourierField x_average(const FourierField& u);   // keep j = 0 only
FourierField phi_average(const FourierField& u); // keep l = 0 only

// Equispaced grid on T^nu x T; x runs fastest.
struct Grid {
    int nu = 1;
    int m_phi = 2;
    int m_x = 2;

    std::size_t phi_points() const;
    std::size_t size() const { return phi_points() * static_cast<std::size_t>(m_x); }
    double phi_node(int k) const;
    double x_node(int k) const;
    void phi_coords(std::size_t a, double* out) const;

    friend bool operator==(const Grid&, const Grid&) = default;
};

Grid grid_for(const Truncation& t);
Grid grid_for(const Truncation& a, const Truncation& b);

std::vector<double> synthesize(const FourierField& u, const Grid& g);
FourierField analyze(std::span<const double> samples, const Grid& g, const Truncation& out);
FourierField analyze(std::span<const cplx> samples, const Grid& g, const Truncation& out,
                     double imag_tol = 1e-9);

// Pointwise nonlinear map of several fields on the oversampled grid of `out`.
using PointFn = std::function<double(std::span<const double>)>;
FourierField pointwise(std::span<const FourierField* const> inputs, const PointFn& fn,
                       const Truncation& out);
FourierField multiply(const FourierField& a, const FourierField& b);
FourierField divide(const FourierField& a, const FourierField& b);
FourierField exp_field(const FourierField& a);

enum class ComposeKind { space, time };

// space: h(phi, x + beta(phi,x));  time: h(phi + omega*alpha(phi), x).
FourierField compose(ComposeKind kind, const FourierField& h, const FourierField& disp,
                     const Frequency& w);
FourierField compose(ComposeKind kind, const FourierField& h, const FourierField& disp,
                     const Frequency& w, const Truncation& out);

struct InverseOptions {
    double tol = 1e-13;
    int max_iter = 100;
};
FourierField invert_torus_diffeo(ComposeKind kind, const FourierField& disp, const Frequency& w,
                                 const InverseOptions& opt = {});

// Sup of the displacement derivative along the displaced coordinate.
double diffeo_derivative_sup(ComposeKind kind, const FourierField& disp, const Frequency& w);

struct StructureInfo {
    bool is_real = false;
    bool in_X = false;
    bool in_Y = false;
    bool zero_space_average = false;
    bool zero_total_average = false;
    cplx total_average{};
};
StructureInfo structure_check(const FourierField& u, double tol = 1e-12);

void project_X(FourierField& u);
void project_Y(FourierField& u);

// Ball projector <l,j> <= N used by the outer iteration.
FourierField ball_project(const FourierField& u, double N);

}  // namespace qpkdv::spectral
