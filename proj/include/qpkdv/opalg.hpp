#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qpkdv/spectral.hpp"

namespace qpkdv::opalg {

using spectral::cplx;
using spectral::FourierField;
using spectral::Frequency;
using spectral::Multi;
using spectral::Truncation;

using Block = Eigen::MatrixXcd;

// Operator whose matrix in the (l, j) basis depends on l1 - l2 only.
// block(l)(r, c) is the entry from input mode j2 = c - n_x to output mode j1 = r - n_x
// at time offset l = l1 - l2, |l_i| <= 2 n_phi. Zero blocks are stored empty.
class ToplitzOperator {
public:
    ToplitzOperator() = default;
    explicit ToplitzOperator(const Truncation& t);

    static ToplitzOperator identity(const Truncation& t);

    const Truncation& trunc() const { return trunc_; }
    int offset_range() const { return 2 * trunc_.n_phi; }
    int dim_x() const { return trunc_.x_width(); }
    std::size_t offset_count() const { return blocks_.size(); }

    std::size_t slot(const Multi& l) const;
    Multi offset_of(std::size_t slot) const;
    bool has(std::size_t slot) const { return blocks_[slot].size() != 0; }
    const Block& block(std::size_t slot) const { return blocks_[slot]; }
    Block& block_mut(std::size_t slot);  // allocates a zero block if absent
    void set_block(std::size_t slot, Block b);
    cplx entry(const Multi& l, int j_out, int j_in) const;

    ToplitzOperator& operator+=(const ToplitzOperator& o);
    ToplitzOperator& operator-=(const ToplitzOperator& o);
    ToplitzOperator& operator*=(cplx a);

    // Matrix-valued function A(phi) = sum_l A(l) e^{i l.phi}.
    Block at(const double* phi) const;
    // Drops blocks whose largest entry is <= tol.
    void prune(double tol = 0.0);

private:
    Truncation trunc_;
    std::vector<Block> blocks_;
};

ToplitzOperator operator+(ToplitzOperator a, const ToplitzOperator& b);
ToplitzOperator operator-(ToplitzOperator a, const ToplitzOperator& b);
ToplitzOperator operator*(cplx s, ToplitzOperator a);

// Multiplication by p; p may carry up to twice the bandwidth of t.
ToplitzOperator from_multiplication(const FourierField& p, const Truncation& t);
ToplitzOperator from_multiplication(const FourierField& p);
ToplitzOperator from_multiplier(const std::function<cplx(int)>& m, const Truncation& t);

FourierField apply(const ToplitzOperator& A, const FourierField& u);

struct ComposeStats {
    double dropped = 0;  // Frobenius bound of products falling outside the offset range
};
ToplitzOperator compose(const ToplitzOperator& A, const ToplitzOperator& B,
                        ComposeStats* stats = nullptr);

double decay_norm(const ToplitzOperator& A, double s);
ToplitzOperator smooth(const ToplitzOperator& A, int N);

struct SeriesOptions {
    double tol = 1e-15;
    int max_terms = 60;
};
// (I + Psi)^{-1}.
ToplitzOperator neumann_inverse(const ToplitzOperator& Psi, const SeriesOptions& opt = {});
ToplitzOperator matrix_exponential(const ToplitzOperator& Psi, const SeriesOptions& opt = {});

// max |conj A^{j}_{k}(l) - A^{-j}_{-k}(-l)|
double reality_defect(const ToplitzOperator& A);
// max |A^{-j}_{-k}(-l) - A^{j}_{k}(l)|: zero for maps X -> X.
double reversibility_defect(const ToplitzOperator& A);
// max |A^{-j}_{-k}(-l) + A^{j}_{k}(l)|: zero for maps X -> Y.
double reversible_defect(const ToplitzOperator& A);

class DiagonalOperator {
public:
    DiagonalOperator() = default;
    explicit DiagonalOperator(const Truncation& t);

    const Truncation& trunc() const { return trunc_; }
    cplx& operator[](int j) { return mu_[j + trunc_.n_x]; }
    cplx operator[](int j) const { return mu_[j + trunc_.n_x]; }
    const std::vector<cplx>& values() const { return mu_; }
    double conjugacy_defect() const;  // max |mu_j - conj mu_{-j}|

private:
    Truncation trunc_;
    std::vector<cplx> mu_;
};

FourierField apply(const DiagonalOperator& D, const FourierField& u);
ToplitzOperator to_toplitz(const DiagonalOperator& D);

// [omega.d_phi + D, X], entrywise (i omega.l + mu_{j1} - mu_{j2}) X^{j2}_{j1}(l).
ToplitzOperator diagonal_commutator(const ToplitzOperator& X, const Frequency& w, const DiagonalOperator& D);

struct MaterializeOptions {
    bool with_omega_dphi = false;
    std::size_t cap = 20000;
};
Eigen::MatrixXcd materialize(const ToplitzOperator& A, const Frequency* w = nullptr,
                             const MaterializeOptions& opt = {});
Eigen::MatrixXcd materialize(const DiagonalOperator& D, const Frequency* w = nullptr,
                             const MaterializeOptions& opt = {});

}  // namespace qpkdv::opalg
