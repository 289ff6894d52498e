#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "tiltalloc/buchberger.hpp"
#include "tiltalloc/polynomial.hpp"

namespace tiltalloc {

struct NotZeroDimensionalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateCombinationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EigenConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GroebnerBasis {
    std::vector<Polynomial<Rational>> elements;  // reduced, monic
    MonomialOrder order;
};

// Standard monomials of K[x]/I, ascending under the basis order; the unit
// monomial comes first.
struct NormalSet {
    std::vector<Monomial> monomials;

    size_t size() const { return monomials.size(); }
    // index of the monomial, or -1 if absent
    int index_of(const Monomial& m) const;
};

NormalSet normal_set(const GroebnerBasis& gb);

// Exact multiplication-by-x_k matrix on the quotient algebra; column j holds
// the normal-set coordinates of x_k * m_j reduced by the basis.
std::vector<std::vector<Rational>> multiplication_matrix_exact(const GroebnerBasis& gb,
                                                               const NormalSet& ns, int var);

Eigen::MatrixXd multiplication_matrix(const GroebnerBasis& gb, const NormalSet& ns, int var);

std::vector<Eigen::MatrixXd> multiplication_matrices(const GroebnerBasis& gb,
                                                     const NormalSet& ns);

struct EigenPairs {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;  // unit columns
};

// Dense nonsymmetric eigen decomposition with a per-pair residual guarantee
// ||Mv - lambda v|| <= 1e-8 ||M||.
EigenPairs eigen_decompose(const Eigen::MatrixXd& m);

struct CandidateRoot {
    std::vector<std::complex<double>> coords;
    double residual = 0.0;   // max scaled residual over the original system
    double imag_norm = 0.0;  // max |Im(coord)|
    int multiplicity = 1;
};

struct SolveOptions {
    uint64_t seed = 0x5eed5eed5eedULL;
    int max_redraws = 24;
    double residual_tol = 1e-6;
    double eigen_separation = 1e-8;
    double cluster_tol = 1e-6;
    bool newton_polish = true;
};

// All complex roots of the system presented by (gb, ns, mats), read off as
// eigenvalues of a random combination of the multiplication matrices.
// Residuals are measured against `original` (scaled by 1 + |coeffs|_1).
std::vector<CandidateRoot> solve_roots(const GroebnerBasis& gb, const NormalSet& ns,
                                       const std::vector<Eigen::MatrixXd>& mats,
                                       const PolySystem<Rational>& original,
                                       const SolveOptions& opts = {});

// Keeps roots with imag_norm <= imag_tol * (1 + max |coord|); returns the
// real parts.
std::vector<std::vector<double>> filter_real(const std::vector<CandidateRoot>& roots,
                                             double imag_tol);

// Max relative pairwise commutator norm, ||M_j M_k - M_k M_j|| / (||M_j|| ||M_k||).
double max_commutator(const std::vector<Eigen::MatrixXd>& mats);

void dump_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);
void dump_roots_json(std::ostream& os, const std::vector<CandidateRoot>& roots);

}  // namespace tiltalloc
