#ifndef DDSIM_OPERATOR_H
#define DDSIM_OPERATOR_H

#include <complex>
#include <cstddef>
#include <string_view>

#include <Eigen/Dense>

namespace ddsim {

using Complex = std::complex<double>;

/// Dense square complex matrix. Hamiltonian entries are angular frequencies (hbar = 1).
using Operator = Eigen::MatrixXcd;

/// Pure state vector.
using StateVector = Eigen::VectorXcd;

Operator identity(std::size_t dim);
Operator zero_operator(std::size_t dim);

namespace pauli {
Operator i2();
Operator x();
Operator y();
Operator z();
/// Tensor product of single-qubit Paulis named by a string over {I, X, Y, Z}, qubit 0 leftmost.
Operator from_label(std::string_view label);
}  // namespace pauli

/// Largest entry magnitude.
double max_abs(const Operator& a);

bool is_hermitian(const Operator& a, double tol = 1e-12);
bool is_unitary(const Operator& u, double tol = 1e-10);
bool is_projector(const Operator& p, double tol = 1e-12);

/// Throw InvalidOperator if the check fails. `what` names the operand in the message.
void require_square(const Operator& a, std::string_view what);
void require_hermitian(const Operator& a, std::string_view what);
void require_unitary(const Operator& u, std::string_view what);

/// Kronecker product, A-index major.
Operator tensor(const Operator& a, const Operator& b);

/// exp(-i H t) for Hermitian H, via the eigendecomposition of H.
Operator expm_hermitian(const Operator& h, double t);

/// Largest singular value.
double spectral_norm(const Operator& a);

/// tr_E of an operator on H_S (x) H_E, with the system index major.
Operator partial_trace_env(const Operator& rho_se, std::size_t d_s, std::size_t d_e);

/// A - (tr A / d) 1.
Operator traceless_part(const Operator& a);

/// |psi><psi|.
Operator projector_onto(const StateVector& psi);

}  // namespace ddsim

#endif
