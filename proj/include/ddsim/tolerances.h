#ifndef DDSIM_TOLERANCES_H
#define DDSIM_TOLERANCES_H

namespace ddsim::tol {

// Numerical tolerances shared by every module. Entry-wise checks use the max-abs norm.
inline constexpr double hermitian = 1e-12;
inline constexpr double unitary = 1e-10;
inline constexpr double projector = 1e-12;
inline constexpr double projector_trace = 1e-10;
inline constexpr double traceless = 1e-12;
inline constexpr double traceless_output = 1e-13;
inline constexpr double state_norm = 1e-10;
inline constexpr double phase_class = 1e-9;
inline constexpr double irreducible_residual = 1e-10;
inline constexpr double integral_ratio = 1e-9;
inline constexpr double path_duration = 1e-12;
inline constexpr double search_converged = 1e-9;

// Two-sided 99% normal quantile used for all confidence statements.
inline constexpr double z99 = 2.58;

}  // namespace ddsim::tol

#endif
