#include "ddsim/operator.h"

#include <cmath>
#include <string>

#include "ddsim/errors.h"
#include "ddsim/tolerances.h"

namespace ddsim {

Operator identity(std::size_t dim) {
    return Operator::Identity(dim, dim);
}

Operator zero_operator(std::size_t dim) {
    return Operator::Zero(dim, dim);
}

namespace pauli {

Operator i2() {
    return identity(2);
}

Operator x() {
    Operator m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Operator y() {
    Operator m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

Operator z() {
    Operator m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Operator from_label(std::string_view label) {
    if (label.empty()) {
        throw InvalidOperator("empty Pauli label");
    }
    Operator out = identity(1);
    for (char c : label) {
        switch (c) {
            case 'I': out = tensor(out, i2()); break;
            case 'X': out = tensor(out, x()); break;
            case 'Y': out = tensor(out, y()); break;
            case 'Z': out = tensor(out, z()); break;
            default: throw InvalidOperator("bad Pauli label character '" + std::string(1, c) + "'");
        }
    }
    return out;
}

}  // namespace pauli

double max_abs(const Operator& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_hermitian(const Operator& a, double tol) {
    return a.rows() == a.cols() && max_abs(a - a.adjoint()) <= tol;
}

bool is_unitary(const Operator& u, double tol) {
    return u.rows() == u.cols() && max_abs(u.adjoint() * u - identity(u.rows())) <= tol;
}

bool is_projector(const Operator& p, double tol) {
    if (p.rows() != p.cols() || max_abs(p * p - p) > tol) {
        return false;
    }
    double tr = p.trace().real();
    return std::abs(tr - std::round(tr)) <= tol::projector_trace;
}

void require_square(const Operator& a, std::string_view what) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw DimensionMismatch(std::string(what) + " must be a nonempty square matrix");
    }
}

void require_hermitian(const Operator& a, std::string_view what) {
    require_square(a, what);
    if (!is_hermitian(a, tol::hermitian)) {
        throw InvalidOperator(std::string(what) + " is not Hermitian");
    }
}

void require_unitary(const Operator& u, std::string_view what) {
    require_square(u, what);
    if (!is_unitary(u, tol::unitary)) {
        throw InvalidOperator(std::string(what) + " is not unitary");
    }
}

Operator tensor(const Operator& a, const Operator& b) {
    Operator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); i++) {
        for (Eigen::Index j = 0; j < a.cols(); j++) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Operator expm_hermitian(const Operator& h, double t) {
    require_hermitian(h, "expm_hermitian argument");
    if (t == 0.0) {
        return identity(h.rows());
    }
    // Symmetrize so the solver sees an exactly self-adjoint input.
    Operator hs = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Operator> solver(hs);
    const Eigen::VectorXd& w = solver.eigenvalues();
    const Operator& v = solver.eigenvectors();
    Eigen::VectorXcd phases(w.size());
    for (Eigen::Index i = 0; i < w.size(); i++) {
        phases(i) = std::polar(1.0, -w(i) * t);
    }
    return v * phases.asDiagonal() * v.adjoint();
}

double spectral_norm(const Operator& a) {
    if (a.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Operator> svd(a);
    return svd.singularValues()(0);
}

Operator partial_trace_env(const Operator& rho_se, std::size_t d_s, std::size_t d_e) {
    auto n = static_cast<Eigen::Index>(d_s * d_e);
    if (rho_se.rows() != n || rho_se.cols() != n) {
        throw DimensionMismatch("partial_trace_env: operator dimension " + std::to_string(rho_se.rows()) +
                                " != d_S * d_E = " + std::to_string(n));
    }
    auto ds = static_cast<Eigen::Index>(d_s);
    auto de = static_cast<Eigen::Index>(d_e);
    Operator out = Operator::Zero(ds, ds);
    for (Eigen::Index i = 0; i < ds; i++) {
        for (Eigen::Index j = 0; j < ds; j++) {
            out(i, j) = rho_se.block(i * de, j * de, de, de).trace();
        }
    }
    return out;
}

Operator traceless_part(const Operator& a) {
    require_square(a, "traceless_part argument");
    Complex mean = a.trace() / static_cast<double>(a.rows());
    Operator out = a;
    out.diagonal().array() -= mean;
    return out;
}

Operator projector_onto(const StateVector& psi) {
    return psi * psi.adjoint();
}

}  // namespace ddsim
