#include "ddsim/control_group.h"

#include <cmath>

#include "ddsim/errors.h"
#include "ddsim/tolerances.h"

namespace ddsim {

ControlGroup::ControlGroup(std::vector<Operator> elements, std::vector<std::string> labels,
                           std::optional<bool> irreducible)
    : kind_(GroupKind::finite),
      dim_(elements.empty() ? 0 : static_cast<std::size_t>(elements.front().rows())),
      elements_(std::move(elements)),
      labels_(std::move(labels)),
      known_irreducible_(irreducible) {
    if (labels_.empty()) {
        for (std::size_t i = 0; i < elements_.size(); i++) {
            labels_.push_back("g" + std::to_string(i));
        }
    }
    if (labels_.size() != elements_.size()) {
        throw ConfigError("group: " + std::to_string(labels_.size()) + " labels for " +
                          std::to_string(elements_.size()) + " elements");
    }
}

ControlGroup ControlGroup::haar(std::size_t dim) {
    if (dim < 2) {
        throw InvalidOperator("Haar group needs dimension >= 2");
    }
    ControlGroup g({}, {}, true);
    g.kind_ = GroupKind::haar;
    g.dim_ = dim;
    return g;
}

std::optional<std::size_t> ControlGroup::find_class(const Operator& u) const {
    for (std::size_t i = 0; i < elements_.size(); i++) {
        if (same_phase_class(elements_[i], u)) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t ControlGroup::index_of_label(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); i++) {
        if (labels_[i] == label) {
            return i;
        }
    }
    throw ConfigError("group has no element labelled '" + label + "'");
}

std::size_t ControlGroup::identity_index() const {
    auto idx = find_class(identity(dim_));
    if (!idx) {
        throw ClosureViolation("group does not contain the identity class");
    }
    return *idx;
}

std::optional<bool> ControlGroup::irreducible_hint() const {
    if (known_irreducible_) {
        return known_irreducible_;
    }
    if (cache_->computed.load()) {
        return cache_->value;
    }
    return std::nullopt;
}

double phase_overlap(const Operator& a, const Operator& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return 0.0;
    }
    return std::abs((a.adjoint() * b).trace()) / static_cast<double>(a.rows());
}

bool same_phase_class(const Operator& a, const Operator& b) {
    return phase_overlap(a, b) >= 1.0 - tol::phase_class;
}

ControlGroup pauli_group(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 6) {
        throw ConfigError("pauli_group: qubit count must be in [1, 6], got " + std::to_string(n_qubits));
    }
    static constexpr char letters[] = {'I', 'X', 'Y', 'Z'};
    std::size_t count = std::size_t{1} << (2 * n_qubits);
    std::vector<Operator> elements;
    std::vector<std::string> labels;
    elements.reserve(count);
    for (std::size_t code = 0; code < count; code++) {
        std::string label(static_cast<std::size_t>(n_qubits), 'I');
        for (int q = 0; q < n_qubits; q++) {
            label[static_cast<std::size_t>(q)] = letters[(code >> (2 * (n_qubits - 1 - q))) & 3];
        }
        elements.push_back(pauli::from_label(label));
        labels.push_back(std::move(label));
    }
    return ControlGroup(std::move(elements), std::move(labels), true);
}

ControlGroup custom_group(const std::vector<Operator>& unitaries, std::vector<std::string> labels) {
    if (unitaries.empty()) {
        throw ClosureViolation("custom_group: empty element list");
    }
    const auto dim = unitaries.front().rows();
    for (std::size_t i = 0; i < unitaries.size(); i++) {
        const Operator& u = unitaries[i];
        if (u.rows() != dim || u.cols() != dim) {
            throw DimensionMismatch("custom_group: element " + std::to_string(i) + " has dimension " +
                                    std::to_string(u.rows()) + "x" + std::to_string(u.cols()) + ", expected " +
                                    std::to_string(dim));
        }
        if (!is_unitary(u, tol::unitary)) {
            throw NonUnitaryElement("custom_group: element " + std::to_string(i) + " is not unitary");
        }
    }
    ControlGroup group(unitaries, std::move(labels), std::nullopt);
    const auto& names = group.labels();
    for (std::size_t i = 0; i < unitaries.size(); i++) {
        for (std::size_t j = 0; j < i; j++) {
            if (same_phase_class(unitaries[i], unitaries[j])) {
                throw ClosureViolation("custom_group: elements " + names[j] + " and " + names[i] +
                                       " are the same phase class");
            }
        }
    }
    group.identity_index();
    for (std::size_t i = 0; i < unitaries.size(); i++) {
        for (std::size_t j = 0; j < unitaries.size(); j++) {
            Operator product = unitaries[i] * unitaries[j];
            if (!group.find_class(product)) {
                throw ClosureViolation("custom_group: product " + names[i] + " * " + names[j] +
                                       " is not in the group up to phase");
            }
        }
    }
    return group;
}

ControlGroup trivial_group(std::size_t dim) {
    return ControlGroup({identity(dim)}, {"I"}, dim == 1);
}

Operator haar_sample(std::size_t dim, Rng& rng) {
    auto n = static_cast<Eigen::Index>(dim);
    Operator z(n, n);
    for (Eigen::Index j = 0; j < n; j++) {
        for (Eigen::Index i = 0; i < n; i++) {
            z(i, j) = rng.complex_normal();
        }
    }
    Eigen::HouseholderQR<Operator> qr(z);
    Operator q = qr.householderQ() * Operator::Identity(n, n);
    Operator r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; j++) {
        Complex d = r(j, j);
        double mag = std::abs(d);
        q.col(j) *= (mag > 0 ? d / mag : Complex(1.0));
    }
    return q;
}

Operator twirl(const ControlGroup& group, const Operator& x, std::optional<std::size_t> n_samples, Rng* rng) {
    if (static_cast<std::size_t>(x.rows()) != group.dim() || x.rows() != x.cols()) {
        throw DimensionMismatch("twirl: operator dimension does not match group dimension " +
                                std::to_string(group.dim()));
    }
    Operator acc = Operator::Zero(x.rows(), x.cols());
    if (group.is_finite()) {
        for (const auto& g : group.elements()) {
            acc.noalias() += g.adjoint() * x * g;
        }
        return acc / static_cast<double>(group.order());
    }
    if (!n_samples || *n_samples == 0 || rng == nullptr) {
        throw ConfigError("twirl over a Haar group needs n_samples and a random stream");
    }
    for (std::size_t s = 0; s < *n_samples; s++) {
        Operator g = haar_sample(group.dim(), *rng);
        acc.noalias() += g.adjoint() * x * g;
    }
    return acc / static_cast<double>(*n_samples);
}

std::vector<Operator> traceless_hermitian_basis(std::size_t dim) {
    auto d = static_cast<Eigen::Index>(dim);
    std::vector<Operator> basis;
    for (Eigen::Index j = 0; j < d; j++) {
        for (Eigen::Index k = j + 1; k < d; k++) {
            Operator sym = Operator::Zero(d, d);
            sym(j, k) = 1;
            sym(k, j) = 1;
            basis.push_back(sym);
            Operator anti = Operator::Zero(d, d);
            anti(j, k) = Complex(0, -1);
            anti(k, j) = Complex(0, 1);
            basis.push_back(anti);
        }
    }
    for (Eigen::Index l = 1; l < d; l++) {
        Operator diag = Operator::Zero(d, d);
        double scale = std::sqrt(2.0 / static_cast<double>(l * (l + 1)));
        for (Eigen::Index j = 0; j < l; j++) {
            diag(j, j) = scale;
        }
        diag(l, l) = -scale * static_cast<double>(l);
        basis.push_back(diag);
    }
    return basis;
}

bool is_irreducible(const ControlGroup& group) {
    if (!group.is_finite()) {
        return true;
    }
    if (group.known_irreducible_) {
        return *group.known_irreducible_;
    }
    std::call_once(group.cache_->once, [&] {
        bool irreducible = true;
        for (const auto& b : traceless_hermitian_basis(group.dim())) {
            if (max_abs(traceless_part(twirl(group, b))) > tol::irreducible_residual) {
                irreducible = false;
                break;
            }
        }
        group.cache_->value = irreducible;
        group.cache_->computed.store(true);
    });
    return group.cache_->value;
}

}  // namespace ddsim
