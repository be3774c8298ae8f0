#ifndef DDSIM_CONTROL_GROUP_H
#define DDSIM_CONTROL_GROUP_H

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ddsim/operator.h"
#include "ddsim/rng.h"

namespace ddsim {

enum class GroupKind { finite, haar };

/// A set of control unitaries used as decoupling frames.
///
/// Finite groups are projective: each element is stored as one representative of its phase class
/// and products are matched up to a unit scalar. The Haar kind stands for the full unitary group
/// U(d) and has no element list.
class ControlGroup {
   public:
    /// Unchecked constructor for finite groups; use custom_group() for validated input.
    ControlGroup(std::vector<Operator> elements, std::vector<std::string> labels, std::optional<bool> irreducible);
    static ControlGroup haar(std::size_t dim);

    GroupKind kind() const { return kind_; }
    bool is_finite() const { return kind_ == GroupKind::finite; }
    std::size_t dim() const { return dim_; }
    /// |G| for finite groups; 0 for the Haar kind.
    std::size_t order() const { return elements_.size(); }
    const std::vector<Operator>& elements() const { return elements_; }
    const std::vector<std::string>& labels() const { return labels_; }

    /// Index of the element in the same phase class as `u`, if any.
    std::optional<std::size_t> find_class(const Operator& u) const;
    std::size_t index_of_label(const std::string& label) const;
    std::size_t identity_index() const;

    /// Cached irreducibility flag, if it has been established.
    std::optional<bool> irreducible_hint() const;

   private:
    friend bool is_irreducible(const ControlGroup& group);

    struct IrreducibleCache {
        std::once_flag once;
        bool value = false;
        std::atomic<bool> computed{false};
    };

    GroupKind kind_ = GroupKind::finite;
    std::size_t dim_ = 0;
    std::vector<Operator> elements_;
    std::vector<std::string> labels_;
    std::optional<bool> known_irreducible_;
    std::shared_ptr<IrreducibleCache> cache_ = std::make_shared<IrreducibleCache>();
};

/// |tr(A^dagger B)| / d. Equals 1 exactly when A and B differ by a unit phase.
double phase_overlap(const Operator& a, const Operator& b);
bool same_phase_class(const Operator& a, const Operator& b);

/// {1, X, Y, Z}^(x)n, 4^n elements on dimension 2^n. Labels are Pauli strings, identity first.
ControlGroup pauli_group(int n_qubits);

/// Validated finite group. Throws NonUnitaryElement or ClosureViolation.
ControlGroup custom_group(const std::vector<Operator>& unitaries, std::vector<std::string> labels = {});

/// The one-element group {1_d}; the "no control" protocol runs on it.
ControlGroup trivial_group(std::size_t dim);

/// Haar-random unitary on U(d): Ginibre matrix, QR, column phases fixed by diag(R).
Operator haar_sample(std::size_t dim, Rng& rng);

/// Group average of g^dagger X g. Exact for finite groups; Monte Carlo over `n_samples` Haar draws
/// (both `n_samples` and `rng` required) for the Haar kind.
Operator twirl(const ControlGroup& group, const Operator& x, std::optional<std::size_t> n_samples = std::nullopt,
               Rng* rng = nullptr);

/// Generalized Gell-Mann basis: d^2 - 1 traceless Hermitian matrices.
std::vector<Operator> traceless_hermitian_basis(std::size_t dim);

/// True iff the twirl annihilates every traceless basis operator (up to tol::irreducible_residual).
bool is_irreducible(const ControlGroup& group);

}  // namespace ddsim

#endif
