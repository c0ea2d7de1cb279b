#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qboltz/qstate.hpp"

namespace qboltz {

/// One event of a history: evolve by `unitary` from the previous event (or
/// from time zero), then ask which member of `family` holds.
struct HistoryEvent {
    UnitaryMap unitary;
    ProjectorFamily family;
};

/// Ordered events. Histories are label tuples (a_1, ..., a_n) and are
/// enumerated row-major: the first event is the most significant digit.
class HistorySpec {
public:
    explicit HistorySpec(std::vector<HistoryEvent> events);

    Index dim() const { return events_.front().family.dim(); }
    std::size_t size() const { return events_.size(); }
    const std::vector<HistoryEvent>& events() const { return events_; }

    std::size_t history_count() const;
    std::vector<std::size_t> labels(std::size_t history) const;
    std::size_t history_index(std::span<const std::size_t> labels) const;

    /// Class operator C = P_{a_n} U_n ... P_{a_1} U_1.
    Matrix class_operator(std::span<const std::size_t> labels) const;

private:
    std::vector<HistoryEvent> events_;
};

/// D(a', a) = Tr[C_{a'} rho C_a^dagger], rows a', columns a.
class DecoherenceMatrix {
public:
    /// Checks Hermiticity (1e-12) and unit trace of the diagonal (1e-10).
    DecoherenceMatrix(Matrix entries, std::vector<std::size_t> shape);

    const Matrix& entries() const { return d_; }
    /// Member count of each event's family.
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t history_count() const { return static_cast<std::size_t>(d_.rows()); }

    /// Largest |D(a', a)| with a' != a.
    double max_off_diagonal() const;

private:
    Matrix d_;
    std::vector<std::size_t> shape_;
};

DecoherenceMatrix decoherence_functional(const DensityMatrix& rho, const HistorySpec& spec);

/// Diagonal of D, clipped at zero.
std::vector<double> history_probabilities(const DecoherenceMatrix& d);

/// True when every off-diagonal entry has modulus <= tolerance.
bool decoheres(const DecoherenceMatrix& d, double tolerance);

/// Number of basis amplitudes with |c_j|^2 > threshold.
std::size_t support_cardinality(const PureState& psi, double threshold = 1e-10);

}  // namespace qboltz
