#include "qboltz/histories.hpp"

#include <cmath>
#include <sstream>

namespace qboltz {

HistorySpec::HistorySpec(std::vector<HistoryEvent> events) : events_(std::move(events)) {
    if (events_.empty()) {
        throw InvalidState("HistorySpec: a history needs at least one event");
    }
    const Index d = events_.front().family.dim();
    for (const HistoryEvent& e : events_) {
        if (e.unitary.dim() != d || e.family.dim() != d) {
            throw DimensionMismatch("HistorySpec: events act on different dimensions");
        }
    }
}

std::size_t HistorySpec::history_count() const {
    std::size_t n = 1;
    for (const HistoryEvent& e : events_) {
        n *= e.family.size();
    }
    return n;
}

std::vector<std::size_t> HistorySpec::labels(std::size_t history) const {
    if (history >= history_count()) {
        throw DimensionMismatch("HistorySpec::labels: history index out of range");
    }
    std::vector<std::size_t> out(events_.size());
    for (std::size_t k = events_.size(); k-- > 0;) {
        const std::size_t m = events_[k].family.size();
        out[k] = history % m;
        history /= m;
    }
    return out;
}

std::size_t HistorySpec::history_index(std::span<const std::size_t> labels) const {
    if (labels.size() != events_.size()) {
        throw DimensionMismatch("HistorySpec::history_index: wrong number of labels");
    }
    std::size_t index = 0;
    for (std::size_t k = 0; k < events_.size(); ++k) {
        const std::size_t m = events_[k].family.size();
        if (labels[k] >= m) {
            throw DimensionMismatch("HistorySpec::history_index: label out of range");
        }
        index = index * m + labels[k];
    }
    return index;
}

Matrix HistorySpec::class_operator(std::span<const std::size_t> labels) const {
    if (labels.size() != events_.size()) {
        throw DimensionMismatch("HistorySpec::class_operator: wrong number of labels");
    }
    Matrix c = identity(dim());
    for (std::size_t k = 0; k < events_.size(); ++k) {
        c = events_[k].family.member(labels[k]) * (events_[k].unitary.matrix() * c);
    }
    return c;
}

DecoherenceMatrix::DecoherenceMatrix(Matrix entries, std::vector<std::size_t> shape)
    : d_(std::move(entries)), shape_(std::move(shape)) {
    std::size_t n = 1;
    for (const std::size_t m : shape_) {
        n *= m;
    }
    if (d_.rows() != d_.cols() || static_cast<std::size_t>(d_.rows()) != n) {
        throw DimensionMismatch("DecoherenceMatrix: entries do not match the history shape");
    }
    const double herm = max_abs(d_ - d_.adjoint());
    if (herm > 1e-12) {
        std::ostringstream os;
        os << "DecoherenceMatrix: not Hermitian (deviation " << herm << ")";
        throw InvalidState(os.str());
    }
    const double tr = std::abs(d_.trace().real() - 1.0);
    if (tr > 1e-10) {
        std::ostringstream os;
        os << "DecoherenceMatrix: history probabilities sum to 1 +/- " << tr;
        throw InvalidState(os.str());
    }
}

double DecoherenceMatrix::max_off_diagonal() const {
    double worst = 0.0;
    for (Index j = 0; j < d_.cols(); ++j) {
        for (Index i = 0; i < d_.rows(); ++i) {
            if (i != j) {
                worst = std::max(worst, std::abs(d_(i, j)));
            }
        }
    }
    return worst;
}

DecoherenceMatrix decoherence_functional(const DensityMatrix& rho, const HistorySpec& spec) {
    if (rho.dim() != spec.dim()) {
        throw DimensionMismatch("decoherence_functional: state and history dimensions differ");
    }
    const std::size_t count = spec.history_count();
    std::vector<Matrix> c(count);
    std::vector<Matrix> c_rho(count);
    for (std::size_t h = 0; h < count; ++h) {
        c[h] = spec.class_operator(spec.labels(h));
        c_rho[h] = c[h] * rho.matrix();
    }
    Matrix d(static_cast<Index>(count), static_cast<Index>(count));
    // Tr[X C^dagger] = sum_ij X_ij conj(C_ij); fill the upper triangle and mirror.
    for (std::size_t a = 0; a < count; ++a) {
        for (std::size_t b = a; b < count; ++b) {
            const Complex v = c_rho[a].cwiseProduct(c[b].conjugate()).sum();
            d(static_cast<Index>(a), static_cast<Index>(b)) = v;
            d(static_cast<Index>(b), static_cast<Index>(a)) = std::conj(v);
        }
        d(static_cast<Index>(a), static_cast<Index>(a)) = d(static_cast<Index>(a), static_cast<Index>(a)).real();
    }
    std::vector<std::size_t> shape;
    for (const HistoryEvent& e : spec.events()) {
        shape.push_back(e.family.size());
    }
    return DecoherenceMatrix(std::move(d), std::move(shape));
}

std::vector<double> history_probabilities(const DecoherenceMatrix& d) {
    std::vector<double> w(d.history_count());
    for (std::size_t h = 0; h < w.size(); ++h) {
        w[h] = std::max(0.0, d.entries()(static_cast<Index>(h), static_cast<Index>(h)).real());
    }
    return w;
}

bool decoheres(const DecoherenceMatrix& d, double tolerance) {
    return d.max_off_diagonal() <= tolerance;
}

std::size_t support_cardinality(const PureState& psi, double threshold) {
    std::size_t n = 0;
    for (Index i = 0; i < psi.dim(); ++i) {
        if (std::norm(psi.amplitudes()(i)) > threshold) {
            ++n;
        }
    }
    return n;
}

}  // namespace qboltz
