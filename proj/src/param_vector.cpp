#include "xlalign/param_vector.hpp"

#include <stdexcept>

namespace xlalign {

void ParamVector::add(const std::string& name, Matrix m) {
    auto [it, inserted] = segments_.emplace(name, std::move(m));
    (void)it;
    if (!inserted) {
        throw std::invalid_argument("ParamVector: duplicate segment '" + name + "'");
    }
}

Matrix& ParamVector::seg(const std::string& name) {
    auto it = segments_.find(name);
    if (it == segments_.end()) {
        throw std::invalid_argument("ParamVector: unknown segment '" + name + "'");
    }
    return it->second;
}

const Matrix& ParamVector::seg(const std::string& name) const {
    auto it = segments_.find(name);
    if (it == segments_.end()) {
        throw std::invalid_argument("ParamVector: unknown segment '" + name + "'");
    }
    return it->second;
}

std::size_t ParamVector::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, m] : segments_) {
        n += m.size();
    }
    return n;
}

std::vector<double> ParamVector::flatten() const {
    std::vector<double> flat;
    flat.reserve(scalar_count());
    for (const auto& [name, m] : segments_) {
        flat.insert(flat.end(), m.values().begin(), m.values().end());
    }
    return flat;
}

void ParamVector::assign_flat(const std::vector<double>& flat) {
    if (flat.size() != scalar_count()) {
        throw std::invalid_argument("ParamVector::assign_flat: length mismatch");
    }
    std::size_t off = 0;
    for (auto& [name, m] : segments_) {
        for (std::size_t k = 0; k < m.size(); ++k) {
            m.data()[k] = flat[off + k];
        }
        off += m.size();
    }
}

ParamVector ParamVector::zeros_like(const ParamVector& other) {
    ParamVector z;
    for (const auto& [name, m] : other.segments_) {
        z.add(name, Matrix(m.rows(), m.cols()));
    }
    return z;
}

bool ParamVector::same_structure(const ParamVector& other) const {
    if (segments_.size() != other.segments_.size()) {
        return false;
    }
    auto a = segments_.begin();
    auto b = other.segments_.begin();
    for (; a != segments_.end(); ++a, ++b) {
        if (a->first != b->first || !a->second.same_shape(b->second)) {
            return false;
        }
    }
    return true;
}

void ParamVector::axpy(double scale, const ParamVector& other) {
    if (!same_structure(other)) {
        throw std::invalid_argument("ParamVector::axpy: structure mismatch");
    }
    auto a = segments_.begin();
    auto b = other.segments_.begin();
    for (; a != segments_.end(); ++a, ++b) {
        for (std::size_t k = 0; k < a->second.size(); ++k) {
            a->second.data()[k] += scale * b->second.data()[k];
        }
    }
}

double ParamVector::squared_distance(const ParamVector& other) const {
    if (!same_structure(other)) {
        throw std::invalid_argument("ParamVector::squared_distance: structure mismatch");
    }
    double s = 0.0;
    auto a = segments_.begin();
    auto b = other.segments_.begin();
    for (; a != segments_.end(); ++a, ++b) {
        for (std::size_t k = 0; k < a->second.size(); ++k) {
            const double d = a->second.data()[k] - b->second.data()[k];
            s += d * d;
        }
    }
    return s;
}

} // namespace xlalign
