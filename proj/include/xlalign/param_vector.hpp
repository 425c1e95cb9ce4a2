#pragma once

#include <map>
#include <string>
#include <vector>

#include "xlalign/matrix.hpp"

namespace xlalign {

/// Named bundle of parameter matrices. Flattening concatenates segments in
/// lexicographic name order, each segment row-major, so the flat layout is a
/// pure function of the structure. flatten followed by assign_flat is the
/// identity.
class ParamVector {
public:
    ParamVector() = default;

    /// Throws std::invalid_argument when the name is already present.
    void add(const std::string& name, Matrix m);

    bool has(const std::string& name) const { return segments_.count(name) != 0; }
    Matrix& seg(const std::string& name);
    const Matrix& seg(const std::string& name) const;

    std::size_t segment_count() const { return segments_.size(); }
    std::size_t scalar_count() const;

    std::vector<double> flatten() const;
    void assign_flat(const std::vector<double>& flat);

    /// Same structure, all entries zero.
    static ParamVector zeros_like(const ParamVector& other);

    bool same_structure(const ParamVector& other) const;

    auto begin() { return segments_.begin(); }
    auto end() { return segments_.end(); }
    auto begin() const { return segments_.begin(); }
    auto end() const { return segments_.end(); }

    /// this += scale * other. Structures must match.
    void axpy(double scale, const ParamVector& other);

    double squared_distance(const ParamVector& other) const;

private:
    std::map<std::string, Matrix> segments_; // ordered: defines flattening order
};

} // namespace xlalign
