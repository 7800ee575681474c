#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "tncirc/gates.hpp"  // cdouble

namespace tncirc {

// Dense complex tensor with one string label per index. Data is row-major:
// the last index varies fastest. Labels are unique within a tensor; a label
// shared by two tensors names an edge to contract.
struct DenseTensor {
    std::vector<std::size_t> shape;
    std::vector<std::string> labels;
    std::vector<cdouble> data;

    DenseTensor() = default;
    // Zero-filled tensor; throws on shape/label mismatch, a zero dimension,
    // or duplicate labels.
    DenseTensor(std::vector<std::size_t> shape, std::vector<std::string> labels);

    static DenseTensor scalar(cdouble value);

    std::size_t rank() const { return shape.size(); }
    std::size_t size() const;  // product of dims (1 for a scalar)

    bool has_label(const std::string& label) const;
    std::size_t label_pos(const std::string& label) const;  // throws if missing
    std::size_t dim_of(const std::string& label) const;

    cdouble& at(const std::vector<std::size_t>& index);
    const cdouble& at(const std::vector<std::size_t>& index) const;
};

// Tensor with indices reordered to `new_labels` (a permutation of labels).
DenseTensor permuted(const DenseTensor& t, const std::vector<std::string>& new_labels);

// Contracts `a` and `b` over `shared` labels (present in both, equal dims).
// Every label common to a and b must be listed; remaining labels must be
// disjoint. An empty `shared` forms the outer product. Result labels are
// a's free labels followed by b's.
DenseTensor contract_pair(const DenseTensor& a, const DenseTensor& b,
                          const std::vector<std::string>& shared);

// contract_pair over all labels the two tensors have in common.
DenseTensor contract_over_common(const DenseTensor& a, const DenseTensor& b);

// Sums over two equal-dimension indices of one tensor (a partial trace).
DenseTensor trace_pair(const DenseTensor& t, const std::string& label_a,
                       const std::string& label_b);

// Largest entrywise |a - b|; tensors must carry the same labels
// (any index order).
double max_abs_diff(const DenseTensor& a, const DenseTensor& b);

// Frobenius norm of a - b, same label convention as max_abs_diff.
double frobenius_diff(const DenseTensor& a, const DenseTensor& b);

// Splits a rank-r tensor into a chain of r site tensors by repeated SVD:
//   site 0: (dim_0, bond_0), site i: (bond_{i-1}, dim_i, bond_i),
//   site r-1: (bond_{r-2}, dim_{r-1}).
// Bond labels are fresh; site labels keep the input's. Singular values
// below 1e-12 * (largest value at that split) are dropped, and `max_bond`
// (0 = unlimited) caps every bond. Requires rank >= 2.
std::vector<DenseTensor> mps_factorize(const DenseTensor& t, std::size_t max_bond = 0);

// Contracts an mps_factorize chain back into one tensor, with indices in
// the original label order.
DenseTensor mps_contract(const std::vector<DenseTensor>& sites,
                         const std::vector<std::string>& site_labels);

}  // namespace tncirc
