#include "tncirc/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <fmt/format.h>

namespace tncirc {

namespace {

using RowMatrix =
    Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<std::size_t> row_major_strides(const std::vector<std::size_t>& shape) {
    std::vector<std::size_t> strides(shape.size(), 1);
    for (std::size_t i = shape.size(); i-- > 1;)
        strides[i - 1] = strides[i] * shape[i];
    return strides;
}

// Fresh bond label that cannot collide with user labels already present.
std::string fresh_label(const std::vector<std::string>& taken, int i) {
    std::string candidate = fmt::format("~b{}", i);
    while (std::find(taken.begin(), taken.end(), candidate) != taken.end())
        candidate += "~";
    return candidate;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> shape_in,
                         std::vector<std::string> labels_in)
    : shape(std::move(shape_in)), labels(std::move(labels_in)) {
    if (shape.size() != labels.size())
        throw std::invalid_argument("tensor needs one label per index");
    std::set<std::string> seen;
    for (const std::string& l : labels)
        if (!seen.insert(l).second)
            throw std::invalid_argument(fmt::format("duplicate tensor label '{}'", l));
    std::size_t total = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw std::invalid_argument("tensor dimensions must be >= 1");
        total *= d;
    }
    data.assign(total, cdouble(0.0, 0.0));
}

DenseTensor DenseTensor::scalar(cdouble value) {
    DenseTensor t;
    t.data = {value};
    return t;
}

std::size_t DenseTensor::size() const {
    std::size_t total = 1;
    for (std::size_t d : shape) total *= d;
    return total;
}

bool DenseTensor::has_label(const std::string& label) const {
    return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::size_t DenseTensor::label_pos(const std::string& label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end())
        throw std::invalid_argument(fmt::format("tensor has no label '{}'", label));
    return static_cast<std::size_t>(it - labels.begin());
}

std::size_t DenseTensor::dim_of(const std::string& label) const {
    return shape[label_pos(label)];
}

cdouble& DenseTensor::at(const std::vector<std::size_t>& index) {
    return const_cast<cdouble&>(static_cast<const DenseTensor&>(*this).at(index));
}

const cdouble& DenseTensor::at(const std::vector<std::size_t>& index) const {
    if (index.size() != shape.size())
        throw std::invalid_argument("index rank does not match tensor rank");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= shape[i]) throw std::out_of_range("tensor index out of range");
        flat = flat * shape[i] + index[i];
    }
    return data[flat];
}

DenseTensor permuted(const DenseTensor& t, const std::vector<std::string>& new_labels) {
    if (new_labels.size() != t.labels.size())
        throw std::invalid_argument("permutation must list every label exactly once");
    std::vector<std::size_t> perm(new_labels.size());
    for (std::size_t i = 0; i < new_labels.size(); ++i)
        perm[i] = t.label_pos(new_labels[i]);

    std::vector<std::size_t> new_shape(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) new_shape[i] = t.shape[perm[i]];
    DenseTensor out(new_shape, new_labels);

    if (t.rank() == 0) {
        out.data = t.data;
        return out;
    }
    const std::vector<std::size_t> in_strides = row_major_strides(t.shape);
    // walk output positions in order, tracking the matching input offset
    std::vector<std::size_t> coord(perm.size(), 0);
    std::size_t in_flat = 0;
    const std::size_t total = out.size();
    for (std::size_t out_flat = 0; out_flat < total; ++out_flat) {
        out.data[out_flat] = t.data[in_flat];
        for (std::size_t axis = perm.size(); axis-- > 0;) {
            coord[axis]++;
            in_flat += in_strides[perm[axis]];
            if (coord[axis] < new_shape[axis]) break;
            in_flat -= coord[axis] * in_strides[perm[axis]];
            coord[axis] = 0;
        }
    }
    return out;
}

DenseTensor contract_pair(const DenseTensor& a, const DenseTensor& b,
                          const std::vector<std::string>& shared) {
    for (const std::string& l : shared) {
        if (!a.has_label(l) || !b.has_label(l))
            throw std::invalid_argument(
                fmt::format("shared label '{}' missing from an operand", l));
        if (a.dim_of(l) != b.dim_of(l))
            throw std::invalid_argument(
                fmt::format("label '{}' has mismatched dimensions {} vs {}", l,
                            a.dim_of(l), b.dim_of(l)));
    }
    std::vector<std::string> free_a, free_b;
    for (const std::string& l : a.labels)
        if (std::find(shared.begin(), shared.end(), l) == shared.end()) {
            if (b.has_label(l))
                throw std::invalid_argument(fmt::format(
                    "label '{}' is common to both operands but not listed as shared", l));
            free_a.push_back(l);
        }
    for (const std::string& l : b.labels)
        if (std::find(shared.begin(), shared.end(), l) == shared.end())
            free_b.push_back(l);

    // reshape to matrices: a -> (free_a, shared), b -> (shared, free_b)
    std::vector<std::string> a_order = free_a;
    a_order.insert(a_order.end(), shared.begin(), shared.end());
    std::vector<std::string> b_order = shared;
    b_order.insert(b_order.end(), free_b.begin(), free_b.end());
    const DenseTensor at = permuted(a, a_order);
    const DenseTensor bt = permuted(b, b_order);

    std::size_t shared_dim = 1;
    for (const std::string& l : shared) shared_dim *= a.dim_of(l);
    const std::size_t rows = at.size() / shared_dim;
    const std::size_t cols = bt.size() / shared_dim;

    std::vector<std::size_t> out_shape;
    std::vector<std::string> out_labels;
    for (const std::string& l : free_a) {
        out_shape.push_back(a.dim_of(l));
        out_labels.push_back(l);
    }
    for (const std::string& l : free_b) {
        out_shape.push_back(b.dim_of(l));
        out_labels.push_back(l);
    }
    DenseTensor out(out_shape, out_labels);

    Eigen::Map<const RowMatrix> ma(at.data.data(), rows, shared_dim);
    Eigen::Map<const RowMatrix> mb(bt.data.data(), shared_dim, cols);
    Eigen::Map<RowMatrix>(out.data.data(), rows, cols).noalias() = ma * mb;
    return out;
}

DenseTensor contract_over_common(const DenseTensor& a, const DenseTensor& b) {
    std::vector<std::string> shared;
    for (const std::string& l : a.labels)
        if (b.has_label(l)) shared.push_back(l);
    return contract_pair(a, b, shared);
}

DenseTensor trace_pair(const DenseTensor& t, const std::string& label_a,
                       const std::string& label_b) {
    if (label_a == label_b)
        throw std::invalid_argument("trace needs two distinct labels");
    const std::size_t pa = t.label_pos(label_a), pb = t.label_pos(label_b);
    if (t.shape[pa] != t.shape[pb])
        throw std::invalid_argument("traced indices must have equal dimensions");

    std::vector<std::string> keep;
    std::vector<std::size_t> keep_shape;
    for (std::size_t i = 0; i < t.rank(); ++i)
        if (i != pa && i != pb) {
            keep.push_back(t.labels[i]);
            keep_shape.push_back(t.shape[i]);
        }
    DenseTensor out(keep_shape, keep);
    if (out.shape.empty()) out.data.assign(1, cdouble(0.0, 0.0));

    const std::vector<std::size_t> strides = row_major_strides(t.shape);
    const std::size_t d = t.shape[pa];
    const std::size_t total = out.size();
    std::vector<std::size_t> coord(keep.size(), 0);
    for (std::size_t out_flat = 0; out_flat < total; ++out_flat) {
        std::size_t base = 0;
        for (std::size_t i = 0, k = 0; i < t.rank(); ++i)
            if (i != pa && i != pb) base += coord[k++] * strides[i];
        cdouble acc = 0;
        for (std::size_t j = 0; j < d; ++j)
            acc += t.data[base + j * strides[pa] + j * strides[pb]];
        out.data[out_flat] = acc;
        for (std::size_t axis = keep.size(); axis-- > 0;) {
            if (++coord[axis] < keep_shape[axis]) break;
            coord[axis] = 0;
        }
    }
    return out;
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
    const DenseTensor bt = permuted(b, a.labels);
    if (a.shape != bt.shape)
        throw std::invalid_argument("tensors have different shapes");
    double m = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - bt.data[i]));
    return m;
}

double frobenius_diff(const DenseTensor& a, const DenseTensor& b) {
    const DenseTensor bt = permuted(b, a.labels);
    if (a.shape != bt.shape)
        throw std::invalid_argument("tensors have different shapes");
    double acc = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        acc += std::norm(a.data[i] - bt.data[i]);
    return std::sqrt(acc);
}

std::vector<DenseTensor> mps_factorize(const DenseTensor& t, std::size_t max_bond) {
    if (t.rank() < 2)
        throw std::invalid_argument("factorization needs a tensor of rank >= 2");

    std::vector<DenseTensor> sites;
    const std::size_t r = t.rank();

    // carry starts as the full tensor reshaped to (dim_0, rest); after each
    // split it is (bond * dim_site, rest) for the next site.
    std::vector<cdouble> carry = t.data;
    std::size_t bond = 1;
    std::vector<std::string> bond_labels;

    for (std::size_t site = 0; site + 1 < r; ++site) {
        std::size_t rest = 1;
        for (std::size_t j = site + 1; j < r; ++j) rest *= t.shape[j];
        const std::size_t rows = bond * t.shape[site];

        Eigen::Map<const RowMatrix> m(carry.data(), rows, rest);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
            m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& sv = svd.singularValues();

        std::size_t keep = 1;  // always keep at least one value, even if zero
        const double cutoff = sv.size() ? sv(0) * 1e-12 : 0.0;
        for (Eigen::Index i = 1; i < sv.size(); ++i)
            if (sv(i) > cutoff) keep = static_cast<std::size_t>(i) + 1;
        if (max_bond > 0) keep = std::min(keep, max_bond);

        const std::string bond_label = fresh_label(t.labels, static_cast<int>(site));
        bond_labels.push_back(bond_label);

        if (site == 0) {
            DenseTensor u({t.shape[0], keep}, {t.labels[0], bond_label});
            for (std::size_t i = 0; i < t.shape[0]; ++i)
                for (std::size_t j = 0; j < keep; ++j)
                    u.data[i * keep + j] = svd.matrixU()(i, j);
            sites.push_back(std::move(u));
        } else {
            DenseTensor u({bond, t.shape[site], keep},
                          {bond_labels[site - 1], t.labels[site], bond_label});
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < keep; ++j)
                    u.data[i * keep + j] = svd.matrixU()(i, j);
            sites.push_back(std::move(u));
        }

        // carry = S * V^dagger restricted to the kept values
        carry.assign(keep * rest, cdouble(0.0, 0.0));
        for (std::size_t i = 0; i < keep; ++i)
            for (std::size_t j = 0; j < rest; ++j)
                carry[i * rest + j] = sv(i) * std::conj(svd.matrixV()(j, i));
        bond = keep;
    }

    DenseTensor last({bond, t.shape[r - 1]}, {bond_labels[r - 2], t.labels[r - 1]});
    last.data = std::move(carry);
    sites.push_back(std::move(last));
    return sites;
}

DenseTensor mps_contract(const std::vector<DenseTensor>& sites,
                         const std::vector<std::string>& site_labels) {
    if (sites.empty()) throw std::invalid_argument("empty site list");
    DenseTensor acc = sites[0];
    for (std::size_t i = 1; i < sites.size(); ++i)
        acc = contract_over_common(acc, sites[i]);
    return permuted(acc, site_labels);
}

}  // namespace tncirc
