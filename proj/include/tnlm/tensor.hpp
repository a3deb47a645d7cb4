#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace tnlm {

class CounterRng;

using Complex = std::complex<double>;
using Shape = std::vector<std::size_t>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Max-norm tolerance used for isometry checks unless a caller overrides it.
inline constexpr double kDefaultIsometryTol = 1e-8;

/// Dense complex tensor, row-major (last index fastest). An empty shape is a
/// scalar with one entry. Entries are always finite.
class DenseTensor {
public:
    /// Scalar zero.
    DenseTensor();
    /// Zero tensor of the given shape.
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<Complex> data);

    static DenseTensor scalar(Complex value);
    static DenseTensor identity(std::size_t n);
    /// Row-major copy of a matrix, reinterpreted with `shape` (sizes must agree).
    static DenseTensor from_matrix(const ComplexMatrix& m, Shape shape);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

    std::span<const Complex> data() const noexcept { return data_; }
    std::span<Complex> data() noexcept { return data_; }

    Complex operator[](std::size_t flat) const { return data_[flat]; }
    Complex& operator[](std::size_t flat) { return data_[flat]; }

    std::size_t flat_index(std::span<const std::size_t> index) const;
    Complex at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }
    Complex at(std::initializer_list<std::size_t> index) const {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }

    /// Single-entry value of a scalar (or any size-1 tensor).
    Complex value() const;

    double norm() const;
    double max_abs() const;
    DenseTensor conj() const;

    DenseTensor& operator+=(const DenseTensor& other);
    DenseTensor& operator-=(const DenseTensor& other);
    DenseTensor& operator*=(Complex factor);

    friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
    friend DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
    friend DenseTensor operator*(Complex c, DenseTensor a) { return a *= c; }
    friend DenseTensor operator*(DenseTensor a, Complex c) { return a *= c; }

    bool operator==(const DenseTensor&) const = default;

private:
    Shape shape_;
    std::vector<Complex> data_;
};

/// Largest entrywise modulus of a - b; shapes must match.
double max_abs_diff(const DenseTensor& a, const DenseTensor& b);

std::size_t shape_size(const Shape& shape);

/// (p,q) typing of a tensor viewed as a linear map: in_axes are the domain,
/// out_axes the codomain. Together they list every axis exactly once.
struct IndexSplit {
    std::vector<std::size_t> in_axes;
    std::vector<std::size_t> out_axes;

    /// Throws ArgumentError unless the split partitions `rank` axes.
    void validate(std::size_t rank) const;
    /// Codomain axes first, then domain axes: the split of a tensor whose
    /// leading `num_out` axes are outputs.
    static IndexSplit out_then_in(std::size_t num_out, std::size_t num_in);
};

/// Axis k of the result is axis perm[k] of `a`.
DenseTensor permute(const DenseTensor& a, std::span<const std::size_t> perm);

/// Same data, new shape of equal size.
DenseTensor reshape(const DenseTensor& a, Shape shape);

/// Merge axes: the k-th result axis is the ordered group k. If the groups
/// are not in ascending axis order the data is permuted first.
DenseTensor reshape_group(const DenseTensor& a, const std::vector<std::vector<std::size_t>>& groups);

/// Sum over the paired axes. Result axes: free axes of `a` in order, then
/// free axes of `b` in order.
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::span<const std::pair<std::size_t, std::size_t>> pairs);
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::initializer_list<std::pair<std::size_t, std::size_t>> pairs);

DenseTensor outer(const DenseTensor& a, const DenseTensor& b);

/// Matrix view: rows enumerate out_axes (row-major in listed order), columns
/// enumerate in_axes.
ComplexMatrix as_matrix(const DenseTensor& u, const IndexSplit& split);
/// Inverse of as_matrix for a tensor of the given shape.
DenseTensor from_matrix(const ComplexMatrix& m, const Shape& shape, const IndexSplit& split);

/// max |M^dagger M - I| of the grouped matrix. Throws NoIsometryPossible when
/// the domain is larger than the codomain.
double isometry_violation(const DenseTensor& u, const IndexSplit& split);
bool is_isometry(const DenseTensor& u, const IndexSplit& split, double tol = kDefaultIsometryTol);

/// Haar-distributed out_dim x in_dim isometry (QR of a complex Gaussian with
/// the phases of R removed).
DenseTensor random_isometry(std::size_t in_dim, std::size_t out_dim, CounterRng& rng);

/// Polar factor M (M^dagger M)^{-1/2} of the grouped matrix, i.e. the
/// Frobenius-nearest isometry. Throws SingularityError on rank deficiency.
DenseTensor project_to_isometry(const DenseTensor& u, const IndexSplit& split);
ComplexMatrix polar_factor(const ComplexMatrix& m);

}  // namespace tnlm

namespace tnlm {

/// result[.., a, ..] = sum_b m(a, b) * t[.., b, ..] on the given axis.
DenseTensor apply_to_axis(const DenseTensor& t, std::size_t axis, const ComplexMatrix& m);

/// Kronecker product with `a` as the slow (leading) factor.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace tnlm
