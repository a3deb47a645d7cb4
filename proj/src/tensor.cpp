#include "tnlm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "tnlm/errors.hpp"
#include "tnlm/rng.hpp"

namespace tnlm {
namespace {

using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ')';
    return os.str();
}

std::vector<std::size_t> strides_of(const Shape& shape) {
    std::vector<std::size_t> strides(shape.size(), 1);
    for (std::size_t k = shape.size(); k-- > 1;) strides[k - 1] = strides[k] * shape[k];
    return strides;
}

void check_finite(std::span<const Complex> data) {
    for (const Complex& z : data) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw ArgumentError("tensor entries must be finite");
    }
}

// Axes listed in `axes` must be distinct and < rank.
void check_axes(std::span<const std::size_t> axes, std::size_t rank, const char* what) {
    std::vector<bool> seen(rank, false);
    for (std::size_t a : axes) {
        if (a >= rank) throw ArgumentError(std::string(what) + ": axis out of range");
        if (seen[a]) throw ArgumentError(std::string(what) + ": repeated axis " + std::to_string(a));
        seen[a] = true;
    }
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor() : data_(1, Complex{}) {}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
    for (std::size_t d : shape_) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive");
    }
    data_.assign(shape_size(shape_), Complex{});
}

DenseTensor::DenseTensor(Shape shape, std::vector<Complex> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    for (std::size_t d : shape_) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive");
    }
    if (data_.size() != shape_size(shape_)) {
        throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_string(shape_));
    }
    check_finite(data_);
}

DenseTensor DenseTensor::scalar(Complex value) { return DenseTensor({}, {value}); }

DenseTensor DenseTensor::identity(std::size_t n) {
    DenseTensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
    return t;
}

DenseTensor DenseTensor::from_matrix(const ComplexMatrix& m, Shape shape) {
    if (static_cast<std::size_t>(m.size()) != shape_size(shape))
        throw ShapeError("matrix size does not match shape " + shape_string(shape));
    std::vector<Complex> data(m.size());
    Eigen::Map<RowMajorMatrix>(data.data(), m.rows(), m.cols()) = m;
    return DenseTensor(std::move(shape), std::move(data));
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw ArgumentError("index rank mismatch");
    std::size_t flat = 0;
    for (std::size_t k = 0; k < index.size(); ++k) {
        if (index[k] >= shape_[k]) throw ArgumentError("index out of range");
        flat = flat * shape_[k] + index[k];
    }
    return flat;
}

Complex DenseTensor::value() const {
    if (data_.size() != 1) throw ShapeError("value() on a tensor with more than one entry");
    return data_[0];
}

double DenseTensor::norm() const {
    double s = 0.0;
    for (const Complex& z : data_) s += std::norm(z);
    return std::sqrt(s);
}

double DenseTensor::max_abs() const {
    double m = 0.0;
    for (const Complex& z : data_) m = std::max(m, std::abs(z));
    return m;
}

DenseTensor DenseTensor::conj() const {
    DenseTensor out = *this;
    for (Complex& z : out.data_) z = std::conj(z);
    return out;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    if (shape_ != other.shape_) throw ShapeError("shape mismatch in addition");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
    if (shape_ != other.shape_) throw ShapeError("shape mismatch in subtraction");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

DenseTensor& DenseTensor::operator*=(Complex factor) {
    for (Complex& z : data_) z *= factor;
    return *this;
}

double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape())
        throw ShapeError("shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

void IndexSplit::validate(std::size_t rank) const {
    std::vector<std::size_t> all = in_axes;
    all.insert(all.end(), out_axes.begin(), out_axes.end());
    check_axes(all, rank, "index split");
    if (all.size() != rank) throw ArgumentError("index split does not cover every axis");
}

IndexSplit IndexSplit::out_then_in(std::size_t num_out, std::size_t num_in) {
    IndexSplit s;
    for (std::size_t k = 0; k < num_out; ++k) s.out_axes.push_back(k);
    for (std::size_t k = 0; k < num_in; ++k) s.in_axes.push_back(num_out + k);
    return s;
}

DenseTensor permute(const DenseTensor& a, std::span<const std::size_t> perm) {
    const std::size_t rank = a.rank();
    if (perm.size() != rank) throw ArgumentError("permutation length mismatch");
    check_axes(perm, rank, "permute");

    bool trivial = true;
    for (std::size_t k = 0; k < rank; ++k) trivial = trivial && perm[k] == k;
    if (trivial) return a;

    Shape out_shape(rank);
    const auto in_strides = strides_of(a.shape());
    std::vector<std::size_t> step(rank);
    for (std::size_t k = 0; k < rank; ++k) {
        out_shape[k] = a.dim(perm[k]);
        step[k] = in_strides[perm[k]];
    }

    DenseTensor out(out_shape);
    auto src = a.data();
    auto dst = out.data();
    std::vector<std::size_t> idx(rank, 0);
    std::size_t offset = 0;
    const std::size_t total = out.size();
    const std::size_t inner = rank - 1;
    for (std::size_t flat = 0; flat < total;) {
        // Innermost axis as a strided run.
        const std::size_t n = out_shape[inner];
        const std::size_t s = step[inner];
        for (std::size_t i = 0; i < n; ++i) dst[flat + i] = src[offset + i * s];
        flat += n;
        for (std::size_t k = inner; k-- > 0;) {
            offset += step[k];
            if (++idx[k] < out_shape[k]) break;
            offset -= step[k] * out_shape[k];
            idx[k] = 0;
        }
    }
    return out;
}

DenseTensor reshape(const DenseTensor& a, Shape shape) {
    if (shape_size(shape) != a.size())
        throw ShapeError("cannot reshape " + shape_string(a.shape()) + " to " + shape_string(shape));
    return DenseTensor(std::move(shape), std::vector<Complex>(a.data().begin(), a.data().end()));
}

DenseTensor reshape_group(const DenseTensor& a, const std::vector<std::vector<std::size_t>>& groups) {
    std::vector<std::size_t> order;
    for (const auto& g : groups) {
        if (g.empty()) throw ArgumentError("reshape_group: empty group");
        order.insert(order.end(), g.begin(), g.end());
    }
    check_axes(order, a.rank(), "reshape_group");
    if (order.size() != a.rank()) throw ArgumentError("reshape_group: groups do not cover every axis");

    Shape shape;
    for (const auto& g : groups) {
        std::size_t d = 1;
        for (std::size_t axis : g) d *= a.dim(axis);
        shape.push_back(d);
    }
    return reshape(permute(a, order), std::move(shape));
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    std::vector<std::size_t> ca, cb;
    for (const auto& [x, y] : pairs) {
        ca.push_back(x);
        cb.push_back(y);
    }
    check_axes(ca, a.rank(), "contract (first operand)");
    check_axes(cb, b.rank(), "contract (second operand)");
    for (const auto& [x, y] : pairs) {
        if (a.dim(x) != b.dim(y)) {
            throw ShapeError("contract: axis " + std::to_string(x) + " has dimension " +
                             std::to_string(a.dim(x)) + " but paired axis " + std::to_string(y) +
                             " has dimension " + std::to_string(b.dim(y)));
        }
    }

    std::vector<bool> a_used(a.rank(), false), b_used(b.rank(), false);
    for (std::size_t x : ca) a_used[x] = true;
    for (std::size_t y : cb) b_used[y] = true;

    std::vector<std::size_t> perm_a, perm_b = cb;
    Shape out_shape;
    std::size_t rows = 1, cols = 1, inner = 1;
    for (std::size_t k = 0; k < a.rank(); ++k) {
        if (!a_used[k]) {
            perm_a.push_back(k);
            out_shape.push_back(a.dim(k));
            rows *= a.dim(k);
        }
    }
    perm_a.insert(perm_a.end(), ca.begin(), ca.end());
    for (std::size_t x : ca) inner *= a.dim(x);
    for (std::size_t k = 0; k < b.rank(); ++k) {
        if (!b_used[k]) {
            perm_b.push_back(k);
            out_shape.push_back(b.dim(k));
            cols *= b.dim(k);
        }
    }

    const DenseTensor pa = permute(a, perm_a);
    const DenseTensor pb = permute(b, perm_b);
    DenseTensor out(out_shape);
    using ConstMap = Eigen::Map<const RowMajorMatrix>;
    Eigen::Map<RowMajorMatrix>(out.data().data(), rows, cols).noalias() =
        ConstMap(pa.data().data(), rows, inner) * ConstMap(pb.data().data(), inner, cols);
    return out;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::initializer_list<std::pair<std::size_t, std::size_t>> pairs) {
    return contract(a, b, std::span(pairs.begin(), pairs.size()));
}

DenseTensor outer(const DenseTensor& a, const DenseTensor& b) {
    return contract(a, b, std::span<const std::pair<std::size_t, std::size_t>>{});
}

ComplexMatrix as_matrix(const DenseTensor& u, const IndexSplit& split) {
    split.validate(u.rank());
    std::size_t rows = 1, cols = 1;
    for (std::size_t k : split.out_axes) rows *= u.dim(k);
    for (std::size_t k : split.in_axes) cols *= u.dim(k);
    std::vector<std::size_t> perm = split.out_axes;
    perm.insert(perm.end(), split.in_axes.begin(), split.in_axes.end());
    const DenseTensor p = permute(u, perm);
    return Eigen::Map<const RowMajorMatrix>(p.data().data(), rows, cols);
}

DenseTensor from_matrix(const ComplexMatrix& m, const Shape& shape, const IndexSplit& split) {
    split.validate(shape.size());
    std::vector<std::size_t> perm = split.out_axes;
    perm.insert(perm.end(), split.in_axes.begin(), split.in_axes.end());
    Shape grouped;
    for (std::size_t k : perm) grouped.push_back(shape[k]);
    const DenseTensor g = DenseTensor::from_matrix(m, grouped);
    // Inverse permutation puts every axis back in place.
    std::vector<std::size_t> inverse(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) inverse[perm[k]] = k;
    return permute(g, inverse);
}

double isometry_violation(const DenseTensor& u, const IndexSplit& split) {
    const ComplexMatrix m = as_matrix(u, split);
    if (m.cols() > m.rows()) {
        throw NoIsometryPossible("no isometry possible: domain dimension " + std::to_string(m.cols()) +
                                 " exceeds codomain dimension " + std::to_string(m.rows()));
    }
    const ComplexMatrix gram = m.adjoint() * m;
    return (gram - ComplexMatrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

bool is_isometry(const DenseTensor& u, const IndexSplit& split, double tol) {
    return isometry_violation(u, split) <= tol;
}

DenseTensor random_isometry(std::size_t in_dim, std::size_t out_dim, CounterRng& rng) {
    if (in_dim == 0 || out_dim == 0) throw ArgumentError("random_isometry: dimensions must be positive");
    if (in_dim > out_dim) {
        throw ArgumentError("random_isometry: in_dim " + std::to_string(in_dim) + " exceeds out_dim " +
                            std::to_string(out_dim));
    }
    ComplexMatrix g(out_dim, in_dim);
    for (std::size_t r = 0; r < out_dim; ++r)
        for (std::size_t c = 0; c < in_dim; ++c) g(r, c) = rng.complex_normal();

    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(out_dim, in_dim);
    const ComplexMatrix& r = qr.matrixQR();
    for (std::size_t c = 0; c < in_dim; ++c) {
        const Complex d = r(c, c);
        const double mag = std::abs(d);
        if (mag > 0.0) q.col(c) *= d / mag;
    }
    return DenseTensor::from_matrix(q, {out_dim, in_dim});
}

ComplexMatrix polar_factor(const ComplexMatrix& m) {
    if (m.cols() > m.rows()) throw NoIsometryPossible("polar factor of a wide matrix is not an isometry");
    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
    if (!(smin > 1e-12 * smax) || smax == 0.0) {
        std::ostringstream os;
        os << "polar retraction on a rank-deficient matrix: smallest singular value " << smin;
        throw SingularityError(os.str(), smin);
    }
    return svd.matrixU() * svd.matrixV().adjoint();
}

DenseTensor project_to_isometry(const DenseTensor& u, const IndexSplit& split) {
    return from_matrix(polar_factor(as_matrix(u, split)), u.shape(), split);
}

}  // namespace tnlm

namespace tnlm {

DenseTensor apply_to_axis(const DenseTensor& t, std::size_t axis, const ComplexMatrix& m) {
    if (axis >= t.rank()) throw ArgumentError("apply_to_axis: axis out of range");
    if (static_cast<std::size_t>(m.cols()) != t.dim(axis))
        throw ShapeError("apply_to_axis: matrix does not match axis dimension");
    const DenseTensor mt = DenseTensor::from_matrix(m, {static_cast<std::size_t>(m.rows()),
                                                        static_cast<std::size_t>(m.cols())});
    const DenseTensor r = contract(mt, t, {{1, axis}});
    // r has the new axis first; move it back into place.
    std::vector<std::size_t> perm;
    for (std::size_t k = 0; k < t.rank(); ++k) perm.push_back(k == axis ? 0 : (k < axis ? k + 1 : k));
    return permute(r, perm);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace tnlm
