#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pselinv {

/// Column-major dense panel. Used for every supernodal block.
class Dense {
public:
    Dense() = default;
    Dense(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Dense identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    Dense transposed() const;
    double max_abs() const noexcept;

    /// Gathers the rows/cols selected by local offsets.
    Dense gather(std::span<const std::size_t> row_offsets,
                 std::span<const std::size_t> col_offsets) const;

    friend bool operator==(const Dense&, const Dense&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class Op { None, Trans };

/// C += alpha * op(A) * op(B)
void gemm(double alpha, const Dense& A, Op opa, const Dense& B, Op opb, Dense& C);

/// In-place LU without pivoting; the strict lower part receives the
/// unit-lower factor. Returns the local index of the first pivot whose
/// magnitude is <= tol, or -1 on success.
long lu_nopivot(Dense& A, double tol);

/// Splits a packed LU into a unit lower and an upper triangle.
void split_lu(const Dense& packed, Dense& L, Dense& U);

/// X := X * U^{-1}, U upper triangular with nonzero diagonal.
void solve_right_upper(Dense& X, const Dense& U);
/// X := X * L^{-1}, L unit lower triangular.
void solve_right_unit_lower(Dense& X, const Dense& L);
/// X := L^{-1} * X, L unit lower triangular.
void solve_left_unit_lower(const Dense& L, Dense& X);
/// X := U^{-1} * X, U upper triangular.
void solve_left_upper(const Dense& U, Dense& X);

/// Entrywise X += Y (shapes must agree).
void axpy(double alpha, const Dense& Y, Dense& X);

}  // namespace pselinv
