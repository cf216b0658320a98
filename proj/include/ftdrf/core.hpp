#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ftdrf {

// ----------------------------------------------------------------------------
// Error hierarchy
// ----------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments or data that violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed input file (wrong magic, unparseable cell, ...).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Filesystem / stream failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// Model file fails structural or numeric validation.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Model file written by an unsupported format version.
class VersionError : public Error {
public:
    using Error::Error;
};

// ----------------------------------------------------------------------------
// Matrix: dense row-major double matrix
// ----------------------------------------------------------------------------

class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_data(std::size_t rows, std::size_t cols, std::vector<double> data) {
        if (data.size() != rows * cols) {
            throw ValidationError("Matrix::from_data: buffer size " + std::to_string(data.size()) +
                                  " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
        }
        Matrix m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.data_ = std::move(data);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Column-major copy of a Matrix. Split search walks one feature at a time
/// over many rows, so training reads columns; transposing once per fit keeps
/// those scans inside a single contiguous column instead of striding across
/// the whole row-major buffer.
class ColMatrix {
public:
    ColMatrix() = default;

    explicit ColMatrix(const Matrix& m) : rows_(m.rows()), cols_(m.cols()), data_(rows_ * cols_) {
        for (std::size_t r = 0; r < rows_; ++r) {
            const auto row = m.row(r);
            for (std::size_t c = 0; c < cols_; ++c) data_[c * rows_ + r] = row[c];
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

    std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace ftdrf
