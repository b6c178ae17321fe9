#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsepose {

// Error taxonomy mirrored by the CLI exit codes (2 / 3 / 4).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMajorMatrixX =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Integer pixel coordinate, ordered row-major (the canonical site order).
struct Coord {
    std::int32_t row = 0;
    std::int32_t col = 0;

    friend bool operator==(const Coord&, const Coord&) = default;
    friend auto operator<=>(const Coord& a, const Coord& b) {
        if (auto c = a.row <=> b.row; c != 0) return c;
        return a.col <=> b.col;
    }
};

// An active-site set with its grid geometry, in canonical row-major order.
struct SiteSet {
    int height = 0;
    int width = 0;
    std::vector<Coord> sites;

    friend bool operator==(const SiteSet&, const SiteSet&) = default;
};

// Dense H x W x C grid stored as an (H*W) x C matrix, rows in row-major pixel
// order. Row r*width+c holds the channel vector of pixel (r, c).
template <typename Scalar>
struct DenseGrid {
    int height = 0;
    int width = 0;
    int channels = 0;
    RowMajorMatrixX<Scalar> values;

    DenseGrid() = default;
    DenseGrid(int h, int w, int c)
        : height(h), width(w), channels(c),
          values(RowMajorMatrixX<Scalar>::Zero(static_cast<Eigen::Index>(h) * w, c)) {}

    Eigen::Index pixel(int r, int c) const {
        return static_cast<Eigen::Index>(r) * width + c;
    }
    Scalar at(int r, int c, int ch) const { return values(pixel(r, c), ch); }
    Scalar& at(int r, int c, int ch) { return values(pixel(r, c), ch); }
};

}  // namespace sparsepose
