#pragma once

#include "sparsepose/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <utility>

namespace sparsepose {

// Coordinate-indexed multi-channel 2D feature map. Sites are kept in canonical
// row-major order so that accumulation and serialization are deterministic; a
// hash index maps packed coordinates back to site ordinals. Values at an
// active site may be all-zero (the active set is geometry, not magnitude).
template <typename Scalar>
class SparseTensor2D {
public:
    using ValueMatrix = RowMajorMatrixX<Scalar>;

    SparseTensor2D() = default;

    SparseTensor2D(int height, int width, int channels)
        : height_(height), width_(width), channels_(channels),
          values_(0, channels) {
        if (height <= 0 || width <= 0 || channels < 0)
            throw std::invalid_argument("SparseTensor2D: non-positive shape");
    }

    // Builds a tensor from arbitrary-order sites; sorts into canonical order.
    static SparseTensor2D from_sites(int height, int width, int channels,
                                     std::vector<Coord> sites, ValueMatrix values) {
        if (values.rows() != static_cast<Eigen::Index>(sites.size()) ||
            values.cols() != channels)
            throw std::invalid_argument("SparseTensor2D: sites/values shape mismatch");
        SparseTensor2D t(height, width, channels);
        std::vector<std::int32_t> order(sites.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) {
            return sites[a] < sites[b];
        });
        t.sites_.reserve(sites.size());
        t.values_.resize(static_cast<Eigen::Index>(sites.size()), channels);
        for (std::size_t i = 0; i < order.size(); ++i) {
            const Coord& s = sites[order[i]];
            if (s.row < 0 || s.row >= height || s.col < 0 || s.col >= width)
                throw std::invalid_argument("SparseTensor2D: site out of bounds");
            if (i > 0 && !(t.sites_.back() < s))
                throw std::invalid_argument("SparseTensor2D: duplicate site");
            t.sites_.push_back(s);
            t.values_.row(static_cast<Eigen::Index>(i)) = values.row(order[i]);
        }
        t.rebuild_index();
        return t;
    }

    // Same site set as `geometry`, zero values, `channels` channels.
    template <typename OtherScalar>
    static SparseTensor2D like_sites(const SparseTensor2D<OtherScalar>& geometry,
                                     int channels) {
        SparseTensor2D t(geometry.height(), geometry.width(), channels);
        t.sites_ = geometry.sites();
        t.values_ = ValueMatrix::Zero(static_cast<Eigen::Index>(t.sites_.size()), channels);
        t.rebuild_index();
        return t;
    }

    static SparseTensor2D from_site_set(const SiteSet& set, int channels) {
        SparseTensor2D t(set.height, set.width, channels);
        t.sites_ = set.sites;
        t.values_ = ValueMatrix::Zero(static_cast<Eigen::Index>(set.sites.size()), channels);
        t.rebuild_index();
        return t;
    }

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    Eigen::Index site_count() const { return static_cast<Eigen::Index>(sites_.size()); }

    const std::vector<Coord>& sites() const { return sites_; }
    const ValueMatrix& values() const { return values_; }
    ValueMatrix& values() { return values_; }

    // Site ordinal for a coordinate, or -1 when inactive or out of bounds.
    std::int32_t find(Coord c) const {
        if (c.row < 0 || c.row >= height_ || c.col < 0 || c.col >= width_) return -1;
        auto it = index_.find(pack(c));
        return it == index_.end() ? -1 : it->second;
    }
    bool active(Coord c) const { return find(c) >= 0; }

    SiteSet site_set() const { return SiteSet{height_, width_, sites_}; }

    bool same_sites(const SparseTensor2D& other) const {
        return height_ == other.height_ && width_ == other.width_ &&
               sites_ == other.sites_;
    }

private:
    std::int64_t pack(Coord c) const {
        return static_cast<std::int64_t>(c.row) * width_ + c.col;
    }
    void rebuild_index() {
        index_.clear();
        index_.reserve(sites_.size());
        for (std::size_t i = 0; i < sites_.size(); ++i)
            index_.emplace(pack(sites_[i]), static_cast<std::int32_t>(i));
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<Coord> sites_;
    ValueMatrix values_;
    std::unordered_map<std::int64_t, std::int32_t> index_;
};

// A site is active iff any channel magnitude exceeds `zero_threshold`
// (strictly). Active values are copied verbatim, in canonical order.
template <typename Scalar>
SparseTensor2D<Scalar> from_dense(const DenseGrid<Scalar>& grid, Scalar zero_threshold = 0) {
    if (zero_threshold < 0)
        throw std::invalid_argument("from_dense: negative threshold");
    if (grid.values.rows() != static_cast<Eigen::Index>(grid.height) * grid.width ||
        grid.values.cols() != grid.channels)
        throw std::invalid_argument("from_dense: declared shape does not match grid data");
    SparseTensor2D<Scalar> t(grid.height, grid.width, grid.channels);
    std::vector<Coord> sites;
    std::vector<Eigen::Index> rows;
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            const Eigen::Index p = grid.pixel(r, c);
            if ((grid.values.row(p).array().abs() > zero_threshold).any()) {
                sites.push_back({r, c});
                rows.push_back(p);
            }
        }
    }
    typename SparseTensor2D<Scalar>::ValueMatrix values(
        static_cast<Eigen::Index>(rows.size()), grid.channels);
    for (std::size_t i = 0; i < rows.size(); ++i)
        values.row(static_cast<Eigen::Index>(i)) = grid.values.row(rows[i]);
    return SparseTensor2D<Scalar>::from_sites(grid.height, grid.width, grid.channels,
                                              std::move(sites), std::move(values));
}

// Inactive positions are exactly zero.
template <typename Scalar>
DenseGrid<Scalar> to_dense(const SparseTensor2D<Scalar>& t) {
    DenseGrid<Scalar> grid(t.height(), t.width(), t.channels());
    for (Eigen::Index i = 0; i < t.site_count(); ++i) {
        const Coord& s = t.sites()[static_cast<std::size_t>(i)];
        grid.values.row(grid.pixel(s.row, s.col)) = t.values().row(i);
    }
    return grid;
}

// Fraction of inactive sites: 1 - active / (H*W).
template <typename Scalar>
double sparsity(const SparseTensor2D<Scalar>& t) {
    const double total = static_cast<double>(t.height()) * t.width();
    return 1.0 - static_cast<double>(t.site_count()) / total;
}

}  // namespace sparsepose
