#pragma once

// Orthogonal Procrustes alignment of embedding spaces.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "parlshift/embed.hpp"
#include "parlshift/error.hpp"
#include "parlshift/matrix.hpp"

namespace parlshift::align {

struct Svd {
    Matrix<double> u;              // m x n, orthonormal columns
    std::vector<double> singular;  // n values, unsorted
    Matrix<double> v;              // n x n orthogonal
    int sweeps = 0;
    bool converged = false;
};

struct SvdOptions {
    double tolerance = 1e-10;
    int max_sweeps = 60;
};

// One-sided Jacobi SVD of an m x n matrix with m >= n: A = U diag(s) V^T.
// Columns of U belonging to zero singular values are completed to an
// orthonormal set.
inline Svd jacobi_svd(Matrix<double> a, SvdOptions opts = {}) {
    const std::size_t m = a.rows(), n = a.cols();
    if (m < n)
        throw InputError("jacobi_svd: needs rows >= cols");
    Svd out;
    out.v = Matrix<double>::identity(n);
    for (out.sweeps = 0; out.sweeps < opts.max_sweeps; ++out.sweeps) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0, beta = 0, gamma = 0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double x = a(i, p), y = a(i, q);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if (gamma == 0 || std::abs(gamma) <= opts.tolerance * std::sqrt(alpha * beta))
                    continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1 + zeta * zeta));
                const double c = 1 / std::sqrt(1 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double x = a(i, p), y = a(i, q);
                    a(i, p) = c * x - s * y;
                    a(i, q) = s * x + c * y;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double x = out.v(i, p), y = out.v(i, q);
                    out.v(i, p) = c * x - s * y;
                    out.v(i, q) = s * x + c * y;
                }
            }
        }
        if (!rotated) {
            out.converged = true;
            break;
        }
    }
    out.singular.resize(n);
    double largest = 0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < m; ++i)
            s += a(i, j) * a(i, j);
        out.singular[j] = std::sqrt(s);
        largest = std::max(largest, out.singular[j]);
    }
    out.u = Matrix<double>(m, n);
    const double cutoff = largest * 1e-13 * static_cast<double>(n);
    std::vector<std::size_t> deficient;
    for (std::size_t j = 0; j < n; ++j) {
        if (out.singular[j] <= cutoff || out.singular[j] == 0) {
            deficient.push_back(j);
            continue;
        }
        for (std::size_t i = 0; i < m; ++i)
            out.u(i, j) = a(i, j) / out.singular[j];
    }
    // Gram-Schmidt against the good columns using unit vectors as seeds.
    std::size_t seed = 0;
    for (std::size_t j : deficient) {
        out.singular[j] = 0;
        while (seed < m) {
            std::vector<double> cand(m, 0.0);
            cand[seed++] = 1.0;
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == j)
                        continue;
                    double proj = 0;
                    for (std::size_t i = 0; i < m; ++i)
                        proj += out.u(i, k) * cand[i];
                    for (std::size_t i = 0; i < m; ++i)
                        cand[i] -= proj * out.u(i, k);
                }
            double nrm = 0;
            for (double x : cand)
                nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm > 1e-8) {
                for (std::size_t i = 0; i < m; ++i)
                    out.u(i, j) = cand[i] / nrm;
                break;
            }
        }
    }
    return out;
}

struct ProcrustesResult {
    Matrix<double> rotation; // d x d
    std::vector<double> singular_values;
    bool rank_deficient = false;
    bool converged = true;
};

// Orthogonal R minimizing ||X R - Y||_F: R = U V^T with X^T Y = U S V^T.
inline ProcrustesResult orthogonal_procrustes(const Matrix<double>& x, const Matrix<double>& y, SvdOptions opts = {}) {
    if (x.rows() != y.rows() || x.cols() != y.cols())
        throw InputError("procrustes: X and Y must have the same shape");
    if (x.rows() < x.cols())
        throw InputError("procrustes: needs at least as many rows as dimensions");
    const auto svd = jacobi_svd(transpose_times(x, y), opts);
    ProcrustesResult r;
    r.rotation = svd.u * svd.v.transposed();
    r.singular_values = svd.singular;
    r.converged = svd.converged;
    double largest = 0;
    for (double s : svd.singular)
        largest = std::max(largest, s);
    for (double s : svd.singular)
        if (s <= largest * 1e-12 * static_cast<double>(svd.singular.size()))
            r.rank_deficient = true;
    return r;
}

inline double orthogonality_defect(const Matrix<double>& r) {
    const auto rtr = transpose_times(r, r);
    double worst = 0;
    for (std::size_t i = 0; i < rtr.rows(); ++i)
        for (std::size_t j = 0; j < rtr.cols(); ++j)
            worst = std::max(worst, std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)));
    return worst;
}

struct AlignOptions {
    bool center = false;
    embed::MatrixKind matrix = embed::MatrixKind::target;
};

struct AlignmentResult {
    Matrix<double> rotation;
    std::vector<std::string> shared_words;
    double residual = 0;           // ||X R - Y||_F over normalized shared rows
    double unaligned_residual = 0; // ||X - Y||_F over the same rows
    bool rank_deficient = false;
};

struct AlignedModel {
    embed::EmbeddingModel model;
    AlignmentResult alignment;
};

namespace detail {

inline Matrix<double> shared_rows(const embed::EmbeddingModel& m, const std::vector<std::string>& words,
                                  embed::MatrixKind kind, bool center) {
    Matrix<double> out(words.size(), m.dim);
    const auto& src = m.matrix(kind);
    for (std::size_t r = 0; r < words.size(); ++r) {
        const auto row = src.row(*m.index_of(words[r]));
        const double n = norm(row);
        for (std::size_t c = 0; c < m.dim; ++c)
            out(r, c) = n > 0 ? row[c] / n : 0.0;
    }
    if (center && !words.empty()) {
        for (std::size_t c = 0; c < m.dim; ++c) {
            double mean = 0;
            for (std::size_t r = 0; r < words.size(); ++r)
                mean += out(r, c);
            mean /= static_cast<double>(words.size());
            for (std::size_t r = 0; r < words.size(); ++r)
                out(r, c) -= mean;
        }
    }
    return out;
}

inline void rotate_rows(Matrix<float>& m, const Matrix<double>& r) {
    std::vector<double> tmp(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (std::size_t k = 0; k < m.cols(); ++k)
            for (std::size_t j = 0; j < m.cols(); ++j)
                tmp[j] += static_cast<double>(row[k]) * r(k, j);
        for (std::size_t j = 0; j < m.cols(); ++j)
            row[j] = static_cast<float>(tmp[j]);
    }
}

} // namespace detail

// Rotates `source` onto `reference`. The rotation is solved on the
// length-normalized (optionally mean-centered) rows of the shared
// vocabulary and then applied to every row of both source matrices.
inline AlignedModel align_models(const embed::EmbeddingModel& source, const embed::EmbeddingModel& reference,
                                 AlignOptions opts = {}) {
    if (source.dim != reference.dim)
        throw InputError("align: models have different dimensions");
    AlignedModel out;
    auto& res = out.alignment;
    for (const auto& w : source.vocab)
        if (reference.contains(w))
            res.shared_words.push_back(w);
    if (res.shared_words.size() < source.dim)
        throw InputError("align: only " + std::to_string(res.shared_words.size()) + " shared words for dimension " +
                         std::to_string(source.dim) + "; train with a smaller dimension or use larger slices");
    const auto x = detail::shared_rows(source, res.shared_words, opts.matrix, opts.center);
    const auto y = detail::shared_rows(reference, res.shared_words, opts.matrix, opts.center);
    auto pr = orthogonal_procrustes(x, y);
    res.rotation = std::move(pr.rotation);
    res.rank_deficient = pr.rank_deficient;
    res.residual = frobenius_distance(x * res.rotation, y);
    res.unaligned_residual = frobenius_distance(x, y);
    out.model = source;
    detail::rotate_rows(out.model.target, res.rotation);
    detail::rotate_rows(out.model.context, res.rotation);
    return out;
}

} // namespace parlshift::align
