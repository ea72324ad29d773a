#pragma once

// Independent reference implementations and fixture helpers shared by the
// unit tests and the acceptance binary.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "parlshift/csv.hpp"
#include "parlshift/matrix.hpp"

namespace support {

inline std::filesystem::path test_data(const std::string& rel = {}) { return std::filesystem::path(PARLSHIFT_TEST_DATA) / rel; }
inline std::filesystem::path shipped_data(const std::string& rel = {}) { return std::filesystem::path(PARLSHIFT_DATA) / rel; }

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("parlshift_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

// Jaro-Winkler written straight from the definition: collect the common
// characters of each string in order, count half-transpositions between
// the two sequences, then apply the prefix bonus.
inline double jaro_winkler(const std::u32string& s1, const std::u32string& s2) {
    if (s1.empty() && s2.empty())
        return 1.0;
    if (s1.empty() || s2.empty())
        return 0.0;
    const int n1 = static_cast<int>(s1.size()), n2 = static_cast<int>(s2.size());
    const int reach = std::max(0, std::max(n1, n2) / 2 - 1);
    std::vector<bool> taken(n2, false);
    std::u32string common1, common2;
    for (int i = 0; i < n1; ++i) {
        for (int j = std::max(0, i - reach); j <= std::min(n2 - 1, i + reach); ++j) {
            if (!taken[j] && s2[j] == s1[i]) {
                taken[j] = true;
                common1 += s1[i];
                break;
            }
        }
    }
    for (int j = 0; j < n2; ++j)
        if (taken[j])
            common2 += s2[j];
    const double m = static_cast<double>(common1.size());
    if (m == 0)
        return 0.0;
    int mismatched = 0;
    for (std::size_t k = 0; k < common1.size(); ++k)
        if (common1[k] != common2[k])
            ++mismatched;
    const double t = mismatched / 2.0;
    const double jaro = (m / n1 + m / n2 + (m - t) / m) / 3.0;
    int l = 0;
    while (l < 4 && l < n1 && l < n2 && s1[l] == s2[l])
        ++l;
    return jaro + l * 0.1 * (1.0 - jaro);
}

// Random orthogonal matrix: modified Gram-Schmidt on a Gaussian matrix.
inline parlshift::Matrix<double> random_orthogonal(std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    parlshift::Matrix<double> q(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            q(i, j) = g(rng);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double proj = 0;
            for (std::size_t i = 0; i < d; ++i)
                proj += q(i, j) * q(i, k);
            for (std::size_t i = 0; i < d; ++i)
                q(i, j) -= proj * q(i, k);
        }
        double n = 0;
        for (std::size_t i = 0; i < d; ++i)
            n += q(i, j) * q(i, j);
        n = std::sqrt(n);
        for (std::size_t i = 0; i < d; ++i)
            q(i, j) /= n;
    }
    return q;
}

inline parlshift::Matrix<double> random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    parlshift::Matrix<double> m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(i, j) = g(rng);
    return m;
}

// Negative-sampling loss of one example written from the formula:
// -log s(h.u_pos) - sum log s(-h.u_neg).
inline double sgns_loss(const std::vector<double>& h, const std::vector<std::vector<double>>& outputs) {
    double loss = 0;
    for (std::size_t k = 0; k < outputs.size(); ++k) {
        double f = 0;
        for (std::size_t d = 0; d < h.size(); ++d)
            f += h[d] * outputs[k][d];
        const double s = 1.0 / (1.0 + std::exp(k == 0 ? -f : f));
        loss -= std::log(s);
    }
    return loss;
}

struct LabeledSpeech {
    std::string file;
    std::size_t index = 0;
    std::string raw_header;
    std::string member;
    bool line_start = true;
};

inline std::vector<LabeledSpeech> read_labels() {
    std::ifstream in(test_data("sittings/labels.csv"));
    const auto t = parlshift::csv::read_table(in, ',', "labels.csv");
    std::vector<LabeledSpeech> out;
    for (const auto& r : t.rows)
        out.push_back({r.fields[0], static_cast<std::size_t>(std::stoul(r.fields[1])), r.fields[2], r.fields[3],
                       r.fields[4] == "1"});
    return out;
}

} // namespace support
