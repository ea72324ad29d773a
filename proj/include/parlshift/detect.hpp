#pragma once

// Word usage change scoring and ranking between two time slices.
//
// Five methods are supported: procrustes (independent models aligned by
// rotation), compass and compass_cutoff (compass-trained slice models,
// the latter on the frequency-filtered vocabulary), nn (overlap of nearest
// neighbor sets) and second_order (similarity profiles over the union of
// both neighbor sets). Every score is "higher = more change".

#include <algorithm>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "parlshift/align.hpp"
#include "parlshift/csv.hpp"
#include "parlshift/embed.hpp"
#include "parlshift/error.hpp"

namespace parlshift::detect {

using embed::EmbeddingModel;
using WordSet = std::unordered_set<std::string>;

enum class Method { procrustes, compass, compass_cutoff, nn, second_order };

inline constexpr Method all_methods[] = {Method::procrustes, Method::compass, Method::compass_cutoff, Method::nn,
                                         Method::second_order};

inline std::string_view to_string(Method m) {
    switch (m) {
    case Method::procrustes: return "procrustes";
    case Method::compass: return "compass";
    case Method::compass_cutoff: return "compass_cutoff";
    case Method::nn: return "nn";
    default: return "second_order";
    }
}

inline Method parse_method(std::string_view s) {
    for (auto m : all_methods)
        if (to_string(m) == s)
            return m;
    throw InputError("unknown method '" + std::string(s) + "'");
}

inline bool uses_compass(Method m) { return m == Method::compass || m == Method::compass_cutoff; }
inline bool uses_cutoffs(Method m) { return m == Method::nn || m == Method::compass_cutoff; }
inline bool cosine_based(Method m) { return m != Method::nn; }

struct ChangeConfig {
    Method method = Method::compass;
    std::size_t neighbor_k = 1000;
    std::size_t top_freq_cut = 200;
    std::uint64_t min_freq_cut = 200;
    std::uint64_t candidate_min_occurrences = 50;

    void validate() const {
        if (neighbor_k < 1)
            throw InputError("neighbor_k must be >= 1");
    }
};

struct RankedWord {
    std::string word;
    double score = 0;
    std::uint64_t count_a = 0;
    std::uint64_t count_b = 0;
};

struct ChangeRanking {
    Method method = Method::compass;
    std::string slice_a, slice_b;
    std::vector<RankedWord> entries; // descending score

    std::vector<std::string> order() const {
        std::vector<std::string> out;
        out.reserve(entries.size());
        for (const auto& e : entries)
            out.push_back(e.word);
        return out;
    }

    std::unordered_map<std::string, double> scores() const {
        std::unordered_map<std::string, double> out;
        for (const auto& e : entries)
            out.emplace(e.word, e.score);
        return out;
    }

    std::optional<std::size_t> rank_of(std::string_view word) const {
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (entries[i].word == word)
                return i;
        return std::nullopt;
    }
};

// Vocabulary minus the top_cut most frequent words (count ties in
// vocabulary order) and minus words seen fewer than min_cut times.
inline WordSet apply_frequency_cutoffs(const EmbeddingModel& model, std::size_t top_cut, std::uint64_t min_cut) {
    std::vector<std::size_t> idx(model.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return model.counts[a] > model.counts[b]; });
    WordSet out;
    for (std::size_t r = top_cut; r < idx.size(); ++r)
        if (model.counts[idx[r]] >= min_cut)
            out.insert(model.vocab[idx[r]]);
    if (out.empty())
        throw InputError("frequency cut-offs removed the whole vocabulary of '" + model.slice_id + "'");
    return out;
}

inline double change_from_cosine(std::span<const float> a, std::span<const float> b) {
    return 1.0 - embed::cosine_similarity(a, b);
}

// 1 - cosine of the word's target vectors; `aligned_a` must already be
// rotated onto b.
inline double score_procrustes(const EmbeddingModel& aligned_a, const EmbeddingModel& b, std::string_view word) {
    return change_from_cosine(aligned_a.vector(word, embed::MatrixKind::target),
                              b.vector(word, embed::MatrixKind::target));
}

// 1 - cosine of the slice-specific (non-frozen) vectors of two compass
// slice models. With `filter`, words outside it raise FilteredOut.
inline double score_compass(const EmbeddingModel& a, const EmbeddingModel& b, std::string_view word,
                            const WordSet* filter = nullptr) {
    a.require(word);
    b.require(word);
    if (filter && !filter->count(std::string(word)))
        throw FilteredOut(std::string(word));
    return change_from_cosine(a.vector(word), b.vector(word));
}

// Normalized rows of one model restricted to a word list, for repeated
// neighbor queries.
class NeighborIndex {
public:
    NeighborIndex(const EmbeddingModel& model, const std::vector<std::string>& words) : words_(words) {
        const auto& m = model.matrix(model.usage_matrix());
        dim_ = model.dim;
        rows_.resize(words.size() * dim_);
        for (std::size_t i = 0; i < words.size(); ++i) {
            const auto r = m.row(model.require(words[i]));
            const double n = norm(r);
            for (std::size_t d = 0; d < dim_; ++d)
                rows_[i * dim_ + d] = n > 0 ? r[d] / n : 0.0;
            pos_.emplace(words[i], i);
        }
    }

    std::size_t size() const { return words_.size(); }
    const std::string& word(std::size_t i) const { return words_[i]; }

    std::size_t position(std::string_view w) const {
        auto it = pos_.find(std::string(w));
        if (it == pos_.end())
            throw FilteredOut(std::string(w));
        return it->second;
    }

    double cosine(std::size_t i, std::size_t j) const {
        double s = 0;
        for (std::size_t d = 0; d < dim_; ++d)
            s += rows_[i * dim_ + d] * rows_[j * dim_ + d];
        return s;
    }

    // Positions of the k nearest entries to entry q (q excluded), ties by position.
    std::vector<std::size_t> top_k(std::size_t q, std::size_t k) const {
        std::vector<std::pair<double, std::size_t>> scored;
        scored.reserve(size());
        for (std::size_t i = 0; i < size(); ++i)
            if (i != q)
                scored.emplace_back(cosine(q, i), i);
        k = std::min(k, scored.size());
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                          [](const auto& x, const auto& y) { return x.first != y.first ? x.first > y.first : x.second < y.second; });
        std::vector<std::size_t> out(k);
        for (std::size_t i = 0; i < k; ++i)
            out[i] = scored[i].second;
        return out;
    }

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> pos_;
    std::vector<double> rows_;
    std::size_t dim_ = 0;
};

namespace detail {

inline std::vector<std::string> shared_words(const EmbeddingModel& a, const EmbeddingModel& b,
                                             const WordSet* within = nullptr) {
    std::vector<std::string> out;
    for (const auto& w : a.vocab)
        if (b.contains(w) && (!within || within->count(w)))
            out.push_back(w);
    return out;
}

inline double nn_score(const NeighborIndex& ia, const NeighborIndex& ib, std::string_view word, std::size_t k) {
    if (ia.size() < k + 1)
        throw InputError("nn: only " + std::to_string(ia.size() - 1) + " neighbors available for k=" +
                         std::to_string(k));
    const auto na = ia.top_k(ia.position(word), k);
    const auto nb = ib.top_k(ib.position(word), k);
    std::unordered_set<std::size_t> in_a(na.begin(), na.end());
    std::size_t common = 0;
    for (auto n : nb)
        common += in_a.count(n); // both indices share one word order
    return 1.0 - static_cast<double>(common) / static_cast<double>(k);
}

inline double second_order_score(const NeighborIndex& ia, const NeighborIndex& ib, std::string_view word,
                                 std::size_t k) {
    const auto qa = ia.position(word), qb = ib.position(word);
    auto na = ia.top_k(qa, k);
    const auto nb = ib.top_k(qb, k);
    std::vector<std::size_t> uni = na;
    for (auto n : nb)
        if (std::find(na.begin(), na.end(), n) == na.end())
            uni.push_back(n);
    if (uni.empty())
        throw InputError("second_order: no neighbors for '" + std::string(word) + "'");
    std::vector<double> sa, sb;
    for (auto n : uni) {
        sa.push_back(ia.cosine(qa, n));
        sb.push_back(ib.cosine(qb, n));
    }
    return 1.0 - embed::cosine_similarity(sa, sb);
}

} // namespace detail

// 1 - |top-k(a) ∩ top-k(b)| / k with neighbors drawn from `restrict`
// (both models must contain every word of it).
inline double score_nn(const EmbeddingModel& a, const EmbeddingModel& b, std::string_view word, std::size_t k,
                       const WordSet& restrict) {
    a.require(word);
    b.require(word);
    const auto words = detail::shared_words(a, b, &restrict);
    return detail::nn_score(NeighborIndex(a, words), NeighborIndex(b, words), word, k);
}

// Second-order similarity: similarity profiles of the word over the union
// of its top-k neighbor sets, compared by cosine. Neighbors come from the
// shared vocabulary.
inline double score_second_order(const EmbeddingModel& a, const EmbeddingModel& b, std::string_view word,
                                 std::size_t k) {
    a.require(word);
    b.require(word);
    const auto words = detail::shared_words(a, b);
    return detail::second_order_score(NeighborIndex(a, words), NeighborIndex(b, words), word, k);
}

// Scores every candidate word and sorts by descending score; ties keep the
// vocabulary order of model a. Candidates are the cut-off-filtered shared
// vocabulary for nn and compass_cutoff, otherwise shared words seen at
// least candidate_min_occurrences times in one of the slices. For
// procrustes, `a` must already be aligned onto `b`. The neighbor count
// used by nn and second_order is capped at the number of available words.
inline ChangeRanking rank_changed_words(const EmbeddingModel& a, const EmbeddingModel& b, const ChangeConfig& cfg) {
    cfg.validate();
    ChangeRanking out;
    out.method = cfg.method;
    out.slice_a = a.slice_id;
    out.slice_b = b.slice_id;

    std::vector<std::string> candidates;
    if (uses_cutoffs(cfg.method)) {
        const auto fa = apply_frequency_cutoffs(a, cfg.top_freq_cut, cfg.min_freq_cut);
        const auto fb = apply_frequency_cutoffs(b, cfg.top_freq_cut, cfg.min_freq_cut);
        for (const auto& w : a.vocab)
            if (fa.count(w) && fb.count(w))
                candidates.push_back(w);
    } else {
        for (const auto& w : detail::shared_words(a, b))
            if (a.count(w) >= cfg.candidate_min_occurrences || b.count(w) >= cfg.candidate_min_occurrences)
                candidates.push_back(w);
    }
    if (candidates.empty())
        throw InputError("no candidate words for " + std::string(to_string(cfg.method)));

    std::vector<double> scores(candidates.size());
    switch (cfg.method) {
    case Method::procrustes:
        for (std::size_t i = 0; i < candidates.size(); ++i)
            scores[i] = score_procrustes(a, b, candidates[i]);
        break;
    case Method::compass:
    case Method::compass_cutoff:
        for (std::size_t i = 0; i < candidates.size(); ++i)
            scores[i] = score_compass(a, b, candidates[i]);
        break;
    case Method::nn: {
        if (candidates.size() < 2)
            throw InputError("nn: need at least two candidate words");
        const NeighborIndex ia(a, candidates), ib(b, candidates);
        const std::size_t k = std::min(cfg.neighbor_k, candidates.size() - 1);
        for (std::size_t i = 0; i < candidates.size(); ++i)
            scores[i] = detail::nn_score(ia, ib, candidates[i], k);
        break;
    }
    case Method::second_order: {
        const auto shared = detail::shared_words(a, b);
        const NeighborIndex ia(a, shared), ib(b, shared);
        const std::size_t k = std::min(cfg.neighbor_k, shared.size() - 1);
        for (std::size_t i = 0; i < candidates.size(); ++i)
            scores[i] = detail::second_order_score(ia, ib, candidates[i], k);
        break;
    }
    }

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return scores[x] > scores[y]; });
    for (auto i : order)
        out.entries.push_back({candidates[i], scores[i], a.count(candidates[i]), b.count(candidates[i])});
    return out;
}

// ---------------------------------------------------------------------------
// End-to-end: train what the method needs on two token slices and rank.

struct DetectionRun {
    ChangeRanking ranking;
    EmbeddingModel model_a; // aligned onto model_b for procrustes
    EmbeddingModel model_b;
    std::optional<align::AlignmentResult> alignment;
};

inline DetectionRun detect_change(const embed::SliceTokens& a, const embed::SliceTokens& b, const ChangeConfig& cfg,
                                  const embed::TrainConfig& train_cfg) {
    DetectionRun run;
    if (uses_compass(cfg.method)) {
        const embed::SliceTokens pair[] = {a, b};
        auto models = embed::train_compass(pair, train_cfg);
        run.model_a = std::move(models.slices[0]);
        run.model_b = std::move(models.slices[1]);
    } else {
        run.model_a = embed::train(a.tokens, train_cfg, a.id);
        run.model_b = embed::train(b.tokens, train_cfg, b.id);
        if (cfg.method == Method::procrustes) {
            auto aligned = align::align_models(run.model_a, run.model_b);
            run.model_a = std::move(aligned.model);
            run.alignment = std::move(aligned.alignment);
        }
    }
    run.ranking = rank_changed_words(run.model_a, run.model_b, cfg);
    return run;
}

// ---------------------------------------------------------------------------
// Output

// Columns: rank, word, score (or similarity = 1 - score), count_a, count_b.
inline void write_ranking(std::ostream& out, const ChangeRanking& r, bool as_similarity = false) {
    csv::write_row(out, {"rank", "word", as_similarity ? "similarity" : "score", "count_a", "count_b"});
    char buf[32];
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
        const auto& e = r.entries[i];
        std::snprintf(buf, sizeof buf, "%.9g", as_similarity ? 1.0 - e.score : e.score);
        csv::write_row(out, {std::to_string(i + 1), e.word, std::string(buf), std::to_string(e.count_a),
                             std::to_string(e.count_b)});
    }
}

// Top `limit` changed words with their nearest neighbors in each slice.
inline void write_neighbors_report(std::ostream& out, const DetectionRun& run, std::size_t limit = 100,
                                   std::size_t neighbors = 10) {
    const auto& r = run.ranking;
    csv::write_row(out, {"rank", "word", "score", "neighbors_" + r.slice_a, "neighbors_" + r.slice_b});
    char buf[32];
    const auto list = [&](const EmbeddingModel& m, const std::string& w) {
        std::vector<std::string> words;
        for (const auto& n : embed::nearest_neighbors(m, w, neighbors))
            words.push_back(n.word);
        return text::join(words, " ");
    };
    for (std::size_t i = 0; i < std::min(limit, r.entries.size()); ++i) {
        const auto& e = r.entries[i];
        std::snprintf(buf, sizeof buf, "%.6f", e.score);
        csv::write_row(out, {std::to_string(i + 1), e.word, std::string(buf), list(run.model_a, e.word),
                             list(run.model_b, e.word)});
    }
}

} // namespace parlshift::detect
