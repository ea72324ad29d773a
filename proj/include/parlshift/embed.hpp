#pragma once

// Word embeddings with negative sampling (skip-gram and CBOW), trained from
// scratch, plus two-phase compass training: a compass model is trained on
// all slices together, then each slice is trained with one of the compass
// matrices frozen so the other matrix lands in a shared coordinate system.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "parlshift/error.hpp"
#include "parlshift/io.hpp"
#include "parlshift/matrix.hpp"
#include "parlshift/random.hpp"

namespace parlshift::embed {

enum class Architecture { skipgram, cbow };
enum class MatrixKind { target, context };

inline std::string_view to_string(Architecture a) { return a == Architecture::cbow ? "cbow" : "skipgram"; }
inline std::string_view to_string(MatrixKind k) { return k == MatrixKind::context ? "context" : "target"; }
inline MatrixKind other(MatrixKind k) { return k == MatrixKind::target ? MatrixKind::context : MatrixKind::target; }

struct TrainConfig {
    std::size_t dim = 100;
    std::size_t window = 5;
    std::size_t negative = 5;
    std::size_t epochs = 5;
    double learning_rate = 0.025; // decays linearly to learning_rate * min_learning_rate_ratio
    double min_learning_rate_ratio = 1e-4;
    std::uint64_t min_count = 5;
    double sample = 1e-3; // subsampling threshold, 0 disables
    Architecture architecture = Architecture::skipgram;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    bool deterministic = true;
    // Compass mode: the matrix copied from the compass and never updated.
    MatrixKind compass_frozen = MatrixKind::target;
    // Whether "@sw" stopword placeholders take part in training.
    bool keep_stopword_token = true;
    // Token that ends a sentence; windows never cross it and it is not embedded.
    std::string sentence_break = ".";

    static TrainConfig compass_defaults() {
        TrainConfig c;
        c.architecture = Architecture::cbow;
        return c;
    }

    void validate() const {
        if (dim < 1 || window < 1 || negative < 1 || epochs < 1 || workers < 1)
            throw InputError("train config: dim, window, negative, epochs and workers must be >= 1");
        if (!(learning_rate > 0))
            throw InputError("train config: learning rate must be > 0");
        if (sample < 0)
            throw InputError("train config: subsampling threshold must be >= 0");
    }
};

struct EmbeddingModel {
    std::vector<std::string> vocab;
    std::vector<std::uint64_t> counts; // aligned with vocab, all > 0
    std::size_t dim = 0;
    Matrix<float> target;
    Matrix<float> context;
    std::string slice_id;
    std::uint64_t seed = 0;
    std::optional<MatrixKind> frozen; // set on compass slice models
    std::vector<double> epoch_loss;   // mean loss per training example, per epoch

    std::size_t size() const { return vocab.size(); }

    void rebuild_index() {
        index_.clear();
        index_.reserve(vocab.size());
        for (std::size_t i = 0; i < vocab.size(); ++i)
            index_.emplace(vocab[i], i);
    }

    std::optional<std::size_t> index_of(std::string_view word) const {
        auto it = index_.find(std::string(word));
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    bool contains(std::string_view word) const { return index_of(word).has_value(); }

    std::size_t require(std::string_view word) const {
        if (auto i = index_of(word))
            return *i;
        throw OutOfVocabulary(std::string(word));
    }

    std::uint64_t count(std::string_view word) const {
        auto i = index_of(word);
        return i ? counts[*i] : 0;
    }

    const Matrix<float>& matrix(MatrixKind k) const { return k == MatrixKind::target ? target : context; }
    Matrix<float>& matrix(MatrixKind k) { return k == MatrixKind::target ? target : context; }

    // The matrix that carries slice-specific information: the non-frozen
    // one for compass slice models, the target matrix otherwise.
    MatrixKind usage_matrix() const { return frozen ? other(*frozen) : MatrixKind::target; }

    std::span<const float> vector(std::string_view word, MatrixKind k) const { return matrix(k).row(require(word)); }
    std::span<const float> vector(std::string_view word) const { return vector(word, usage_matrix()); }

private:
    std::unordered_map<std::string, std::size_t> index_;
};

inline std::uint64_t hash_matrix(const Matrix<float>& m) {
    return fnv1a(std::string_view(reinterpret_cast<const char*>(m.data()), m.values().size() * sizeof(float)));
}

// ---------------------------------------------------------------------------
// Gradient kernels. Templated on the scalar so tests can check them in
// double precision against finite differences.

namespace kernel {

template <typename T>
T sigmoid(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

// -log(sigmoid(x)), computed without overflow.
template <typename T>
T neg_log_sigmoid(T x) {
    return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

// Loss of one negative-sampling example: output row rows[0] is the
// positive, the others are negatives. Adds the ascent direction for h
// (minus the loss gradient) into grad_h and, when update_out is set,
// moves each output row by lr times its own ascent direction. Output rows
// are read before they are written, so for distinct rows grad_h is the
// exact gradient at the starting point.
template <typename T>
T negative_sampling(std::span<const T> h, std::span<T> grad_h, Matrix<T>& out, std::span<const std::uint32_t> rows,
                    T lr, bool update_out) {
    const std::size_t dim = h.size();
    T loss = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        T* u = out.row(rows[k]).data();
        T f = 0;
        for (std::size_t d = 0; d < dim; ++d)
            f += h[d] * u[d];
        const T label = k == 0 ? T(1) : T(0);
        loss += k == 0 ? neg_log_sigmoid(f) : neg_log_sigmoid(-f);
        const T g = label - sigmoid(f);
        for (std::size_t d = 0; d < dim; ++d)
            grad_h[d] += g * u[d];
        if (update_out)
            for (std::size_t d = 0; d < dim; ++d)
                u[d] += lr * g * h[d];
    }
    return loss;
}

struct Scratch {
    std::vector<double> hd, gd;
    std::vector<float> hf, gf;
    std::vector<std::uint32_t> rows;

    template <typename T>
    std::pair<std::span<T>, std::span<T>> buffers(std::size_t dim) {
        if constexpr (std::is_same_v<T, float>) {
            hf.assign(dim, 0.f);
            gf.assign(dim, 0.f);
            return {hf, gf};
        } else {
            hd.assign(dim, 0.0);
            gd.assign(dim, 0.0);
            return {hd, gd};
        }
    }
};

// Skip-gram: the center word's target row predicts one context word.
template <typename T>
T skipgram_step(Matrix<T>& target, Matrix<T>& context, std::uint32_t center, std::uint32_t context_word,
                std::span<const std::uint32_t> negatives, T lr, bool update_target, bool update_context,
                Scratch& scratch) {
    const std::size_t dim = target.cols();
    auto [h, grad] = scratch.buffers<T>(dim);
    std::copy_n(target.row(center).data(), dim, h.data());
    scratch.rows.assign(1, context_word);
    scratch.rows.insert(scratch.rows.end(), negatives.begin(), negatives.end());
    const T loss = negative_sampling<T>(h, grad, context, scratch.rows, lr, update_context);
    if (update_target) {
        T* row = target.row(center).data();
        for (std::size_t d = 0; d < dim; ++d)
            row[d] += lr * grad[d];
    }
    return loss;
}

// CBOW: the mean of the context words' target rows predicts the center.
template <typename T>
T cbow_step(Matrix<T>& target, Matrix<T>& context, std::span<const std::uint32_t> context_words, std::uint32_t center,
            std::span<const std::uint32_t> negatives, T lr, bool update_target, bool update_context, Scratch& scratch) {
    const std::size_t dim = target.cols();
    auto [h, grad] = scratch.buffers<T>(dim);
    const T inv = T(1) / static_cast<T>(context_words.size());
    for (auto c : context_words) {
        const T* row = target.row(c).data();
        for (std::size_t d = 0; d < dim; ++d)
            h[d] += row[d] * inv;
    }
    scratch.rows.assign(1, center);
    scratch.rows.insert(scratch.rows.end(), negatives.begin(), negatives.end());
    const T loss = negative_sampling<T>(h, grad, context, scratch.rows, lr, update_context);
    if (update_target)
        for (auto c : context_words) {
            T* row = target.row(c).data();
            for (std::size_t d = 0; d < dim; ++d)
                row[d] += lr * grad[d] * inv;
        }
    return loss;
}

} // namespace kernel

// Draws negatives from the unigram distribution raised to the 3/4 power.
class UnigramSampler {
public:
    explicit UnigramSampler(std::span<const std::uint64_t> counts, double power = 0.75) {
        cumulative_.reserve(counts.size());
        double total = 0;
        for (auto c : counts) {
            total += std::pow(static_cast<double>(c), power);
            cumulative_.push_back(total);
        }
        for (auto& v : cumulative_)
            v /= total;
    }

    std::uint32_t operator()(CounterRng& rng) const {
        const double u = rng.uniform();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end())
            --it;
        return static_cast<std::uint32_t>(it - cumulative_.begin());
    }

    double probability(std::size_t i) const { return cumulative_[i] - (i ? cumulative_[i - 1] : 0.0); }

private:
    std::vector<double> cumulative_;
};

namespace detail {

using Sentences = std::vector<std::vector<std::uint32_t>>;

inline constexpr std::size_t max_sentence_length = 1000;

inline bool skip_token(std::string_view tok, const TrainConfig& cfg) {
    return tok == cfg.sentence_break || (!cfg.keep_stopword_token && tok == "@sw");
}

// Tokens mapped to vocabulary ids and cut into sentences. Unknown words
// are dropped before windowing.
inline Sentences encode(std::span<const std::string> tokens, const EmbeddingModel& model, const TrainConfig& cfg,
                        std::size_t& total_words) {
    Sentences out(1);
    for (const auto& tok : tokens) {
        if (tok == cfg.sentence_break) {
            if (!out.back().empty())
                out.emplace_back();
            continue;
        }
        if (skip_token(tok, cfg))
            continue;
        if (auto id = model.index_of(tok)) {
            if (out.back().size() == max_sentence_length)
                out.emplace_back();
            out.back().push_back(static_cast<std::uint32_t>(*id));
            ++total_words;
        }
    }
    if (out.back().empty())
        out.pop_back();
    return out;
}

struct Trainer {
    EmbeddingModel& model;
    const Sentences& sentences;
    const TrainConfig& cfg;
    bool update_target;
    bool update_context;
    std::size_t total_words;
    std::uint64_t stream_base;

    void run() {
        const UnigramSampler sampler(model.counts);
        std::vector<double> keep(model.size(), 1.0);
        if (cfg.sample > 0) {
            double total = 0;
            for (auto c : model.counts)
                total += static_cast<double>(c);
            const double threshold = cfg.sample * total;
            for (std::size_t i = 0; i < model.size(); ++i) {
                const double c = static_cast<double>(model.counts[i]);
                keep[i] = std::min(1.0, (std::sqrt(c / threshold) + 1.0) * threshold / c);
            }
        }
        const double planned = static_cast<double>(total_words) * static_cast<double>(cfg.epochs) + 1.0;
        std::atomic<std::uint64_t> processed{0};
        const std::size_t workers = cfg.deterministic ? 1 : cfg.workers;
        model.epoch_loss.clear();
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            std::vector<double> loss(workers, 0.0);
            std::vector<std::uint64_t> examples(workers, 0);
            const auto work = [&](std::size_t w) {
                CounterRng rng(cfg.seed, stream_base + epoch * 1024 + w);
                kernel::Scratch scratch;
                std::vector<std::uint32_t> kept, ctx, negs;
                std::uint64_t local = 0;
                float lr = static_cast<float>(cfg.learning_rate);
                for (std::size_t s = w; s < sentences.size(); s += workers) {
                    kept.clear();
                    for (auto id : sentences[s])
                        if (keep[id] >= 1.0 || rng.uniform() < keep[id])
                            kept.push_back(id);
                    for (std::size_t pos = 0; pos < kept.size(); ++pos) {
                        if (++local % 1024 == 0) {
                            const double done = static_cast<double>(processed.fetch_add(1024) + 1024);
                            lr = static_cast<float>(cfg.learning_rate *
                                                    std::max(1.0 - done / planned, cfg.min_learning_rate_ratio));
                        }
                        const std::size_t reach = cfg.window - rng.below(cfg.window);
                        const std::size_t lo = pos >= reach ? pos - reach : 0;
                        const std::size_t hi = std::min(kept.size(), pos + reach + 1);
                        ctx.clear();
                        for (std::size_t j = lo; j < hi; ++j)
                            if (j != pos)
                                ctx.push_back(kept[j]);
                        if (ctx.empty())
                            continue;
                        const auto draw = [&](std::uint32_t positive) {
                            negs.clear();
                            for (std::size_t k = 0; k < cfg.negative; ++k) {
                                const auto n = sampler(rng);
                                if (n != positive)
                                    negs.push_back(n);
                            }
                        };
                        if (cfg.architecture == Architecture::cbow) {
                            draw(kept[pos]);
                            loss[w] += kernel::cbow_step<float>(model.target, model.context, ctx, kept[pos], negs, lr,
                                                                update_target, update_context, scratch);
                            ++examples[w];
                        } else {
                            for (auto c : ctx) {
                                draw(c);
                                loss[w] += kernel::skipgram_step<float>(model.target, model.context, kept[pos], c,
                                                                        negs, lr, update_target, update_context,
                                                                        scratch);
                                ++examples[w];
                            }
                        }
                    }
                }
                processed.fetch_add(local % 1024);
            };
            if (workers == 1) {
                work(0);
            } else {
                // Hogwild: workers update shared rows without locks; lost
                // writes are possible and results are only statistically
                // reproducible.
                std::vector<std::thread> pool;
                for (std::size_t w = 0; w < workers; ++w)
                    pool.emplace_back(work, w);
                for (auto& t : pool)
                    t.join();
            }
            double l = 0;
            std::uint64_t n = 0;
            for (std::size_t w = 0; w < workers; ++w) {
                l += loss[w];
                n += examples[w];
            }
            model.epoch_loss.push_back(n ? l / static_cast<double>(n) : 0.0);
        }
    }
};

inline void init_target(Matrix<float>& m, std::uint64_t seed) {
    CounterRng rng(seed, 0xfeed);
    const float scale = 1.0f / static_cast<float>(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (auto& v : m.row(i))
            v = (static_cast<float>(rng.uniform()) - 0.5f) * scale;
}

// Vocabulary sorted by descending count, then by word.
inline void build_vocab(EmbeddingModel& m, const std::map<std::string, std::uint64_t>& counts, std::uint64_t min_count) {
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (const auto& [w, c] : counts)
        if (c >= min_count && c > 0)
            kept.emplace_back(w, c);
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    m.vocab.clear();
    m.counts.clear();
    for (auto& [w, c] : kept) {
        m.vocab.push_back(w);
        m.counts.push_back(c);
    }
    m.rebuild_index();
}

inline std::map<std::string, std::uint64_t> count_tokens(std::span<const std::string> tokens, const TrainConfig& cfg) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& t : tokens)
        if (!skip_token(t, cfg))
            ++counts[t];
    return counts;
}

} // namespace detail

// Trains one model on a token sequence.
inline EmbeddingModel train(std::span<const std::string> tokens, const TrainConfig& cfg, std::string slice_id = {}) {
    cfg.validate();
    EmbeddingModel m;
    m.dim = cfg.dim;
    m.seed = cfg.seed;
    m.slice_id = std::move(slice_id);
    detail::build_vocab(m, detail::count_tokens(tokens, cfg), cfg.min_count);
    if (m.vocab.empty())
        throw TrainingError("empty effective vocabulary (min count " + std::to_string(cfg.min_count) + ")");
    std::size_t total = 0;
    const auto sentences = detail::encode(tokens, m, cfg, total);
    if (total < cfg.window + 1)
        throw TrainingError("corpus smaller than one window: " + std::to_string(total) + " usable tokens");
    m.target = Matrix<float>(m.size(), cfg.dim);
    m.context = Matrix<float>(m.size(), cfg.dim);
    detail::init_target(m.target, cfg.seed);
    detail::Trainer{m, sentences, cfg, true, true, total, 0}.run();
    return m;
}

inline EmbeddingModel train(const std::vector<std::string>& tokens, const TrainConfig& cfg, std::string slice_id = {}) {
    return train(std::span<const std::string>(tokens), cfg, std::move(slice_id));
}

struct SliceTokens {
    std::string id;
    std::span<const std::string> tokens;
};

struct CompassModels {
    EmbeddingModel compass;
    std::vector<EmbeddingModel> slices; // same order as the input

    const EmbeddingModel& at(std::string_view id) const {
        for (const auto& m : slices)
            if (m.slice_id == id)
                return m;
        throw InputError("no slice model '" + std::string(id) + "'");
    }
};

// Phase 1 trains the compass on all slices; phase 2 trains each slice
// starting from the compass with cfg.compass_frozen copied and never
// updated. A slice model's vocabulary is the compass vocabulary restricted
// to words that occur in that slice, with slice counts.
inline CompassModels train_compass(std::span<const SliceTokens> slices, const TrainConfig& cfg) {
    cfg.validate();
    if (slices.size() < 2)
        throw TrainingError("compass training needs at least two slices");
    for (const auto& s : slices)
        if (s.tokens.empty())
            throw TrainingError("slice '" + s.id + "' has no tokens");

    std::vector<std::string> all;
    for (const auto& s : slices) {
        all.insert(all.end(), s.tokens.begin(), s.tokens.end());
        all.push_back(cfg.sentence_break);
    }
    CompassModels out;
    out.compass = train(all, cfg, "compass");
    const auto& compass = out.compass;
    const MatrixKind frozen = cfg.compass_frozen;
    const MatrixKind free = other(frozen);

    std::vector<std::map<std::string, std::uint64_t>> slice_counts;
    for (const auto& s : slices)
        slice_counts.push_back(detail::count_tokens(s.tokens, cfg));
    bool any_shared = false;
    for (const auto& w : compass.vocab) {
        bool everywhere = true;
        for (const auto& c : slice_counts)
            everywhere = everywhere && c.count(w);
        if (everywhere) {
            any_shared = true;
            break;
        }
    }
    if (!any_shared)
        throw TrainingError("slices share no vocabulary");

    for (std::size_t si = 0; si < slices.size(); ++si) {
        EmbeddingModel m;
        m.dim = cfg.dim;
        m.seed = cfg.seed;
        m.slice_id = slices[si].id;
        m.frozen = frozen;
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < compass.size(); ++i) {
            auto it = slice_counts[si].find(compass.vocab[i]);
            if (it == slice_counts[si].end())
                continue;
            m.vocab.push_back(compass.vocab[i]);
            m.counts.push_back(it->second);
            rows.push_back(i);
        }
        m.rebuild_index();
        m.target = Matrix<float>(m.size(), cfg.dim);
        m.context = Matrix<float>(m.size(), cfg.dim);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            std::copy_n(compass.target.row(rows[r]).data(), cfg.dim, m.target.row(r).data());
            std::copy_n(compass.context.row(rows[r]).data(), cfg.dim, m.context.row(r).data());
        }
        std::size_t total = 0;
        const auto sentences = detail::encode(slices[si].tokens, m, cfg, total);
        if (total < cfg.window + 1)
            throw TrainingError("slice '" + m.slice_id + "' is smaller than one window");
        detail::Trainer{m, sentences, cfg, free == MatrixKind::target, free == MatrixKind::context, total,
                        (si + 1) * 0x100000}
            .run();
        out.slices.push_back(std::move(m));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Similarity queries

template <typename T, typename U>
double cosine_similarity(std::span<const T> u, std::span<const U> v) {
    if (u.size() != v.size())
        throw InputError("cosine: dimension mismatch");
    const double nu = norm(u), nv = norm(v);
    if (nu == 0 || nv == 0)
        throw InputError("cosine: zero vector");
    return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

inline double cosine_similarity(const std::vector<double>& u, const std::vector<double>& v) {
    return cosine_similarity(std::span<const double>(u), std::span<const double>(v));
}

struct Neighbor {
    std::string word;
    double cosine;
};

// Top-k words by cosine to `word` (excluded), ties in vocabulary order.
// With `restrict`, both the query and the candidates must belong to it.
// Zero rows are never returned.
inline std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model, std::string_view word, std::size_t k,
                                               const std::unordered_set<std::string>* restrict = nullptr,
                                               std::optional<MatrixKind> which = std::nullopt) {
    if (k < 1)
        throw InputError("nearest_neighbors: k must be >= 1");
    const std::size_t q = model.require(word);
    if (restrict && !restrict->count(std::string(word)))
        throw FilteredOut(std::string(word));
    const auto& m = model.matrix(which.value_or(model.usage_matrix()));
    const auto qv = m.row(q);
    const double qn = norm(qv);
    if (qn == 0)
        throw InputError("nearest_neighbors: zero vector for '" + std::string(word) + "'");
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(model.size());
    for (std::size_t i = 0; i < model.size(); ++i) {
        if (i == q || (restrict && !restrict->count(model.vocab[i])))
            continue;
        const auto r = m.row(i);
        const double rn = norm(r);
        if (rn == 0)
            continue;
        scored.emplace_back(dot(qv, r) / (qn * rn), i);
    }
    const std::size_t take = std::min(k, scored.size());
    const auto cmp = [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), cmp);
    std::vector<Neighbor> out;
    for (std::size_t i = 0; i < take; ++i)
        out.push_back({model.vocab[scored[i].second], std::clamp(scored[i].first, -1.0, 1.0)});
    return out;
}

// ---------------------------------------------------------------------------
// Model files
//
// Binary layout, all integers and floats little-endian:
//   "GPEM"  u32 version(=1)  u32 dim  u64 vocab_size
//   per word: u32 byte_length, UTF-8 bytes, u64 count, dim f32 target, dim f32 context
//   optional trailer: "META" u32 length, slice id bytes, u64 seed, u8 frozen (0 none, 1 target, 2 context)

namespace detail {

template <typename T>
void put_le(std::ostream& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(U); ++i)
        out.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::istream& in) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    unsigned char buf[sizeof(U)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(U)))
        throw InputError("model file truncated");
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
        bits |= static_cast<U>(buf[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

} // namespace detail

inline constexpr std::uint32_t model_format_version = 1;

inline void save_model(std::ostream& out, const EmbeddingModel& m) {
    out.write("GPEM", 4);
    detail::put_le<std::uint32_t>(out, model_format_version);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim));
    detail::put_le<std::uint64_t>(out, m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.vocab[i].size()));
        out.write(m.vocab[i].data(), static_cast<std::streamsize>(m.vocab[i].size()));
        detail::put_le<std::uint64_t>(out, m.counts[i]);
        for (float v : m.target.row(i))
            detail::put_le<float>(out, v);
        for (float v : m.context.row(i))
            detail::put_le<float>(out, v);
    }
    out.write("META", 4);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.slice_id.size()));
    out.write(m.slice_id.data(), static_cast<std::streamsize>(m.slice_id.size()));
    detail::put_le<std::uint64_t>(out, m.seed);
    detail::put_le<std::uint8_t>(out, m.frozen ? (*m.frozen == MatrixKind::target ? 1 : 2) : 0);
}

inline void save_model(const std::filesystem::path& path, const EmbeddingModel& m) {
    auto out = open_output(path);
    save_model(out, m);
}

inline EmbeddingModel load_model(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "GPEM", 4) != 0)
        throw InputError("not a GPEM model file");
    const auto version = detail::get_le<std::uint32_t>(in);
    if (version != model_format_version)
        throw InputError("unsupported model format version " + std::to_string(version));
    EmbeddingModel m;
    m.dim = detail::get_le<std::uint32_t>(in);
    const auto n = detail::get_le<std::uint64_t>(in);
    if (m.dim == 0)
        throw InputError("model dimension is zero");
    m.target = Matrix<float>(n, m.dim);
    m.context = Matrix<float>(n, m.dim);
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto len = detail::get_le<std::uint32_t>(in);
        std::string w(len, '\0');
        if (!in.read(w.data(), len))
            throw InputError("model file truncated");
        m.vocab.push_back(std::move(w));
        m.counts.push_back(detail::get_le<std::uint64_t>(in));
        for (auto& v : m.target.row(i))
            v = detail::get_le<float>(in);
        for (auto& v : m.context.row(i))
            v = detail::get_le<float>(in);
    }
    char tag[4];
    if (in.read(tag, 4) && std::memcmp(tag, "META", 4) == 0) {
        const auto len = detail::get_le<std::uint32_t>(in);
        m.slice_id.assign(len, '\0');
        if (!in.read(m.slice_id.data(), len))
            throw InputError("model file truncated");
        m.seed = detail::get_le<std::uint64_t>(in);
        const auto f = detail::get_le<std::uint8_t>(in);
        if (f == 1)
            m.frozen = MatrixKind::target;
        else if (f == 2)
            m.frozen = MatrixKind::context;
    }
    m.rebuild_index();
    return m;
}

inline EmbeddingModel load_model(const std::filesystem::path& path) {
    auto in = open_input(path);
    return load_model(in);
}

// word2vec-style text export: "size dim" header, then "word v1 v2 ...".
inline void export_text(std::ostream& out, const EmbeddingModel& m, std::optional<MatrixKind> which = std::nullopt) {
    const auto& mat = m.matrix(which.value_or(m.usage_matrix()));
    out << m.size() << ' ' << m.dim << '\n';
    char buf[32];
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << m.vocab[i];
        for (float v : mat.row(i)) {
            std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(v));
            out << buf;
        }
        out << '\n';
    }
}

} // namespace parlshift::embed
