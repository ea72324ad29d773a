#pragma once

// Evaluation harness: seeded-restart stability measured by
// intersection@k, percentile bootstrap intervals, similarity tracking of
// topic words and party tags across consecutive slices, a planted-shift
// corpus generator and plot-series emission.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "parlshift/corpus.hpp"
#include "parlshift/csv.hpp"
#include "parlshift/detect.hpp"
#include "parlshift/embed.hpp"
#include "parlshift/error.hpp"
#include "parlshift/random.hpp"

namespace parlshift::eval {

using nlohmann::json;

class RunFailed : public Error {
public:
    RunFailed(std::uint64_t seed, const std::string& what)
        : Error("run with seed " + std::to_string(seed) + " failed: " + what), seed_(seed) {}
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

// |top_k(a) ∩ top_k(b)| / k.
inline double intersection_at_k(const std::vector<std::string>& a, const std::vector<std::string>& b, std::size_t k) {
    if (k == 0)
        throw InputError("intersection@k: k must be >= 1");
    if (a.size() < k || b.size() < k)
        throw InputError("intersection@k: list shorter than k=" + std::to_string(k));
    std::unordered_set<std::string_view> top(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k));
    std::size_t shared = 0;
    for (std::size_t i = 0; i < k; ++i)
        shared += top.count(b[i]);
    return static_cast<double>(shared) / static_cast<double>(k);
}

struct Interval {
    double low = 0;
    double high = 0;
};

namespace detail {

// Linear interpolation between order statistics.
inline double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double mean(const std::vector<double>& v) {
    double s = 0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

} // namespace detail

// Percentile bootstrap interval of the mean.
inline Interval bootstrap_ci(const std::vector<double>& samples, double level = 0.95, std::size_t resamples = 10000,
                             std::uint64_t seed = 1) {
    if (samples.size() < 2)
        throw InputError("bootstrap: need at least two samples");
    if (!(level > 0 && level < 1))
        throw InputError("bootstrap: level must be in (0, 1)");
    if (resamples < 1)
        throw InputError("bootstrap: resamples must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
    std::vector<double> means(resamples);
    for (auto& m : means) {
        double s = 0;
        for (std::size_t i = 0; i < samples.size(); ++i)
            s += samples[pick(rng)];
        m = s / static_cast<double>(samples.size());
    }
    std::sort(means.begin(), means.end());
    const double tail = (1 - level) / 2;
    return {detail::quantile(means, tail), detail::quantile(means, 1 - tail)};
}

// ---------------------------------------------------------------------------
// Stability

inline const std::vector<std::size_t>& default_k_list() {
    static const std::vector<std::size_t> ks{10, 20, 50, 100, 200, 500, 1000};
    return ks;
}

struct StabilityConfig {
    std::string method = "compass";
    std::size_t n_runs = 10;
    std::vector<std::size_t> k_list = default_k_list();
    std::uint64_t base_seed = 1;
    std::size_t bootstrap_resamples = 10000;
    double level = 0.95;

    void validate() const {
        if (n_runs < 2)
            throw InputError("stability: n_runs must be >= 2");
        if (k_list.empty())
            throw InputError("stability: empty k list");
        for (std::size_t i = 0; i < k_list.size(); ++i)
            if (k_list[i] == 0 || (i && k_list[i] <= k_list[i - 1]))
                throw InputError("stability: k list must be positive and strictly ascending");
    }
};

struct StabilityRow {
    std::size_t k = 0;
    std::size_t pairs = 0;
    double mean = 0;
    double ci_low = 0;
    double ci_high = 0;
};

struct StabilityReport {
    std::string method;
    std::vector<StabilityRow> rows;
    std::vector<std::size_t> skipped_k; // larger than the shortest ranking
    std::vector<std::uint64_t> seeds;
    std::vector<std::vector<std::string>> top_lists; // per run, truncated to max k
};

// A scorer maps a seed to a ranked word list (most changed first).
using RankingScorer = std::function<std::vector<std::string>(std::uint64_t seed)>;

inline StabilityReport run_stability(const RankingScorer& scorer, const StabilityConfig& cfg) {
    cfg.validate();
    StabilityReport rep;
    rep.method = cfg.method;
    std::vector<std::vector<std::string>> lists;
    for (std::size_t i = 0; i < cfg.n_runs; ++i) {
        const std::uint64_t seed = cfg.base_seed + i;
        try {
            lists.push_back(scorer(seed));
        } catch (const std::exception& e) {
            throw RunFailed(seed, e.what());
        }
        rep.seeds.push_back(seed);
    }
    std::size_t shortest = lists.front().size();
    for (const auto& l : lists)
        shortest = std::min(shortest, l.size());

    for (std::size_t k : cfg.k_list) {
        if (k > shortest) {
            rep.skipped_k.push_back(k);
            continue;
        }
        std::vector<double> values;
        for (std::size_t i = 0; i < lists.size(); ++i)
            for (std::size_t j = i + 1; j < lists.size(); ++j)
                values.push_back(intersection_at_k(lists[i], lists[j], k));
        StabilityRow row;
        row.k = k;
        row.pairs = values.size();
        row.mean = detail::mean(values);
        const auto ci = bootstrap_ci(values, cfg.level, cfg.bootstrap_resamples, cfg.base_seed);
        row.ci_low = std::min(ci.low, row.mean);
        row.ci_high = std::max(ci.high, row.mean);
        rep.rows.push_back(row);
    }
    const std::size_t keep = std::min(shortest, cfg.k_list.back());
    for (auto& l : lists) {
        l.resize(std::min(l.size(), keep));
        rep.top_lists.push_back(std::move(l));
    }
    return rep;
}

// Retrains the method's models for every seed on the given slice pair.
inline StabilityReport run_stability(const embed::SliceTokens& a, const embed::SliceTokens& b,
                                     const detect::ChangeConfig& change, const embed::TrainConfig& train,
                                     StabilityConfig cfg) {
    cfg.method = std::string(detect::to_string(change.method));
    return run_stability(
        [&](std::uint64_t seed) {
            auto tc = train;
            tc.seed = seed;
            return detect::detect_change(a, b, change, tc).ranking.order();
        },
        cfg);
}

// ---------------------------------------------------------------------------
// Similarity tracking over consecutive slice pairs

struct TrackConfig {
    std::size_t n_seeds = 50;
    std::uint64_t base_seed = 1;
    std::size_t bootstrap_resamples = 10000;
    double level = 0.95;
    std::size_t neighbors = 10;
};

struct TrackCell {
    std::string word;
    std::string slice_a, slice_b;
    bool present = false;
    std::vector<double> similarities; // one per seed
    double mean = 0;
    double ci_low = 0;
    double ci_high = 0;
};

struct NeighborReport {
    std::string word;
    std::string slice_a, slice_b;
    std::vector<std::string> neighbors_a, neighbors_b;
};

struct TrackReport {
    std::string kind; // "topic" or "party"
    std::vector<std::string> words;
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<TrackCell> cells; // word-major, pair-minor
    std::vector<NeighborReport> minimum_neighbors;

    const TrackCell& cell(std::string_view word, std::size_t pair) const {
        for (const auto& c : cells)
            if (c.word == word && c.slice_a == pairs.at(pair).first && c.slice_b == pairs.at(pair).second)
                return c;
        throw InputError("no tracking cell for '" + std::string(word) + "'");
    }
};

// Compass-trains every consecutive pair n_seeds times (seeds base+i) and
// records the cosine similarity of each word's slice vectors. Words absent
// from a pair are reported as not present; a word absent from every pair
// is an error. With `with_neighbors`, the pair of minimum mean similarity
// gets a nearest-neighbor report built from the base-seed models.
inline TrackReport track_similarity(const std::vector<std::string>& words, std::span<const embed::SliceTokens> slices,
                                    const embed::TrainConfig& train, const TrackConfig& cfg, std::string kind = "topic",
                                    bool with_neighbors = false) {
    if (slices.size() < 2)
        throw InputError("tracking needs at least two slices");
    if (cfg.n_seeds < 2)
        throw InputError("tracking needs at least two seeds");
    if (words.empty())
        throw InputError("tracking needs at least one word");
    TrackReport rep;
    rep.kind = std::move(kind);
    rep.words = words;
    for (std::size_t p = 0; p + 1 < slices.size(); ++p)
        rep.pairs.emplace_back(slices[p].id, slices[p + 1].id);

    for (const auto& w : words)
        for (const auto& [a, b] : rep.pairs)
            rep.cells.push_back({w, a, b, false, {}, 0, 0, 0});
    const auto cell_at = [&](std::size_t wi, std::size_t p) -> TrackCell& { return rep.cells[wi * rep.pairs.size() + p]; };

    std::vector<embed::CompassModels> first_models;
    for (std::size_t p = 0; p < rep.pairs.size(); ++p) {
        const embed::SliceTokens pair[] = {slices[p], slices[p + 1]};
        for (std::size_t s = 0; s < cfg.n_seeds; ++s) {
            auto tc = train;
            tc.seed = cfg.base_seed + s;
            embed::CompassModels models;
            try {
                models = embed::train_compass(pair, tc);
            } catch (const std::exception& e) {
                throw RunFailed(tc.seed, e.what());
            }
            const auto& ma = models.slices[0];
            const auto& mb = models.slices[1];
            for (std::size_t wi = 0; wi < words.size(); ++wi) {
                if (!ma.contains(words[wi]) || !mb.contains(words[wi]))
                    continue;
                auto& c = cell_at(wi, p);
                c.present = true;
                c.similarities.push_back(embed::cosine_similarity(ma.vector(words[wi]), mb.vector(words[wi])));
            }
            if (with_neighbors && s == 0)
                first_models.push_back(std::move(models));
        }
    }

    std::vector<std::string> missing;
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
        bool anywhere = false;
        for (std::size_t p = 0; p < rep.pairs.size(); ++p) {
            auto& c = cell_at(wi, p);
            if (!c.present)
                continue;
            anywhere = true;
            c.mean = detail::mean(c.similarities);
            const auto ci = bootstrap_ci(c.similarities, cfg.level, cfg.bootstrap_resamples, cfg.base_seed);
            c.ci_low = std::min(ci.low, c.mean);
            c.ci_high = std::max(ci.high, c.mean);
        }
        if (!anywhere)
            missing.push_back(words[wi]);
    }
    if (!missing.empty())
        throw InputError("absent from every slice pair: " + text::join(missing, ", "));

    if (with_neighbors) {
        for (std::size_t wi = 0; wi < words.size(); ++wi) {
            std::optional<std::size_t> worst;
            for (std::size_t p = 0; p < rep.pairs.size(); ++p)
                if (cell_at(wi, p).present && (!worst || cell_at(wi, p).mean < cell_at(wi, *worst).mean))
                    worst = p;
            const auto& models = first_models[*worst];
            NeighborReport nr{words[wi], rep.pairs[*worst].first, rep.pairs[*worst].second, {}, {}};
            for (const auto& n : embed::nearest_neighbors(models.slices[0], words[wi], cfg.neighbors))
                nr.neighbors_a.push_back(n.word);
            for (const auto& n : embed::nearest_neighbors(models.slices[1], words[wi], cfg.neighbors))
                nr.neighbors_b.push_back(n.word);
            rep.minimum_neighbors.push_back(std::move(nr));
        }
    }
    return rep;
}

inline TrackReport track_topics(const std::vector<std::string>& topics, std::span<const embed::SliceTokens> slices,
                                const embed::TrainConfig& train, const TrackConfig& cfg) {
    return track_similarity(topics, slices, train, cfg, "topic", false);
}

// Party tags are "@"-prefixed tokens produced by party tagging.
inline TrackReport party_drift(const std::vector<std::string>& tags, std::span<const embed::SliceTokens> slices,
                               const embed::TrainConfig& train, const TrackConfig& cfg) {
    for (const auto& t : tags)
        if (t.size() < 2 || t.front() != '@')
            throw InputError("party tag '" + t + "' must start with '@'");
    return track_similarity(tags, slices, train, cfg, "party", true);
}

// ---------------------------------------------------------------------------
// Planted-shift synthetic corpora

struct PlantedShiftConfig {
    std::size_t vocab_size = 200;
    std::size_t clusters = 10;
    std::size_t n_shifted = 5;
    std::size_t slices = 2;
    std::size_t shift_at = 1; // planted words move cluster from this slice on
    std::size_t tokens_per_slice = 60000;
    std::size_t sentence_length = 12;
    double topic_purity = 0.9;
    double zipf_exponent = 0.6;
    std::uint64_t seed = 1;
};

struct PlantedShiftCorpus {
    std::vector<std::string> vocab;
    std::vector<std::string> shifted;
    std::vector<std::string> stable_probe; // never shifted, mid frequency
    std::vector<std::vector<std::string>> slices; // sentences separated by "."
    std::vector<std::string> slice_ids;

    std::vector<embed::SliceTokens> slice_tokens() const {
        std::vector<embed::SliceTokens> out;
        for (std::size_t i = 0; i < slices.size(); ++i)
            out.push_back({slice_ids[i], slices[i]});
        return out;
    }
};

// Words w000.. are spread round-robin over topic clusters. A sentence picks
// one cluster and draws most words from it with Zipf-like weights, the
// rest uniformly. Each planted word belongs to a different cluster in
// slices >= shift_at, so its contexts change while every other word keeps
// the same distribution. Planted words sit in the middle frequency band.
inline PlantedShiftCorpus make_planted_shift_corpus(const PlantedShiftConfig& cfg) {
    if (cfg.clusters < 2 || cfg.vocab_size < cfg.clusters * 2 || cfg.n_shifted * 2 > cfg.vocab_size)
        throw InputError("planted shift: vocabulary too small for the requested clusters and shifts");
    if (cfg.slices < 2 || cfg.shift_at == 0 || cfg.shift_at >= cfg.slices)
        throw InputError("planted shift: shift_at must point at a slice after the first");
    PlantedShiftCorpus out;
    char buf[16];
    for (std::size_t i = 0; i < cfg.vocab_size; ++i) {
        std::snprintf(buf, sizeof buf, "w%03zu", i);
        out.vocab.emplace_back(buf);
    }
    std::vector<double> weight(cfg.vocab_size);
    for (std::size_t i = 0; i < cfg.vocab_size; ++i)
        weight[i] = 1.0 / std::pow(static_cast<double>(i / cfg.clusters + 1), cfg.zipf_exponent);

    const std::size_t band = cfg.vocab_size / 2 - cfg.vocab_size / 2 % cfg.clusters;
    std::vector<std::size_t> planted;
    for (std::size_t j = 0; j < cfg.n_shifted; ++j)
        planted.push_back(band + j * (cfg.clusters + 1) % (cfg.vocab_size - band));
    for (auto p : planted)
        out.shifted.push_back(out.vocab[p]);
    for (std::size_t i = band; i < cfg.vocab_size && out.stable_probe.size() < 3; ++i)
        if (std::find(planted.begin(), planted.end(), i) == planted.end())
            out.stable_probe.push_back(out.vocab[i]);

    CounterRng rng(cfg.seed, 0x5117);
    for (std::size_t s = 0; s < cfg.slices; ++s) {
        std::vector<std::vector<std::size_t>> members(cfg.clusters);
        for (std::size_t i = 0; i < cfg.vocab_size; ++i) {
            std::size_t c = i % cfg.clusters;
            if (s >= cfg.shift_at && std::find(planted.begin(), planted.end(), i) != planted.end())
                c = (c + cfg.clusters / 2) % cfg.clusters;
            members[c].push_back(i);
        }
        std::vector<std::discrete_distribution<std::size_t>> within;
        for (const auto& m : members) {
            std::vector<double> w;
            for (auto i : m)
                w.push_back(weight[i]);
            within.emplace_back(w.begin(), w.end());
        }
        std::discrete_distribution<std::size_t> global(weight.begin(), weight.end());

        std::vector<std::string> tokens;
        tokens.reserve(cfg.tokens_per_slice + cfg.tokens_per_slice / cfg.sentence_length + 2);
        std::size_t words = 0;
        while (words < cfg.tokens_per_slice) {
            const std::size_t c = rng.below(cfg.clusters);
            for (std::size_t k = 0; k < cfg.sentence_length; ++k, ++words) {
                const std::size_t w = rng.uniform() < cfg.topic_purity ? members[c][within[c](rng)] : global(rng);
                tokens.push_back(out.vocab[w]);
            }
            tokens.emplace_back(".");
        }
        out.slices.push_back(std::move(tokens));
        out.slice_ids.push_back("t" + std::to_string(s + 1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline void write_stability_csv(std::ostream& out, const std::vector<StabilityReport>& reports) {
    csv::write_row(out, {"method", "k", "pairs", "mean", "ci_low", "ci_high"});
    for (const auto& r : reports)
        for (const auto& row : r.rows)
            csv::write_row(out, {r.method, std::to_string(row.k), std::to_string(row.pairs), fmt(row.mean),
                                 fmt(row.ci_low), fmt(row.ci_high)});
}

inline json to_json(const StabilityReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"k", row.k}, {"pairs", row.pairs}, {"mean", row.mean}, {"ci_low", row.ci_low},
                        {"ci_high", row.ci_high}});
    return {{"method", r.method}, {"rows", rows}, {"skipped_k", r.skipped_k}, {"seeds", r.seeds},
            {"top_lists", r.top_lists}};
}

inline json stability_json(const std::vector<StabilityReport>& reports) {
    json methods = json::array();
    for (const auto& r : reports)
        methods.push_back(to_json(r));
    return {{"kind", "stability"}, {"methods", methods}};
}

inline void write_track_csv(std::ostream& out, const TrackReport& r) {
    csv::write_row(out, {"word", "slice_a", "slice_b", "present", "seeds", "mean", "ci_low", "ci_high"});
    for (const auto& c : r.cells)
        csv::write_row(out, {c.word, c.slice_a, c.slice_b, c.present ? "1" : "0", std::to_string(c.similarities.size()),
                             c.present ? fmt(c.mean) : "", c.present ? fmt(c.ci_low) : "",
                             c.present ? fmt(c.ci_high) : ""});
}

inline json to_json(const TrackReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells) {
        json j{{"word", c.word}, {"slice_a", c.slice_a}, {"slice_b", c.slice_b}, {"present", c.present}};
        if (c.present) {
            j["mean"] = c.mean;
            j["ci_low"] = c.ci_low;
            j["ci_high"] = c.ci_high;
            j["similarities"] = c.similarities;
        }
        cells.push_back(std::move(j));
    }
    json nbrs = json::array();
    for (const auto& n : r.minimum_neighbors)
        nbrs.push_back({{"word", n.word}, {"slice_a", n.slice_a}, {"slice_b", n.slice_b},
                        {"neighbors_a", n.neighbors_a}, {"neighbors_b", n.neighbors_b}});
    json pairs = json::array();
    for (const auto& [a, b] : r.pairs)
        pairs.push_back({a, b});
    return {{"kind", r.kind}, {"words", r.words}, {"pairs", pairs}, {"cells", cells}, {"minimum_neighbors", nbrs}};
}

inline json gender_json(const std::map<std::pair<std::string, std::string>, GenderCell>& cells) {
    json rows = json::array();
    for (const auto& [key, c] : cells)
        rows.push_back({{"party", key.first}, {"period", key.second}, {"members_known", c.members_known},
                        {"female_members", c.female_members}, {"member_pct", c.member_pct},
                        {"speech_char_pct", c.speech_char_pct}});
    return {{"kind", "gender"}, {"rows", rows}};
}

struct OverlapRow {
    std::string slice_a, slice_b;
    std::size_t vocab_a = 0, vocab_b = 0, shared = 0;
};

inline json vocab_overlap_json(const std::vector<OverlapRow>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"slice_a", r.slice_a}, {"slice_b", r.slice_b}, {"vocab_a", r.vocab_a}, {"vocab_b", r.vocab_b},
                       {"shared", r.shared}});
    return {{"kind", "vocab_overlap"}, {"rows", out}};
}

// ---------------------------------------------------------------------------
// Plot data
//
// Every series file has the columns x, y, ci_low, ci_high. Series without
// an interval repeat y in both interval columns.

enum class PlotKind { stability, topic, party, gender, vocab_overlap };

inline std::string_view to_string(PlotKind k) {
    switch (k) {
    case PlotKind::stability: return "stability";
    case PlotKind::topic: return "topic";
    case PlotKind::party: return "party";
    case PlotKind::gender: return "gender";
    default: return "vocab_overlap";
    }
}

inline PlotKind parse_plot_kind(std::string_view s) {
    for (auto k : {PlotKind::stability, PlotKind::topic, PlotKind::party, PlotKind::gender, PlotKind::vocab_overlap})
        if (to_string(k) == s)
            return k;
    throw InputError("unknown plot kind '" + std::string(s) + "'");
}

struct PlotPoint {
    std::string x;
    double y = 0, ci_low = 0, ci_high = 0;
};

struct PlotSeries {
    std::string name;
    std::vector<PlotPoint> points;
};

inline std::vector<PlotSeries> emit_plot_data(const json& report, PlotKind kind) {
    const std::string have = report.value("kind", "");
    if (have != to_string(kind))
        throw InputError("report of kind '" + have + "' cannot be plotted as '" + std::string(to_string(kind)) + "'");
    std::vector<PlotSeries> out;
    switch (kind) {
    case PlotKind::stability:
        for (const auto& m : report.at("methods")) {
            PlotSeries s{m.at("method").get<std::string>(), {}};
            for (const auto& r : m.at("rows"))
                s.points.push_back({std::to_string(r.at("k").get<std::size_t>()), r.at("mean"), r.at("ci_low"),
                                    r.at("ci_high")});
            out.push_back(std::move(s));
        }
        break;
    case PlotKind::topic:
    case PlotKind::party: {
        std::map<std::string, std::size_t> index;
        for (const auto& c : report.at("cells")) {
            if (!c.at("present").get<bool>())
                continue;
            const auto word = c.at("word").get<std::string>();
            auto [it, fresh] = index.emplace(word, out.size());
            if (fresh)
                out.push_back({word, {}});
            out[it->second].points.push_back(
                {c.at("slice_a").get<std::string>() + "-" + c.at("slice_b").get<std::string>(), c.at("mean"),
                 c.at("ci_low"), c.at("ci_high")});
        }
        break;
    }
    case PlotKind::gender: {
        std::map<std::string, std::pair<PlotSeries, PlotSeries>> parties;
        std::vector<std::string> order;
        for (const auto& r : report.at("rows")) {
            const auto party = r.at("party").get<std::string>();
            if (!parties.count(party)) {
                order.push_back(party);
                parties[party] = {{party + "_member_pct", {}}, {party + "_speech_char_pct", {}}};
            }
            const auto period = r.at("period").get<std::string>();
            const double m = r.at("member_pct"), c = r.at("speech_char_pct");
            parties[party].first.points.push_back({period, m, m, m});
            parties[party].second.points.push_back({period, c, c, c});
        }
        for (const auto& p : order) {
            out.push_back(parties[p].first);
            out.push_back(parties[p].second);
        }
        break;
    }
    case PlotKind::vocab_overlap: {
        PlotSeries s{"shared_vocabulary", {}};
        for (const auto& r : report.at("rows")) {
            const double v = r.at("shared").get<double>();
            s.points.push_back({r.at("slice_a").get<std::string>() + "-" + r.at("slice_b").get<std::string>(), v, v, v});
        }
        out.push_back(std::move(s));
        break;
    }
    }
    return out;
}

inline void write_series(std::ostream& out, const PlotSeries& s) {
    csv::write_row(out, {"x", "y", "ci_low", "ci_high"});
    for (const auto& p : s.points)
        csv::write_row(out, {p.x, fmt(p.y), fmt(p.ci_low), fmt(p.ci_high)});
}

// Minimal line chart: one polyline per series, shaded interval band,
// categorical x axis.
inline void write_svg(std::ostream& out, const std::vector<PlotSeries>& series, const std::string& title) {
    constexpr double w = 640, h = 400, left = 60, right = 160, top = 40, bottom = 50;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    std::vector<std::string> xs;
    double lo = 0, hi = 0;
    bool first = true;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            if (std::find(xs.begin(), xs.end(), p.x) == xs.end())
                xs.push_back(p.x);
            lo = first ? p.ci_low : std::min(lo, p.ci_low);
            hi = first ? p.ci_high : std::max(hi, p.ci_high);
            first = false;
        }
    if (hi <= lo)
        hi = lo + 1;
    const auto px = [&](const std::string& x) {
        const auto i = static_cast<double>(std::find(xs.begin(), xs.end(), x) - xs.begin());
        return left + (xs.size() > 1 ? i / static_cast<double>(xs.size() - 1) : 0.5) * (w - left - right);
    };
    const auto py = [&](double y) { return top + (1 - (y - lo) / (hi - lo)) * (h - top - bottom); };
    const auto esc = [](const std::string& s) {
        std::string r;
        for (char c : s)
            r += c == '<' ? "&lt;" : c == '>' ? "&gt;" : c == '&' ? "&amp;" : std::string(1, c);
        return r;
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">" << esc(title) << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double y = lo + (hi - lo) * t / 4;
        out << "<text x=\"" << left - 6 << "\" y=\"" << py(y) + 4 << "\" font-size=\"10\" text-anchor=\"end\">"
            << fmt(y).substr(0, 5) << "</text>\n";
    }
    for (const auto& x : xs)
        out << "<text x=\"" << px(x) << "\" y=\"" << h - bottom + 16 << "\" font-size=\"10\" text-anchor=\"middle\">"
            << esc(x) << "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* col = colors[i % std::size(colors)];
        std::string band, line;
        for (const auto& p : s.points)
            band += std::to_string(px(p.x)) + "," + std::to_string(py(p.ci_high)) + " ";
        for (auto it = s.points.rbegin(); it != s.points.rend(); ++it)
            band += std::to_string(px(it->x)) + "," + std::to_string(py(it->ci_low)) + " ";
        for (const auto& p : s.points)
            line += std::to_string(px(p.x)) + "," + std::to_string(py(p.y)) + " ";
        out << "<polygon points=\"" << band << "\" fill=\"" << col << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
        out << "<polyline points=\"" << line << "\" fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << w - right + 10 << "\" y=\"" << top + 16 * static_cast<double>(i) << "\" font-size=\"11\" fill=\""
            << col << "\">" << esc(s.name) << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace parlshift::eval
