#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "parlshift/detect.hpp"
#include "support.hpp"

using namespace parlshift;
using namespace parlshift::detect;

namespace {

EmbeddingModel make_model(const std::vector<std::string>& vocab, const std::vector<std::vector<double>>& rows,
                          std::vector<std::uint64_t> counts = {}, std::string id = "s") {
    EmbeddingModel m;
    m.vocab = vocab;
    m.counts = counts.empty() ? std::vector<std::uint64_t>(vocab.size(), 100) : std::move(counts);
    m.dim = rows.at(0).size();
    m.slice_id = std::move(id);
    m.rebuild_index();
    m.target = Matrix<float>(vocab.size(), m.dim);
    m.context = Matrix<float>(vocab.size(), m.dim);
    for (std::size_t i = 0; i < vocab.size(); ++i)
        for (std::size_t j = 0; j < m.dim; ++j)
            m.target(i, j) = static_cast<float>(rows[i][j]);
    return m;
}

EmbeddingModel random_model(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
    std::vector<std::string> vocab;
    for (std::size_t i = 0; i < n; ++i)
        vocab.push_back("w" + std::to_string(i));
    std::normal_distribution<double> g;
    std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
    for (auto& r : rows)
        for (auto& v : r)
            v = g(rng);
    return make_model(vocab, rows);
}

EmbeddingModel rotated(const EmbeddingModel& m, const Matrix<double>& q) {
    auto out = m;
    align::detail::rotate_rows(out.target, q);
    return out;
}

std::vector<double> row(const EmbeddingModel& m, const std::string& w) {
    const auto r = m.vector(w);
    return {r.begin(), r.end()};
}

double plain_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return ab / std::sqrt(aa * bb);
}

// Brute-force top-k over the model's whole vocabulary.
std::vector<std::string> brute_top_k(const EmbeddingModel& m, const std::string& w, std::size_t k) {
    std::vector<std::pair<double, std::string>> s;
    for (const auto& v : m.vocab)
        if (v != w)
            s.emplace_back(-plain_cosine(row(m, w), row(m, v)), v);
    std::sort(s.begin(), s.end());
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i)
        out.push_back(s[i].second);
    return out;
}

double oracle_second_order(const EmbeddingModel& a, const EmbeddingModel& b, const std::string& w, std::size_t k) {
    std::set<std::string> uni;
    for (const auto& n : brute_top_k(a, w, k))
        uni.insert(n);
    for (const auto& n : brute_top_k(b, w, k))
        uni.insert(n);
    std::vector<double> pa, pb;
    for (const auto& n : uni) {
        pa.push_back(plain_cosine(row(a, w), row(a, n)));
        pb.push_back(plain_cosine(row(b, w), row(b, n)));
    }
    return 1.0 - plain_cosine(pa, pb);
}

} // namespace

TEST(Methods, NamesRoundTrip) {
    for (auto m : all_methods)
        EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_THROW(parse_method("cosine"), InputError);
}

TEST(Cutoffs, TopAndMinimumFrequency) {
    std::vector<std::string> vocab;
    std::vector<std::uint64_t> counts;
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 300; ++i) {
        vocab.push_back("w" + std::to_string(i));
        counts.push_back(static_cast<std::uint64_t>(300 - i));
        rows.push_back({1.0});
    }
    const auto m = make_model(vocab, rows, counts);
    const auto kept = apply_frequency_cutoffs(m, 200, 0);
    EXPECT_EQ(kept.size(), 100u);
    EXPECT_FALSE(kept.count("w199"));
    EXPECT_TRUE(kept.count("w200"));
    EXPECT_EQ(apply_frequency_cutoffs(m, 200, 50).size(), 51u); // counts 100 down to 50
    EXPECT_EQ(apply_frequency_cutoffs(m, 0, 0).size(), 300u);
    EXPECT_THROW(apply_frequency_cutoffs(m, 300, 0), InputError);
}

TEST(Procrustes, AntipodalVectorsScoreTwo) {
    const auto a = make_model({"x", "y"}, {{1, 2}, {0, 1}});
    const auto b = make_model({"x", "y"}, {{-1, -2}, {0, 1}});
    EXPECT_NEAR(score_procrustes(a, b, "x"), 2.0, 1e-12);
    EXPECT_NEAR(score_procrustes(a, b, "y"), 0.0, 1e-12);
    EXPECT_THROW(score_procrustes(a, b, "z"), OutOfVocabulary);
}

TEST(Procrustes, ScoreSurvivesArbitraryRotationOfSource) {
    std::mt19937_64 rng(1);
    const auto a = random_model(60, 5, rng), b = random_model(60, 5, rng);
    const auto q = support::random_orthogonal(5, rng);
    const auto plain = align::align_models(a, b).model;
    const auto spun = align::align_models(rotated(a, q), b).model;
    for (const auto& w : a.vocab)
        EXPECT_NEAR(score_procrustes(plain, b, w), score_procrustes(spun, b, w), 1e-5) << w;
}

TEST(Compass, FilterAndErrors) {
    const auto a = make_model({"x", "y"}, {{1, 0}, {0, 1}});
    const auto b = make_model({"x", "y"}, {{0, 1}, {0, 1}});
    EXPECT_NEAR(score_compass(a, b, "x"), 1.0, 1e-12);
    const WordSet only_y = {"y"};
    EXPECT_THROW(score_compass(a, b, "x", &only_y), FilteredOut);
    EXPECT_NEAR(score_compass(a, b, "y", &only_y), 0.0, 1e-12);
    EXPECT_THROW(score_compass(a, b, "q"), OutOfVocabulary);
}

// q = e0; word i = s_i e0 + e_i. A larger s_i means a closer neighbor.
// Model a favors words 1..10, model b favors 8..17: three in common.
TEST(NearestNeighbors, ThreeOfTenSharedScoresPointSeven) {
    const std::size_t n = 20, dim = n + 1;
    std::vector<std::string> vocab = {"q"};
    std::vector<std::vector<double>> ra, rb;
    ra.push_back(std::vector<double>(dim, 0.0));
    ra[0][0] = 1;
    rb.push_back(ra[0]);
    for (std::size_t i = 1; i <= n; ++i) {
        vocab.push_back("n" + std::to_string(i));
        std::vector<double> v(dim, 0.0);
        v[i] = 1;
        auto va = v, vb = v;
        va[0] = i <= 10 ? 10.0 + static_cast<double>(i) : 0.1 * static_cast<double>(i);
        vb[0] = (i >= 8 && i <= 17) ? 10.0 + static_cast<double>(i) : 0.1 * static_cast<double>(i);
        ra.push_back(va);
        rb.push_back(vb);
    }
    const auto a = make_model(vocab, ra), b = make_model(vocab, rb);
    const WordSet all(vocab.begin(), vocab.end());
    EXPECT_NEAR(score_nn(a, b, "q", 10, all), 0.7, 1e-12);
    EXPECT_NEAR(score_nn(a, a, "q", 10, all), 0.0, 1e-12);
    EXPECT_THROW(score_nn(a, b, "q", 25, all), InputError);
    const WordSet without_q = {"n1", "n2"};
    EXPECT_THROW(score_nn(a, b, "q", 1, without_q), FilteredOut);
}

TEST(NearestNeighbors, InvariantUnderRotation) {
    std::mt19937_64 rng(2);
    const auto a = random_model(40, 6, rng), b = random_model(40, 6, rng);
    const auto qa = support::random_orthogonal(6, rng), qb = support::random_orthogonal(6, rng);
    const WordSet all(a.vocab.begin(), a.vocab.end());
    for (const auto& w : a.vocab) {
        EXPECT_NEAR(score_nn(a, b, w, 5, all), score_nn(rotated(a, qa), rotated(b, qb), w, 5, all), 1e-12);
        EXPECT_NEAR(score_second_order(a, b, w, 5), score_second_order(rotated(a, qa), rotated(b, qb), w, 5), 1e-5);
    }
}

TEST(SecondOrder, MatchesBruteForce) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_model(15, 4, rng), b = random_model(15, 4, rng);
        for (const auto& w : a.vocab)
            for (std::size_t k : {1u, 3u, 6u})
                EXPECT_NEAR(score_second_order(a, b, w, k), oracle_second_order(a, b, w, k), 1e-9) << w << " k=" << k;
    }
}

TEST(SecondOrder, HandComputed) {
    // q's neighbors: a -> {u}, b -> {v}; union {u, v}.
    const auto a = make_model({"q", "u", "v"}, {{1, 0}, {1, 0.1}, {0, 1}});
    const auto b = make_model({"q", "u", "v"}, {{1, 0}, {0, 1}, {1, 0.1}});
    // profiles over (u, v): a = (c, 0), b = (0, c) with c = 1/sqrt(1.01)
    EXPECT_NEAR(score_second_order(a, b, "q", 1), 1.0, 1e-7);
    // u moves from (0, 1) to (1, 0.2) in b: profiles (c, 0) and (c', c'')
    auto b2 = make_model({"q", "u", "v"}, {{1, 0}, {1, 0.2}, {1, 0.1}});
    const double c = 1 / std::sqrt(1.01), cu = 1 / std::sqrt(1.04);
    const double expected = 1 - (c * cu + 0 * c) / (std::sqrt(c * c) * std::sqrt(cu * cu + c * c));
    EXPECT_NEAR(score_second_order(a, b2, "q", 1), expected, 1e-6);
}

TEST(Ranking, IdenticalModelsScoreZeroEverywhere) {
    std::mt19937_64 rng(4);
    const auto a = random_model(30, 5, rng);
    for (auto m : all_methods) {
        ChangeConfig cfg;
        cfg.method = m;
        cfg.neighbor_k = 5;
        cfg.top_freq_cut = 0;
        cfg.min_freq_cut = 0;
        cfg.candidate_min_occurrences = 0;
        const auto r = rank_changed_words(a, a, cfg);
        ASSERT_EQ(r.entries.size(), 30u) << to_string(m);
        for (const auto& e : r.entries)
            EXPECT_NEAR(e.score, 0.0, 1e-6) << to_string(m) << " " << e.word;
    }
}

TEST(Ranking, TiesKeepVocabularyOrder) {
    const auto a = make_model({"d", "c", "b", "a"}, {{1, 0}, {1, 0}, {1, 0}, {0, 1}});
    const auto b = make_model({"a", "b", "c", "d"}, {{1, 0}, {0, 1}, {0, 1}, {0, 1}});
    ChangeConfig cfg;
    cfg.method = Method::compass;
    cfg.candidate_min_occurrences = 0;
    const auto r = rank_changed_words(a, b, cfg);
    EXPECT_EQ(r.order(), (std::vector<std::string>{"d", "c", "b", "a"}));
    EXPECT_EQ(r.rank_of("b"), std::optional<std::size_t>(2));
    EXPECT_FALSE(r.rank_of("zz"));
}

TEST(Ranking, CandidateMinimumOccurrences) {
    const auto a = make_model({"x", "y", "z"}, {{1, 0}, {0, 1}, {1, 1}}, {60, 10, 10});
    const auto b = make_model({"x", "y", "z"}, {{1, 0}, {0, 1}, {1, 1}}, {5, 70, 5});
    ChangeConfig cfg;
    cfg.method = Method::procrustes;
    cfg.candidate_min_occurrences = 50;
    const auto r = rank_changed_words(a, b, cfg);
    EXPECT_EQ(r.order().size(), 2u);
    EXPECT_FALSE(r.rank_of("z"));
    cfg.candidate_min_occurrences = 100;
    EXPECT_THROW(rank_changed_words(a, b, cfg), InputError);
}

TEST(Ranking, NeighborCountCappedAtAvailableWords) {
    std::mt19937_64 rng(5);
    const auto a = random_model(12, 3, rng), b = random_model(12, 3, rng);
    ChangeConfig cfg;
    cfg.method = Method::nn;
    cfg.top_freq_cut = 0;
    cfg.min_freq_cut = 0;
    cfg.neighbor_k = 1000;
    const auto r = rank_changed_words(a, b, cfg);
    for (const auto& e : r.entries)
        EXPECT_NEAR(e.score, 0.0, 1e-12); // k = 11 covers every other word
}

TEST(Output, RankingCsv) {
    const auto a = make_model({"x", "y"}, {{1, 0}, {0, 1}}, {3, 4}, "t1");
    const auto b = make_model({"x", "y"}, {{0, 1}, {0, 1}}, {5, 6}, "t2");
    ChangeConfig cfg;
    cfg.candidate_min_occurrences = 0;
    const auto r = rank_changed_words(a, b, cfg);
    std::ostringstream out;
    write_ranking(out, r);
    EXPECT_EQ(out.str(), "rank,word,score,count_a,count_b\n1,x,1,3,5\n2,y,0,4,6\n");
    std::ostringstream sim;
    write_ranking(sim, r, true);
    EXPECT_EQ(sim.str(), "rank,word,similarity,count_a,count_b\n1,x,0,3,5\n2,y,1,4,6\n");
}
