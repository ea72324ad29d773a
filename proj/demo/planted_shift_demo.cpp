// Builds a two-slice synthetic corpus with five words whose topical company
// changes, runs every change detector on it and prints each top-10 with the
// planted words starred.
//
//   planted_shift_demo [seed]

#include <chrono>
#include <cstdio>
#include <set>
#include <string>

#include "parlshift/parlshift.hpp"

using namespace parlshift;

int main(int argc, char** argv) {
    const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 1;

    eval::PlantedShiftConfig pc;
    pc.seed = seed;
    const auto corpus = eval::make_planted_shift_corpus(pc);
    const auto slices = corpus.slice_tokens();
    const std::set<std::string> planted(corpus.shifted.begin(), corpus.shifted.end());

    std::printf("vocabulary %zu words, %zu tokens per slice, planted:", corpus.vocab.size(), slices[0].tokens.size());
    for (const auto& w : corpus.shifted)
        std::printf(" %s", w.c_str());
    std::printf("\n\n");

    for (auto method : detect::all_methods) {
        embed::TrainConfig tc;
        tc.dim = 50;
        tc.epochs = 5;
        tc.seed = seed;
        tc.deterministic = true;
        tc.architecture = detect::uses_compass(method) ? embed::Architecture::cbow : embed::Architecture::skipgram;
        detect::ChangeConfig cc;
        cc.method = method;
        cc.top_freq_cut = 10;
        cc.min_freq_cut = 20;
        cc.neighbor_k = 20;
        cc.candidate_min_occurrences = 20;

        const auto t0 = std::chrono::steady_clock::now();
        const auto run = detect::detect_change(slices[0], slices[1], cc, tc);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        std::size_t hits = 0;
        std::printf("%-15s", std::string(detect::to_string(method)).c_str());
        for (std::size_t i = 0; i < 10 && i < run.ranking.entries.size(); ++i) {
            const auto& e = run.ranking.entries[i];
            const bool star = planted.count(e.word) > 0;
            hits += star;
            std::printf(" %s%s", e.word.c_str(), star ? "*" : "");
        }
        std::printf("   [%zu/5, %.1f s]\n", hits, secs);
    }
    return 0;
}
