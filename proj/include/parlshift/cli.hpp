#pragma once

// Command-line front end. Every subcommand writes its artifacts plus a
// manifest.json into --output. Exit status: 0 success, 1 usage or input
// problem, 2 anything unexpected.

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "parlshift/align.hpp"
#include "parlshift/corpus.hpp"
#include "parlshift/detect.hpp"
#include "parlshift/embed.hpp"
#include "parlshift/eval.hpp"
#include "parlshift/io.hpp"
#include "parlshift/parser.hpp"
#include "parlshift/preprocess.hpp"
#include "parlshift/resolve.hpp"

#ifndef PARLSHIFT_DATA
#define PARLSHIFT_DATA "data"
#endif

namespace parlshift::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr std::string_view tool_version = "0.1.0";

inline std::string shipped(const std::string& name) { return (fs::path(PARLSHIFT_DATA) / name).string(); }

// ---------------------------------------------------------------------------
// Plumbing

struct Common {
    std::string input;
    std::string output;
    std::string config;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    bool deterministic = false;
};

// Flat key=value file; '#' starts a comment line. Keys are long option
// names, with or without the leading dashes.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& path) {
    std::vector<std::pair<std::string, std::string>> out;
    auto in = open_input(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(path.string(), n, "expected key=value");
        auto key = std::string(text::trim(t.substr(0, eq)));
        while (!key.empty() && key.front() == '-')
            key.erase(key.begin());
        if (key.empty())
            throw ParseError(path.string(), n, "empty key");
        out.emplace_back(std::move(key), std::string(text::trim(t.substr(eq + 1))));
    }
    return out;
}

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// FNV-1a over file bytes; directories hash their regular files in path order.
inline std::string hash_path(const fs::path& p) {
    if (fs::is_directory(p)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(p))
            if (e.is_regular_file())
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        std::uint64_t h = fnv1a("");
        for (const auto& f : files) {
            h = fnv1a(fs::relative(f, p).generic_string(), h);
            h = fnv1a(read_file(f), h);
        }
        return hex64(h);
    }
    return hex64(fnv1a(read_file(p)));
}

class Session {
public:
    Session(std::string command, std::vector<std::string> argv, const Common& common)
        : command_(std::move(command)), argv_(std::move(argv)), common_(common), started_(utc_now()) {}

    json config = json::object();

    void input(const std::string& path) {
        if (path.empty() || path == "none" || inputs_.contains(path))
            return;
        if (!fs::exists(path))
            throw InputError("input not found: " + path);
        inputs_[path] = hash_path(path);
    }

    fs::path out_dir() const {
        if (common_.output.empty())
            throw InputError(command_ + ": --output is required");
        fs::create_directories(common_.output);
        return common_.output;
    }

    void write_manifest() const {
        json m{{"command", command_},
               {"argv", argv_},
               {"config", config},
               {"inputs", inputs_},
               {"seed", common_.seed},
               {"workers", common_.workers},
               {"deterministic", common_.deterministic},
               {"version", tool_version},
               {"started_at", started_},
               {"finished_at", utc_now()}};
        auto out = open_output(out_dir() / "manifest.json");
        out << m.dump(2) << '\n';
    }

private:
    std::string command_;
    std::vector<std::string> argv_;
    const Common& common_;
    std::string started_;
    json inputs_ = json::object();
};

inline std::string file_stem(const std::string& id) {
    std::string out;
    for (unsigned char c : id)
        out += (c >= 0x80 || std::isalnum(c) || c == '-' || c == '_' || c == '@' || c == '.') ? static_cast<char>(c) : '_';
    return out.empty() ? "_" : out;
}

inline void write_json(const fs::path& path, const json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

inline std::string require_input(const Common& c, const std::string& command) {
    if (c.input.empty())
        throw InputError(command + ": --input is required");
    return c.input;
}

inline std::vector<SpeechRecord> load_records(const std::string& path, Session& s, std::ostream& err) {
    s.input(path);
    auto res = load_speeches(fs::path(path));
    for (const auto& e : res.errors)
        err << "warning: " << path << ":" << e.line << ": " << e.message << '\n';
    if (!res.errors.empty())
        err << "warning: " << res.errors.size() << " malformed rows skipped\n";
    return std::move(res.records);
}

// Explicit slicing file, or one slice per parliamentary period ordered
// numerically where possible.
inline std::vector<TimeSlice> load_slicing(const std::string& path, const std::vector<SpeechRecord>& records,
                                           Session& s) {
    if (!path.empty()) {
        s.input(path);
        auto in = open_input(path);
        auto sl = parse_slicing(in, path);
        validate_slicing(sl);
        return sl;
    }
    std::vector<std::string> periods;
    for (const auto& r : records)
        if (!r.parliamentary_period.empty() &&
            std::find(periods.begin(), periods.end(), r.parliamentary_period) == periods.end())
            periods.push_back(r.parliamentary_period);
    const auto numeric = [](const std::string& p) {
        return !p.empty() && std::all_of(p.begin(), p.end(), [](unsigned char c) { return std::isdigit(c); });
    };
    std::stable_sort(periods.begin(), periods.end(), [&](const auto& a, const auto& b) {
        if (numeric(a) && numeric(b))
            return std::stoull(a) < std::stoull(b);
        return numeric(a) && !numeric(b);
    });
    std::vector<TimeSlice> out;
    for (const auto& p : periods)
        out.push_back({p, {p}, {}});
    if (out.empty())
        throw InputError("no parliamentary periods in the speech table; pass --slicing");
    return out;
}

inline std::size_t slice_index(const SlicedCorpus& sc, const std::string& id) {
    for (std::size_t i = 0; i < sc.slices.size(); ++i)
        if (sc.slices[i].id == id)
            return i;
    throw InputError("unknown slice '" + id + "'");
}

inline std::pair<std::string, std::string> parse_pair(const std::string& arg) {
    const auto colon = arg.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == arg.size())
        throw InputError("--pair must look like A:B, got '" + arg + "'");
    return {arg.substr(0, colon), arg.substr(colon + 1)};
}

// ---------------------------------------------------------------------------
// Shared option groups

struct TrainOptions {
    embed::TrainConfig cfg;
    std::string architecture = "auto";
    std::string frozen = "target";
    bool drop_stopword_token = false;

    void add(CLI::App& app) {
        app.add_option("--dim", cfg.dim, "Embedding dimension");
        app.add_option("--window", cfg.window, "Context window radius");
        app.add_option("--negative", cfg.negative, "Negative samples per example");
        app.add_option("--epochs", cfg.epochs, "Training epochs");
        app.add_option("--learning-rate", cfg.learning_rate, "Initial learning rate");
        app.add_option("--min-count", cfg.min_count, "Minimum word count");
        app.add_option("--sample", cfg.sample, "Subsampling threshold (0 disables)");
        app.add_option("--architecture", architecture, "skipgram, cbow or auto (cbow for compass)")
            ->check(CLI::IsMember({"auto", "skipgram", "cbow"}));
        app.add_option("--frozen", frozen, "Compass matrix kept frozen: target or context")
            ->check(CLI::IsMember({"target", "context"}));
        app.add_flag("--drop-stopword-token", drop_stopword_token, "Leave @sw tokens out of training");
    }

    embed::TrainConfig resolve(const Common& c, bool compass) const {
        auto t = cfg;
        t.seed = c.seed;
        t.workers = c.workers;
        t.deterministic = c.deterministic;
        t.architecture = architecture == "cbow" || (architecture == "auto" && compass) ? embed::Architecture::cbow
                                                                                      : embed::Architecture::skipgram;
        t.compass_frozen = frozen == "context" ? embed::MatrixKind::context : embed::MatrixKind::target;
        t.keep_stopword_token = !drop_stopword_token;
        t.validate();
        return t;
    }
};

struct ChangeOptions {
    detect::ChangeConfig cfg;

    void add(CLI::App& app) {
        app.add_option("--neighbor-k", cfg.neighbor_k, "Neighbors for nn and second_order");
        app.add_option("--top-freq-cut", cfg.top_freq_cut, "Most frequent words removed for cut-off methods");
        app.add_option("--min-freq-cut", cfg.min_freq_cut, "Minimum count for cut-off methods");
        app.add_option("--candidate-min-occurrences", cfg.candidate_min_occurrences,
                       "Minimum count in one slice for other methods");
    }
};

// ---------------------------------------------------------------------------
// ingest

struct IngestOptions {
    std::string index, registry, members, government_members, governments, extra_posts;
    std::string name_cases = shipped("name_cases.csv");
    std::string nicknames = shipped("nicknames.csv");
    std::string patterns;
    double threshold = 0.95;

    void add(CLI::App& app) {
        app.add_option("--index", index, "Sitting index CSV (file,date,period,session,sitting); default <input>/index.csv");
        app.add_option("--registry", registry, "Merged member registry CSV");
        app.add_option("--members", members, "Members table (used when --registry is absent)");
        app.add_option("--government-members", government_members, "Government members table, inflected names");
        app.add_option("--governments", governments, "Governments table (name,start,end)");
        app.add_option("--extra-posts", extra_posts, "Additional posts table");
        app.add_option("--name-cases", name_cases, "Genitive to nominative table");
        app.add_option("--nicknames", nicknames, "Nickname table, or 'none'");
        app.add_option("--patterns", patterns, "Speaker pattern file; default built-in");
        app.add_option("--threshold", threshold, "Name similarity threshold");
    }
};

inline void run_ingest(const Common& c, const IngestOptions& o, Session& s, std::ostream& out, std::ostream& err) {
    const fs::path dir = require_input(c, "ingest");
    if (!fs::is_directory(dir))
        throw InputError("ingest: --input must be a directory of sitting files");
    const fs::path index_path = o.index.empty() ? dir / "index.csv" : fs::path(o.index);
    s.input(dir.string());
    s.input(index_path.string());
    const auto outdir = s.out_dir();

    std::vector<resolve::MemberEntry> registry;
    if (!o.registry.empty()) {
        s.input(o.registry);
        registry = resolve::read_registry(fs::path(o.registry));
    } else if (!o.members.empty()) {
        resolve::SupportDatasets d;
        s.input(o.members);
        d.members = resolve::read_interval_rows(fs::path(o.members));
        if (!o.government_members.empty()) {
            s.input(o.government_members);
            d.government_members = resolve::read_interval_rows(fs::path(o.government_members));
        }
        if (!o.governments.empty()) {
            s.input(o.governments);
            d.governments = resolve::read_governments(fs::path(o.governments));
        }
        if (!o.extra_posts.empty()) {
            s.input(o.extra_posts);
            d.extra_posts = resolve::read_interval_rows(fs::path(o.extra_posts));
        }
        resolve::NameCaseTable cases;
        if (o.name_cases != "none") {
            s.input(o.name_cases);
            cases = resolve::NameCaseTable::read(fs::path(o.name_cases));
        }
        auto merged = resolve::merge_support_datasets(d, &cases);
        for (const auto& m : merged.conflicts)
            err << "warning: " << m << '\n';
        auto reg_out = open_output(outdir / "registry.csv");
        resolve::write_registry(reg_out, merged.registry);
        registry = std::move(merged.registry);
    } else {
        throw InputError("ingest: pass --registry or --members");
    }

    resolve::NicknameTable nick;
    if (o.nicknames != "none") {
        s.input(o.nicknames);
        nick = resolve::NicknameTable::read(fs::path(o.nicknames));
    }
    parser::PatternSet patterns;
    if (!o.patterns.empty()) {
        s.input(o.patterns);
        patterns = parser::PatternSet::from_file(o.patterns);
    }
    const resolve::Resolver resolver(std::move(registry), nick, {o.threshold});

    auto index_in = open_input(index_path);
    const auto index = csv::read_table(index_in, ',', index_path.string());
    std::map<std::string, std::size_t> col;
    for (const auto* name : {"file", "date", "period", "session", "sitting"}) {
        const auto i = index.column(name);
        if (i == csv::Table::npos)
            throw ParseError(index_path.string(), 1, std::string("missing column '") + name + "'");
        col[name] = i;
    }

    auto speeches = open_output(outdir / "speeches.csv");
    auto unresolved = open_output(outdir / "unresolved.csv");
    write_speech_header(speeches);
    csv::write_row(unresolved, {"file", "index", "raw_name", "parenthetical"});
    std::size_t n_speeches = 0, n_resolved = 0, n_empty = 0;
    for (const auto& row : index.rows) {
        const auto get = [&](const char* name) {
            const auto i = col[name];
            return i < row.fields.size() ? row.fields[i] : std::string{};
        };
        const auto file = get("file");
        Date date;
        if (!parse_date(get("date"), date))
            throw ParseError(index_path.string(), row.line, "invalid date '" + get("date") + "'");
        parser::RawSitting sitting{file, read_file(dir / file), {}};
        const auto seg = parser::parse_sitting(sitting, patterns);
        for (std::size_t i = 0; i < seg.speeches.size(); ++i) {
            const auto& sp = seg.speeches[i];
            if (sp.empty || sp.trimmed().empty()) {
                ++n_empty;
                continue;
            }
            SpeechRecord r;
            r.sitting_date = date;
            r.parliamentary_period = get("period");
            r.parliamentary_session = get("session");
            r.parliamentary_sitting = get("sitting");
            r.speech = std::string(sp.trimmed());
            if (const auto res = resolve::resolve_speaker(sp.mention, resolver, date)) {
                const auto snap = res.member->at(date);
                r.member_name = res.member->official_name;
                r.member_gender = res.member->gender;
                r.political_party = snap.party;
                r.member_region = snap.region;
                r.roles = snap.roles;
                r.government = snap.government;
                ++n_resolved;
            } else {
                r.member_name = sp.mention.raw_name;
                csv::write_row(unresolved, {file, std::to_string(i), sp.mention.raw_name,
                                            sp.mention.parenthetical.value_or("")});
            }
            write_speech(speeches, r);
            ++n_speeches;
        }
    }
    write_json(outdir / "ingest.json", {{"sittings", index.rows.size()},
                                        {"speeches", n_speeches},
                                        {"resolved", n_resolved},
                                        {"unresolved", n_speeches - n_resolved},
                                        {"empty_skipped", n_empty}});
    out << "ingest: " << n_speeches << " speeches from " << index.rows.size() << " sittings, " << n_resolved
        << " resolved\n";
}

// ---------------------------------------------------------------------------
// stats

struct StatsOptions {
    std::string slicing;
    void add(CLI::App& app) { app.add_option("--slicing", slicing, "Slicing file; default one slice per period"); }
};

inline void run_stats(const Common& c, const StatsOptions& o, Session& s, std::ostream& out, std::ostream& err) {
    const auto records = load_records(require_input(c, "stats"), s, err);
    const auto slicing = load_slicing(o.slicing, records, s);
    const auto outdir = s.out_dir();
    const auto sc = slice_corpus(records, slicing);
    std::vector<std::string> raw(slicing.size());
    std::vector<std::size_t> count(slicing.size(), 0);
    std::string all_raw;
    for (const auto& r : records) {
        all_raw += r.speech;
        all_raw += '\n';
        if (const auto i = assign_slice(r, slicing)) {
            raw[*i] += r.speech;
            raw[*i] += '\n';
            ++count[*i];
        }
    }
    auto table = open_output(outdir / "stats.csv");
    csv::write_row(table, {"slice", "speeches", "characters", "tokens", "unique_tokens", "sentences", "unique_sentences"});
    const auto emit = [&](const std::string& id, std::size_t n, const CorpusStats& st) {
        csv::write_row(table, {id, std::to_string(n), std::to_string(st.characters), std::to_string(st.tokens),
                               std::to_string(st.unique_tokens), std::to_string(st.sentences),
                               std::to_string(st.unique_sentences)});
    };
    std::vector<std::string> all_tokens;
    for (std::size_t i = 0; i < slicing.size(); ++i) {
        emit(slicing[i].id, count[i], corpus_stats(sc.tokens[i], raw[i]));
        all_tokens.insert(all_tokens.end(), sc.tokens[i].begin(), sc.tokens[i].end());
    }
    for (const auto& r : records)
        if (!assign_slice(r, slicing))
            for (auto& t : text::split_words(r.speech))
                all_tokens.push_back(std::move(t));
    emit("all", records.size(), corpus_stats(all_tokens, all_raw));

    write_json(outdir / "gender.json", eval::gender_json(gender_participation(records)));

    const auto words = [](const std::vector<std::string>& toks) {
        std::vector<std::string> out;
        for (const auto& t : toks)
            if (t != ".")
                out.push_back(t);
        return out;
    };
    std::vector<eval::OverlapRow> overlap;
    for (std::size_t i = 0; i + 1 < slicing.size(); ++i) {
        const auto a = words(sc.tokens[i]), b = words(sc.tokens[i + 1]);
        overlap.push_back({slicing[i].id, slicing[i + 1].id, std::set<std::string>(a.begin(), a.end()).size(),
                           std::set<std::string>(b.begin(), b.end()).size(), shared_vocabulary(a, b).size});
    }
    write_json(outdir / "vocab_overlap.json", eval::vocab_overlap_json(overlap));
    if (sc.excluded_records)
        err << "warning: " << sc.excluded_records << " records fall outside every slice\n";
    out << "stats: " << records.size() << " speeches in " << slicing.size() << " slices\n";
}

// ---------------------------------------------------------------------------
// preprocess

struct PreprocessOptions {
    std::string stopwords = shipped("stopwords_el.txt");
    std::string parties = shipped("parties.csv");
    std::size_t min_length = 2;
    bool keep_case = false;
    std::string slicing;
    std::string merge;

    void add(CLI::App& app) {
        app.add_option("--stopwords", stopwords, "Stopword list, or 'none'");
        app.add_option("--parties", parties, "Party pattern table, or 'none'");
        app.add_option("--min-length", min_length, "Shortest kept token, in characters");
        app.add_flag("--keep-case", keep_case, "Do not lowercase");
        app.add_option("--slicing", slicing, "Slicing file to merge periods in");
        app.add_option("--merge", merge, "Period merge list such as 5:7,6:7");
    }
};

inline void run_preprocess(const Common& c, const PreprocessOptions& o, Session& s, std::ostream& out,
                           std::ostream& err) {
    auto records = load_records(require_input(c, "preprocess"), s, err);
    const auto outdir = s.out_dir();
    preprocess::NormalizeOptions norm;
    norm.lowercase = !o.keep_case;
    norm.min_length = o.min_length;
    std::unordered_set<std::string> stop;
    if (o.stopwords != "none") {
        s.input(o.stopwords);
        stop = preprocess::read_stopwords(o.stopwords, norm);
    }
    preprocess::PartyTagTable parties;
    if (o.parties != "none") {
        s.input(o.parties);
        parties = preprocess::PartyTagTable::read(fs::path(o.parties));
    }
    std::vector<SpeechRecord> kept;
    kept.reserve(records.size());
    std::size_t dropped = 0;
    for (auto& r : records) {
        const auto tokens = preprocess::normalize_tokens(preprocess::tag_party_references(r.speech, parties), stop, norm);
        if (tokens.empty()) {
            ++dropped;
            continue;
        }
        r.speech = text::join(tokens, " ");
        kept.push_back(std::move(r));
    }
    {
        auto table = open_output(outdir / "speeches.csv");
        write_speeches(table, kept);
    }
    if (!o.merge.empty() || !o.slicing.empty()) {
        auto slicing = load_slicing(o.slicing, kept, s);
        slicing = preprocess::merge_periods(slicing, preprocess::parse_merge_map(o.merge));
        auto sl = open_output(outdir / "slicing.txt");
        write_slicing(sl, slicing);
    }
    write_json(outdir / "preprocess.json",
               {{"records_in", kept.size() + dropped}, {"records_out", kept.size()}, {"dropped_empty", dropped}});
    out << "preprocess: " << kept.size() << " speeches kept, " << dropped << " left empty\n";
}

// ---------------------------------------------------------------------------
// train

struct TrainCmdOptions {
    TrainOptions train;
    std::string slicing;
    std::vector<std::string> slices;
    std::string mode = "compass";
    bool export_text = false;

    void add(CLI::App& app) {
        train.add(app);
        app.add_option("--slicing", slicing, "Slicing file; default one slice per period");
        app.add_option("--slices", slices, "Slice ids to train (default all)")->delimiter(',');
        app.add_option("--mode", mode, "compass or independent")->check(CLI::IsMember({"compass", "independent"}));
        app.add_flag("--export-text", export_text, "Also write word2vec-style text vectors");
    }
};

inline void run_train(const Common& c, const TrainCmdOptions& o, Session& s, std::ostream& out, std::ostream& err) {
    const auto records = load_records(require_input(c, "train"), s, err);
    const auto slicing = load_slicing(o.slicing, records, s);
    const auto outdir = s.out_dir();
    const auto sc = slice_corpus(records, slicing);
    std::vector<std::string> ids = o.slices;
    if (ids.empty())
        for (const auto& sl : slicing)
            ids.push_back(sl.id);
    const bool compass = o.mode == "compass";
    const auto cfg = o.train.resolve(c, compass);
    std::vector<embed::EmbeddingModel> models;
    if (compass) {
        std::vector<embed::SliceTokens> st;
        for (const auto& id : ids)
            st.push_back({id, sc.tokens[slice_index(sc, id)]});
        auto cm = embed::train_compass(st, cfg);
        models.push_back(std::move(cm.compass));
        for (auto& m : cm.slices)
            models.push_back(std::move(m));
    } else {
        for (const auto& id : ids)
            models.push_back(embed::train(sc.tokens[slice_index(sc, id)], cfg, id));
    }
    json summary = json::array();
    for (const auto& m : models) {
        const auto stem = file_stem(m.slice_id);
        embed::save_model(outdir / (stem + ".gpem"), m);
        if (o.export_text) {
            auto t = open_output(outdir / (stem + ".txt"));
            embed::export_text(t, m);
        }
        summary.push_back({{"slice", m.slice_id},
                           {"file", stem + ".gpem"},
                           {"vocab", m.size()},
                           {"frozen", m.frozen ? std::string(embed::to_string(*m.frozen)) : "none"},
                           {"epoch_loss", m.epoch_loss}});
    }
    write_json(outdir / "training.json", {{"mode", o.mode}, {"models", summary}});
    out << "train: " << models.size() << " models written\n";
}

// ---------------------------------------------------------------------------
// align

struct AlignCmdOptions {
    std::string source, reference, matrix = "target";
    bool center = false;

    void add(CLI::App& app) {
        app.add_option("--source", source, "Model to rotate (defaults to --input)");
        app.add_option("--reference", reference, "Model to rotate onto");
        app.add_option("--matrix", matrix, "target or context")->check(CLI::IsMember({"target", "context"}));
        app.add_flag("--center", center, "Mean-center shared rows before solving");
    }
};

inline void run_align(const Common& c, const AlignCmdOptions& o, Session& s, std::ostream& out, std::ostream&) {
    const auto src = o.source.empty() ? require_input(c, "align") : o.source;
    if (o.reference.empty())
        throw InputError("align: --reference is required");
    s.input(src);
    s.input(o.reference);
    const auto outdir = s.out_dir();
    const auto a = embed::load_model(fs::path(src));
    const auto b = embed::load_model(fs::path(o.reference));
    const auto res = align::align_models(
        a, b, {o.center, o.matrix == "context" ? embed::MatrixKind::context : embed::MatrixKind::target});
    embed::save_model(outdir / "aligned.gpem", res.model);
    write_json(outdir / "alignment.json", {{"shared_words", res.alignment.shared_words.size()},
                                           {"residual", res.alignment.residual},
                                           {"unaligned_residual", res.alignment.unaligned_residual},
                                           {"rank_deficient", res.alignment.rank_deficient},
                                           {"orthogonality_defect", align::orthogonality_defect(res.alignment.rotation)}});
    out << "align: " << res.alignment.shared_words.size() << " shared words, residual " << res.alignment.residual
        << '\n';
}

// ---------------------------------------------------------------------------
// detect

struct DetectOptions {
    TrainOptions train;
    ChangeOptions change;
    std::string method = "compass";
    std::string slicing, pair, model_a, model_b;
    bool similarity = false;
    std::size_t report_limit = 100;
    std::size_t report_neighbors = 10;

    void add(CLI::App& app) {
        train.add(app);
        change.add(app);
        app.add_option("--method", method, "procrustes, compass, compass_cutoff, nn or second_order");
        app.add_option("--slicing", slicing, "Slicing file; default one slice per period");
        app.add_option("--pair", pair, "Slice pair A:B");
        app.add_option("--model-a", model_a, "Pre-trained model for slice A (skips training)");
        app.add_option("--model-b", model_b, "Pre-trained model for slice B");
        app.add_flag("--similarity", similarity, "Write 1 - score (cosine similarity) instead of the change score");
        app.add_option("--report-limit", report_limit, "Words in the neighbors report");
        app.add_option("--report-neighbors", report_neighbors, "Neighbors per word in the report");
    }
};

inline void run_detect(const Common& c, const DetectOptions& o, Session& s, std::ostream& out, std::ostream& err) {
    auto change = o.change.cfg;
    change.method = detect::parse_method(o.method);
    detect::DetectionRun run;
    if (!o.model_a.empty() || !o.model_b.empty()) {
        if (o.model_a.empty() || o.model_b.empty())
            throw InputError("detect: pass both --model-a and --model-b");
        s.input(o.model_a);
        s.input(o.model_b);
        run.model_a = embed::load_model(fs::path(o.model_a));
        run.model_b = embed::load_model(fs::path(o.model_b));
        if (change.method == detect::Method::procrustes) {
            auto aligned = align::align_models(run.model_a, run.model_b);
            run.model_a = std::move(aligned.model);
            run.alignment = std::move(aligned.alignment);
        }
        run.ranking = detect::rank_changed_words(run.model_a, run.model_b, change);
    } else {
        const auto records = load_records(require_input(c, "detect"), s, err);
        const auto slicing = load_slicing(o.slicing, records, s);
        const auto sc = slice_corpus(records, slicing);
        if (o.pair.empty())
            throw InputError("detect: --pair is required when training");
        const auto [ia, ib] = parse_pair(o.pair);
        const embed::SliceTokens a{ia, sc.tokens[slice_index(sc, ia)]}, b{ib, sc.tokens[slice_index(sc, ib)]};
        run = detect::detect_change(a, b, change, o.train.resolve(c, detect::uses_compass(change.method)));
    }
    const auto outdir = s.out_dir();
    {
        auto f = open_output(outdir / "ranking.csv");
        detect::write_ranking(f, run.ranking, o.similarity);
    }
    {
        auto f = open_output(outdir / "neighbors.csv");
        detect::write_neighbors_report(f, run, o.report_limit, o.report_neighbors);
    }
    json summary{{"method", o.method},
                 {"slice_a", run.ranking.slice_a},
                 {"slice_b", run.ranking.slice_b},
                 {"candidates", run.ranking.entries.size()}};
    if (run.alignment)
        summary["alignment"] = {{"shared_words", run.alignment->shared_words.size()},
                                {"residual", run.alignment->residual},
                                {"unaligned_residual", run.alignment->unaligned_residual}};
    write_json(outdir / "detect.json", summary);
    out << "detect: ranked " << run.ranking.entries.size() << " words with " << o.method << '\n';
}

// ---------------------------------------------------------------------------
// stability

struct StabilityOptions {
    TrainOptions train;
    ChangeOptions change;
    std::vector<std::string> methods{"compass"};
    std::string slicing, pair;
    std::size_t runs = 10;
    std::vector<std::size_t> k = eval::default_k_list();
    std::size_t resamples = 10000;
    double level = 0.95;

    void add(CLI::App& app) {
        train.add(app);
        change.add(app);
        app.add_option("--method", methods, "Methods, comma separated, or 'all'")->delimiter(',');
        app.add_option("--slicing", slicing, "Slicing file; default one slice per period");
        app.add_option("--pair", pair, "Slice pair A:B");
        app.add_option("--runs", runs, "Seeded restarts per method");
        app.add_option("--k", k, "Intersection depths, comma separated")->delimiter(',');
        app.add_option("--resamples", resamples, "Bootstrap resamples");
        app.add_option("--level", level, "Confidence level");
    }
};

inline void run_stability_cmd(const Common& c, const StabilityOptions& o, Session& s, std::ostream& out,
                              std::ostream& err) {
    const auto records = load_records(require_input(c, "stability"), s, err);
    const auto slicing = load_slicing(o.slicing, records, s);
    const auto sc = slice_corpus(records, slicing);
    if (o.pair.empty())
        throw InputError("stability: --pair is required");
    const auto [ia, ib] = parse_pair(o.pair);
    const embed::SliceTokens a{ia, sc.tokens[slice_index(sc, ia)]}, b{ib, sc.tokens[slice_index(sc, ib)]};
    std::vector<detect::Method> methods;
    for (const auto& m : o.methods) {
        if (m == "all")
            methods.insert(methods.end(), std::begin(detect::all_methods), std::end(detect::all_methods));
        else
            methods.push_back(detect::parse_method(m));
    }
    eval::StabilityConfig scfg;
    scfg.n_runs = o.runs;
    scfg.k_list = o.k;
    scfg.base_seed = c.seed;
    scfg.bootstrap_resamples = o.resamples;
    scfg.level = o.level;
    scfg.validate();
    const auto outdir = s.out_dir();
    std::vector<eval::StabilityReport> reports;
    for (auto m : methods) {
        auto change = o.change.cfg;
        change.method = m;
        reports.push_back(eval::run_stability(a, b, change, o.train.resolve(c, detect::uses_compass(m)), scfg));
        for (auto k : reports.back().skipped_k)
            err << "warning: " << detect::to_string(m) << ": k=" << k << " exceeds the ranking length, skipped\n";
    }
    {
        auto f = open_output(outdir / "stability.csv");
        eval::write_stability_csv(f, reports);
    }
    write_json(outdir / "stability.json", eval::stability_json(reports));
    out << "stability: " << reports.size() << " methods x " << o.runs << " runs\n";
}

// ---------------------------------------------------------------------------
// track and party-drift

struct TrackOptions {
    TrainOptions train;
    std::string slicing;
    std::vector<std::string> slices;
    std::string words_file;
    std::vector<std::string> words;
    std::size_t seeds = 50;
    std::size_t resamples = 10000;
    double level = 0.95;
    std::size_t neighbors = 10;
    bool skip_missing = false;

    void add(CLI::App& app, bool party) {
        train.add(app);
        app.add_option("--slicing", slicing, "Slicing file; default one slice per period");
        app.add_option("--slices", slices, "Ordered slice ids (default all)")->delimiter(',');
        if (party) {
            words_file = shipped("parties.csv");
            app.add_option("--parties", words_file, "Party table whose abbreviations give the tags");
            app.add_option("--tags", words, "Party tags such as @νδ, comma separated")->delimiter(',');
            app.add_option("--neighbors", neighbors, "Neighbors listed at each tag's minimum");
        } else {
            words_file = shipped("topics.txt");
            app.add_option("--topics", words_file, "Topic list file");
            app.add_option("--words", words, "Topic words, comma separated (overrides --topics)")->delimiter(',');
        }
        app.add_option("--seeds", seeds, "Seeds per slice pair");
        app.add_option("--resamples", resamples, "Bootstrap resamples");
        app.add_option("--level", level, "Confidence level");
        app.add_flag("--skip-missing", skip_missing, "Drop words too rare in every slice pair instead of failing");
    }
};

inline void run_track(const Common& c, const TrackOptions& o, Session& s, std::ostream& out, std::ostream& err,
                      bool party) {
    const std::string cmd = party ? "party-drift" : "track";
    const auto records = load_records(require_input(c, cmd), s, err);
    const auto slicing = load_slicing(o.slicing, records, s);
    const auto sc = slice_corpus(records, slicing);
    std::vector<std::string> ids = o.slices;
    if (ids.empty())
        for (const auto& sl : slicing)
            ids.push_back(sl.id);
    std::vector<embed::SliceTokens> st;
    for (const auto& id : ids)
        st.push_back({id, sc.tokens[slice_index(sc, id)]});

    auto words = o.words;
    if (words.empty()) {
        s.input(o.words_file);
        if (party) {
            std::set<std::string> seen;
            for (const auto& e : preprocess::PartyTagTable::read(fs::path(o.words_file)).entries())
                if (seen.insert(e.abbreviation).second)
                    words.push_back("@" + e.abbreviation);
        } else {
            words = read_list_file(o.words_file);
        }
    }
    const auto cfg = o.train.resolve(c, true);
    // Keep words that survive compass training in at least one pair.
    std::vector<std::map<std::string, std::uint64_t>> counts(st.size());
    const std::set<std::string> wanted(words.begin(), words.end());
    for (std::size_t i = 0; i < st.size(); ++i)
        for (const auto& t : st[i].tokens)
            if (wanted.count(t))
                ++counts[i][t];
    std::vector<std::string> usable, missing;
    for (const auto& w : words) {
        bool ok = false;
        for (std::size_t p = 0; p + 1 < st.size(); ++p) {
            const auto ca = counts[p].count(w) ? counts[p].at(w) : 0;
            const auto cb = counts[p + 1].count(w) ? counts[p + 1].at(w) : 0;
            ok = ok || (ca > 0 && cb > 0 && ca + cb >= cfg.min_count);
        }
        (ok ? usable : missing).push_back(w);
    }
    if (!missing.empty() && !o.skip_missing)
        throw InputError(cmd + ": too rare in every slice pair: " + text::join(missing, ", ") +
                         " (pass --skip-missing to drop them)");
    for (const auto& w : missing)
        err << "warning: '" << w << "' is too rare in every slice pair, skipped\n";
    if (usable.empty())
        throw InputError(cmd + ": none of the requested words occurs often enough");

    eval::TrackConfig tc;
    tc.n_seeds = o.seeds;
    tc.base_seed = c.seed;
    tc.bootstrap_resamples = o.resamples;
    tc.level = o.level;
    tc.neighbors = o.neighbors;
    const auto rep = party ? eval::party_drift(usable, st, cfg, tc) : eval::track_topics(usable, st, cfg, tc);
    const auto outdir = s.out_dir();
    const std::string stem = party ? "party" : "track";
    {
        auto f = open_output(outdir / (stem + ".csv"));
        eval::write_track_csv(f, rep);
    }
    write_json(outdir / (stem + ".json"), eval::to_json(rep));
    out << cmd << ": " << usable.size() << " words over " << rep.pairs.size() << " slice pairs\n";
}

// ---------------------------------------------------------------------------
// plot

struct PlotOptions {
    std::string kind;
    std::string title;
    bool no_svg = false;

    void add(CLI::App& app) {
        app.add_option("--kind", kind, "stability, topic, party, gender or vocab_overlap (default: the report's kind)");
        app.add_option("--title", title, "Chart title");
        app.add_flag("--no-svg", no_svg, "Skip the SVG chart");
    }
};

inline void run_plot(const Common& c, const PlotOptions& o, Session& s, std::ostream& out, std::ostream&) {
    const auto path = require_input(c, "plot");
    s.input(path);
    json report;
    try {
        report = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw InputError("plot: " + path + " is not a JSON report: " + e.what());
    }
    const auto kind = eval::parse_plot_kind(o.kind.empty() ? report.value("kind", "") : o.kind);
    std::vector<eval::PlotSeries> series;
    try {
        series = eval::emit_plot_data(report, kind);
    } catch (const json::exception& e) {
        throw InputError("plot: malformed report: " + std::string(e.what()));
    }
    const auto outdir = s.out_dir();
    auto index = open_output(outdir / "series.csv");
    csv::write_row(index, {"series", "file", "points"});
    std::set<std::string> used;
    for (const auto& sr : series) {
        auto stem = file_stem(sr.name);
        for (int i = 2; used.count(stem); ++i)
            stem = file_stem(sr.name) + "_" + std::to_string(i);
        used.insert(stem);
        auto f = open_output(outdir / (stem + ".csv"));
        eval::write_series(f, sr);
        csv::write_row(index, {sr.name, stem + ".csv", std::to_string(sr.points.size())});
    }
    if (!o.no_svg) {
        auto f = open_output(outdir / "plot.svg");
        eval::write_svg(f, series, o.title.empty() ? std::string(eval::to_string(kind)) : o.title);
    }
    out << "plot: " << series.size() << " series\n";
}

// ---------------------------------------------------------------------------
// Dispatch

namespace detail {

inline void add_common(CLI::App& app, Common& c) {
    app.add_option("--input", c.input, "Input file or directory");
    app.add_option("--output", c.output, "Output directory");
    app.add_option("--seed", c.seed, "Base random seed");
    app.add_option("--workers", c.workers, "Training threads");
    app.add_flag("--deterministic", c.deterministic, "Single-threaded, bitwise reproducible training");
    app.add_option("--config", c.config, "key=value file; flags given on the command line win");
}

// Values from the config file go to options the command line left unset.
inline std::set<std::string> apply_config(CLI::App& sub, const std::string& path) {
    std::set<std::string> applied;
    for (const auto& [key, value] : read_config_file(path)) {
        if (key == "config")
            throw InputError(path + ": 'config' cannot be set from a config file");
        auto* opt = sub.get_option_no_throw("--" + key);
        if (!opt)
            throw InputError(path + ": unknown key '" + key + "' for " + sub.get_name());
        if (opt->count() > 0)
            continue;
        opt->clear();
        opt->add_result(value);
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw InputError(path + ": bad value for '" + key + "': " + e.what());
        }
        applied.insert(key);
    }
    return applied;
}

inline json snapshot(const CLI::App& sub, const std::set<std::string>& from_config) {
    json cfg = json::object();
    for (const auto* opt : sub.get_options()) {
        if (opt->get_lnames().empty())
            continue;
        const auto& name = opt->get_lnames().front();
        if (name == "help")
            continue;
        std::string value;
        std::string source = "default";
        if (opt->count() > 0) {
            const auto& res = opt->results();
            value = text::join(res, ",");
            source = from_config.count(name) ? "config" : "flag";
        } else {
            value = opt->get_default_str();
            if (value.empty() && opt->get_expected_min() == 0)
                value = "false";
        }
        cfg[name] = {{"value", value}, {"source", source}};
    }
    return cfg;
}

} // namespace detail

// args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Parliamentary corpus building and word usage change detection", "parlshift"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", std::string(tool_version));

    Common common;
    IngestOptions ingest;
    StatsOptions stats;
    PreprocessOptions prep;
    TrainCmdOptions train;
    AlignCmdOptions aligno;
    DetectOptions det;
    StabilityOptions stab;
    TrackOptions track, drift;
    PlotOptions plot;

    struct Command {
        CLI::App* app;
        std::function<void(Session&)> run;
    };
    std::vector<Command> commands;
    const auto add = [&](const char* name, const char* help, auto&& setup, std::function<void(Session&)> fn) {
        auto* sub = app.add_subcommand(name, help);
        detail::add_common(*sub, common);
        setup(*sub);
        commands.push_back({sub, std::move(fn)});
    };
    add("ingest", "Parse sittings and resolve speakers into a speech table", [&](CLI::App& a) { ingest.add(a); },
        [&](Session& s) { run_ingest(common, ingest, s, out, err); });
    add("stats", "Corpus statistics, gender participation and vocabulary overlap", [&](CLI::App& a) { stats.add(a); },
        [&](Session& s) { run_stats(common, stats, s, out, err); });
    add("preprocess", "Tag parties, normalize tokens, merge periods", [&](CLI::App& a) { prep.add(a); },
        [&](Session& s) { run_preprocess(common, prep, s, out, err); });
    add("train", "Train per-slice embeddings", [&](CLI::App& a) { train.add(a); },
        [&](Session& s) { run_train(common, train, s, out, err); });
    add("align", "Rotate one model onto another", [&](CLI::App& a) { aligno.add(a); },
        [&](Session& s) { run_align(common, aligno, s, out, err); });
    add("detect", "Rank words by usage change between two slices", [&](CLI::App& a) { det.add(a); },
        [&](Session& s) { run_detect(common, det, s, out, err); });
    add("stability", "Seeded-restart stability of change rankings", [&](CLI::App& a) { stab.add(a); },
        [&](Session& s) { run_stability_cmd(common, stab, s, out, err); });
    add("track", "Similarity of topic words across consecutive slices", [&](CLI::App& a) { track.add(a, false); },
        [&](Session& s) { run_track(common, track, s, out, err, false); });
    add("party-drift", "Similarity of party tags across consecutive slices", [&](CLI::App& a) { drift.add(a, true); },
        [&](Session& s) { run_track(common, drift, s, out, err, true); });
    add("plot", "Turn a report into plot series files", [&](CLI::App& a) { plot.add(a); },
        [&](Session& s) { run_plot(common, plot, s, out, err); });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << tool_version << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return 1;
    }

    const auto it = std::find_if(commands.begin(), commands.end(), [](const Command& c) { return c.app->parsed(); });
    try {
        std::set<std::string> from_config;
        if (!common.config.empty())
            from_config = detail::apply_config(*it->app, common.config);
        if (common.workers < 1)
            throw InputError("--workers must be >= 1");
        Session session(it->app->get_name(), args, common);
        session.config = detail::snapshot(*it->app, from_config);
        if (!common.config.empty())
            session.input(common.config);
        it->run(session);
        session.write_manifest();
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 2;
    }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

} // namespace parlshift::cli
