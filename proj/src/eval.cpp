#include "xlalign/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "xlalign/errors.hpp"
#include "xlalign/objectives.hpp"
#include "xlalign/textio.hpp"

namespace xlalign {

const std::vector<std::uint64_t> kDefaultSeeds = {13, 42, 87, 100, 2020};

namespace {

std::string numbered(char prefix, int k) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%c%04d", prefix, k);
    return buf;
}

} // namespace

SyntheticTask gen_synthetic(const SyntheticSpec& spec) {
    if (spec.vocab_size < 1 || spec.heldout < 0 || spec.heldout >= spec.vocab_size) {
        throw ConfigError("synthetic spec: need 0 <= heldout < vocab_size");
    }
    const int in_train = spec.vocab_size - spec.heldout;
    if (spec.sentence_len < 1 || spec.sentence_len > in_train) {
        throw ConfigError("synthetic spec: sentence_len must fit the training vocabulary");
    }
    if (spec.target_languages < 1 || spec.sentences < 1 || spec.dim < 1) {
        throw ConfigError("synthetic spec: languages, sentences and dim must be positive");
    }

    SyntheticTask task;
    task.spec = spec;
    Rng base(spec.seed);

    Rng embed_rng = base.fork(1);
    task.src_embed = Matrix::gaussian(static_cast<std::size_t>(spec.vocab_size), spec.dim, 1.0,
                                      embed_rng);

    for (int k = 0; k < spec.vocab_size; ++k) {
        task.src_unit_ids.push_back(task.vocab.add_unit(numbered('s', k)));
    }

    for (int lang = 0; lang < spec.target_languages; ++lang) {
        SyntheticLanguage language;
        language.name = "t" + std::to_string(lang + 1);
        Rng rot_rng = base.fork(10 + static_cast<std::uint64_t>(lang));
        language.rotation = random_orthogonal(spec.dim, rot_rng);

        Rng noise_rng = base.fork(100 + static_cast<std::uint64_t>(lang));
        Matrix embed = matmul(task.src_embed, transpose(language.rotation));
        for (std::size_t i = 0; i < embed.rows(); ++i) {
            for (std::size_t j = 0; j < embed.cols(); ++j) {
                embed(i, j) += spec.noise_sigma * noise_rng.normal();
            }
        }

        std::vector<int> unit_ids;
        const char prefix = static_cast<char>('u' + lang);
        for (int k = 0; k < spec.vocab_size; ++k) {
            unit_ids.push_back(task.vocab.add_unit(numbered(prefix, k)));
        }

        Rng sent_rng = base.fork(1000 + static_cast<std::uint64_t>(lang));
        for (int s = 0; s < spec.sentences; ++s) {
            std::vector<int> chosen;
            std::set<int> used;
            while (static_cast<int>(chosen.size()) < spec.sentence_len) {
                const int w = static_cast<int>(sent_rng.bounded(static_cast<std::uint64_t>(in_train)));
                if (used.insert(w).second) {
                    chosen.push_back(w);
                }
            }
            std::vector<int> perm(static_cast<std::size_t>(spec.sentence_len));
            for (int p = 0; p < spec.sentence_len; ++p) {
                perm[static_cast<std::size_t>(p)] = p;
            }
            sent_rng.shuffle(perm);

            SentencePair pair;
            pair.id = s;
            for (int w : chosen) {
                pair.src.push_back(numbered('s', w));
            }
            for (int p = 0; p < spec.sentence_len; ++p) {
                pair.tgt.push_back(numbered(prefix, chosen[static_cast<std::size_t>(perm[static_cast<std::size_t>(p)])]));
            }
            for (int p = 0; p < spec.sentence_len; ++p) {
                const int src_pos = perm[static_cast<std::size_t>(p)];
                language.gold_links.push_back({s, src_pos, p,
                                               pair.src[static_cast<std::size_t>(src_pos)],
                                               pair.tgt[static_cast<std::size_t>(p)]});
            }
            language.bitext.push_back(std::move(pair));
        }
        task.tgt_embed.push_back(std::move(embed));
        task.tgt_unit_ids.push_back(std::move(unit_ids));
        task.languages.push_back(std::move(language));
    }

    // Embedding-only encoder over the combined vocabulary; row 0 (<unk>)
    // stays zero and is never referenced by generated sentences.
    task.encoder.embedding = Matrix(task.vocab.size(), spec.dim);
    for (int k = 0; k < spec.vocab_size; ++k) {
        task.encoder.embedding.set_row(
            static_cast<std::size_t>(task.src_unit_ids[static_cast<std::size_t>(k)]),
            task.src_embed, static_cast<std::size_t>(k));
        for (int lang = 0; lang < spec.target_languages; ++lang) {
            task.encoder.embedding.set_row(
                static_cast<std::size_t>(task.tgt_unit_ids[static_cast<std::size_t>(lang)][static_cast<std::size_t>(k)]),
                task.tgt_embed[static_cast<std::size_t>(lang)], static_cast<std::size_t>(k));
        }
    }
    return task;
}

double retrieval_p_at_1(const Matrix& src_states, const Matrix& tgt_states,
                        const std::vector<std::pair<int, int>>& gold, const Matrix* mapping) {
    if (gold.empty()) {
        throw DataError("retrieval_p_at_1: empty gold list leaves the metric undefined");
    }
    const Matrix mapped = mapping ? matmul(tgt_states, *mapping) : tgt_states;
    if (mapped.cols() != src_states.cols()) {
        throw std::invalid_argument("retrieval_p_at_1: state widths differ");
    }

    std::vector<double> tgt_norm(mapped.rows());
    for (std::size_t j = 0; j < mapped.rows(); ++j) {
        tgt_norm[j] = row_norm(mapped, j) + 1e-12;
    }

    long hits = 0;
    for (const auto& [qi, gj] : gold) {
        if (qi < 0 || static_cast<std::size_t>(qi) >= src_states.rows() || gj < 0 ||
            static_cast<std::size_t>(gj) >= mapped.rows()) {
            throw std::invalid_argument("retrieval_p_at_1: gold index out of range");
        }
        const double qnorm = row_norm(src_states, static_cast<std::size_t>(qi)) + 1e-12;
        std::size_t best = 0;
        double best_cos = -2.0;
        for (std::size_t j = 0; j < mapped.rows(); ++j) {
            const double c = dot(src_states, static_cast<std::size_t>(qi), mapped, j) /
                             (qnorm * tgt_norm[j]);
            if (c > best_cos) {
                best_cos = c;
                best = j;
            }
        }
        if (best == static_cast<std::size_t>(gj)) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(gold.size());
}

EvalConfig EvalConfig::desk() {
    EvalConfig c;
    c.finetune = RunConfig::desk();
    c.finetune.lambda = 0.0; // calibrated for the synthetic rotation task
    c.linear = RunConfig::desk_linear();
    return c;
}

void EvalConfig::validate() const {
    if (seeds.empty()) {
        throw ConfigError("eval config: need at least one seed");
    }
    if (objectives.empty()) {
        throw ConfigError("eval config: need at least one objective");
    }
    static const std::set<std::string> known = {"none", "procrustes", "linear",
                                                "l2", "weak", "strong"};
    for (const std::string& o : objectives) {
        if (!known.count(o)) {
            throw ConfigError("eval config: unknown objective '" + o +
                              "' (expected none|procrustes|linear|l2|weak|strong)");
        }
    }
    RunConfig ft = finetune;
    ft.mode = ObjectiveConfig::Mode::Weak;
    ft.validate();
    RunConfig lin = linear;
    lin.mode = ObjectiveConfig::Mode::Linear;
    lin.validate();
}

namespace {

// Per-word representation: each vocabulary word encoded as a one-word
// sentence, first-unit row of the final layer.
Matrix word_states(const EncoderParams& params, const std::vector<int>& unit_ids) {
    Matrix out(unit_ids.size(), params.dim());
    for (std::size_t k = 0; k < unit_ids.size(); ++k) {
        const ContextualStates states = encode(params, {unit_ids[k]});
        out.set_row(k, states.final_layer(), 0);
    }
    return out;
}

Matrix subset_rows(const Matrix& m, int begin, int end) {
    Matrix out(static_cast<std::size_t>(end - begin), m.cols());
    for (int k = begin; k < end; ++k) {
        out.set_row(static_cast<std::size_t>(k - begin), m, static_cast<std::size_t>(k));
    }
    return out;
}

std::vector<std::pair<int, int>> identity_gold(int n) {
    std::vector<std::pair<int, int>> gold;
    for (int k = 0; k < n; ++k) {
        gold.emplace_back(k, k);
    }
    return gold;
}

struct TaskView {
    std::string name;
    int begin = 0;
    int end = 0;
};

// Mean P@1 over target languages, as a percentage, for one parameter set.
double evaluate_states(const SyntheticTask& task, const EncoderParams& params,
                       const SimilarityHead* head, const std::vector<Matrix>* mappings,
                       const TaskView& view) {
    Matrix src = word_states(params, task.src_unit_ids);
    if (head) {
        src = head->forward(src);
    }
    const Matrix src_sub = subset_rows(src, view.begin, view.end);
    const auto gold = identity_gold(view.end - view.begin);

    double total = 0.0;
    for (std::size_t lang = 0; lang < task.languages.size(); ++lang) {
        Matrix tgt = word_states(params, task.tgt_unit_ids[lang]);
        if (mappings) {
            tgt = matmul(tgt, (*mappings)[lang]);
        }
        if (head) {
            tgt = head->forward(tgt);
        }
        const Matrix tgt_sub = subset_rows(tgt, view.begin, view.end);
        total += retrieval_p_at_1(src_sub, tgt_sub, gold, nullptr);
    }
    return 100.0 * total / static_cast<double>(task.languages.size());
}

} // namespace

std::vector<RunResult> run_single_seed(const EvalConfig& config, std::uint64_t seed) {
    SyntheticSpec spec = config.synthetic;
    spec.seed = seed;
    const SyntheticTask task = gen_synthetic(spec);
    const int in_train = spec.vocab_size - spec.heldout;

    std::vector<TaskView> views;
    views.push_back({"retrieval-seen", 0, in_train});
    if (spec.heldout > 0) {
        views.push_back({"retrieval-unseen", in_train, spec.vocab_size});
    }

    // Alignment pipeline feeds every training route.
    FinetuneData data;
    for (const SyntheticLanguage& language : task.languages) {
        PipelineCounts counts;
        LanguageCorpus corpus;
        corpus.name = language.name;
        corpus.sentences = language.bitext;
        corpus.pairs = align_corpus(language.bitext, config.pipeline, counts);
        data.languages.push_back(std::move(corpus));
    }

    const std::size_t final_layer = task.encoder.layer_count();
    std::vector<RunResult> results;
    for (const std::string& objective : config.objectives) {
        try {
            const SimilarityHead* head = nullptr;
            const std::vector<Matrix>* mappings = nullptr;
            EncoderParams params = task.encoder;
            std::vector<Matrix> maps;
            SimilarityHead trained_head;

            if (objective == "procrustes" || objective == "linear") {
                for (const LanguageCorpus& corpus : data.languages) {
                    const StaticFeatures f = collect_static_features(
                        task.encoder, task.vocab, corpus, final_layer, config.finetune.max_seq_len);
                    if (objective == "procrustes") {
                        maps.push_back(procrustes_svd(f.s, f.t).w);
                    } else {
                        RunConfig lcfg = config.linear;
                        lcfg.mode = ObjectiveConfig::Mode::Linear;
                        lcfg.seed = seed;
                        maps.push_back(train_linear_mapping(f.s, f.t, lcfg).w);
                    }
                }
                mappings = &maps;
            } else if (objective == "l2" || objective == "weak" || objective == "strong") {
                RunConfig fcfg = config.finetune;
                fcfg.seed = seed;
                fcfg.mode = objective == "l2" ? ObjectiveConfig::Mode::L2
                            : objective == "weak" ? ObjectiveConfig::Mode::Weak
                                                  : ObjectiveConfig::Mode::Strong;
                FinetuneResult r = train_finetune(task.encoder, task.vocab, data, fcfg);
                params = std::move(r.params);
                if (r.has_head) {
                    // retrieval in the learned similarity's feature space
                    trained_head = std::move(r.head);
                    head = &trained_head;
                }
            } else if (objective != "none") {
                throw ConfigError("unknown objective '" + objective + "'");
            }

            for (const TaskView& view : views) {
                RunResult rr;
                rr.task = view.name;
                rr.objective = objective;
                rr.seed = seed;
                rr.metric = "p_at_1_pct";
                rr.value = evaluate_states(task, params, head, mappings, view);
                results.push_back(std::move(rr));
            }
        } catch (const std::exception& e) {
            for (const TaskView& view : views) {
                RunResult rr;
                rr.task = view.name;
                rr.objective = objective;
                rr.seed = seed;
                rr.metric = "p_at_1_pct";
                rr.ok = false;
                rr.error = e.what();
                results.push_back(std::move(rr));
            }
        }
    }
    return results;
}

std::vector<RunResult> multi_seed_run(const EvalConfig& config) {
    config.validate();
    std::vector<std::vector<RunResult>> per_seed(config.seeds.size());
    if (config.parallel_seeds && config.seeds.size() > 1) {
        std::vector<std::future<std::vector<RunResult>>> futures;
        for (std::uint64_t seed : config.seeds) {
            futures.push_back(std::async(std::launch::async,
                                         [&config, seed]() { return run_single_seed(config, seed); }));
        }
        for (std::size_t k = 0; k < futures.size(); ++k) {
            per_seed[k] = futures[k].get();
        }
    } else {
        for (std::size_t k = 0; k < config.seeds.size(); ++k) {
            per_seed[k] = run_single_seed(config, config.seeds[k]);
        }
    }
    std::vector<RunResult> all;
    for (std::vector<RunResult>& chunk : per_seed) {
        for (RunResult& r : chunk) {
            all.push_back(std::move(r));
        }
    }
    return all;
}

std::vector<SummaryStats> summarize(const std::vector<RunResult>& results) {
    std::map<std::pair<std::string, std::string>, SummaryStats> groups;
    std::set<std::tuple<std::string, std::string, std::uint64_t>> seen;
    for (const RunResult& r : results) {
        if (!seen.insert({r.task, r.objective, r.seed}).second) {
            throw DataError("summarize: duplicate result for (" + r.task + ", " + r.objective +
                            ", seed " + std::to_string(r.seed) + ")");
        }
        SummaryStats& g = groups[{r.task, r.objective}];
        g.task = r.task;
        g.objective = r.objective;
        if (!r.ok) {
            ++g.failed;
            continue;
        }
        if (!std::isfinite(r.value)) {
            throw DataError("summarize: non-finite metric for (" + r.task + ", " + r.objective + ")");
        }
        g.values.push_back(r.value);
    }

    std::vector<SummaryStats> out;
    for (auto& [key, g] : groups) {
        g.n = static_cast<int>(g.values.size());
        if (g.n == 0) {
            continue; // every run failed; nothing to aggregate
        }
        double sum = 0.0;
        for (double v : g.values) {
            sum += v;
        }
        g.mean = sum / static_cast<double>(g.n);
        if (g.n == 1) {
            g.single_flag = true;
            g.stddev = 0.0;
        } else {
            double ss = 0.0;
            for (double v : g.values) {
                ss += (v - g.mean) * (v - g.mean);
            }
            g.stddev = std::sqrt(ss / static_cast<double>(g.n - 1));
        }
        out.push_back(std::move(g));
    }
    return out;
}

std::string emit_report(const std::vector<SummaryStats>& summaries, ReportFormat format) {
    if (summaries.empty()) {
        throw DataError("emit_report: no summaries");
    }
    std::ostringstream out;
    if (format == ReportFormat::Tsv) {
        out << "task\tobjective\tn\tmean\tstd\tvalues\n";
        for (const SummaryStats& s : summaries) {
            out << s.task << '\t' << s.objective << '\t' << s.n << '\t' << format_double(s.mean)
                << '\t' << format_double(s.stddev);
            for (double v : s.values) {
                out << '\t' << format_double(v);
            }
            out << '\n';
        }
        return out.str();
    }

    // markdown: objectives as rows, tasks as columns, one decimal per cell
    std::vector<std::string> tasks, objectives;
    for (const SummaryStats& s : summaries) {
        if (std::find(tasks.begin(), tasks.end(), s.task) == tasks.end()) {
            tasks.push_back(s.task);
        }
        if (std::find(objectives.begin(), objectives.end(), s.objective) == objectives.end()) {
            objectives.push_back(s.objective);
        }
    }
    std::sort(tasks.begin(), tasks.end());

    auto find_cell = [&summaries](const std::string& task, const std::string& objective)
        -> const SummaryStats* {
        for (const SummaryStats& s : summaries) {
            if (s.task == task && s.objective == objective) {
                return &s;
            }
        }
        return nullptr;
    };

    out << "| objective |";
    for (const std::string& t : tasks) {
        out << ' ' << t << " |";
    }
    out << "\n|---|";
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        out << "---|";
    }
    out << '\n';
    char buf[64];
    for (const std::string& o : objectives) {
        out << "| " << o << " |";
        for (const std::string& t : tasks) {
            const SummaryStats* s = find_cell(t, o);
            if (!s) {
                out << " - |";
                continue;
            }
            std::snprintf(buf, sizeof(buf), " %.1f ± %.1f |", s->mean, s->stddev);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

void write_results(std::ostream& out, const std::vector<RunResult>& results) {
    for (const RunResult& r : results) {
        std::string err = r.error;
        for (char& c : err) {
            if (c == '\t' || c == '\n') {
                c = ' ';
            }
        }
        out << r.task << '\t' << r.objective << '\t' << r.seed << '\t' << r.metric << '\t'
            << format_double(r.value) << '\t' << (r.ok ? "ok" : "failed") << '\t' << err << '\n';
    }
}

std::vector<RunResult> read_results(std::istream& in) {
    std::vector<RunResult> results;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream iss(line);
        RunResult r;
        std::string seed_text, value_text, status;
        if (!std::getline(iss, r.task, '\t') || !std::getline(iss, r.objective, '\t') ||
            !std::getline(iss, seed_text, '\t') || !std::getline(iss, r.metric, '\t') ||
            !std::getline(iss, value_text, '\t') || !std::getline(iss, status, '\t')) {
            throw DataError("results: malformed line " + std::to_string(line_no));
        }
        std::getline(iss, r.error);
        try {
            r.seed = std::stoull(seed_text);
            r.value = std::stod(value_text);
        } catch (const std::exception&) {
            throw DataError("results: malformed numbers on line " + std::to_string(line_no));
        }
        r.ok = status == "ok";
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<SummaryStats> parse_report_tsv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<SummaryStats> out;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false; // header
            continue;
        }
        if (line.empty()) {
            continue;
        }
        std::istringstream iss(line);
        SummaryStats s;
        std::string field;
        if (!std::getline(iss, s.task, '\t') || !std::getline(iss, s.objective, '\t') ||
            !std::getline(iss, field, '\t')) {
            throw DataError("report tsv: malformed row");
        }
        s.n = std::stoi(field);
        if (!std::getline(iss, field, '\t')) {
            throw DataError("report tsv: malformed row");
        }
        s.mean = std::stod(field);
        if (!std::getline(iss, field, '\t')) {
            throw DataError("report tsv: malformed row");
        }
        s.stddev = std::stod(field);
        while (std::getline(iss, field, '\t')) {
            s.values.push_back(std::stod(field));
        }
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace xlalign
