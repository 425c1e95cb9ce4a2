#include <doctest.h>

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include "xlalign/errors.hpp"
#include "xlalign/eval.hpp"
#include "xlalign/gdfa.hpp"
#include "xlalign/objectives.hpp"

using namespace xlalign;

namespace {

EvalConfig tiny_eval_config() {
    EvalConfig cfg = EvalConfig::desk();
    cfg.synthetic.vocab_size = 40;
    cfg.synthetic.dim = 8;
    cfg.synthetic.sentences = 40;
    cfg.synthetic.sentence_len = 4;
    cfg.synthetic.heldout = 10;
    cfg.synthetic.target_languages = 2;
    cfg.objectives = {"none", "procrustes"};
    cfg.seeds = {1, 2, 3};
    cfg.linear.total_steps = 50;
    cfg.finetune.total_steps = 50;
    cfg.finetune.warmup_steps = 5;
    return cfg;
}

RunResult result_of(const std::string& task, const std::string& objective, std::uint64_t seed,
                    double value, bool ok = true) {
    RunResult r;
    r.task = task;
    r.objective = objective;
    r.seed = seed;
    r.metric = "m";
    r.value = value;
    r.ok = ok;
    return r;
}

} // namespace

TEST_CASE("gen_synthetic: zero noise gives exact rotations, seeds reproduce") {
    SyntheticSpec spec;
    spec.vocab_size = 30;
    spec.dim = 6;
    spec.noise_sigma = 0.0;
    spec.sentences = 10;
    spec.sentence_len = 4;
    spec.heldout = 5;
    spec.target_languages = 2;
    spec.seed = 99;

    SyntheticTask a = gen_synthetic(spec);
    REQUIRE(a.languages.size() == 2);
    for (std::size_t lang = 0; lang < 2; ++lang) {
        Matrix expected = matmul(a.src_embed, transpose(a.languages[lang].rotation));
        CHECK((a.tgt_embed[lang] - expected).frobenius_norm() < 1e-12);
        Matrix gram = matmul(transpose(a.languages[lang].rotation), a.languages[lang].rotation);
        CHECK((gram - Matrix::identity(6)).frobenius_norm() < 1e-10);
    }

    SyntheticTask b = gen_synthetic(spec);
    CHECK((a.encoder.embedding - b.encoder.embedding).frobenius_norm() == 0.0);
    REQUIRE(a.languages[0].bitext.size() == b.languages[0].bitext.size());
    for (std::size_t s = 0; s < a.languages[0].bitext.size(); ++s) {
        CHECK(a.languages[0].bitext[s].src == b.languages[0].bitext[s].src);
        CHECK(a.languages[0].bitext[s].tgt == b.languages[0].bitext[s].tgt);
    }
}

TEST_CASE("gen_synthetic: gold links survive the one-to-one and trivial filters") {
    SyntheticSpec spec;
    spec.vocab_size = 25;
    spec.dim = 4;
    spec.sentences = 12;
    spec.sentence_len = 5;
    spec.heldout = 0;
    spec.target_languages = 1;
    spec.seed = 7;
    SyntheticTask task = gen_synthetic(spec);

    const SyntheticLanguage& lang = task.languages[0];
    for (const SentencePair& pair : lang.bitext) {
        AlignmentSet gold(static_cast<int>(pair.src.size()), static_cast<int>(pair.tgt.size()));
        for (const AlignedWordPair& g : lang.gold_links) {
            if (g.pair_id == pair.id) {
                gold.add(g.src_idx, g.tgt_idx);
            }
        }
        CHECK(gold.size() == pair.src.size()); // perfect matching by construction
        CHECK(filter_one_to_one(gold).links == gold.links);
        CHECK(drop_trivial(gold, pair).links == gold.links);
    }
}

TEST_CASE("retrieval_p_at_1 basics") {
    Rng rng(5);
    Matrix states = Matrix::gaussian(12, 6, 1.0, rng);
    std::vector<std::pair<int, int>> gold;
    for (int k = 0; k < 12; ++k) {
        gold.emplace_back(k, k);
    }
    CHECK(retrieval_p_at_1(states, states, gold, nullptr) == doctest::Approx(1.0));
    CHECK_THROWS_AS(retrieval_p_at_1(states, states, {}, nullptr), DataError);
    CHECK_THROWS_AS(retrieval_p_at_1(states, states, {{0, 99}}, nullptr), std::invalid_argument);
}

TEST_CASE("retrieval_p_at_1: rotated states sit at chance without a mapping") {
    Rng rng(17);
    const int n = 200;
    Matrix src = Matrix::gaussian(n, 64, 1.0, rng);
    Matrix q = random_orthogonal(64, rng);
    Matrix tgt = matmul(src, transpose(q));
    std::vector<std::pair<int, int>> reversed;
    for (int k = 0; k < n; ++k) {
        reversed.emplace_back(k, n - 1 - k);
    }
    // chance level is 1/200; allow a generous sampling band
    CHECK(retrieval_p_at_1(src, tgt, reversed, nullptr) < 0.05);
}

TEST_CASE("retrieval_p_at_1: exact recovery with the procrustes mapping at zero noise") {
    SyntheticSpec spec;
    spec.vocab_size = 60;
    spec.dim = 8;
    spec.noise_sigma = 0.0;
    spec.sentences = 30;
    spec.sentence_len = 5;
    spec.heldout = 0;
    spec.target_languages = 1;
    spec.seed = 3;
    SyntheticTask task = gen_synthetic(spec);

    ProcrustesResult pr = procrustes_svd(task.src_embed, task.tgt_embed[0]);
    std::vector<std::pair<int, int>> gold;
    for (int k = 0; k < spec.vocab_size; ++k) {
        gold.emplace_back(k, k);
    }
    CHECK(retrieval_p_at_1(task.src_embed, task.tgt_embed[0], gold, &pr.w) == doctest::Approx(1.0));
}

TEST_CASE("multi_seed_run: determinism and cardinality") {
    EvalConfig cfg = tiny_eval_config();
    std::vector<RunResult> a = multi_seed_run(cfg);
    std::vector<RunResult> b = multi_seed_run(cfg);

    std::ostringstream sa, sb;
    write_results(sa, a);
    write_results(sb, b);
    CHECK(sa.str() == sb.str());

    // 3 seeds x 2 objectives x 2 tasks
    CHECK(a.size() == 12);
    int seen_none = 0;
    for (const RunResult& r : a) {
        CHECK(r.ok);
        if (r.objective == "none" && r.task == "retrieval-seen") {
            ++seen_none;
        }
    }
    CHECK(seen_none == 3);

    // parallel execution yields the identical result list
    cfg.parallel_seeds = true;
    std::vector<RunResult> c = multi_seed_run(cfg);
    std::ostringstream sc;
    write_results(sc, c);
    CHECK(sc.str() == sa.str());
}

TEST_CASE("run failures are recorded per objective, not thrown") {
    // one single-word sentence pair yields one usable aligned pair; the
    // contrastive trainer needs two and must surface that as a failed result
    EvalConfig cfg = EvalConfig::desk();
    cfg.synthetic.vocab_size = 10;
    cfg.synthetic.dim = 4;
    cfg.synthetic.sentences = 1;
    cfg.synthetic.sentence_len = 1;
    cfg.synthetic.heldout = 2;
    cfg.synthetic.target_languages = 1;
    cfg.objectives = {"none", "weak"};
    cfg.seeds = {5};
    std::vector<RunResult> results = multi_seed_run(cfg);
    REQUIRE(results.size() == 4); // 2 objectives x 2 tasks
    int failed = 0;
    for (const RunResult& r : results) {
        if (r.objective == "weak") {
            CHECK_FALSE(r.ok);
            CHECK_FALSE(r.error.empty());
            ++failed;
        } else {
            CHECK(r.ok);
        }
    }
    CHECK(failed == 2);
    std::vector<SummaryStats> s = summarize(results);
    for (const SummaryStats& g : s) {
        CHECK(g.objective == "none"); // weak group lost every run
    }
}

TEST_CASE("summarize fixtures") {
    std::vector<RunResult> results = {
        result_of("t", "o", 1, 1.0),
        result_of("t", "o", 2, 2.0),
        result_of("t", "o", 3, 3.0),
    };
    std::vector<SummaryStats> s = summarize(results);
    REQUIRE(s.size() == 1);
    CHECK(s[0].n == 3);
    CHECK(s[0].mean == doctest::Approx(2.0));
    CHECK(s[0].stddev == doctest::Approx(1.0));

    // permutation invariance in the input order
    std::swap(results[0], results[2]);
    std::vector<SummaryStats> s2 = summarize(results);
    CHECK(s2[0].mean == doctest::Approx(s[0].mean));
    CHECK(s2[0].stddev == doctest::Approx(s[0].stddev));

    std::vector<SummaryStats> equal = summarize({
        result_of("t", "o", 1, 5.0),
        result_of("t", "o", 2, 5.0),
        result_of("t", "o", 3, 5.0),
    });
    CHECK(equal[0].stddev == doctest::Approx(0.0));

    std::vector<SummaryStats> two = summarize({
        result_of("t", "o", 1, 0.5),
        result_of("t", "o", 2, 0.7),
    });
    CHECK(two[0].mean == doctest::Approx(0.6));
    CHECK(two[0].stddev == doctest::Approx(std::sqrt(0.02 / 1.0)).epsilon(1e-9));

    std::vector<SummaryStats> single = summarize({result_of("t", "o", 1, 4.0)});
    CHECK(single[0].single_flag);
    CHECK(single[0].stddev == 0.0);

    CHECK_THROWS_AS(summarize({result_of("t", "o", 1, 1.0), result_of("t", "o", 1, 2.0)}),
                    DataError);

    std::vector<SummaryStats> with_failure = summarize({
        result_of("t", "o", 1, 1.0),
        result_of("t", "o", 2, 0.0, false),
        result_of("t", "o", 3, 3.0),
    });
    CHECK(with_failure[0].n == 2);
    CHECK(with_failure[0].failed == 1);
    CHECK(with_failure[0].mean == doctest::Approx(2.0));
}

TEST_CASE("emit_report formats") {
    std::vector<SummaryStats> s = summarize({
        result_of("task-a", "weak", 1, 65.2),
        result_of("task-a", "weak", 2, 66.2),
        result_of("task-b", "weak", 1, 70.0),
        result_of("task-b", "weak", 2, 71.0),
    });

    const std::string tsv = emit_report(s, ReportFormat::Tsv);
    // header plus one row per (task, objective)
    CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 3);
    std::vector<SummaryStats> parsed = parse_report_tsv(tsv);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].task == s[0].task);
    CHECK(parsed[0].mean == s[0].mean);
    CHECK(parsed[0].stddev == s[0].stddev);
    REQUIRE(parsed[0].values.size() == s[0].values.size());
    for (std::size_t k = 0; k < parsed[0].values.size(); ++k) {
        CHECK(parsed[0].values[k] == s[0].values[k]);
    }

    const std::string md = emit_report(s, ReportFormat::Markdown);
    CHECK(md.find("| weak |") != std::string::npos);
    CHECK(md.find("65.7 ± 0.7") != std::string::npos); // mean 65.7, std 0.707 -> one decimal
    CHECK(md.find("task-b") != std::string::npos);

    CHECK_THROWS_AS(emit_report({}, ReportFormat::Tsv), DataError);
}

TEST_CASE("results records round-trip") {
    std::vector<RunResult> results = {
        result_of("a", "weak", 13, 95.5),
        result_of("b", "strong", 42, 0.0, false),
    };
    results[1].error = "diverged:\tNaN loss";
    std::ostringstream out;
    write_results(out, results);
    std::istringstream in(out.str());
    std::vector<RunResult> back = read_results(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].task == "a");
    CHECK(back[0].value == 95.5);
    CHECK(back[0].ok);
    CHECK_FALSE(back[1].ok);
    CHECK(back[1].seed == 42);
    CHECK(back[1].error.find("diverged") == 0);
}

// Manual calibration probe for the synthetic comparative run; executed on
// demand with: test_eval -ltc / -tc="calibration probe" --no-skip
TEST_CASE("calibration probe" * doctest::skip()) {
    EvalConfig cfg = EvalConfig::desk();
    cfg.seeds = {13, 42};
    cfg.parallel_seeds = true;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<RunResult> results = multi_seed_run(cfg);
    const auto t1 = std::chrono::steady_clock::now();
    std::cout << "elapsed: "
              << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() << " ms\n";
    std::cout << emit_report(summarize(results), ReportFormat::Tsv);
}
