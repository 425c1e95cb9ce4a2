#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "xlalign/bitext.hpp"
#include "xlalign/errors.hpp"
#include "xlalign/gdfa.hpp"
#include "xlalign/ibm1.hpp"
#include "xlalign/rng.hpp"
#include "xlalign/pipeline.hpp"
#include "xlalign/selfcheck.hpp"

using namespace xlalign;

namespace {

AlignmentSet make_set(int src_len, int tgt_len, std::initializer_list<std::pair<int, int>> links) {
    AlignmentSet a(src_len, tgt_len);
    for (const auto& [s, t] : links) {
        a.add(s, t);
    }
    return a;
}

AlignmentSet random_set(int src_len, int tgt_len, double density, Rng& rng) {
    AlignmentSet a(src_len, tgt_len);
    for (int i = 0; i < src_len; ++i) {
        for (int j = 0; j < tgt_len; ++j) {
            if (rng.uniform() < density) {
                a.add(i, j);
            }
        }
    }
    return a;
}

AlignmentSet transpose_set(const AlignmentSet& a) {
    AlignmentSet t(a.tgt_len, a.src_len);
    for (const AlignmentLink& l : a.links) {
        t.add(l.tgt, l.src);
    }
    return t;
}

// Plain-map EM over this file's tiny fixtures; independent of ibm1_train.
std::map<std::string, std::map<std::string, double>> tiny_em(
    const std::vector<SentencePair>& corpus, int iterations) {
    std::map<std::string, std::map<std::string, double>> t;
    for (const auto& pair : corpus) {
        for (const auto& e : pair.src) {
            for (const auto& f : pair.tgt) {
                t[e][f] = 0.0;
            }
        }
    }
    for (auto& [e, row] : t) {
        for (auto& [f, p] : row) {
            p = 1.0 / static_cast<double>(row.size());
        }
    }
    for (int it = 0; it < iterations; ++it) {
        std::map<std::string, std::map<std::string, double>> cnt;
        for (const auto& pair : corpus) {
            for (const auto& f : pair.tgt) {
                double z = 0.0;
                for (const auto& e : pair.src) {
                    z += t[e][f];
                }
                for (const auto& e : pair.src) {
                    cnt[e][f] += t[e][f] / z;
                }
            }
        }
        for (auto& [e, row] : cnt) {
            double total = 0.0;
            for (auto& [f, c] : row) {
                total += c;
            }
            for (auto& [f, c] : row) {
                t[e][f] = c / total;
            }
        }
    }
    return t;
}

} // namespace

TEST_CASE("parse_bitext basic line") {
    std::istringstream in("the cat ||| le chat\n");
    ParseStats stats;
    std::vector<SentencePair> pairs = parse_bitext(in, stats);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].src == std::vector<std::string>{"the", "cat"});
    CHECK(pairs[0].tgt == std::vector<std::string>{"le", "chat"});
    CHECK(pairs[0].id == 0);
    CHECK(stats.errors.empty());
}

TEST_CASE("parse_bitext skips empty sides and counts them") {
    std::istringstream in("a ||| \nb ||| y\n ||| z\n");
    ParseStats stats;
    std::vector<SentencePair> pairs = parse_bitext(in, stats);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].src == std::vector<std::string>{"b"});
    CHECK(stats.skipped_empty == 2);
}

TEST_CASE("parse_bitext rejects lines with extra separators or none") {
    std::istringstream in("x y ||| a ||| b\nno separator here\nok ||| fine\n");
    ParseStats stats;
    std::vector<SentencePair> pairs = parse_bitext(in, stats);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].src == std::vector<std::string>{"ok"});
    REQUIRE(stats.errors.size() == 2);
    CHECK(stats.errors[0].first == 1);
    CHECK(stats.errors[1].first == 2);
}

TEST_CASE("ibm1: single-option corpus converges to certainty") {
    std::vector<SentencePair> corpus = {{{"a"}, {"x"}, 0}};
    TranslationTable t = ibm1_train(corpus, 1);
    CHECK(t.lookup("a", "x") == doctest::Approx(1.0));
}

TEST_CASE("ibm1 matches an independent EM transcription") {
    std::vector<SentencePair> corpus = {{{"a", "b"}, {"x", "y"}, 0}, {{"a"}, {"x"}, 1}};
    for (int iters : {1, 3, 5}) {
        TranslationTable mine = ibm1_train(corpus, iters);
        auto ref = tiny_em(corpus, iters);
        for (const auto& [e, row] : ref) {
            for (const auto& [f, p] : row) {
                CHECK(mine.lookup(e, f) == doctest::Approx(p).epsilon(1e-12));
            }
        }
    }
    // iteration 1 by hand: c(a,x) = 0.5 + 1, c(a,y) = 0.5
    TranslationTable t1 = ibm1_train(corpus, 1);
    CHECK(t1.lookup("a", "x") == doctest::Approx(0.75));
    CHECK(t1.lookup("a", "y") == doctest::Approx(0.25));

    TranslationTable t5 = ibm1_train(corpus, 5);
    CHECK(t5.lookup("a", "x") > t5.lookup("a", "y"));
}

TEST_CASE("ibm1 distributions normalize and likelihood is non-decreasing") {
    std::vector<SentencePair> corpus = {
        {{"the", "cat"}, {"le", "chat"}, 0},
        {{"the", "dog"}, {"le", "chien"}, 1},
        {{"a", "cat"}, {"un", "chat"}, 2},
    };
    double prev_ll = -1e300;
    for (int iters = 1; iters <= 6; ++iters) {
        TranslationTable t = ibm1_train(corpus, iters);
        for (const auto& [e, row] : t.prob) {
            double total = 0.0;
            for (const auto& [f, p] : row) {
                CHECK(p >= 0.0);
                total += p;
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        }
        const double ll = ibm1_log_likelihood(corpus, t);
        CHECK(ll >= prev_ll - 1e-12);
        prev_ll = ll;
    }
}

TEST_CASE("ibm1 rejects an empty corpus") {
    CHECK_THROWS_AS(ibm1_train({}, 3), DataError);
}

TEST_CASE("viterbi_align basics, tie-break, and direction asymmetry") {
    SentencePair pair{{"a"}, {"x"}, 0};
    TranslationTable t;
    t.prob["a"]["x"] = 1.0;
    AlignmentSet a = viterbi_align(pair, t, AlignDirection::SrcToTgt);
    CHECK(a.links == std::set<AlignmentLink>{{0, 0}});

    SentencePair tie_pair{{"a"}, {"x", "y"}, 0};
    TranslationTable tie;
    tie.prob["a"]["x"] = 0.5;
    tie.prob["a"]["y"] = 0.5;
    AlignmentSet tied = viterbi_align(tie_pair, tie, AlignDirection::SrcToTgt);
    CHECK(tied.links == std::set<AlignmentLink>{{0, 0}});

    SentencePair p2{{"a", "b"}, {"x", "y"}, 0};
    TranslationTable asym;
    asym.prob["a"]["x"] = 0.9;
    asym.prob["a"]["y"] = 0.1;
    asym.prob["b"]["x"] = 0.8;
    asym.prob["b"]["y"] = 0.2;
    AlignmentSet fwd = viterbi_align(p2, asym, AlignDirection::SrcToTgt);
    AlignmentSet bwd = viterbi_align(p2, asym, AlignDirection::TgtToSrc);
    CHECK(fwd.links == std::set<AlignmentLink>{{0, 0}, {1, 0}});
    CHECK(bwd.links == std::set<AlignmentLink>{{0, 0}, {1, 1}});
    CHECK(fwd.links != bwd.links);
}

TEST_CASE("gdfa: identical inputs come back unchanged") {
    AlignmentSet a = make_set(3, 3, {{0, 0}, {1, 2}, {2, 1}});
    AlignmentSet out = symmetrize_gdfa(a, a);
    CHECK(out.links == a.links);
}

TEST_CASE("gdfa: hand-traced example") {
    AlignmentSet fwd = make_set(2, 3, {{0, 0}, {1, 1}});
    AlignmentSet bwd = make_set(2, 3, {{0, 0}, {1, 2}});
    AlignmentSet out = symmetrize_gdfa(fwd, bwd);
    CHECK(out.links == std::set<AlignmentLink>{{0, 0}, {1, 1}});
    // the reference transcription agrees
    CHECK(gdfa_reference(fwd, bwd).links == out.links);
}

TEST_CASE("gdfa: empty intersection, no adjacency -> final-and builds a partial matching") {
    AlignmentSet fwd = make_set(4, 4, {{0, 0}, {0, 2}});
    AlignmentSet bwd = make_set(4, 4, {{2, 0}, {2, 2}});
    AlignmentSet out = symmetrize_gdfa(fwd, bwd);
    std::map<int, int> src_deg, tgt_deg;
    for (const AlignmentLink& l : out.links) {
        CHECK(++src_deg[l.src] <= 1);
        CHECK(++tgt_deg[l.tgt] <= 1);
    }
    CHECK(out.links == gdfa_reference(fwd, bwd).links);
}

TEST_CASE("gdfa dimension mismatch is rejected") {
    CHECK_THROWS_AS(symmetrize_gdfa(AlignmentSet(2, 2), AlignmentSet(2, 3)), std::invalid_argument);
}

TEST_CASE("gdfa properties on random cases: oracle equivalence, bounds, transpose symmetry") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const int m = 1 + static_cast<int>(rng.bounded(6));
        const int n = 1 + static_cast<int>(rng.bounded(6));
        const double density = 0.1 + 0.4 * rng.uniform();
        AlignmentSet fwd = random_set(m, n, density, rng);
        AlignmentSet bwd = random_set(m, n, density, rng);

        AlignmentSet out = symmetrize_gdfa(fwd, bwd);
        AlignmentSet ref = gdfa_reference(fwd, bwd);
        REQUIRE(out.links == ref.links);

        for (const AlignmentLink& l : out.links) {
            CHECK((fwd.contains(l.src, l.tgt) || bwd.contains(l.src, l.tgt)));
        }
        for (const AlignmentLink& l : fwd.links) {
            if (bwd.contains(l.src, l.tgt)) {
                CHECK(out.contains(l.src, l.tgt));
            }
        }

        AlignmentSet swapped = symmetrize_gdfa(transpose_set(bwd), transpose_set(fwd));
        CHECK(swapped.links == transpose_set(out).links);
    }
}

TEST_CASE("filter_one_to_one keeps degree-one links of the input") {
    AlignmentSet a = make_set(3, 3, {{0, 0}, {0, 1}, {1, 1}, {2, 2}});
    CHECK(filter_one_to_one(a).links == std::set<AlignmentLink>{{2, 2}});

    AlignmentSet matching = make_set(3, 3, {{0, 1}, {1, 0}, {2, 2}});
    CHECK(filter_one_to_one(matching).links == matching.links);

    CHECK(filter_one_to_one(AlignmentSet(3, 3)).links.empty());
}

TEST_CASE("drop_trivial removes byte-identical word links only") {
    SentencePair pair{{"Paris", "cat", "The"}, {"Paris", "chat", "the"}, 0};
    AlignmentSet a = make_set(3, 3, {{0, 0}, {1, 1}, {2, 2}});
    AlignmentSet out = drop_trivial(a, pair);
    CHECK(out.links == std::set<AlignmentLink>{{1, 1}, {2, 2}}); // case differs: kept
}

TEST_CASE("filters are idempotent and one-to-one output is a matching (random cases)") {
    Rng rng(99);
    std::vector<std::string> words = {"aa", "bb", "cc", "dd", "ee", "ff"};
    for (int trial = 0; trial < 300; ++trial) {
        const int m = 1 + static_cast<int>(rng.bounded(6));
        const int n = 1 + static_cast<int>(rng.bounded(6));
        AlignmentSet a = random_set(m, n, 0.35, rng);

        AlignmentSet once = filter_one_to_one(a);
        AlignmentSet twice = filter_one_to_one(once);
        CHECK(once.links == twice.links);
        std::map<int, int> sdeg, tdeg;
        for (const AlignmentLink& l : once.links) {
            CHECK(++sdeg[l.src] <= 1);
            CHECK(++tdeg[l.tgt] <= 1);
        }

        SentencePair pair;
        pair.id = trial;
        for (int i = 0; i < m; ++i) {
            pair.src.push_back(words[rng.bounded(words.size())]);
        }
        for (int j = 0; j < n; ++j) {
            pair.tgt.push_back(words[rng.bounded(words.size())]);
        }
        AlignmentSet dropped = drop_trivial(a, pair);
        CHECK(drop_trivial(dropped, pair).links == dropped.links);
        for (const AlignmentLink& l : dropped.links) {
            CHECK(pair.src[static_cast<std::size_t>(l.src)] != pair.tgt[static_cast<std::size_t>(l.tgt)]);
        }
        for (const AlignmentLink& l : a.links) {
            const bool trivial =
                pair.src[static_cast<std::size_t>(l.src)] == pair.tgt[static_cast<std::size_t>(l.tgt)];
            CHECK(dropped.contains(l.src, l.tgt) == !trivial);
        }
    }
}

TEST_CASE("pharaoh parse and emit") {
    AlignmentSet a = parse_pharaoh("0-0 1-2", 2, 3);
    CHECK(a.links == std::set<AlignmentLink>{{0, 0}, {1, 2}});
    CHECK(parse_pharaoh("", 2, 3).links.empty());
    CHECK_THROWS_AS(parse_pharaoh("3-0", 2, 3), DataError);
    CHECK_THROWS_AS(parse_pharaoh("1:0", 2, 3), DataError);
    CHECK_THROWS_AS(parse_pharaoh("x-0", 2, 3), DataError);
    CHECK(emit_pharaoh(a) == "0-0 1-2");
}

TEST_CASE("pharaoh round-trips on random alignment sets") {
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 1 + static_cast<int>(rng.bounded(8));
        const int n = 1 + static_cast<int>(rng.bounded(8));
        AlignmentSet a = random_set(m, n, 0.3, rng);
        AlignmentSet b = parse_pharaoh(emit_pharaoh(a), m, n);
        CHECK(a.links == b.links);
    }
}

TEST_CASE("align_corpus is identical across worker counts") {
    Rng rng(555);
    std::vector<std::string> src_words = {"aa", "bb", "cc", "dd", "ee", "ff", "gg"};
    std::vector<std::string> tgt_words = {"pp", "qq", "rr", "ss", "tt", "uu", "vv"};
    std::vector<SentencePair> corpus;
    for (int s = 0; s < 30; ++s) {
        SentencePair pair;
        pair.id = s;
        for (int k = 0; k < 4; ++k) {
            const std::size_t w = rng.bounded(src_words.size());
            pair.src.push_back(src_words[w]);
            pair.tgt.push_back(tgt_words[w]);
        }
        rng.shuffle(pair.tgt);
        corpus.push_back(std::move(pair));
    }

    PipelineOptions serial;
    PipelineCounts c1;
    std::vector<AlignedWordPair> a = align_corpus(corpus, serial, c1);

    PipelineOptions threaded;
    threaded.workers = 4;
    PipelineCounts c2;
    std::vector<AlignedWordPair> b = align_corpus(corpus, threaded, c2);

    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].pair_id == b[k].pair_id);
        CHECK(a[k].src_idx == b[k].src_idx);
        CHECK(a[k].tgt_idx == b[k].tgt_idx);
        CHECK(a[k].src_word == b[k].src_word);
        CHECK(a[k].tgt_word == b[k].tgt_word);
    }
    CHECK(c1.pairs_out == c2.pairs_out);
}

TEST_CASE("aligned pair file round-trips") {
    std::vector<AlignedWordPair> pairs = {
        {0, 1, 2, "cat", "chat"},
        {7, 0, 0, "dog", "chien"},
    };
    std::ostringstream out;
    write_aligned_pairs(out, pairs);
    std::istringstream in(out.str());
    std::vector<AlignedWordPair> back = read_aligned_pairs(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].pair_id == 0);
    CHECK(back[0].src_word == "cat");
    CHECK(back[1].tgt_word == "chien");
    CHECK(back[1].pair_id == 7);
}
