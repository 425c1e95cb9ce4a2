#include "xlalign/ibm1.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "xlalign/errors.hpp"

namespace xlalign {

namespace {

struct Interner {
    std::unordered_map<std::string, int> ids;
    std::vector<std::string> words;

    int intern(const std::string& w) {
        auto it = ids.find(w);
        if (it != ids.end()) {
            return it->second;
        }
        const int id = static_cast<int>(words.size());
        ids.emplace(w, id);
        words.push_back(w);
        return id;
    }
};

} // namespace

TranslationTable ibm1_train(const std::vector<SentencePair>& pairs, int iterations) {
    if (pairs.empty()) {
        throw DataError("ibm1_train: empty corpus");
    }
    if (iterations < 1) {
        throw std::invalid_argument("ibm1_train: iterations must be >= 1");
    }

    Interner src_words, tgt_words;
    std::vector<std::vector<int>> src_ids(pairs.size()), tgt_ids(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        for (const std::string& w : pairs[k].src) {
            src_ids[k].push_back(src_words.intern(w));
        }
        for (const std::string& w : pairs[k].tgt) {
            tgt_ids[k].push_back(tgt_words.intern(w));
        }
    }

    // Fixed sparsity: for each source word, the sorted list of co-occurring
    // target words. Probabilities live in a parallel array.
    const std::size_t n_src = src_words.words.size();
    std::vector<std::vector<int>> cand(n_src);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        for (int e : src_ids[k]) {
            for (int f : tgt_ids[k]) {
                cand[static_cast<std::size_t>(e)].push_back(f);
            }
        }
    }
    for (auto& c : cand) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }

    std::vector<std::vector<double>> prob(n_src);
    for (std::size_t e = 0; e < n_src; ++e) {
        prob[e].assign(cand[e].size(), 1.0 / static_cast<double>(cand[e].size()));
    }

    auto slot = [&](int e, int f) {
        const auto& c = cand[static_cast<std::size_t>(e)];
        return static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), f) - c.begin());
    };

    std::vector<std::vector<double>> count(n_src);
    for (int iter = 0; iter < iterations; ++iter) {
        for (std::size_t e = 0; e < n_src; ++e) {
            count[e].assign(cand[e].size(), 0.0);
        }
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            for (int f : tgt_ids[k]) {
                double z = 0.0;
                for (int e : src_ids[k]) {
                    z += prob[static_cast<std::size_t>(e)][slot(e, f)];
                }
                for (int e : src_ids[k]) {
                    const std::size_t s = slot(e, f);
                    count[static_cast<std::size_t>(e)][s] +=
                        prob[static_cast<std::size_t>(e)][s] / z;
                }
            }
        }
        for (std::size_t e = 0; e < n_src; ++e) {
            double total = 0.0;
            for (double c : count[e]) {
                total += c;
            }
            for (std::size_t s = 0; s < count[e].size(); ++s) {
                prob[e][s] = count[e][s] / total;
            }
        }
    }

    TranslationTable table;
    for (std::size_t e = 0; e < n_src; ++e) {
        auto& row = table.prob[src_words.words[e]];
        for (std::size_t s = 0; s < cand[e].size(); ++s) {
            row[tgt_words.words[static_cast<std::size_t>(cand[e][s])]] = prob[e][s];
        }
    }
    return table;
}

double ibm1_log_likelihood(const std::vector<SentencePair>& pairs, const TranslationTable& table) {
    double ll = 0.0;
    for (const SentencePair& pair : pairs) {
        for (const std::string& f : pair.tgt) {
            double z = 0.0;
            for (const std::string& e : pair.src) {
                z += table.lookup(e, f);
            }
            ll += std::log(z / static_cast<double>(pair.src.size()));
        }
    }
    return ll;
}

AlignmentSet viterbi_align(const SentencePair& pair, const TranslationTable& table,
                           AlignDirection direction) {
    AlignmentSet aset(static_cast<int>(pair.src.size()), static_cast<int>(pair.tgt.size()));
    if (direction == AlignDirection::SrcToTgt) {
        for (int i = 0; i < aset.src_len; ++i) {
            int best = 0;
            double best_p = -1.0;
            for (int j = 0; j < aset.tgt_len; ++j) {
                const double p = table.lookup(pair.src[static_cast<std::size_t>(i)],
                                              pair.tgt[static_cast<std::size_t>(j)]);
                if (p > best_p) {
                    best_p = p;
                    best = j;
                }
            }
            aset.add(i, best);
        }
    } else {
        for (int j = 0; j < aset.tgt_len; ++j) {
            int best = 0;
            double best_p = -1.0;
            for (int i = 0; i < aset.src_len; ++i) {
                const double p = table.lookup(pair.src[static_cast<std::size_t>(i)],
                                              pair.tgt[static_cast<std::size_t>(j)]);
                if (p > best_p) {
                    best_p = p;
                    best = i;
                }
            }
            aset.add(best, j);
        }
    }
    return aset;
}

} // namespace xlalign
