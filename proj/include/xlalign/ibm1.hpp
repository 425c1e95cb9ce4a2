#pragma once

#include <map>
#include <string>
#include <vector>

#include "xlalign/bitext.hpp"

namespace xlalign {

/// Sparse lexical translation probabilities p(target word | source word).
/// For every source word the stored probabilities are non-negative and sum
/// to 1 over its observed targets. Unseen combinations fall back to a
/// smoothing floor.
struct TranslationTable {
    static constexpr double kFloor = 1e-9;

    std::map<std::string, std::map<std::string, double>> prob;

    double lookup(const std::string& src_word, const std::string& tgt_word) const {
        auto row = prob.find(src_word);
        if (row == prob.end()) {
            return kFloor;
        }
        auto cell = row->second.find(tgt_word);
        return cell == row->second.end() ? kFloor : cell->second;
    }
};

/// EM for the lexical translation model, uniform initialization over
/// co-occurring targets. Deterministic given the input order. Throws
/// DataError on an empty corpus or iterations < 1.
TranslationTable ibm1_train(const std::vector<SentencePair>& pairs, int iterations);

/// Corpus log-likelihood sum_pairs sum_tgt log( mean_src p(tgt | src) );
/// non-decreasing across EM iterations.
double ibm1_log_likelihood(const std::vector<SentencePair>& pairs, const TranslationTable& table);

enum class AlignDirection {
    SrcToTgt, // each source word links to its argmax target word
    TgtToSrc, // each target word links to its argmax source word
};

/// One link per word on the aligned-from side; ties break toward the lowest
/// index. Unknown words fall back to the smoothing floor, so every word gets
/// a link.
AlignmentSet viterbi_align(const SentencePair& pair, const TranslationTable& table,
                           AlignDirection direction);

} // namespace xlalign
