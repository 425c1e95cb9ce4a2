#pragma once

#include <vector>

#include "xlalign/bitext.hpp"

namespace xlalign {

struct PipelineOptions {
    int em_iterations = 5;
    int workers = 1; // per-sentence alignment stages only
};

struct PipelineCounts {
    long pairs_in = 0;
    long symmetrized_links = 0;
    long one_to_one_links = 0;
    long trivial_dropped = 0;
    long pairs_out = 0; // links surviving every filter
};

/// Full alignment path over a parsed corpus: lexical EM, Viterbi alignment
/// in both directions, grow-diag-final-and, one-to-one filter, then the
/// trivial-link filter. Output order follows (pair id, src, tgt).
std::vector<AlignedWordPair> align_corpus(const std::vector<SentencePair>& pairs,
                                          const PipelineOptions& options, PipelineCounts& counts);

/// Same tail of the pipeline but with externally produced alignments, one
/// forward and one backward set per sentence pair (e.g. parsed Pharaoh
/// sidecar files). Throws DataError when the counts do not match.
std::vector<AlignedWordPair> align_corpus_external(const std::vector<SentencePair>& pairs,
                                                   const std::vector<AlignmentSet>& forward,
                                                   const std::vector<AlignmentSet>& backward,
                                                   PipelineCounts& counts);

} // namespace xlalign
