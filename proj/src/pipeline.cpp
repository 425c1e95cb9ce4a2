#include "xlalign/pipeline.hpp"

#include <thread>

#include "xlalign/errors.hpp"
#include "xlalign/gdfa.hpp"
#include "xlalign/ibm1.hpp"

namespace xlalign {

namespace {

// Symmetrize and filter one sentence pair; appends surviving links.
void finish_pair(const SentencePair& pair, const AlignmentSet& fwd, const AlignmentSet& bwd,
                 std::vector<AlignedWordPair>& out, PipelineCounts& counts) {
    const AlignmentSet sym = symmetrize_gdfa(fwd, bwd);
    const AlignmentSet one2one = filter_one_to_one(sym);
    const AlignmentSet kept = drop_trivial(one2one, pair);
    counts.symmetrized_links += static_cast<long>(sym.size());
    counts.one_to_one_links += static_cast<long>(one2one.size());
    counts.trivial_dropped += static_cast<long>(one2one.size() - kept.size());
    counts.pairs_out += static_cast<long>(kept.size());
    for (const AlignmentLink& l : kept.links) {
        out.push_back({pair.id, l.src, l.tgt,
                       pair.src[static_cast<std::size_t>(l.src)],
                       pair.tgt[static_cast<std::size_t>(l.tgt)]});
    }
}

} // namespace

std::vector<AlignedWordPair> align_corpus(const std::vector<SentencePair>& pairs,
                                          const PipelineOptions& options, PipelineCounts& counts) {
    counts.pairs_in = static_cast<long>(pairs.size());
    const TranslationTable table = ibm1_train(pairs, options.em_iterations);

    // Per-sentence Viterbi passes are independent; chunk them over workers
    // and merge in sentence order so the output is identical either way.
    std::vector<AlignmentSet> fwd(pairs.size()), bwd(pairs.size());
    const int workers = std::max(1, options.workers);
    if (workers == 1 || pairs.size() < 2) {
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            fwd[k] = viterbi_align(pairs[k], table, AlignDirection::SrcToTgt);
            bwd[k] = viterbi_align(pairs[k], table, AlignDirection::TgtToSrc);
        }
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (pairs.size() + static_cast<std::size_t>(workers) - 1) /
                                  static_cast<std::size_t>(workers);
        for (int w = 0; w < workers; ++w) {
            const std::size_t begin = static_cast<std::size_t>(w) * chunk;
            const std::size_t end = std::min(pairs.size(), begin + chunk);
            if (begin >= end) {
                break;
            }
            pool.emplace_back([&, begin, end]() {
                for (std::size_t k = begin; k < end; ++k) {
                    fwd[k] = viterbi_align(pairs[k], table, AlignDirection::SrcToTgt);
                    bwd[k] = viterbi_align(pairs[k], table, AlignDirection::TgtToSrc);
                }
            });
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }

    std::vector<AlignedWordPair> out;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        finish_pair(pairs[k], fwd[k], bwd[k], out, counts);
    }
    return out;
}

std::vector<AlignedWordPair> align_corpus_external(const std::vector<SentencePair>& pairs,
                                                   const std::vector<AlignmentSet>& forward,
                                                   const std::vector<AlignmentSet>& backward,
                                                   PipelineCounts& counts) {
    if (forward.size() != pairs.size() || backward.size() != pairs.size()) {
        throw DataError("external alignments: expected " + std::to_string(pairs.size()) +
                        " sets, got " + std::to_string(forward.size()) + "/" +
                        std::to_string(backward.size()));
    }
    counts.pairs_in = static_cast<long>(pairs.size());
    std::vector<AlignedWordPair> out;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        finish_pair(pairs[k], forward[k], backward[k], out, counts);
    }
    return out;
}

} // namespace xlalign
