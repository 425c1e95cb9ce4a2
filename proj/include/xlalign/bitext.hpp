#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace xlalign {

struct SentencePair {
    std::vector<std::string> src;
    std::vector<std::string> tgt;
    long id = 0;
};

struct ParseStats {
    long lines_read = 0;
    long skipped_empty = 0;
    std::vector<std::pair<long, std::string>> errors; // (1-based line, message)
};

/// Parses "src ||| tgt" lines, whitespace-tokenizing each side. Lines with an
/// empty side are skipped and counted; lines with no separator, or with a
/// second separator inside either side, are collected as per-line errors.
/// Pair ids number the accepted pairs from 0 in input order.
std::vector<SentencePair> parse_bitext(std::istream& in, ParseStats& stats);

struct AlignmentLink {
    int src = 0;
    int tgt = 0;
    auto operator<=>(const AlignmentLink&) const = default;
};

/// Set of links for one sentence pair. Links are kept sorted and unique;
/// add() validates ranges.
struct AlignmentSet {
    int src_len = 0;
    int tgt_len = 0;
    std::set<AlignmentLink> links;

    AlignmentSet() = default;
    AlignmentSet(int src_len, int tgt_len) : src_len(src_len), tgt_len(tgt_len) {}

    void add(int src, int tgt);
    bool contains(int src, int tgt) const { return links.count({src, tgt}) != 0; }
    std::size_t size() const { return links.size(); }
};

/// Parses Pharaoh "i-j" tokens (0-based). Throws DataError on malformed
/// tokens or out-of-range indices.
AlignmentSet parse_pharaoh(const std::string& line, int src_len, int tgt_len);

/// Canonical form: links sorted by (src, tgt), space-separated.
std::string emit_pharaoh(const AlignmentSet& aset);

/// A filtered alignment link together with its surface words.
struct AlignedWordPair {
    long pair_id = 0;
    int src_idx = 0;
    int tgt_idx = 0;
    std::string src_word;
    std::string tgt_word;
};

/// Tab-separated: pair_id, src_idx, tgt_idx, src_word, tgt_word.
void write_aligned_pairs(std::ostream& out, const std::vector<AlignedWordPair>& pairs);
std::vector<AlignedWordPair> read_aligned_pairs(std::istream& in);

} // namespace xlalign
