#include "xlalign/bitext.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "xlalign/errors.hpp"

namespace xlalign {

namespace {

const std::string kSeparator = " ||| ";

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream iss(text);
    std::string tok;
    while (iss >> tok) {
        tokens.push_back(tok);
    }
    return tokens;
}

} // namespace

std::vector<SentencePair> parse_bitext(std::istream& in, ParseStats& stats) {
    std::vector<SentencePair> pairs;
    std::string line;
    long line_no = 0;
    long next_id = 0;
    while (std::getline(in, line)) {
        ++line_no;
        ++stats.lines_read;
        const std::size_t sep = line.find(kSeparator);
        if (sep == std::string::npos) {
            stats.errors.emplace_back(line_no, "missing ' ||| ' separator");
            continue;
        }
        const std::string src_text = line.substr(0, sep);
        const std::string tgt_text = line.substr(sep + kSeparator.size());
        // A second separator means the line shape is ambiguous; reject it
        // rather than treat a bare "|||" as an ordinary token.
        if (tgt_text.find(kSeparator) != std::string::npos) {
            stats.errors.emplace_back(line_no, "multiple ' ||| ' separators");
            continue;
        }
        SentencePair pair;
        pair.src = tokenize(src_text);
        pair.tgt = tokenize(tgt_text);
        if (pair.src.empty() || pair.tgt.empty()) {
            ++stats.skipped_empty;
            continue;
        }
        pair.id = next_id++;
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

void AlignmentSet::add(int src, int tgt) {
    if (src < 0 || src >= src_len || tgt < 0 || tgt >= tgt_len) {
        throw DataError("alignment link " + std::to_string(src) + "-" + std::to_string(tgt) +
                        " out of range for " + std::to_string(src_len) + "x" + std::to_string(tgt_len));
    }
    links.insert({src, tgt});
}

AlignmentSet parse_pharaoh(const std::string& line, int src_len, int tgt_len) {
    AlignmentSet aset(src_len, tgt_len);
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) {
        const std::size_t dash = tok.find('-');
        if (dash == std::string::npos || dash == 0 || dash + 1 == tok.size()) {
            throw DataError("pharaoh: malformed token '" + tok + "'");
        }
        int src = 0;
        int tgt = 0;
        try {
            std::size_t used = 0;
            src = std::stoi(tok.substr(0, dash), &used);
            if (used != dash) {
                throw std::invalid_argument("");
            }
            tgt = std::stoi(tok.substr(dash + 1), &used);
            if (used != tok.size() - dash - 1) {
                throw std::invalid_argument("");
            }
        } catch (const std::exception&) {
            throw DataError("pharaoh: malformed token '" + tok + "'");
        }
        aset.add(src, tgt);
    }
    return aset;
}

std::string emit_pharaoh(const AlignmentSet& aset) {
    std::string out;
    for (const AlignmentLink& link : aset.links) { // std::set: already (src, tgt) sorted
        if (!out.empty()) {
            out += ' ';
        }
        out += std::to_string(link.src) + "-" + std::to_string(link.tgt);
    }
    return out;
}

void write_aligned_pairs(std::ostream& out, const std::vector<AlignedWordPair>& pairs) {
    for (const AlignedWordPair& p : pairs) {
        out << p.pair_id << '\t' << p.src_idx << '\t' << p.tgt_idx << '\t'
            << p.src_word << '\t' << p.tgt_word << '\n';
    }
}

std::vector<AlignedWordPair> read_aligned_pairs(std::istream& in) {
    std::vector<AlignedWordPair> pairs;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream iss(line);
        AlignedWordPair p;
        char tab;
        if (!(iss >> p.pair_id >> p.src_idx >> p.tgt_idx)) {
            throw DataError("aligned pairs: malformed line " + std::to_string(line_no));
        }
        iss.get(tab);
        if (!std::getline(iss, p.src_word, '\t') || !std::getline(iss, p.tgt_word)) {
            throw DataError("aligned pairs: malformed line " + std::to_string(line_no));
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

} // namespace xlalign
