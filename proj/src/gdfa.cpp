#include "xlalign/gdfa.hpp"

#include <map>
#include <stdexcept>
#include <vector>

namespace xlalign {

AlignmentSet symmetrize_gdfa(const AlignmentSet& forward, const AlignmentSet& backward) {
    if (forward.src_len != backward.src_len || forward.tgt_len != backward.tgt_len) {
        throw std::invalid_argument("symmetrize_gdfa: dimension mismatch");
    }
    AlignmentSet out(forward.src_len, forward.tgt_len);

    std::vector<AlignmentLink> union_links;
    for (const AlignmentLink& l : forward.links) {
        union_links.push_back(l);
        if (backward.contains(l.src, l.tgt)) {
            out.links.insert(l);
        }
    }
    for (const AlignmentLink& l : backward.links) {
        if (!forward.contains(l.src, l.tgt)) {
            union_links.push_back(l);
        }
    }
    std::sort(union_links.begin(), union_links.end());

    std::vector<bool> src_aligned(static_cast<std::size_t>(out.src_len), false);
    std::vector<bool> tgt_aligned(static_cast<std::size_t>(out.tgt_len), false);
    for (const AlignmentLink& l : out.links) {
        src_aligned[static_cast<std::size_t>(l.src)] = true;
        tgt_aligned[static_cast<std::size_t>(l.tgt)] = true;
    }

    auto has_neighbor = [&out](const AlignmentLink& l) {
        for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj == 0) {
                    continue;
                }
                if (out.contains(l.src + di, l.tgt + dj)) {
                    return true;
                }
            }
        }
        return false;
    };

    // grow
    bool changed = true;
    while (changed) {
        changed = false;
        for (const AlignmentLink& l : union_links) {
            if (out.contains(l.src, l.tgt)) {
                continue;
            }
            if (src_aligned[static_cast<std::size_t>(l.src)] ||
                tgt_aligned[static_cast<std::size_t>(l.tgt)]) {
                continue;
            }
            if (!has_neighbor(l)) {
                continue;
            }
            out.links.insert(l);
            src_aligned[static_cast<std::size_t>(l.src)] = true;
            tgt_aligned[static_cast<std::size_t>(l.tgt)] = true;
            changed = true;
        }
    }

    // final-and
    for (const AlignmentLink& l : union_links) {
        if (src_aligned[static_cast<std::size_t>(l.src)] ||
            tgt_aligned[static_cast<std::size_t>(l.tgt)]) {
            continue;
        }
        out.links.insert(l);
        src_aligned[static_cast<std::size_t>(l.src)] = true;
        tgt_aligned[static_cast<std::size_t>(l.tgt)] = true;
    }
    return out;
}

AlignmentSet filter_one_to_one(const AlignmentSet& aset) {
    std::map<int, int> src_degree, tgt_degree;
    for (const AlignmentLink& l : aset.links) {
        ++src_degree[l.src];
        ++tgt_degree[l.tgt];
    }
    AlignmentSet out(aset.src_len, aset.tgt_len);
    for (const AlignmentLink& l : aset.links) {
        if (src_degree[l.src] == 1 && tgt_degree[l.tgt] == 1) {
            out.links.insert(l);
        }
    }
    return out;
}

AlignmentSet drop_trivial(const AlignmentSet& aset, const SentencePair& pair) {
    if (aset.src_len > static_cast<int>(pair.src.size()) ||
        aset.tgt_len > static_cast<int>(pair.tgt.size())) {
        throw std::invalid_argument("drop_trivial: alignment larger than sentence pair");
    }
    AlignmentSet out(aset.src_len, aset.tgt_len);
    for (const AlignmentLink& l : aset.links) {
        if (pair.src[static_cast<std::size_t>(l.src)] != pair.tgt[static_cast<std::size_t>(l.tgt)]) {
            out.links.insert(l);
        }
    }
    return out;
}

} // namespace xlalign
