#include "xlalign/selfcheck.hpp"

#include <stdexcept>

namespace xlalign {

// Literal grow-diag-final-and over dense boolean grids. Written against the
// textual description of the heuristic, not against the set-based
// implementation: intersection seed, neighbourhood growth over union points
// whose row and column are both free, then a final sweep admitting any
// remaining union point with free row and column.
AlignmentSet gdfa_reference(const AlignmentSet& forward, const AlignmentSet& backward) {
    if (forward.src_len != backward.src_len || forward.tgt_len != backward.tgt_len) {
        throw std::invalid_argument("gdfa_reference: dimension mismatch");
    }
    const int rows = forward.src_len;
    const int cols = forward.tgt_len;

    std::vector<std::vector<bool>> fwd(rows, std::vector<bool>(cols, false));
    std::vector<std::vector<bool>> bwd(rows, std::vector<bool>(cols, false));
    std::vector<std::vector<bool>> chosen(rows, std::vector<bool>(cols, false));
    for (const AlignmentLink& l : forward.links) {
        fwd[l.src][l.tgt] = true;
    }
    for (const AlignmentLink& l : backward.links) {
        bwd[l.src][l.tgt] = true;
    }

    std::vector<bool> row_used(rows, false), col_used(cols, false);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (fwd[i][j] && bwd[i][j]) {
                chosen[i][j] = true;
                row_used[i] = true;
                col_used[j] = true;
            }
        }
    }

    auto in_union = [&](int i, int j) { return fwd[i][j] || bwd[i][j]; };
    auto touches_chosen = [&](int i, int j) {
        for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
                if (di == 0 && dj == 0) {
                    continue;
                }
                const int ni = i + di;
                const int nj = j + dj;
                if (ni >= 0 && ni < rows && nj >= 0 && nj < cols && chosen[ni][nj]) {
                    return true;
                }
            }
        }
        return false;
    };

    for (bool grew = true; grew;) {
        grew = false;
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                if (chosen[i][j] || !in_union(i, j) || row_used[i] || col_used[j]) {
                    continue;
                }
                if (touches_chosen(i, j)) {
                    chosen[i][j] = true;
                    row_used[i] = true;
                    col_used[j] = true;
                    grew = true;
                }
            }
        }
    }

    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (!chosen[i][j] && in_union(i, j) && !row_used[i] && !col_used[j]) {
                chosen[i][j] = true;
                row_used[i] = true;
                col_used[j] = true;
            }
        }
    }

    AlignmentSet out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (chosen[i][j]) {
                out.links.insert({i, j});
            }
        }
    }
    return out;
}

} // namespace xlalign
