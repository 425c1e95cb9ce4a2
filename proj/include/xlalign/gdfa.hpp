#pragma once

#include "xlalign/bitext.hpp"

namespace xlalign {

/// grow-diag-final-and symmetrization of a forward and a backward alignment
/// over the same sentence pair:
///
///   1. start from the intersection;
///   2. grow: scan union links in (src, tgt) lexicographic order until a
///      fixed point, adding a link when it is an 8-neighbour of an existing
///      link and both of its words are still unaligned;
///   3. final-and: add remaining union links whose words are both still
///      unaligned, same scan order, no adjacency requirement.
///
/// The output always contains the intersection and is contained in the
/// union. Throws std::invalid_argument on dimension mismatch.
AlignmentSet symmetrize_gdfa(const AlignmentSet& forward, const AlignmentSet& backward);

/// Keeps exactly the links whose source index and target index each occur in
/// exactly one link of the input; the result is a partial matching.
AlignmentSet filter_one_to_one(const AlignmentSet& aset);

/// Removes links whose source and target word strings are byte-identical
/// (no case folding or normalization).
AlignmentSet drop_trivial(const AlignmentSet& aset, const SentencePair& pair);

} // namespace xlalign
