#pragma once

#include "einsum.h"

// Line-oriented graph text. '#' starts a comment, blank lines are
// skipped. Names and labels are [A-Za-z_][A-Za-z0-9_.]*.
//
//   input  <Name> : [n1, n2, ...]
//   <Name>[l,...] = sum[j,...] <joinop>(<A>[...], <B>[...])
//   <Name>[l,...] = max[j,...] <joinop>(<A>[...], <B>[...])
//   <Name>[l,...] = <joinop>(<A>[...], <B>[...])
//   <Name>[l,...] = map <unaryop>(<A>[...])
//   <Name>[l,...] = sum[j,...] map <unaryop>(<A>[...])
//   output <Name>
//
// joinop:  mul add sub div sqdiff absdiff
// unaryop: relu exp neg identity scale(<float>)
//
// Bounds of non-input vertices are inferred from labels. Violations
// (repeated labels within a tensor, bound mismatches on a shared label,
// cycles, undeclared inputs) raise parse_error_t with line and column.
eingraph_t parse_eingraph(string const& text);

eingraph_t parse_eingraph_file(string const& path);
