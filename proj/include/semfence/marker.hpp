/* Copyright 2024 The Semfence Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef SEMFENCE_MARKER_HPP
#define SEMFENCE_MARKER_HPP

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semfence/text.hpp"

namespace semfence {

// One aligned component: index N plus its spans on the NL and output sides.
// A component may map to several non-continuous output segments (or none).
struct ComponentAlignment {
  int index = 0;
  std::vector<Span> nl_segments;
  std::vector<Span> out_segments;
};

struct MarkedPair {
  std::string nl;
  std::string out;
};

// Wraps every segment of component N as "[sepN] segment [/sepN]"; segments of
// a multi-segment component repeat the same pair. Text outside segments is
// kept, markers are flanked by single spaces. Throws ValidationError on
// overlapping spans, out-of-bounds spans, or a non-contiguous index set.
MarkedPair mark_pair(std::string_view nl, std::string_view out,
                     const std::vector<ComponentAlignment>& alignments);

struct StripResult {
  std::string plain;  // marker-free text, whitespace-normalized
  std::vector<std::pair<int, Span>> segments;  // spans into plain
  std::vector<std::string> diagnostics;        // malformed-marker notes
};

// Removes all marker tokens. Well-formed pairs become recovered segments;
// malformed markers are dropped greedily and reported as diagnostics so that
// imperfect model output never fails.
StripResult strip_markers(std::string_view text);

struct MarkerDiagnostics {
  bool balanced = true;
  std::vector<std::string> issues;
};

// Checks pairing, nesting, and that component indices form 0..K-1 in order
// of first appearance.
MarkerDiagnostics validate_markers(std::string_view text);

std::string open_marker(int index);
std::string close_marker(int index);

// The exact marker vocabulary for components 0..component_count-1, in the
// order [sep0], [/sep0], [sep1], ...
std::vector<std::string> marker_tokens(int component_count);

}  // namespace semfence

#endif  // SEMFENCE_MARKER_HPP
