#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace montage {

// Canonical text form used before any matching: Unicode NFC, case fold,
// whitespace runs collapsed to one space, ends trimmed.
std::string normalize_text(std::string_view input);

// Tokens of a normalized string: maximal runs of alphanumerics (non-ASCII
// bytes count as word characters).
std::vector<std::string> tokenize(std::string_view normalized);

std::set<std::string> token_set(std::string_view raw_text);

// Token-set Jaccard similarity on normalized text. Two empty sets are
// identical (1.0); one empty set shares nothing (0.0).
double token_jaccard(const std::set<std::string>& a, const std::set<std::string>& b);
double token_jaccard(std::string_view raw_a, std::string_view raw_b);

// Split prose into sentence-ish pieces, preserving order. Used by the
// no_editor slicer; grouping to at most `max_parts` keeps slices balanced.
std::vector<std::string> split_sentences(std::string_view text);
std::vector<std::string> slice_into_parts(std::string_view text, std::size_t max_parts);

// Epoch seconds -> "YYYY-MM-DDTHH:MM:SSZ" (UTC, locale-free).
std::string format_utc(std::int64_t epoch_seconds);

} // namespace montage
