#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace docaff {

enum class SyntaxBin { Upper, Lower, Mixed };

enum class SemanticTag { Number, Price, Time, Date, Ordinal, Percent, Plain, None };

// Token shapes used by the content encoder.
enum class TokenShape { AllDigits, NumericWithSeparators, Capitalized, AllCaps, AllLower, Mixed };

enum class CharClass { Lower, Upper, Digit, Currency, Punct, Other };

inline constexpr std::size_t kCharClassCount = 6;
inline constexpr std::size_t kTokenShapeCount = 6;

std::string_view to_string(SyntaxBin bin) noexcept;
std::string_view to_string(SemanticTag tag) noexcept;
std::optional<SemanticTag> semantic_tag_from_string(std::string_view name) noexcept;

// Decodes UTF-8 leniently; invalid bytes map to U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view text);

CharClass classify(char32_t cp) noexcept;

// Letters only decide the bin; words without letters are Mixed.
SyntaxBin syntax_bin(std::string_view text);

// First matching rule wins: Price, Percent, Time, Date, Ordinal, Number, Plain, None.
SemanticTag semantic_tag(std::string_view text);

TokenShape token_shape(std::string_view text);

// Frequency-normalized counts over CharClass (sums to 1 for non-empty text).
std::array<double, kCharClassCount> char_class_histogram(std::string_view text);

// Character-class share of uppercase letters among all codepoints.
double uppercase_ratio(std::string_view text);

// Number of codepoints.
std::size_t codepoint_count(std::string_view text);

// Characterization of a contextual line from its members' tags: the unique
// entity tag, Plain when there is none, or nullopt for noisy lines.
std::optional<SemanticTag> characterize_line(std::span<const SemanticTag> tags);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

std::string trim(std::string_view s);

}  // namespace docaff
