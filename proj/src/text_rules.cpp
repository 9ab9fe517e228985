#include "docaff/text_rules.hpp"

#include <algorithm>
#include <regex>
#include <set>

namespace docaff {

namespace {

bool is_currency(char32_t cp) {
  return cp == U'$' || cp == U'€' || cp == U'£' || cp == U'¥' || cp == U'¢' ||
         cp == U'₹';
}

bool is_upper(char32_t cp) {
  return (cp >= U'A' && cp <= U'Z') || (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7);
}

bool is_lower(char32_t cp) {
  return (cp >= U'a' && cp <= U'z') || (cp >= 0xDF && cp <= 0xFF && cp != 0xF7);
}

bool is_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

bool is_punct(char32_t cp) {
  return cp < 0x80 && cp > 0x20 && !is_digit(cp) && !is_upper(cp) && !is_lower(cp) && !is_currency(cp);
}

// Regexes run on the raw UTF-8 bytes; multi-byte currency symbols appear as
// alternations.
const std::regex& price_re() {
  static const std::regex re(
      "^(?:(?:\\$|\xE2\x82\xAC|\xC2\xA3|\xC2\xA5)\\s?[0-9][0-9,]*(?:\\.[0-9]+)?"
      "|[0-9][0-9,]*(?:\\.[0-9]+)?\\s?(?:\\$|\xE2\x82\xAC|\xC2\xA3|\xC2\xA5))$");
  return re;
}
const std::regex& percent_re() {
  static const std::regex re("^[0-9]+(?:[.,][0-9]+)?%$");
  return re;
}
const std::regex& time_re() {
  static const std::regex re("^[0-9]{1,2}:[0-9]{2}(?:\\s?[aApP][mM])?$");
  return re;
}
const std::regex& date_re() {
  static const std::regex re("^[0-9]{1,2}[/.-][0-9]{1,2}(?:[/.-][0-9]{2,4})?$");
  return re;
}
const std::regex& ordinal_re() {
  static const std::regex re("^[0-9]+(?:st|nd|rd|th|ST|ND|RD|TH)$");
  return re;
}
const std::regex& number_re() {
  static const std::regex re("^[+-]?[0-9]+(?:[.,][0-9]+)*$");
  return re;
}

}  // namespace

std::string_view to_string(SyntaxBin bin) noexcept {
  switch (bin) {
    case SyntaxBin::Upper: return "UPPER";
    case SyntaxBin::Lower: return "LOWER";
    case SyntaxBin::Mixed: return "MIXED";
  }
  return "MIXED";
}

std::string_view to_string(SemanticTag tag) noexcept {
  switch (tag) {
    case SemanticTag::Number: return "NUMBER";
    case SemanticTag::Price: return "PRICE";
    case SemanticTag::Time: return "TIME";
    case SemanticTag::Date: return "DATE";
    case SemanticTag::Ordinal: return "ORDINAL";
    case SemanticTag::Percent: return "PERCENT";
    case SemanticTag::Plain: return "PLAIN";
    case SemanticTag::None: return "NONE";
  }
  return "NONE";
}

std::optional<SemanticTag> semantic_tag_from_string(std::string_view name) noexcept {
  for (auto tag : {SemanticTag::Number, SemanticTag::Price, SemanticTag::Time, SemanticTag::Date,
                   SemanticTag::Ordinal, SemanticTag::Percent, SemanticTag::Plain, SemanticTag::None}) {
    if (to_string(tag) == name) return tag;
  }
  return std::nullopt;
}

std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    int extra = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      cp = c;
    } else if ((c & 0xE0) == 0xC0) {
      cp = c & 0x1F;
      extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
      cp = c & 0x0F;
      extra = 2;
    } else if ((c & 0xF8) == 0xF0) {
      cp = c & 0x07;
      extra = 3;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= text.size()) {
        ok = false;
        break;
      }
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

CharClass classify(char32_t cp) noexcept {
  if (is_lower(cp)) return CharClass::Lower;
  if (is_upper(cp)) return CharClass::Upper;
  if (is_digit(cp)) return CharClass::Digit;
  if (is_currency(cp)) return CharClass::Currency;
  if (is_punct(cp)) return CharClass::Punct;
  return CharClass::Other;
}

SyntaxBin syntax_bin(std::string_view text) {
  bool any_upper = false;
  bool any_lower = false;
  for (char32_t cp : decode_utf8(text)) {
    any_upper |= is_upper(cp);
    any_lower |= is_lower(cp);
  }
  if (any_upper && !any_lower) return SyntaxBin::Upper;
  if (any_lower && !any_upper) return SyntaxBin::Lower;
  return SyntaxBin::Mixed;
}

SemanticTag semantic_tag(std::string_view raw) {
  const std::string text = trim(raw);
  if (std::regex_match(text, price_re())) return SemanticTag::Price;
  if (std::regex_match(text, percent_re())) return SemanticTag::Percent;
  if (std::regex_match(text, time_re())) return SemanticTag::Time;
  if (std::regex_match(text, date_re())) return SemanticTag::Date;
  if (std::regex_match(text, ordinal_re())) return SemanticTag::Ordinal;
  if (std::regex_match(text, number_re())) return SemanticTag::Number;
  for (char32_t cp : decode_utf8(text)) {
    if (is_upper(cp) || is_lower(cp)) return SemanticTag::Plain;
  }
  return SemanticTag::None;
}

TokenShape token_shape(std::string_view text) {
  const auto cps = decode_utf8(text);
  std::size_t digits = 0, upper = 0, lower = 0, separators = 0, other = 0;
  for (char32_t cp : cps) {
    if (is_digit(cp)) {
      ++digits;
    } else if (is_upper(cp)) {
      ++upper;
    } else if (is_lower(cp)) {
      ++lower;
    } else if (is_currency(cp) || cp == U'.' || cp == U',' || cp == U':' || cp == U'/' || cp == U'-' ||
               cp == U'%' || cp == U'+') {
      ++separators;
    } else {
      ++other;
    }
  }
  const std::size_t letters = upper + lower;
  if (digits > 0 && letters == 0 && separators == 0 && other == 0) return TokenShape::AllDigits;
  if (digits > 0 && letters == 0 && other == 0) return TokenShape::NumericWithSeparators;
  if (letters > 0 && digits == 0) {
    if (lower == 0) return TokenShape::AllCaps;
    if (upper == 0) return TokenShape::AllLower;
    // First letter uppercase, remaining letters lowercase.
    bool first = true;
    bool capitalized = true;
    for (char32_t cp : cps) {
      if (!is_upper(cp) && !is_lower(cp)) continue;
      if (first ? !is_upper(cp) : !is_lower(cp)) capitalized = false;
      first = false;
    }
    if (capitalized) return TokenShape::Capitalized;
  }
  return TokenShape::Mixed;
}

std::array<double, kCharClassCount> char_class_histogram(std::string_view text) {
  std::array<double, kCharClassCount> hist{};
  const auto cps = decode_utf8(text);
  for (char32_t cp : cps) hist[static_cast<std::size_t>(classify(cp))] += 1.0;
  if (!cps.empty()) {
    for (double& v : hist) v /= static_cast<double>(cps.size());
  }
  return hist;
}

double uppercase_ratio(std::string_view text) {
  return char_class_histogram(text)[static_cast<std::size_t>(CharClass::Upper)];
}

std::size_t codepoint_count(std::string_view text) { return decode_utf8(text).size(); }

std::optional<SemanticTag> characterize_line(std::span<const SemanticTag> tags) {
  std::set<SemanticTag> entities;
  for (SemanticTag t : tags) {
    if (t != SemanticTag::Plain && t != SemanticTag::None) entities.insert(t);
  }
  if (entities.empty()) return SemanticTag::Plain;
  if (entities.size() == 1) return *entities.begin();
  return std::nullopt;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace docaff
