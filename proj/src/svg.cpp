#include <cmath>
#include <cstdio>
#include <sstream>

#include "docaff/edits.hpp"
#include "docaff/text_rules.hpp"

namespace docaff {

namespace {

std::string escape_xml(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string hex_color(const std::array<int, 3>& rgb) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s == "-0" ? "0" : s;
}

const char* kFamilies[] = {"serif", "sans-serif", "monospace"};

}  // namespace

std::string cluster_color(int cluster_id) {
  const std::uint64_t h = fnv1a(std::to_string(cluster_id));
  // HSV with fixed saturation/value keeps every hue legible behind text.
  const double hue = static_cast<double>(h % 360);
  const double s = 0.65;
  const double v = 0.9;
  const double c = v * s;
  const double x = c * (1.0 - std::abs(std::fmod(hue / 60.0, 2.0) - 1.0));
  const double m = v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hue / 60.0)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  auto to8 = [&](double u) { return static_cast<int>(std::lround((u + m) * 255.0)); };
  return hex_color({to8(r), to8(g), to8(b)});
}

std::string render_svg(const DocumentModel& doc, const ClusterAssignment* assignment, PagePx page) {
  if (!(page.width > 0.0) || !(page.height > 0.0)) throw ValidationError("page dimensions must be positive", "page");
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(page.width) << "\" height=\""
     << num(page.height) << "\" viewBox=\"0 0 " << num(page.width) << ' ' << num(page.height) << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << num(page.width) << "\" height=\"" << num(page.height)
     << "\" fill=\"#ffffff\"/>\n";

  if (assignment) {
    os << "<g class=\"clusters\">\n";
    for (const auto& w : doc.words) {
      const auto it = assignment->word_to_cluster.find(w.id);
      if (it == assignment->word_to_cluster.end()) continue;
      os << "<rect data-word=\"" << w.id << "\" data-cluster=\"" << it->second << "\" x=\""
         << num(w.bbox.x * page.width) << "\" y=\"" << num(w.bbox.y * page.height) << "\" width=\""
         << num(w.bbox.w * page.width) << "\" height=\"" << num(w.bbox.h * page.height) << "\" fill=\""
         << cluster_color(it->second) << "\" fill-opacity=\"0.35\"/>\n";
    }
    os << "</g>\n";
  }

  os << "<g class=\"words\">\n";
  for (const auto& w : doc.words) {
    const StyleAttrs style = w.style.value_or(StyleAttrs{});
    const double font_px = w.style ? w.bbox.h * page.height / 1.3 : w.bbox.h * page.height * 0.8;
    os << "<text data-word=\"" << w.id << "\" x=\"" << num(w.bbox.x * page.width) << "\" y=\""
       << num(w.bbox.y * page.height) << "\" dominant-baseline=\"hanging\" font-family=\""
       << kFamilies[((style.font_family_id % 3) + 3) % 3] << "\" font-size=\"" << num(font_px) << "\"";
    if (style.bold) os << " font-weight=\"bold\"";
    if (style.italic) os << " font-style=\"italic\"";
    os << " fill=\"" << hex_color(style.color_rgb) << "\"";
    if (style.emphasis > 0.0) {
      os << " stroke=\"#ffcc00\" stroke-opacity=\"" << num(style.emphasis) << "\" stroke-width=\"0.6\"";
    }
    os << ">" << escape_xml(w.text) << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace docaff
