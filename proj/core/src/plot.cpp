#include "skembed/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace skembed {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string grey(double level) {
  const int v = static_cast<int>(std::lround(255.0 * std::clamp(level, 0.0, 1.0)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", v, v, 255);
  return buf;
}

}  // namespace

std::string barrier_svg(const AugmentedChain& aug, const BarrierCells& cells, const std::string& title) {
  const std::size_t cols = aug.aux_count();
  const std::size_t rows = aug.base().size();
  const int cell = std::clamp(static_cast<int>(720 / std::max<std::size_t>(cols, 1)), 4, 28);
  const int left = 60, top = 40, bottom = 40;
  const int width = left + static_cast<int>(cols) * cell + 20;
  const int height = top + static_cast<int>(rows) * cell + bottom;

  double max_slack = 0.0;
  for (std::size_t z = 0; z < aug.size(); ++z)
    if (cells.reachable[z]) max_slack = std::max(max_slack, cells.slack(static_cast<Eigen::Index>(z)));

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"20\" font-size=\"13\">" << escape(title) << "</text>\n";
  for (std::size_t z = 0; z < aug.size(); ++z) {
    const std::size_t a = aug.aux_of(z), x = aug.base_of(z);
    const int px = left + static_cast<int>(a) * cell;
    const int py = top + static_cast<int>(rows - 1 - x) * cell;
    std::string fill = "#ffffff";
    std::string kind = "unreachable";
    if (cells.reachable[z]) {
      if (cells.stopped[z]) {
        fill = "#1f3b73";
        kind = "stop";
      } else if (cells.contact[z]) {
        fill = "#6f8fcf";
        kind = "contact";
      } else {
        const double s = max_slack > 0.0 ? cells.slack(static_cast<Eigen::Index>(z)) / max_slack : 0.0;
        fill = grey(0.97 - 0.25 * (1.0 - s));
        kind = "continue";
      }
    }
    os << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
       << fill << "\" stroke=\"#cccccc\" stroke-width=\"0.5\"><title>" << escape(aug.label(z)) << ' ' << kind
       << " slack=" << cells.slack(static_cast<Eigen::Index>(z)) << "</title></rect>\n";
  }
  for (std::size_t x = 0; x < rows; ++x) {
    const int py = top + static_cast<int>(rows - 1 - x) * cell + cell / 2 + 4;
    os << "<text x=\"" << left - 6 << "\" y=\"" << py << "\" text-anchor=\"end\">" << escape(aug.base().label(x))
       << "</text>\n";
  }
  const std::size_t stride = std::max<std::size_t>(1, cols / 20);
  for (std::size_t a = 0; a < cols; a += stride) {
    const Vec& c = aug.aux_coord(a);
    const std::string label = c.size() == 1 ? std::to_string(static_cast<long long>(std::lround(c(0)))) : std::to_string(a);
    os << "<text x=\"" << left + static_cast<int>(a) * cell + cell / 2 << "\" y=\"" << top + static_cast<int>(rows) * cell + 14
       << "\" text-anchor=\"middle\">" << label << "</text>\n";
  }
  os << "<text x=\"" << left << "\" y=\"" << height - 8 << "\">auxiliary (" << to_string(aug.kind())
     << "); dark = stopped, mid = contact, light = continue</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace skembed
