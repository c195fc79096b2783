#include "chal/heatmap.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "chal/ioutil.hpp"

namespace chal {

namespace {

// accepts [H x W] directly and [1 x H x W] as a single-channel image
std::pair<std::size_t, std::size_t> grid_dims(const Tensor& t) {
  if (t.rank() == 2) return {t.dim(0), t.dim(1)};
  if (t.rank() == 3 && t.dim(0) == 1) return {t.dim(1), t.dim(2)};
  throw std::invalid_argument("heatmap: relevance shaped " +
                              shape_string(t.shape()) +
                              " is not a single 2-D grid");
}

}  // namespace

void export_heatmap(const RelevanceMap& map, const std::string& base_path) {
  const auto [h, w] = grid_dims(map.relevance);
  const auto& r = map.relevance;

  double peak = 0.0;
  for (double v : r.values()) peak = std::max(peak, std::abs(v));

  std::ostringstream pgm;
  pgm << "P2\n" << w << " " << h << "\n255\n";
  std::ostringstream csv;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double v = r[y * w + x];
      int level = 128;
      if (peak > 0.0) {
        level = 128 + static_cast<int>(std::lround(127.0 * v / peak));
        if (level < 0) level = 0;
        if (level > 255) level = 255;
      }
      pgm << level << (x + 1 == w ? "" : " ");
      csv << format_double(v) << (x + 1 == w ? "" : ",");
    }
    pgm << "\n";
    csv << "\n";
  }
  write_text_file(base_path + ".pgm", pgm.str());
  write_text_file(base_path + ".csv", csv.str());
}

Tensor read_heatmap_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t line_cols = 0;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) {
      values.push_back(parse_double(field));
      ++line_cols;
    }
    if (rows == 0) {
      cols = line_cols;
    } else if (line_cols != cols) {
      throw std::runtime_error("heatmap csv: ragged row in '" + path + "'");
    }
    ++rows;
  }
  if (rows == 0) {
    throw std::runtime_error("heatmap csv: '" + path + "' is empty");
  }
  return Tensor({rows, cols}, std::move(values));
}

}  // namespace chal
