#include "csvx/grid.hpp"

#include <fstream>
#include <sstream>

#include "csvx/errors.hpp"

namespace csvx {

std::vector<std::pair<int, int>> Grid::find(char ch) const {
  std::vector<std::pair<int, int>> out;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (at(r, c) == ch) out.emplace_back(r, c);
  return out;
}

Grid parse_grid(std::string_view text) {
  static const std::string allowed = ".SGHMRBY";
  Grid g;
  std::string line;
  std::istringstream in{std::string(text)};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (g.cols == 0) {
      g.cols = static_cast<int>(line.size());
    } else if (static_cast<int>(line.size()) != g.cols) {
      throw ValidationError("grid fixture is not rectangular");
    }
    for (char ch : line)
      if (allowed.find(ch) == std::string::npos)
        throw ValidationError(std::string("grid fixture has invalid cell '") + ch + "'");
    g.cells += line;
    ++g.rows;
  }
  if (g.rows == 0) throw ValidationError("grid fixture is empty");
  return g;
}

Grid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open grid fixture " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_grid(buf.str());
}

}  // namespace csvx
