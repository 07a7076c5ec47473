#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace csvx {

/// Plain-text grid fixture: one row per line, cells drawn from
/// { . S G H M R B Y }.
struct Grid {
  int rows = 0;
  int cols = 0;
  std::string cells;  // row-major

  char at(int r, int c) const { return cells[static_cast<size_t>(r) * cols + c]; }
  std::vector<std::pair<int, int>> find(char ch) const;
};

Grid parse_grid(std::string_view text);
Grid load_grid(const std::filesystem::path& path);

}  // namespace csvx
