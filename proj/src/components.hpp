#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace gazelabel::detail {

// 8-connected component labeling over a width x height raster. `on(index)`
// decides membership. Components come back as ascending index lists, sorted
// by descending size with ties broken by smallest cell index.
template <class Pred>
std::vector<std::vector<std::uint32_t>> label_components(int width, int height, Pred&& on) {
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::vector<std::uint32_t>> comps;
  std::vector<std::uint32_t> stack;

  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start] || !on(start)) continue;
    std::vector<std::uint32_t> comp;
    stack.clear();
    stack.push_back(static_cast<std::uint32_t>(start));
    seen[start] = 1;
    while (!stack.empty()) {
      const std::uint32_t idx = stack.back();
      stack.pop_back();
      comp.push_back(idx);
      const int cx = static_cast<int>(idx % width);
      const int cy = static_cast<int>(idx / width);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = cx + dx;
          const int ny = cy + dy;
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          const std::size_t nidx = static_cast<std::size_t>(ny) * width + nx;
          if (seen[nidx] || !on(nidx)) continue;
          seen[nidx] = 1;
          stack.push_back(static_cast<std::uint32_t>(nidx));
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }

  std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  return comps;
}

}  // namespace gazelabel::detail
