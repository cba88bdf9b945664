#include "lazymdp/render.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace lazymdp {

namespace {
constexpr const char* kRamp = " .,:-=+*%@";  // 10 levels, low to high
}

std::string render_heatmap(const CompiledGrid& grid, const ValueTable& values,
                           bool has_key, bool door_open) {
    Real lo = std::numeric_limits<Real>::infinity();
    Real hi = -std::numeric_limits<Real>::infinity();
    for (int r = 0; r < grid.rows; ++r)
        for (int c = 0; c < grid.cols; ++c) {
            int s = grid.state_index(r, c, has_key, door_open);
            if (s < 0) continue;
            lo = std::min(lo, values[s]);
            hi = std::max(hi, values[s]);
        }
    const Real span = hi - lo;

    std::ostringstream out;
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            if (grid.spec.at(r, c) == '#') {
                out << '#';
                continue;
            }
            int s = grid.state_index(r, c, has_key, door_open);
            if (s < 0) {
                out << ' ';
                continue;
            }
            int level = 0;
            if (span > 0.0) {
                level = static_cast<int>((values[s] - lo) / span * 10.0);
                level = std::clamp(level, 0, 9);
            }
            out << kRamp[level];
        }
        out << '\n';
    }
    return out.str();
}

std::string render_mask(const CompiledGrid& grid,
                        const std::vector<std::uint8_t>& control_mask,
                        bool has_key, bool door_open) {
    std::ostringstream out;
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            if (grid.spec.at(r, c) == '#') {
                out << '#';
                continue;
            }
            int s = grid.state_index(r, c, has_key, door_open);
            if (s < 0)
                out << ' ';
            else
                out << (control_mask[s] ? "█" : "·");
        }
        out << '\n';
    }
    return out.str();
}

std::vector<std::pair<bool, bool>> occupied_slices(const CompiledGrid& grid) {
    bool seen[2][2] = {{false, false}, {false, false}};
    for (const GridState& gs : grid.state_info)
        seen[gs.has_key ? 1 : 0][gs.door_open ? 1 : 0] = true;
    std::vector<std::pair<bool, bool>> slices;
    for (int k = 0; k < 2; ++k)
        for (int d = 0; d < 2; ++d)
            if (seen[k][d]) slices.emplace_back(k != 0, d != 0);
    return slices;
}

namespace {

std::string caption(bool has_key, bool door_open) {
    std::ostringstream out;
    out << "[has_key=" << (has_key ? 1 : 0) << " door_open=" << (door_open ? 1 : 0)
        << "]";
    return out.str();
}

}  // namespace

std::string render_heatmap_panels(const CompiledGrid& grid, const ValueTable& values,
                                  const std::string& title) {
    std::ostringstream out;
    out << title << "\n";
    for (auto [k, d] : occupied_slices(grid)) {
        out << caption(k, d) << "\n";
        out << render_heatmap(grid, values, k, d);
    }
    return out.str();
}

std::string render_mask_panels(const CompiledGrid& grid,
                               const std::vector<std::uint8_t>& control_mask,
                               const std::string& title) {
    std::ostringstream out;
    out << title << "\n";
    for (auto [k, d] : occupied_slices(grid)) {
        out << caption(k, d) << "\n";
        out << render_mask(grid, control_mask, k, d);
    }
    return out.str();
}

}  // namespace lazymdp
