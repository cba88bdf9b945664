#pragma once

#include "lazymdp/gridworld.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lazymdp {

/// ASCII heatmap of per-state values for one (has_key, door_open) slice:
/// a 10-level character ramp over min-max normalized values, walls drawn as
/// '#', cells with no state in the slice left blank.
std::string render_heatmap(const CompiledGrid& grid, const ValueTable& values,
                           bool has_key, bool door_open);

/// Control/defer picture for one slice: control states as a solid block,
/// deferring states as a middle dot.
std::string render_mask(const CompiledGrid& grid,
                        const std::vector<std::uint8_t>& control_mask,
                        bool has_key, bool door_open);

/// The (has_key, door_open) combinations that actually occur in the grid,
/// in codec order.
std::vector<std::pair<bool, bool>> occupied_slices(const CompiledGrid& grid);

/// All slices of a value map rendered one after another with captions.
std::string render_heatmap_panels(const CompiledGrid& grid, const ValueTable& values,
                                  const std::string& title);
std::string render_mask_panels(const CompiledGrid& grid,
                               const std::vector<std::uint8_t>& control_mask,
                               const std::string& title);

}  // namespace lazymdp
