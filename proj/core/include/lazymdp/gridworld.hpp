#pragma once

#include "lazymdp/tabular_mdp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lazymdp {

/// Text gridworld. Legend: '#' wall, '.' floor, 'S' start, 'G' goal,
/// '~' water, '=' bridge (floor), 'K' key, 'D' door, 'A' apple.
struct GridWorldSpec {
    std::vector<std::string> grid;  // rectangular, border walls or water
    Real step_reward = 0.0;
    Real water_reward = -100.0;
    Real goal_reward = 1.0;
    Real apple_reward = 0.1;
    Real gamma = 0.99;

    int rows() const { return static_cast<int>(grid.size()); }
    int cols() const { return grid.empty() ? 0 : static_cast<int>(grid[0].size()); }
    char at(int r, int c) const { return grid[r][c]; }
};

/// Programmatic overrides applied on top of any header values in the text.
struct GridParams {
    std::optional<Real> step_reward;
    std::optional<Real> water_reward;
    std::optional<Real> goal_reward;
    std::optional<Real> apple_reward;
    std::optional<Real> gamma;
};

/// Carries every violation found, each with its line/column.
class GridParseError : public std::runtime_error {
  public:
    explicit GridParseError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

  private:
    std::vector<std::string> violations_;
};

/// Parses optional `key=value` header lines followed by the grid rows and
/// validates the layout. Throws GridParseError listing all problems.
GridWorldSpec parse_grid(const std::string& text, const GridParams& params = {});

GridWorldSpec load_map_file(const std::string& path, const GridParams& params = {});

/// One state of the compiled MDP: a cell plus the key/door progress flags.
struct GridState {
    int row = 0;
    int col = 0;
    bool has_key = false;
    bool door_open = false;
};

/// Gridworld compiled to a TabularMDP over the reachable (cell, has_key,
/// door_open) combinations, enumerated breadth-first from the start.
/// Actions: 0 up, 1 down, 2 left, 3 right. Moving into a wall (or a closed
/// door) keeps position; entering water/goal/apple pays the cell reward and
/// absorbs; the key cell sets has_key; the door is passable only with the
/// key and entering it sets door_open.
struct CompiledGrid {
    TabularMDP mdp;
    GridWorldSpec spec;
    int rows = 0;
    int cols = 0;
    int start_state = 0;

    std::vector<GridState> state_info;  // state index -> decoded state
    std::vector<int> index_table;       // (cell, flags) -> state index or -1

    // Named cell masks (cell id = row * cols + col).
    std::vector<int> bridge_cells;
    std::vector<int> door_cells;
    std::vector<int> water_cells;
    std::vector<int> goal_cells;
    int key_cell = -1;
    int apple_cell = -1;
    int start_cell = -1;

    int cell_id(int r, int c) const { return r * cols + c; }
    const GridState& state_of(int s) const { return state_info[s]; }
    /// -1 when the combination is unreachable.
    int state_index(int r, int c, bool has_key, bool door_open) const {
        return index_table[(static_cast<std::size_t>(cell_id(r, c)) * 2 + (has_key ? 1 : 0)) * 2 +
                           (door_open ? 1 : 0)];
    }
    std::vector<int> states_of_cell(int r, int c) const;
};

CompiledGrid compile_grid(const GridWorldSpec& spec);

/// Uniform distribution over the four move actions in every state.
StochasticPolicy default_uniform(const CompiledGrid& grid);

/// Deterministic optimal action outside the masked cells, uniform inside.
/// The mask has one entry per cell (rows * cols).
StochasticPolicy default_optimal_except(const CompiledGrid& grid,
                                        const std::vector<std::uint8_t>& cell_mask);

/// Deterministic policy on the second-highest optimal action value per
/// state; ties within kTieTol collapse to index order, so an all-tied row
/// yields action 1.
StochasticPolicy default_second_best(const CompiledGrid& grid);

}  // namespace lazymdp
