#include "lazymdp/gridworld.hpp"

#include "lazymdp/text.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <fstream>
#include <sstream>

namespace lazymdp {

namespace {

constexpr const char* kLegend = "#.SG~=KDA";
constexpr int kGridActions = 4;
const int kRowDelta[kGridActions] = {-1, 1, 0, 0};  // up, down, left, right
const int kColDelta[kGridActions] = {0, 0, -1, 1};

bool is_legend_char(char c) {
    for (const char* p = kLegend; *p; ++p)
        if (*p == c) return true;
    return false;
}

bool is_grid_line(const std::string& line) {
    if (line.empty()) return false;
    return std::all_of(line.begin(), line.end(), is_legend_char);
}

std::string joined(const std::vector<std::string>& violations) {
    std::ostringstream out;
    out << violations.size() << " problem(s):";
    for (const auto& v : violations) out << "\n  - " << v;
    return out.str();
}

}  // namespace

GridParseError::GridParseError(std::vector<std::string> violations)
    : std::runtime_error(joined(violations)), violations_(std::move(violations)) {}

GridWorldSpec parse_grid(const std::string& text, const GridParams& params) {
    GridWorldSpec spec;
    std::vector<std::string> violations;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool in_grid = false;
    std::vector<int> grid_line_numbers;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!in_grid && is_grid_line(line)) in_grid = true;
        if (in_grid) {
            if (!is_grid_line(line)) {
                for (std::size_t c = 0; c < line.size(); ++c) {
                    if (!is_legend_char(line[c])) {
                        std::ostringstream msg;
                        msg << "line " << line_no << ", column " << (c + 1)
                            << ": unknown character '" << line[c] << "'";
                        violations.push_back(msg.str());
                    }
                }
                continue;
            }
            spec.grid.push_back(line);
            grid_line_numbers.push_back(line_no);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << "line " << line_no << ": expected `key=value` header or grid row";
            violations.push_back(msg.str());
            continue;
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        try {
            Real parsed = parse_real(value);
            if (key == "step_reward") spec.step_reward = parsed;
            else if (key == "water_reward") spec.water_reward = parsed;
            else if (key == "goal_reward") spec.goal_reward = parsed;
            else if (key == "apple_reward") spec.apple_reward = parsed;
            else if (key == "gamma") spec.gamma = parsed;
            else {
                std::ostringstream msg;
                msg << "line " << line_no << ": unknown header key '" << key << "'";
                violations.push_back(msg.str());
            }
        } catch (const std::invalid_argument&) {
            std::ostringstream msg;
            msg << "line " << line_no << ": bad value for '" << key << "'";
            violations.push_back(msg.str());
        }
    }

    if (params.step_reward) spec.step_reward = *params.step_reward;
    if (params.water_reward) spec.water_reward = *params.water_reward;
    if (params.goal_reward) spec.goal_reward = *params.goal_reward;
    if (params.apple_reward) spec.apple_reward = *params.apple_reward;
    if (params.gamma) spec.gamma = *params.gamma;

    if (spec.grid.empty()) {
        violations.push_back("no grid rows found");
        throw GridParseError(std::move(violations));
    }

    const int rows = spec.rows();
    const std::size_t width = spec.grid[0].size();
    for (int r = 0; r < rows; ++r) {
        if (spec.grid[r].size() != width) {
            std::ostringstream msg;
            msg << "line " << grid_line_numbers[r] << ": row length "
                << spec.grid[r].size() << " differs from first row length " << width;
            violations.push_back(msg.str());
        }
    }
    if (!violations.empty()) throw GridParseError(std::move(violations));

    const int cols = spec.cols();
    int starts = 0;
    int goals = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            char ch = spec.at(r, c);
            if (ch == 'S') {
                ++starts;
                if (starts > 1) {
                    std::ostringstream msg;
                    msg << "line " << grid_line_numbers[r] << ", column " << (c + 1)
                        << ": duplicate start 'S'";
                    violations.push_back(msg.str());
                }
            }
            if (ch == 'G') ++goals;
            const bool border = r == 0 || r == rows - 1 || c == 0 || c == cols - 1;
            if (border && ch != '#' && ch != '~') {
                std::ostringstream msg;
                msg << "line " << grid_line_numbers[r] << ", column " << (c + 1)
                    << ": border cell '" << ch << "' must be a wall or water";
                violations.push_back(msg.str());
            }
        }
    }
    if (starts == 0) violations.push_back("grid has no start 'S'");
    if (goals == 0) violations.push_back("grid has no goal 'G'");
    if (!(spec.gamma >= 0.0 && spec.gamma < 1.0)) {
        std::ostringstream msg;
        msg << "gamma = " << to_decimal(spec.gamma) << " outside [0,1)";
        violations.push_back(msg.str());
    }
    if (!violations.empty()) throw GridParseError(std::move(violations));
    return spec;
}

GridWorldSpec load_map_file(const std::string& path, const GridParams& params) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open map file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_grid(buf.str(), params);
}

std::vector<int> CompiledGrid::states_of_cell(int r, int c) const {
    std::vector<int> states;
    for (int k = 0; k < 2; ++k)
        for (int d = 0; d < 2; ++d) {
            int idx = state_index(r, c, k != 0, d != 0);
            if (idx >= 0) states.push_back(idx);
        }
    std::sort(states.begin(), states.end());
    return states;
}

namespace {

struct PendingState {
    GridState state;
    bool absorbing = false;
};

int flag_slot(const GridState& gs, int cols) {
    return ((gs.row * cols + gs.col) * 2 + (gs.has_key ? 1 : 0)) * 2 +
           (gs.door_open ? 1 : 0);
}

}  // namespace

CompiledGrid compile_grid(const GridWorldSpec& spec) {
    const int rows = spec.rows();
    const int cols = spec.cols();
    if (static_cast<long>(rows) * cols * 4 > 1000000)
        throw std::invalid_argument("compile_grid: state space above the 1e6 guard");

    CompiledGrid grid;
    grid.spec = spec;
    grid.rows = rows;
    grid.cols = cols;

    GridState start{};
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int cell = r * cols + c;
            switch (spec.at(r, c)) {
                case 'S': start = {r, c, false, false}; grid.start_cell = cell; break;
                case '=': grid.bridge_cells.push_back(cell); break;
                case 'D': grid.door_cells.push_back(cell); break;
                case '~': grid.water_cells.push_back(cell); break;
                case 'G': grid.goal_cells.push_back(cell); break;
                case 'K': grid.key_cell = cell; break;
                case 'A': grid.apple_cell = cell; break;
                default: break;
            }
        }
    }

    grid.index_table.assign(static_cast<std::size_t>(rows) * cols * 4, -1);
    std::vector<PendingState> discovered;
    std::vector<std::uint8_t> absorbing_flags;
    std::deque<int> frontier;

    auto intern = [&](const GridState& gs, bool absorbing) -> int {
        int slot = flag_slot(gs, cols);
        int& idx = grid.index_table[slot];
        if (idx < 0) {
            idx = static_cast<int>(discovered.size());
            discovered.push_back({gs, absorbing});
            absorbing_flags.push_back(absorbing ? 1 : 0);
            frontier.push_back(idx);
        }
        return idx;
    };

    struct Move {
        GridState next;
        Real reward;
        bool absorbing;
    };
    auto apply_move = [&](const GridState& gs, int action) -> Move {
        int nr = gs.row + kRowDelta[action];
        int nc = gs.col + kColDelta[action];
        if (nr < 0 || nr >= rows || nc < 0 || nc >= cols)
            return {gs, spec.step_reward, false};
        char target = spec.at(nr, nc);
        switch (target) {
            case '#':
                return {gs, spec.step_reward, false};
            case '~':
                return {{nr, nc, gs.has_key, gs.door_open}, spec.water_reward, true};
            case 'G':
                return {{nr, nc, gs.has_key, gs.door_open}, spec.goal_reward, true};
            case 'A':
                return {{nr, nc, gs.has_key, gs.door_open}, spec.apple_reward, true};
            case 'K':
                return {{nr, nc, true, gs.door_open}, spec.step_reward, false};
            case 'D':
                if (!gs.has_key) return {gs, spec.step_reward, false};
                return {{nr, nc, true, true}, spec.step_reward, false};
            default:  // '.', 'S', '='
                return {{nr, nc, gs.has_key, gs.door_open}, spec.step_reward, false};
        }
    };

    grid.start_state = intern(start, false);
    std::vector<std::array<int, kGridActions>> successor;
    std::vector<std::array<Real, kGridActions>> step_reward;
    while (!frontier.empty()) {
        int idx = frontier.front();
        frontier.pop_front();
        if (static_cast<int>(successor.size()) <= idx) {
            successor.resize(idx + 1);
            step_reward.resize(idx + 1);
        }
        const PendingState current = discovered[idx];
        for (int a = 0; a < kGridActions; ++a) {
            if (current.absorbing) {
                successor[idx][a] = idx;
                step_reward[idx][a] = 0.0;
                continue;
            }
            Move move = apply_move(current.state, a);
            successor[idx][a] = intern(move.next, move.absorbing);
            step_reward[idx][a] = move.reward;
        }
    }

    const int n_states = static_cast<int>(discovered.size());
    successor.resize(n_states);
    step_reward.resize(n_states);
    grid.mdp = TabularMDP(n_states, kGridActions, spec.gamma);
    grid.state_info.resize(n_states);
    for (int s = 0; s < n_states; ++s) {
        grid.state_info[s] = discovered[s].state;
        grid.mdp.absorbing[s] = absorbing_flags[s];
        for (int a = 0; a < kGridActions; ++a) {
            grid.mdp.p(s, a, successor[s][a]) = 1.0;
            grid.mdp.r(s, a) = step_reward[s][a];
        }
    }
    grid.mdp.initial_dist[grid.start_state] = 1.0;
    return grid;
}

StochasticPolicy default_uniform(const CompiledGrid& grid) {
    StochasticPolicy pi(grid.mdp.n_states, grid.mdp.n_actions);
    const Real mass = 1.0 / grid.mdp.n_actions;
    std::fill(pi.probs.begin(), pi.probs.end(), mass);
    return pi;
}

StochasticPolicy default_optimal_except(const CompiledGrid& grid,
                                        const std::vector<std::uint8_t>& cell_mask) {
    if (cell_mask.size() != static_cast<std::size_t>(grid.rows) * grid.cols)
        throw std::invalid_argument("default_optimal_except: mask must have one entry per cell");
    QTable q_star = value_iteration(grid.mdp);
    std::vector<int> best = greedy_actions(q_star);
    StochasticPolicy pi(grid.mdp.n_states, grid.mdp.n_actions);
    const Real uniform_mass = 1.0 / grid.mdp.n_actions;
    for (int s = 0; s < grid.mdp.n_states; ++s) {
        const GridState& gs = grid.state_of(s);
        if (cell_mask[grid.cell_id(gs.row, gs.col)]) {
            for (int a = 0; a < grid.mdp.n_actions; ++a) pi(s, a) = uniform_mass;
        } else {
            pi(s, best[s]) = 1.0;
        }
    }
    return pi;
}

StochasticPolicy default_second_best(const CompiledGrid& grid) {
    QTable q_star = value_iteration(grid.mdp);
    const int A = grid.mdp.n_actions;
    if (A < 2) throw std::invalid_argument("default_second_best: needs at least 2 actions");
    StochasticPolicy pi(grid.mdp.n_states, A);
    for (int s = 0; s < grid.mdp.n_states; ++s) {
        const Real* qr = q_star.row(s);
        Real best = qr[0];
        for (int a = 1; a < A; ++a)
            if (qr[a] > best) best = qr[a];
        // All actions tied with the best (within tolerance), in index order.
        std::vector<int> top;
        for (int a = 0; a < A; ++a)
            if (qr[a] >= best - kTieTol) top.push_back(a);
        int chosen;
        if (top.size() >= 2) {
            chosen = top[1];
        } else {
            Real second = -std::numeric_limits<Real>::infinity();
            for (int a = 0; a < A; ++a)
                if (a != top[0] && qr[a] > second) second = qr[a];
            chosen = -1;
            for (int a = 0; a < A; ++a) {
                if (a != top[0] && qr[a] >= second - kTieTol) {
                    chosen = a;
                    break;
                }
            }
        }
        pi(s, chosen) = 1.0;
    }
    return pi;
}

}  // namespace lazymdp
