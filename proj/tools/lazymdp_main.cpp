// lazymdp command line: load or compile an environment, solve its lazy-MDP,
// compute penalty bounds, sweep penalties, run the tabular learners, and
// export importance maps. Exit codes: 0 ok, 2 config/input error,
// 3 solver non-convergence, 4 sweep assertion failure.

#include "lazymdp/eta_bounds.hpp"
#include "lazymdp/importance.hpp"
#include "lazymdp/learning.hpp"
#include "lazymdp/mdp_io.hpp"
#include "lazymdp/render.hpp"
#include "lazymdp/text.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace lazymdp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitAssertion = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Config file: flat key=value lines, [section] headers ignored, '#' comments.
// ---------------------------------------------------------------------------

std::map<std::string, std::string> load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#' || line[first] == '[') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) +
                                           ": empty key");
        values[key] = value;
    }
    return values;
}

// ---------------------------------------------------------------------------
// Shared option plumbing
// ---------------------------------------------------------------------------

struct CommonOptions {
    std::string config_path;
    std::string env;
    std::string default_spec = "uniform";
    std::string out = "out";
    Real tol = kDefaultTol;
    long max_iters = kDefaultMaxIters;
    std::optional<Real> gamma;
    int workers = 0;  // 0: pick from hardware
};

struct LearningOptions {
    QLearningConfig config;
    bool decay_horizon_given = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_env = true) {
    cmd->add_option("--config", opts.config_path,
                    "config file; command line flags override its values");
    cmd->add_option("--env", opts.env, "map (.map) or MDP (.mdp) file");
    (void)needs_env;
    cmd->add_option("--default", opts.default_spec,
                    "default policy: uniform | second-best | optimal-except:bridges | "
                    "optimal-except:@cells-file | file:policy-file");
    cmd->add_option("--out", opts.out, "output directory");
    cmd->add_option("--tol", opts.tol, "solver sup-norm tolerance");
    cmd->add_option("--max-iters", opts.max_iters, "solver iteration cap");
    double gamma_value = -1.0;
    cmd->add_option("--gamma", gamma_value, "discount override")
        ->each([&opts](const std::string& v) { opts.gamma = parse_real(v); });
    cmd->add_option("--workers", opts.workers, "worker threads (0 = auto)");
}

/// Config-file fallback: any key the command line did not set explicitly.
void apply_config_map(CLI::App* cmd, const std::map<std::string, std::string>& file,
                      CommonOptions& opts, LearningOptions* learn) {
    auto given = [cmd](const char* flag) {
        auto* opt = cmd->get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    auto get = [&file](const char* key) -> std::optional<std::string> {
        auto it = file.find(key);
        if (it == file.end()) return std::nullopt;
        return it->second;
    };
    if (!given("--env"))
        if (auto v = get("env")) opts.env = *v;
    if (!given("--default"))
        if (auto v = get("default")) opts.default_spec = *v;
    if (!given("--out"))
        if (auto v = get("out")) opts.out = *v;
    if (!given("--tol"))
        if (auto v = get("tol")) opts.tol = parse_real(*v);
    if (!given("--max-iters"))
        if (auto v = get("max_iters")) opts.max_iters = parse_long(*v);
    if (!given("--gamma"))
        if (auto v = get("gamma")) opts.gamma = parse_real(*v);
    if (!given("--workers"))
        if (auto v = get("workers")) opts.workers = static_cast<int>(parse_long(*v));
    if (!learn) return;
    QLearningConfig& c = learn->config;
    if (!given("--alpha"))
        if (auto v = get("alpha")) c.alpha = parse_real(*v);
    if (!given("--epsilon0"))
        if (auto v = get("epsilon0")) c.epsilon0 = parse_real(*v);
    if (!given("--epsilon-inf"))
        if (auto v = get("epsilon_inf")) c.epsilon_inf = parse_real(*v);
    if (!given("--decay-horizon"))
        if (auto v = get("decay_horizon")) {
            c.decay_horizon = parse_long(*v);
            learn->decay_horizon_given = true;
        }
    if (!given("--episodes-per-phase"))
        if (auto v = get("episodes_per_phase")) c.episodes_per_phase = parse_long(*v);
    if (!given("--phases"))
        if (auto v = get("n_phases")) c.n_phases = parse_long(*v);
    if (!given("--max-steps"))
        if (auto v = get("max_episode_steps")) c.max_episode_steps = parse_long(*v);
    if (!given("--eval-episodes"))
        if (auto v = get("eval_episodes")) c.eval_episodes = parse_long(*v);
}

// ---------------------------------------------------------------------------
// Environment + default-policy loading
// ---------------------------------------------------------------------------

struct EnvBundle {
    TabularMDP mdp;
    std::optional<CompiledGrid> grid;
};

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

EnvBundle load_env(const CommonOptions& opts) {
    if (opts.env.empty()) throw ConfigError("--env is required");
    EnvBundle bundle;
    try {
        if (ends_with(opts.env, ".map")) {
            GridParams params;
            params.gamma = opts.gamma;
            bundle.grid = compile_grid(load_map_file(opts.env, params));
            bundle.mdp = bundle.grid->mdp;
        } else {
            bundle.mdp = read_mdp(read_text_file(opts.env));
            if (opts.gamma) bundle.mdp.gamma = *opts.gamma;
        }
    } catch (const GridParseError& err) {
        throw ConfigError(opts.env + ": " + err.what());
    } catch (const std::invalid_argument& err) {
        throw ConfigError(opts.env + ": " + err.what());
    }
    ValidationReport report = validate(bundle.mdp);
    if (!report.ok()) throw ConfigError(opts.env + ": " + report.summary());
    return bundle;
}

std::vector<std::uint8_t> parse_cell_mask(const EnvBundle& env, const std::string& spec) {
    const CompiledGrid& grid = *env.grid;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(grid.rows) * grid.cols, 0);
    if (spec == "bridges") {
        for (int cell : grid.bridge_cells) mask[cell] = 1;
        return mask;
    }
    if (!spec.empty() && spec[0] == '@') {
        std::istringstream in(read_text_file(spec.substr(1)));
        int r, c;
        while (in >> r >> c) {
            if (r < 0 || r >= grid.rows || c < 0 || c >= grid.cols)
                throw ConfigError("mask cell out of range");
            mask[grid.cell_id(r, c)] = 1;
        }
        return mask;
    }
    throw ConfigError("optimal-except needs ':bridges' or ':@file' with row/col pairs");
}

StochasticPolicy build_default_policy(const EnvBundle& env, const std::string& spec) {
    if (spec == "uniform") {
        StochasticPolicy pi(env.mdp.n_states, env.mdp.n_actions);
        const Real mass = 1.0 / env.mdp.n_actions;
        std::fill(pi.probs.begin(), pi.probs.end(), mass);
        return pi;
    }
    if (spec == "second-best") {
        if (!env.grid) throw ConfigError("second-best default needs a grid environment");
        return default_second_best(*env.grid);
    }
    if (spec.rfind("optimal-except", 0) == 0) {
        if (!env.grid) throw ConfigError("optimal-except default needs a grid environment");
        auto colon = spec.find(':');
        std::string arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
        return default_optimal_except(*env.grid, parse_cell_mask(env, arg));
    }
    if (spec.rfind("file:", 0) == 0) {
        StochasticPolicy pi = read_policy(read_text_file(spec.substr(5)));
        if (pi.n_states != env.mdp.n_states || pi.n_actions != env.mdp.n_actions)
            throw ConfigError("policy file dimensions do not match the environment");
        ValidationReport report = validate(pi);
        if (!report.ok()) throw ConfigError("policy file: " + report.summary());
        return pi;
    }
    throw ConfigError("unknown default policy '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Small utilities
// ---------------------------------------------------------------------------

std::vector<Real> parse_eta_grid(const std::string& text) {
    std::vector<Real> grid;
    if (text.find(':') != std::string::npos) {
        // linspace form a:b:n
        std::istringstream in(text);
        std::string a, b, n;
        std::getline(in, a, ':');
        std::getline(in, b, ':');
        std::getline(in, n, ':');
        Real lo = parse_real(a);
        Real hi = parse_real(b);
        long count = parse_long(n);
        if (count < 2 || hi < lo) throw ConfigError("bad eta grid '" + text + "'");
        for (long i = 0; i < count; ++i)
            grid.push_back(lo + (hi - lo) * static_cast<Real>(i) / (count - 1));
        return grid;
    }
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        if (!token.empty()) grid.push_back(parse_real(token));
    }
    if (grid.empty()) throw ConfigError("empty eta grid");
    return grid;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) {
        std::uint64_t s = static_cast<std::uint64_t>(parse_long(text));
        return {s, s + 1};
    }
    std::uint64_t lo = static_cast<std::uint64_t>(parse_long(text.substr(0, colon)));
    std::uint64_t hi = static_cast<std::uint64_t>(parse_long(text.substr(colon + 1)));
    if (hi <= lo) throw ConfigError("empty seed range '" + text + "'");
    return {lo, hi};
}

void parallel_for(int n_tasks, int workers, const std::function<void(int)>& fn) {
    if (workers <= 0)
        workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers > n_tasks) workers = n_tasks;
    if (workers <= 1) {
        for (int i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            int i;
            while ((i = next.fetch_add(1)) < n_tasks) fn(i);
        });
    for (auto& t : pool) t.join();
}

void ensure_out_dir(const std::string& out) { fs::create_directories(out); }

std::string decode_state_line(const EnvBundle& env, int s) {
    std::ostringstream out;
    out << s;
    if (env.grid) {
        const GridState& gs = env.grid->state_of(s);
        out << " (row=" << gs.row << " col=" << gs.col << " has_key=" << gs.has_key
            << " door_open=" << gs.door_open << ")";
    }
    return out.str();
}

/// Renders several per-slice panels side by side, one row of panels per
/// (has_key, door_open) slice.
std::string side_by_side_panels(const CompiledGrid& grid,
                                const std::vector<std::string>& titles,
                                const std::vector<ValueTable>& maps) {
    std::ostringstream out;
    for (auto [k, d] : occupied_slices(grid)) {
        out << "[has_key=" << (k ? 1 : 0) << " door_open=" << (d ? 1 : 0) << "]\n";
        std::vector<std::vector<std::string>> columns;
        std::size_t width = 0;
        for (const auto& m : maps) {
            std::istringstream rendered(render_heatmap(grid, m, k, d));
            std::vector<std::string> lines;
            std::string line;
            while (std::getline(rendered, line)) {
                width = std::max(width, line.size());
                lines.push_back(line);
            }
            columns.push_back(std::move(lines));
        }
        for (std::size_t i = 0; i < titles.size(); ++i) {
            std::string t = titles[i].substr(0, width);
            out << t << std::string(width + 2 - t.size(), ' ');
        }
        out << "\n";
        for (std::size_t row = 0; row < columns[0].size(); ++row) {
            for (const auto& col : columns) {
                std::string line = row < col.size() ? col[row] : std::string();
                out << line << std::string(width + 2 - line.size(), ' ');
            }
            out << "\n";
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_validate(const CommonOptions& opts) {
    if (opts.env.empty()) throw ConfigError("--env is required");
    try {
        if (ends_with(opts.env, ".map")) {
            GridParams params;
            params.gamma = opts.gamma;
            CompiledGrid grid = compile_grid(load_map_file(opts.env, params));
            ValidationReport report = validate(grid.mdp);
            if (!report.ok()) {
                std::cerr << report.summary() << "\n";
                return kExitConfig;
            }
            std::cout << "ok: " << grid.mdp.n_states << " states, "
                      << grid.mdp.n_actions << " actions\n";
            return kExitOk;
        }
        TabularMDP mdp = read_mdp(read_text_file(opts.env));
        if (opts.gamma) mdp.gamma = *opts.gamma;
        ValidationReport report = validate(mdp);
        if (!report.ok()) {
            std::cout << report.summary() << "\n";
            return kExitConfig;
        }
        std::cout << "ok: " << mdp.n_states << " states, " << mdp.n_actions
                  << " actions\n";
        return kExitOk;
    } catch (const GridParseError& err) {
        std::cerr << opts.env << ": " << err.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& err) {
        std::cerr << opts.env << ": " << err.what() << "\n";
        return kExitConfig;
    }
}

int cmd_solve(const CommonOptions& opts, Real eta) {
    EnvBundle env = load_env(opts);
    StochasticPolicy defaults = build_default_policy(env, opts.default_spec);
    LazyMDPSpec spec{env.mdp, defaults, eta};
    ValidationReport report = validate(spec);
    if (!report.ok()) throw ConfigError("invalid lazy-MDP spec: " + report.summary());

    LazySolution solution;
    try {
        solution = solve_lazy(spec, opts.tol, opts.max_iters);
    } catch (const ConvergenceError& err) {
        std::cerr << err.what() << ": residual " << to_decimal(err.residual())
                  << " after " << err.iterations() << " iterations\n";
        return kExitNoConvergence;
    }

    ensure_out_dir(opts.out);
    write_text_file(opts.out + "/solution.txt", write_solution(solution));

    std::ostringstream listing;
    auto controls = control_set(solution);
    listing << "control_set " << controls.size() << "\n";
    for (int s : controls) listing << decode_state_line(env, s) << "\n";
    write_text_file(opts.out + "/control_set.txt", listing.str());

    if (env.grid) {
        write_text_file(opts.out + "/heatmap_gap.txt",
                        render_heatmap_panels(*env.grid, solution.gap_star,
                                              "optimal lazy-gap"));
        std::ostringstream title;
        title << "control mask at eta=" << to_decimal(eta);
        write_text_file(opts.out + "/heatmap_control.txt",
                        render_mask_panels(*env.grid, solution.control_mask, title.str()));
    }

    std::cout << "eta " << to_decimal(eta) << "\n"
              << "control_states " << controls.size() << "\n"
              << "residual " << to_decimal(solution.residual) << "\n"
              << "iterations " << solution.iterations << "\n"
              << "artifacts " << opts.out << "\n";
    return kExitOk;
}

int cmd_eta_bounds(const CommonOptions& opts) {
    EnvBundle env = load_env(opts);
    StochasticPolicy defaults = build_default_policy(env, opts.default_spec);
    EtaBounds bounds = compute_eta_bounds(env.mdp, defaults, opts.tol);

    ensure_out_dir(opts.out);
    std::ostringstream csv;
    csv << "state,row,col,has_key,door_open,default_gap,threshold,step_shift,"
           "all_excluded\n";
    for (int s = 0; s < env.mdp.n_states; ++s) {
        int row = -1, col = -1, has_key = 0, door_open = 0;
        if (env.grid) {
            const GridState& gs = env.grid->state_of(s);
            row = gs.row;
            col = gs.col;
            has_key = gs.has_key ? 1 : 0;
            door_open = gs.door_open ? 1 : 0;
        }
        bool all_excluded = true;
        for (int a = 0; a < env.mdp.n_actions; ++a)
            if (!bounds.excluded[static_cast<std::size_t>(s) * env.mdp.n_actions + a])
                all_excluded = false;
        csv << s << ',' << row << ',' << col << ',' << has_key << ',' << door_open
            << ',' << to_decimal(bounds.default_gap[s], 12) << ','
            << to_decimal(bounds.state_threshold[s], 12) << ','
            << to_decimal(bounds.step_shift(s, 0), 12) << ',' << (all_excluded ? 1 : 0)
            << "\n";
    }
    write_text_file(opts.out + "/eta_bounds_diagnostics.csv", csv.str());

    std::cout << "eta_min " << to_decimal(bounds.eta_min, 12) << "\n"
              << "eta_max " << to_decimal(bounds.eta_max, 12) << "\n"
              << "diagnostics " << opts.out << "/eta_bounds_diagnostics.csv\n";
    return kExitOk;
}

int cmd_sweep(const CommonOptions& opts, const std::string& grid_text) {
    EnvBundle env = load_env(opts);
    StochasticPolicy defaults = build_default_policy(env, opts.default_spec);
    std::vector<Real> grid = parse_eta_grid(grid_text);
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw ConfigError("eta grid must be sorted ascending");

    SweepResult result;
    try {
        result = frequency_sweep(env.mdp, defaults, grid, opts.tol);
    } catch (const ConvergenceError& err) {
        std::cerr << err.what() << "\n";
        return kExitNoConvergence;
    }
    EtaBounds bounds = compute_eta_bounds(env.mdp, defaults, opts.tol);

    ensure_out_dir(opts.out);
    write_text_file(opts.out + "/sweep.csv", write_sweep_csv(result, true));

    // endpoint assertions: full control below eta_min, full deferral above
    // eta_max
    std::ostringstream rep;
    bool ok = true;
    rep << "eta_min " << to_decimal(bounds.eta_min, 12) << "\n";
    rep << "eta_max " << to_decimal(bounds.eta_max, 12) << "\n";
    for (const SweepRow& row : result.rows) {
        if (row.eta < bounds.eta_min - 1e-9) {
            bool pass = row.lazy_frequency == 0.0;
            ok = ok && pass;
            rep << (pass ? "pass" : "FAIL") << " eta=" << to_decimal(row.eta, 12)
                << " below eta_min: lazy_frequency="
                << to_decimal(row.lazy_frequency, 12) << " expected 0\n";
        } else if (row.eta > bounds.eta_max + 1e-9) {
            bool pass = row.lazy_frequency == 1.0;
            ok = ok && pass;
            rep << (pass ? "pass" : "FAIL") << " eta=" << to_decimal(row.eta, 12)
                << " above eta_max: lazy_frequency="
                << to_decimal(row.lazy_frequency, 12) << " expected 1\n";
        }
    }
    rep << (ok ? "endpoints ok\n" : "endpoints FAILED\n");
    write_text_file(opts.out + "/sweep_report.txt", rep.str());
    std::cout << rep.str();
    return ok ? kExitOk : kExitAssertion;
}

int cmd_explore(const CommonOptions& opts, const LearningOptions& learn,
                const std::string& etas_text, const std::string& seeds_text) {
    EnvBundle env = load_env(opts);
    StochasticPolicy defaults = build_default_policy(env, opts.default_spec);
    std::vector<Real> etas = parse_eta_grid(etas_text);
    auto [seed_lo, seed_hi] = parse_seed_range(seeds_text);
    const long n_seeds = static_cast<long>(seed_hi - seed_lo);

    QLearningConfig base_config = learn.config;
    base_config.gamma = env.mdp.gamma;  // the learner discounts like the environment
    if (!learn.decay_horizon_given)
        base_config.decay_horizon = base_config.n_phases * base_config.episodes_per_phase;
    ValidationReport report = validate(base_config);
    if (!report.ok()) throw ConfigError("learning config: " + report.summary());
    for (Real eta : etas)
        if (eta < 0) throw ConfigError("penalties must be nonnegative");

    ensure_out_dir(opts.out);

    const int n_tasks = static_cast<int>(etas.size() * n_seeds);
    std::vector<LearningRun> runs(n_tasks);
    parallel_for(n_tasks, opts.workers, [&](int task) {
        const int eta_idx = task / n_seeds;
        const long seed_idx = task % n_seeds;
        QLearningConfig config = base_config;
        config.seed = seed_lo + static_cast<std::uint64_t>(seed_idx);
        LazyMDPSpec spec{env.mdp, defaults, etas[eta_idx]};
        runs[task] = q_learning_lazy(spec, config);
    });

    std::ostringstream summary;
    summary << "eta,mean_final_score,std_final_score,mean_final_control_frequency\n";
    for (std::size_t e = 0; e < etas.size(); ++e) {
        const LearningRun* block = runs.data() + e * n_seeds;
        const long phases = base_config.n_phases;

        std::ostringstream curve;
        curve << "phase,score_mean,score_std,lazy_frequency_mean,lazy_frequency_std\n";
        for (long p = 0; p < phases; ++p) {
            Real score_sum = 0.0, score_sq = 0.0, lazy_sum = 0.0, lazy_sq = 0.0;
            for (long k = 0; k < n_seeds; ++k) {
                Real s = block[k].curve[p];
                Real l = block[k].lazy_frequency_curve[p];
                score_sum += s;
                score_sq += s * s;
                lazy_sum += l;
                lazy_sq += l * l;
            }
            Real score_mean = score_sum / n_seeds;
            Real lazy_mean = lazy_sum / n_seeds;
            Real score_std = std::sqrt(std::max(score_sq / n_seeds - score_mean * score_mean, 0.0));
            Real lazy_std = std::sqrt(std::max(lazy_sq / n_seeds - lazy_mean * lazy_mean, 0.0));
            curve << p << ',' << to_decimal(score_mean, 12) << ','
                  << to_decimal(score_std, 12) << ',' << to_decimal(lazy_mean, 12)
                  << ',' << to_decimal(lazy_std, 12) << "\n";
        }
        const std::string tag = to_decimal(etas[e]);
        write_text_file(opts.out + "/explore_eta" + tag + "_curve.csv", curve.str());

        ValueTable occupancy_mean(env.mdp.n_states, 0.0);
        for (long k = 0; k < n_seeds; ++k)
            for (int s = 0; s < env.mdp.n_states; ++s)
                occupancy_mean[s] += block[k].final_occupancy[s] / n_seeds;
        if (env.grid) {
            write_text_file(opts.out + "/explore_eta" + tag + "_occupancy.csv",
                            write_occupancy_csv(*env.grid, occupancy_mean));
            std::ostringstream panels;
            for (auto [k, d] : occupied_slices(*env.grid)) {
                panels << (k ? "[after key" : "[before key")
                       << (d ? ", door open]\n" : ", door closed]\n");
                panels << render_heatmap(*env.grid, occupancy_mean, k, d);
            }
            write_text_file(opts.out + "/explore_eta" + tag + "_occupancy_heatmap.txt",
                            panels.str());
        }

        Real final_score_sum = 0.0, final_score_sq = 0.0, final_control_sum = 0.0;
        for (long k = 0; k < n_seeds; ++k) {
            Real s = block[k].curve[phases - 1];
            final_score_sum += s;
            final_score_sq += s * s;
            final_control_sum += 1.0 - block[k].lazy_frequency_curve[phases - 1];
        }
        Real mean = final_score_sum / n_seeds;
        Real stddev = std::sqrt(std::max(final_score_sq / n_seeds - mean * mean, 0.0));
        summary << to_decimal(etas[e], 12) << ',' << to_decimal(mean, 12) << ','
                << to_decimal(stddev, 12) << ','
                << to_decimal(final_control_sum / n_seeds, 12) << "\n";
    }
    write_text_file(opts.out + "/explore_summary.csv", summary.str());
    std::cout << summary.str() << "artifacts " << opts.out << "\n";
    return kExitOk;
}

int cmd_importance(const CommonOptions& opts, const std::string& etas_text) {
    EnvBundle env = load_env(opts);
    StochasticPolicy defaults = build_default_policy(env, opts.default_spec);
    std::vector<Real> etas = parse_eta_grid(etas_text);

    QTable q_star = value_iteration(env.mdp, opts.tol, opts.max_iters);
    ImportanceMap gap = action_gap(q_star);
    ImportanceMap advice = importance_advice(q_star);

    std::vector<ImportanceMap> lazy_maps;
    for (Real eta : etas) {
        LazyMDPSpec spec{env.mdp, defaults, eta};
        try {
            lazy_maps.push_back(lazy_gap_importance(spec, opts.tol));
        } catch (const ConvergenceError& err) {
            std::cerr << err.what() << " at eta=" << to_decimal(eta) << "\n";
            return kExitNoConvergence;
        }
    }

    ensure_out_dir(opts.out);
    if (env.grid) {
        write_text_file(opts.out + "/importance_action_gap.csv",
                        write_importance_csv(*env.grid, gap));
        write_text_file(opts.out + "/importance_advice.csv",
                        write_importance_csv(*env.grid, advice));
        std::vector<std::string> titles = {"action-gap", "importance-advice"};
        std::vector<ValueTable> maps = {gap.values, advice.values};
        for (std::size_t i = 0; i < lazy_maps.size(); ++i) {
            write_text_file(opts.out + "/importance_lazy_gap_eta" +
                                to_decimal(etas[i]) + ".csv",
                            write_importance_csv(*env.grid, lazy_maps[i]));
            titles.push_back("lazy-gap eta=" + to_decimal(etas[i]));
            maps.push_back(lazy_maps[i].values);
        }
        write_text_file(opts.out + "/importance_panels.txt",
                        side_by_side_panels(*env.grid, titles, maps));
    } else {
        // plain MDPs: emit one value per state without grid columns
        auto plain = [](const ImportanceMap& m) {
            std::ostringstream out;
            out << "state,value\n";
            for (std::size_t s = 0; s < m.values.size(); ++s)
                out << s << ',' << to_decimal(m.values[s], 12) << "\n";
            return out.str();
        };
        write_text_file(opts.out + "/importance_action_gap.csv", plain(gap));
        write_text_file(opts.out + "/importance_advice.csv", plain(advice));
        for (std::size_t i = 0; i < lazy_maps.size(); ++i)
            write_text_file(opts.out + "/importance_lazy_gap_eta" +
                                to_decimal(etas[i]) + ".csv",
                            plain(lazy_maps[i]));
    }

    std::cout << "importance maps written to " << opts.out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabular lazy-MDP toolkit"};
    app.require_subcommand(1);

    CommonOptions solve_opts, bounds_opts, sweep_opts, explore_opts, importance_opts,
        validate_opts;
    LearningOptions learn;
    double eta = 0.0;
    std::string eta_grid_text;
    std::string explore_etas = "0,0.03,0.05";
    std::string importance_etas = "0.03,0.05";
    std::string seeds_text = "0:100";

    auto* solve = app.add_subcommand("solve", "solve the lazy-MDP at one penalty");
    add_common(solve, solve_opts);
    auto* eta_opt = solve->add_option("--eta", eta, "penalty for taking control");

    auto* bounds = app.add_subcommand("eta-bounds", "compute the penalty thresholds");
    add_common(bounds, bounds_opts);

    auto* sweep = app.add_subcommand("sweep", "lazy-frequency sweep over a penalty grid");
    add_common(sweep, sweep_opts);
    auto* grid_opt = sweep->add_option("--eta-grid", eta_grid_text,
                                       "comma list or lo:hi:count linspace");

    auto* explore = app.add_subcommand("explore",
                                       "seeded Q-learning runs across penalties");
    add_common(explore, explore_opts);
    explore->add_option("--etas", explore_etas, "penalties to train at");
    explore->add_option("--seeds", seeds_text, "seed or lo:hi range");
    explore->add_option("--alpha", learn.config.alpha, "learning rate");
    explore->add_option("--epsilon0", learn.config.epsilon0, "initial exploration");
    explore->add_option("--epsilon-inf", learn.config.epsilon_inf, "final exploration");
    explore->add_option("--decay-horizon", learn.config.decay_horizon,
                        "episodes to reach epsilon-inf (default: whole run)")
        ->each([&learn](const std::string&) { learn.decay_horizon_given = true; });
    explore->add_option("--episodes-per-phase", learn.config.episodes_per_phase,
                        "episodes per phase");
    explore->add_option("--phases", learn.config.n_phases, "training phases");
    explore->add_option("--max-steps", learn.config.max_episode_steps,
                        "episode step cap");
    explore->add_option("--eval-episodes", learn.config.eval_episodes,
                        "greedy rollouts per phase score");

    auto* importance = app.add_subcommand("importance",
                                          "action-gap, advice and lazy-gap maps");
    add_common(importance, importance_opts);
    importance->add_option("--etas", importance_etas, "penalties for the lazy-gap maps");

    auto* validate_cmd = app.add_subcommand("validate", "check an environment file");
    add_common(validate_cmd, validate_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        CommonOptions* opts = nullptr;
        if (active == solve) opts = &solve_opts;
        else if (active == bounds) opts = &bounds_opts;
        else if (active == sweep) opts = &sweep_opts;
        else if (active == explore) opts = &explore_opts;
        else if (active == importance) opts = &importance_opts;
        else opts = &validate_opts;

        std::map<std::string, std::string> file_values;
        if (!opts->config_path.empty()) file_values = load_config_file(opts->config_path);
        apply_config_map(active, file_values, *opts, active == explore ? &learn : nullptr);

        if (active == solve) {
            if (eta_opt->count() == 0) {
                auto it = file_values.find("eta");
                if (it == file_values.end()) throw ConfigError("--eta is required");
                eta = parse_real(it->second);
            }
            if (eta < 0) throw ConfigError("eta must be nonnegative");
            return cmd_solve(solve_opts, eta);
        }
        if (active == bounds) return cmd_eta_bounds(bounds_opts);
        if (active == sweep) {
            if (grid_opt->count() == 0) {
                auto it = file_values.find("eta_grid");
                if (it == file_values.end()) throw ConfigError("--eta-grid is required");
                eta_grid_text = it->second;
            }
            return cmd_sweep(sweep_opts, eta_grid_text);
        }
        if (active == explore) {
            if (auto it = file_values.find("etas");
                it != file_values.end() && explore->get_option("--etas")->count() == 0)
                explore_etas = it->second;
            if (auto it = file_values.find("seeds");
                it != file_values.end() && explore->get_option("--seeds")->count() == 0)
                seeds_text = it->second;
            return cmd_explore(explore_opts, learn, explore_etas, seeds_text);
        }
        if (active == importance) {
            if (auto it = file_values.find("etas");
                it != file_values.end() && importance->get_option("--etas")->count() == 0)
                importance_etas = it->second;
            return cmd_importance(importance_opts, importance_etas);
        }
        return cmd_validate(validate_opts);
    } catch (const ConfigError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfig;
    } catch (const ConvergenceError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitNoConvergence;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitConfig;
    }
}
