#include "lazymdp/importance.hpp"

#include "lazymdp/text.hpp"

#include <limits>
#include <sstream>

namespace lazymdp {

ImportanceMap action_gap(const QTable& q) {
    ImportanceMap map;
    map.name = "action_gap";
    map.values.assign(q.n_states, 0.0);
    if (q.n_actions < 2) return map;
    for (int s = 0; s < q.n_states; ++s) {
        const Real* qr = q.row(s);
        Real best = -std::numeric_limits<Real>::infinity();
        Real second = -std::numeric_limits<Real>::infinity();
        for (int a = 0; a < q.n_actions; ++a) {
            if (qr[a] > best) {
                second = best;
                best = qr[a];
            } else if (qr[a] > second) {
                second = qr[a];
            }
        }
        map.values[s] = best - second;
    }
    return map;
}

ImportanceMap importance_advice(const QTable& q) {
    ImportanceMap map;
    map.name = "importance_advice";
    map.values.assign(q.n_states, 0.0);
    if (q.n_actions < 2) return map;
    for (int s = 0; s < q.n_states; ++s) {
        const Real* qr = q.row(s);
        Real best = qr[0];
        Real worst = qr[0];
        for (int a = 1; a < q.n_actions; ++a) {
            if (qr[a] > best) best = qr[a];
            if (qr[a] < worst) worst = qr[a];
        }
        map.values[s] = best - worst;
    }
    return map;
}

ImportanceMap lazy_gap_importance(const LazyMDPSpec& spec, Real tol) {
    LazySolution solution = solve_lazy(spec, tol);
    ImportanceMap map;
    std::ostringstream name;
    name << "lazy_gap_eta=" << to_decimal(spec.eta);
    map.name = name.str();
    map.values = std::move(solution.gap_star);
    return map;
}

std::string write_importance_csv(const CompiledGrid& grid, const ImportanceMap& map) {
    std::ostringstream out;
    out << "state,row,col,has_key,door_open,value\n";
    for (int s = 0; s < static_cast<int>(map.values.size()); ++s) {
        const GridState& gs = grid.state_of(s);
        out << s << ',' << gs.row << ',' << gs.col << ',' << (gs.has_key ? 1 : 0)
            << ',' << (gs.door_open ? 1 : 0) << ',' << to_decimal(map.values[s], 12)
            << "\n";
    }
    return out.str();
}

}  // namespace lazymdp
