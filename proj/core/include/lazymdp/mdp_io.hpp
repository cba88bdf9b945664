#pragma once

#include "lazymdp/lazy_transform.hpp"

#include <string>

namespace lazymdp {

/// Text serialization of a TabularMDP. Reals are written in their shortest
/// round-tripping decimal form, so decimal literals with up to 17
/// significant digits survive a read/write cycle bit-exactly. Transitions
/// are listed as (state, action, next, probability) quadruples; omitted
/// entries are zero. See the README for the full layout.
std::string write_mdp(const TabularMDP& mdp);
TabularMDP read_mdp(const std::string& text);

/// The MDP format followed by default_policy (row-major) and eta sections.
std::string write_lazy_spec(const LazyMDPSpec& spec);
LazyMDPSpec read_lazy_spec(const std::string& text);

std::string write_policy(const StochasticPolicy& policy);
StochasticPolicy read_policy(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace lazymdp
