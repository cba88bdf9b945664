#include "lazymdp/mdp_io.hpp"

#include "lazymdp/text.hpp"

#include <fstream>
#include <sstream>

namespace lazymdp {

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

[[noreturn]] void bad_format(const std::string& what) {
    throw std::invalid_argument("mdp format error: " + what);
}

struct LineReader {
    std::istringstream in;
    explicit LineReader(const std::string& text) : in(text) {}

    /// Next non-empty line split into tokens; empty result at end of input.
    std::vector<std::string> next() {
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            auto tokens = split_tokens(line);
            if (!tokens.empty()) return tokens;
        }
        return {};
    }
};

void expect_key(const std::vector<std::string>& tokens, const char* key,
                std::size_t min_tokens) {
    if (tokens.empty() || tokens[0] != key)
        bad_format(std::string("expected '") + key + "' line");
    if (tokens.size() < min_tokens)
        bad_format(std::string("'") + key + "' line is missing values");
}

TabularMDP read_mdp_body(LineReader& reader) {
    auto tokens = reader.next();
    expect_key(tokens, "lazymdp-mdp", 2);
    if (tokens[1] != "1") bad_format("unsupported version " + tokens[1]);

    tokens = reader.next();
    expect_key(tokens, "n_states", 2);
    const int S = static_cast<int>(parse_long(tokens[1]));
    tokens = reader.next();
    expect_key(tokens, "n_actions", 2);
    const int A = static_cast<int>(parse_long(tokens[1]));
    if (S <= 0 || A <= 0) bad_format("state and action counts must be positive");

    tokens = reader.next();
    expect_key(tokens, "gamma", 2);
    TabularMDP mdp(S, A, parse_real(tokens[1]));

    tokens = reader.next();
    expect_key(tokens, "initial_dist", 1);
    if (tokens.size() != static_cast<std::size_t>(S) + 1)
        bad_format("initial_dist expects one value per state");
    for (int s = 0; s < S; ++s) mdp.initial_dist[s] = parse_real(tokens[s + 1]);

    tokens = reader.next();
    expect_key(tokens, "absorbing", 1);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        long idx = parse_long(tokens[i]);
        if (idx < 0 || idx >= S) bad_format("absorbing index out of range");
        mdp.absorbing[idx] = 1;
    }

    tokens = reader.next();
    expect_key(tokens, "rewards", 1);
    if (tokens.size() != static_cast<std::size_t>(S) * A + 1)
        bad_format("rewards expects n_states*n_actions values");
    for (std::size_t i = 0; i < static_cast<std::size_t>(S) * A; ++i)
        mdp.rewards[i] = parse_real(tokens[i + 1]);

    tokens = reader.next();
    expect_key(tokens, "transitions", 1);
    while (true) {
        tokens = reader.next();
        if (tokens.empty()) bad_format("transitions section not closed by 'end'");
        if (tokens[0] == "end") break;
        if (tokens.size() != 4) bad_format("transition entries are (s, a, s', p) quadruples");
        long s = parse_long(tokens[0]);
        long a = parse_long(tokens[1]);
        long t = parse_long(tokens[2]);
        if (s < 0 || s >= S || a < 0 || a >= A || t < 0 || t >= S)
            bad_format("transition indices out of range");
        mdp.p(static_cast<int>(s), static_cast<int>(a), static_cast<int>(t)) =
            parse_real(tokens[3]);
    }
    return mdp;
}

}  // namespace

std::string write_mdp(const TabularMDP& mdp) {
    std::ostringstream out;
    out << "lazymdp-mdp 1\n";
    out << "n_states " << mdp.n_states << "\n";
    out << "n_actions " << mdp.n_actions << "\n";
    out << "gamma " << to_decimal(mdp.gamma) << "\n";
    out << "initial_dist";
    for (Real v : mdp.initial_dist) out << ' ' << to_decimal(v);
    out << "\nabsorbing";
    for (int s = 0; s < mdp.n_states; ++s)
        if (mdp.is_absorbing(s)) out << ' ' << s;
    out << "\nrewards";
    for (Real v : mdp.rewards) out << ' ' << to_decimal(v);
    out << "\ntransitions\n";
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            const Real* p = mdp.transition_row(s, a);
            for (int t = 0; t < mdp.n_states; ++t)
                if (p[t] != 0.0)
                    out << s << ' ' << a << ' ' << t << ' ' << to_decimal(p[t]) << "\n";
        }
    out << "end\n";
    return out.str();
}

TabularMDP read_mdp(const std::string& text) {
    LineReader reader(text);
    TabularMDP mdp = read_mdp_body(reader);
    if (!reader.next().empty()) bad_format("unexpected content after 'end'");
    return mdp;
}

std::string write_lazy_spec(const LazyMDPSpec& spec) {
    std::ostringstream out;
    out << write_mdp(spec.base);
    out << "default_policy";
    for (Real v : spec.default_policy.probs) out << ' ' << to_decimal(v);
    out << "\neta " << to_decimal(spec.eta) << "\n";
    return out.str();
}

LazyMDPSpec read_lazy_spec(const std::string& text) {
    LineReader reader(text);
    LazyMDPSpec spec;
    spec.base = read_mdp_body(reader);
    const int S = spec.base.n_states;
    const int A = spec.base.n_actions;

    auto tokens = reader.next();
    expect_key(tokens, "default_policy", 1);
    if (tokens.size() != static_cast<std::size_t>(S) * A + 1)
        bad_format("default_policy expects n_states*n_actions values");
    spec.default_policy = StochasticPolicy(S, A);
    for (std::size_t i = 0; i < static_cast<std::size_t>(S) * A; ++i)
        spec.default_policy.probs[i] = parse_real(tokens[i + 1]);

    tokens = reader.next();
    expect_key(tokens, "eta", 2);
    spec.eta = parse_real(tokens[1]);
    if (!reader.next().empty()) bad_format("unexpected content after 'eta'");
    return spec;
}

std::string write_policy(const StochasticPolicy& policy) {
    std::ostringstream out;
    out << "lazymdp-policy 1\n";
    out << "n_states " << policy.n_states << "\n";
    out << "n_actions " << policy.n_actions << "\n";
    out << "probs";
    for (Real v : policy.probs) out << ' ' << to_decimal(v);
    out << "\n";
    return out.str();
}

StochasticPolicy read_policy(const std::string& text) {
    LineReader reader(text);
    auto tokens = reader.next();
    expect_key(tokens, "lazymdp-policy", 2);
    if (tokens[1] != "1") bad_format("unsupported policy version");
    tokens = reader.next();
    expect_key(tokens, "n_states", 2);
    const int S = static_cast<int>(parse_long(tokens[1]));
    tokens = reader.next();
    expect_key(tokens, "n_actions", 2);
    const int A = static_cast<int>(parse_long(tokens[1]));
    if (S <= 0 || A <= 0) bad_format("policy dimensions must be positive");
    tokens = reader.next();
    expect_key(tokens, "probs", 1);
    if (tokens.size() != static_cast<std::size_t>(S) * A + 1)
        bad_format("probs expects n_states*n_actions values");
    StochasticPolicy policy(S, A);
    for (std::size_t i = 0; i < static_cast<std::size_t>(S) * A; ++i)
        policy.probs[i] = parse_real(tokens[i + 1]);
    return policy;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

}  // namespace lazymdp
