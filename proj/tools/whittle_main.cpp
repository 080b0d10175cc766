// Command-line experiment runner: known-model solving, tabular and DQN
// index learning, state-aggregated index learning, and report aggregation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "whittle/whittle.hpp"

namespace {

struct RunFlags {
    std::string config_file;
    std::string example, policy, reinit, out_dir, model_file;
    int k_states = 0, k_max = 0, group_size = 0;
    std::uint64_t t_max = 0, seed = 0;
    double rho = 0, alpha = 0, gamma = 0, beta = 0, epsilon = 0, delta = 0;
    bool timing = false;
};

void add_run_options(CLI::App* sub, RunFlags& f) {
    sub->add_option("--config", f.config_file, "key=value config file; flags override its values");
    sub->add_option("--example", f.example, "circular | unstructured | restart | random_walk");
    sub->add_option("--model-file", f.model_file, "JSON model description (overrides --example)");
    sub->add_option("--k-states", f.k_states, "number of states for random_walk");
    sub->add_option("--rho", f.rho, "active-reward exponent base for random_walk");
    sub->add_option("--policy", f.policy, "eg | so | es");
    sub->add_option("--alpha", f.alpha, "fast-timescale stepsize");
    sub->add_option("--gamma", f.gamma, "slow-timescale (index) stepsize");
    sub->add_option("--beta", f.beta, "discount factor");
    sub->add_option("--epsilon", f.epsilon, "exploration rate");
    sub->add_option("--delta", f.delta, "stopping threshold");
    sub->add_option("--t-max", f.t_max, "fast-timescale iterations");
    sub->add_option("--k-max", f.k_max, "outer (index) iterations");
    sub->add_option("--reinit", f.reinit, "none | periodic:N | inverse_count");
    sub->add_option("--group-size", f.group_size, "states per aggregation group");
    sub->add_option("--seed", f.seed, "run seed");
    sub->add_option("--out-dir", f.out_dir, "output directory");
    sub->add_flag("--timing", f.timing, "record real wall-clock times (breaks byte-reproducibility)");
}

whittle::ConfigValues flags_to_values(const CLI::App* sub, const RunFlags& f) {
    whittle::ConfigValues v;
    auto set = [&sub](const char* name) { return sub->count(name) > 0; };
    if (set("--example")) v.example = f.example;
    if (set("--model-file")) v.model_file = f.model_file;
    if (set("--k-states")) v.k_states = f.k_states;
    if (set("--rho")) v.rho = f.rho;
    if (set("--policy")) v.policy = f.policy;
    if (set("--alpha")) v.alpha = f.alpha;
    if (set("--gamma")) v.gamma = f.gamma;
    if (set("--beta")) v.beta = f.beta;
    if (set("--epsilon")) v.epsilon = f.epsilon;
    if (set("--delta")) v.delta = f.delta;
    if (set("--t-max")) v.t_max = f.t_max;
    if (set("--k-max")) v.k_max = f.k_max;
    if (set("--reinit")) v.reinit = f.reinit;
    if (set("--group-size")) v.group_size = f.group_size;
    if (set("--seed")) v.seed = f.seed;
    if (set("--out-dir")) v.out_dir = f.out_dir;
    if (set("--timing")) v.timing = f.timing;
    return v;
}

int run_with_algorithm(const char* algorithm, const CLI::App* sub, const RunFlags& f) {
    whittle::ConfigValues values;
    if (!f.config_file.empty()) {
        std::ifstream in(f.config_file);
        if (!in) {
            std::cerr << "error: cannot open config file " << f.config_file << "\n";
            return 1;
        }
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        values = whittle::parse_config_values(text);
    }
    whittle::merge_config_values(values, flags_to_values(sub, f));
    values.algorithm = algorithm;
    whittle::ExperimentConfig cfg = whittle::resolve_config(values);
    whittle::ExperimentResult res = whittle::run_experiment(cfg);
    const whittle::RunSummary& s = res.record.summary;
    std::printf("%s (%s): %llu iterations, final error %.6g%s -> %s\n", s.algorithm.c_str(),
                s.policy.c_str(), static_cast<unsigned long long>(s.iterations), s.final_error,
                res.converged ? "" : " (hit iteration cap before the stopping threshold)",
                res.dir.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Whittle-index learning for restless bandits"};
    app.require_subcommand(1);

    RunFlags flags;
    const std::pair<const char*, const char*> run_subs[] = {
        {"solve", "Exact value iteration and Whittle indices for a known model"},
        {"qlearn", "Tabular Q-learning against the value-iteration oracle"},
        {"index-qlearn", "Two-timescale tabular Whittle-index learning"},
        {"index-fa", "Index learning with state-aggregation features"},
        {"index-dqn", "Index learning with a DQN on the fast timescale"},
    };
    const char* config_names[] = {"solve", "qlearn", "index_qlearn", "index_fa", "index_dqn"};
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : run_subs) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_run_options(sub, flags);
        subs.push_back(sub);
    }

    std::string report_dir;
    CLI::App* rep = app.add_subcommand("report", "Aggregate run summaries into text tables");
    rep->add_option("dir", report_dir, "directory searched recursively for summary.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed()) return run_with_algorithm(config_names[i], subs[i], flags);
        if (rep->parsed()) {
            std::cout << whittle::report(report_dir);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
