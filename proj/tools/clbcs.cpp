// Copyright 2026 The clbcs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "clbcs/clbcs.hpp"
#include "clbcs/io.hpp"

namespace fs = std::filesystem;
using namespace clbcs;

namespace {

constexpr const char *kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kInput = 2, kNumerical = 3 };

/// I/O failures are input errors (exit code 2).
class IoError : public Error {
  public:
    using Error::Error;
};

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(const std::string &data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

/// Buffers every output of a command and commits them together, so a failing
/// command leaves nothing behind.
class OutputSet {
  public:
    std::ostringstream &open(const std::string &path) {
        files_.push_back({path, std::make_unique<std::ostringstream>()});
        return *files_.back().second;
    }

    void commit() {
        std::vector<std::string> temps;
        for (auto &[path, buf] : files_) {
            const std::string tmp = path + ".tmp";
            std::ofstream out(tmp, std::ios::binary);
            out << buf->str();
            out.close();
            if (!out) {
                for (const auto &t : temps) {
                    fs::remove(t);
                }
                fs::remove(tmp);
                throw IoError("cannot write '" + path + "'");
            }
            temps.push_back(tmp);
        }
        for (std::size_t i = 0; i < files_.size(); ++i) {
            fs::rename(temps[i], files_[i].first);
        }
    }

    std::vector<std::string> paths() const {
        std::vector<std::string> p;
        for (const auto &f : files_) {
            p.push_back(f.first);
        }
        return p;
    }

  private:
    std::vector<std::pair<std::string, std::unique_ptr<std::ostringstream>>> files_;
};

struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    json config = json::object();
    json inputs = json::object();
    std::uint64_t seed = 0;

    void add_input(const std::string &path, const std::string &content) { inputs[path] = sha256_hex(content); }

    json to_json(const std::vector<std::string> &outputs) const {
        return json{{"tool", "clbcs"}, {"version", kVersion}, {"command", command}, {"argv", argv},
                    {"seed", seed},    {"config", config},    {"inputs", inputs},   {"outputs", outputs}};
    }
};

void emit_manifest(OutputSet &outputs, const std::string &path, const Manifest &manifest) {
    auto files = outputs.paths();
    auto &out = outputs.open(path);
    out << manifest.to_json(files).dump(2) << '\n';
}

Observable load_observable_file(const std::string &path, Manifest &manifest) {
    const std::string text = read_file(path);
    manifest.add_input(path, text);
    return load_observable(text);
}

CompositeScheme load_model_file(const std::string &path, Manifest &manifest) {
    const std::string text = read_file(path);
    manifest.add_input(path, text);
    std::istringstream in(text);
    return read_scheme(in);
}

FixedListScheme load_list_file(const std::string &path, Manifest &manifest) {
    const std::string text = read_file(path);
    manifest.add_input(path, text);
    std::istringstream in(text);
    return FixedListScheme(read_measurement_list(in));
}

void require_qubits(std::size_t scheme_qubits, const Observable &obs) {
    if (scheme_qubits != obs.num_qubits()) {
        throw DimensionError("scheme acts on " + std::to_string(scheme_qubits) + " qubits, Hamiltonian on " +
                             std::to_string(obs.num_qubits()));
    }
}

std::string fmt(double x) {
    std::ostringstream ss;
    ss << std::setprecision(10) << x;
    return ss.str();
}

// ---------------------------------------------------------------------------

struct OptimizeArgs {
    std::string hamiltonian;
    std::size_t subschemes = 1;
    std::string out;
    TrainConfig config;
    unsigned threads = 1;
};

int cmd_optimize(const OptimizeArgs &args, Manifest manifest) {
    const Observable obs = load_observable_file(args.hamiltonian, manifest);
    if (args.subschemes == 0 || args.subschemes > obs.size()) {
        throw DomainError("--subschemes must lie in [1, " + std::to_string(obs.size()) + "]");
    }
    const TrainConfig &cfg = args.config;
    cfg.validate();
    manifest.seed = cfg.seed;
    manifest.config = {{"subschemes", args.subschemes}, {"batch_size", cfg.batch_size},
                       {"lr_beta", cfg.lr_beta},        {"lr_r", cfg.lr_r},
                       {"rescale", cfg.rescale},        {"ttur", cfg.ttur},
                       {"stop_window", cfg.stop_window}, {"stop_rel", cfg.stop_rel},
                       {"softplus_sharpness", cfg.softplus_sharpness}, {"h_floor", cfg.h_floor},
                       {"near_one_hot", cfg.near_one_hot}, {"eval_interval", cfg.eval_interval},
                       {"max_steps", cfg.max_steps},    {"threads", args.threads}};

    const auto result = train(obs, args.subschemes, cfg);

    OutputSet outputs;
    write_scheme(outputs.open(args.out + ".model.json"), result.scheme);
    write_trace_csv(outputs.open(args.out + ".trace.csv"), result.trace, cfg);
    emit_manifest(outputs, args.out + ".manifest.json", manifest);
    outputs.commit();

    std::cout << "initial V = " << fmt(result.initial_v) << '\n'
              << "final V = " << fmt(result.best_v) << " (step " << result.best_step << " of " << result.steps
              << ")\n"
              << "rescale=" << (cfg.rescale ? "on" : "off") << " ttur=" << (cfg.ttur ? "on" : "off") << '\n';
    return kOk;
}

struct EvaluateArgs {
    std::string hamiltonian;
    std::string model;
    std::string measurements;
    std::string out;
};

int cmd_evaluate(const EvaluateArgs &args, Manifest manifest) {
    const Observable obs = load_observable_file(args.hamiltonian, manifest);
    CoverageVector h;
    if (!args.model.empty()) {
        const auto scheme = load_model_file(args.model, manifest);
        require_qubits(scheme.num_qubits(), obs);
        h = coverage_vector(obs, scheme);
    } else {
        const auto scheme = load_list_file(args.measurements, manifest);
        require_qubits(scheme.num_qubits(), obs);
        h = coverage_vector(obs, scheme);
    }
    const auto report = average_one_shot_variance(obs, h);
    print_variance_report(std::cout, obs, h, report);
    if (!args.out.empty()) {
        OutputSet outputs;
        outputs.open(args.out) << variance_report_to_json(obs, h, report).dump(2) << '\n';
        emit_manifest(outputs, args.out + ".manifest.json", manifest);
        outputs.commit();
    }
    return kOk;
}

struct SampleArgs {
    std::string model;
    std::size_t shots = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out;
};

int cmd_sample(const SampleArgs &args, Manifest manifest) {
    const auto scheme = load_model_file(args.model, manifest);
    manifest.seed = args.seed;
    manifest.config = {{"shots", args.shots}};
    const auto list =
        sample_measurements(scheme, args.shots, derive_seed(args.seed, "scheme-sampling"), args.threads);
    if (args.out.empty() || args.out == "-") {
        write_measurement_list(std::cout, list);
        return kOk;
    }
    OutputSet outputs;
    write_measurement_list(outputs.open(args.out), list);
    emit_manifest(outputs, args.out + ".manifest.json", manifest);
    outputs.commit();
    return kOk;
}

struct EstimateArgs {
    std::string hamiltonian;
    std::string outcomes;
    std::string out;
};

int cmd_estimate(const EstimateArgs &args, Manifest manifest) {
    const Observable obs = load_observable_file(args.hamiltonian, manifest);
    const std::string text = read_file(args.outcomes);
    manifest.add_input(args.outcomes, text);
    std::istringstream in(text);
    const auto records = read_outcomes(in);
    const auto report = estimate(obs, records);
    std::cout << "estimate = " << fmt(report.value) << '\n' << "records = " << records.size() << '\n';
    if (!report.uncovered.empty()) {
        std::cout << "uncovered:";
        for (std::size_t j : report.uncovered) {
            std::cout << ' ' << j;
        }
        std::cout << '\n';
    }
    if (!args.out.empty()) {
        OutputSet outputs;
        outputs.open(args.out) << estimate_report_to_json(obs, report).dump(2) << '\n';
        emit_manifest(outputs, args.out + ".manifest.json", manifest);
        outputs.commit();
    }
    return kOk;
}

struct SimulateArgs {
    std::string hamiltonian;
    std::string model;
    std::string measurements;
    std::size_t shots = 1000;
    std::string state = "haar:0";
    std::size_t repeats = 1;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::size_t qubit_cap = kDefaultQubitCap;
    std::string outcomes_out;
    std::string out;
};

StateVector load_state_source(const std::string &source, std::size_t n_qubits, std::size_t cap, Manifest &manifest) {
    if (source.rfind("haar:", 0) == 0) {
        std::uint64_t s = 0;
        try {
            std::size_t used = 0;
            s = std::stoull(source.substr(5), &used);
            if (used != source.size() - 5) {
                throw std::invalid_argument("trailing characters");
            }
        } catch (const std::exception &) {
            throw ParseError("--state: expected haar:<seed>, got '" + source + "'", 0);
        }
        return haar_state(n_qubits, derive_seed(s, "haar"), cap);
    }
    const std::string text = read_file(source);
    manifest.add_input(source, text);
    std::istringstream in(text);
    auto state = read_state(in, cap);
    if (state.num_qubits() != n_qubits) {
        throw DimensionError("state file has " + std::to_string(state.num_qubits()) + " qubits, Hamiltonian has " +
                             std::to_string(n_qubits));
    }
    return state;
}

template <class Scheme>
int run_simulation(const SimulateArgs &args, const Observable &obs, const Scheme &scheme, Manifest &manifest) {
    require_qubits(scheme.num_qubits(), obs);
    const StateVector state = load_state_source(args.state, obs.num_qubits(), args.qubit_cap, manifest);
    const auto stats = simulate_estimates(obs, scheme, state, args.shots, args.repeats, args.seed, args.threads);

    json report{{"shots", stats.shots},
                {"repeats", stats.repeats},
                {"true_value", stats.true_value},
                {"mean", stats.mean},
                {"predicted_V", stats.predicted_v},
                {"predicted_state_V", stats.predicted_state_v},
                {"runs_with_uncovered", stats.runs_with_uncovered}};
    std::cout << "shots = " << stats.shots << "\nrepeats = " << stats.repeats << "\ntrue value = "
              << fmt(stats.true_value) << '\n';
    if (stats.repeats == 1) {
        report["estimate"] = stats.estimates.front();
        std::cout << "estimate = " << fmt(stats.estimates.front()) << '\n';
    } else {
        report["variance"] = stats.variance;
        report["M_times_variance"] = stats.scaled_variance;
        std::cout << "mean = " << fmt(stats.mean) << "\nvariance = " << fmt(stats.variance)
                  << "\nM*variance = " << fmt(stats.scaled_variance) << '\n';
    }
    std::cout << "predicted V = " << fmt(stats.predicted_v) << '\n'
              << "predicted V for this state = " << fmt(stats.predicted_state_v) << '\n'
              << "runs with uncovered terms = " << stats.runs_with_uncovered << '\n';

    if (!args.out.empty() || !args.outcomes_out.empty()) {
        OutputSet outputs;
        if (!args.outcomes_out.empty()) {
            OutcomeSampler sampler(state);
            write_outcomes(outputs.open(args.outcomes_out),
                           simulate_records(scheme, args.shots, sampler, args.seed, 0, args.threads));
        }
        if (!args.out.empty()) {
            outputs.open(args.out) << report.dump(2) << '\n';
        }
        emit_manifest(outputs, (args.out.empty() ? args.outcomes_out : args.out) + ".manifest.json", manifest);
        outputs.commit();
    }
    return kOk;
}

int cmd_simulate(const SimulateArgs &args, Manifest manifest) {
    const Observable obs = load_observable_file(args.hamiltonian, manifest);
    if (obs.num_qubits() > args.qubit_cap) {
        throw DomainError("Hamiltonian acts on " + std::to_string(obs.num_qubits()) +
                          " qubits, above the simulator cap of " + std::to_string(args.qubit_cap));
    }
    if (args.repeats == 0) {
        throw DomainError("--repeats must be at least 1");
    }
    manifest.seed = args.seed;
    manifest.config = {{"shots", args.shots}, {"repeats", args.repeats}, {"state", args.state}};
    if (!args.model.empty()) {
        return run_simulation(args, obs, load_model_file(args.model, manifest), manifest);
    }
    return run_simulation(args, obs, load_list_file(args.measurements, manifest), manifest);
}

struct BenchArgs {
    std::string hamiltonian;
    std::size_t subschemes = 1;
    std::size_t iterations = 100;
    std::size_t shots = 100000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

int cmd_bench(const BenchArgs &args, Manifest manifest) {
    const Observable obs = load_observable_file(args.hamiltonian, manifest);
    const std::size_t n_sub = std::min(std::max<std::size_t>(args.subschemes, 1), obs.size());
    const TrainConfig cfg;
    const auto params = initialize(obs, n_sub, cfg.near_one_hot);
    const auto scheme = realize(params);
    const auto all = all_terms(obs);
    const TermSupports supports(obs);

    using clock = std::chrono::steady_clock;
    auto time_it = [&](auto &&fn) {
        const auto t0 = clock::now();
        for (std::size_t i = 0; i < args.iterations; ++i) {
            fn();
        }
        return std::chrono::duration<double>(clock::now() - t0).count() / static_cast<double>(args.iterations);
    };
    double sink = 0.0;
    const double t_v = time_it([&] { sink += average_one_shot_variance(obs, scheme).v; });
    const double t_g = time_it([&] { sink += batch_gradient(obs, supports, params, all, cfg).cost; });
    const auto t0 = clock::now();
    const auto list = sample_measurements(scheme, args.shots, derive_seed(args.seed, "scheme-sampling"), args.threads);
    const double t_s = std::chrono::duration<double>(clock::now() - t0).count();

    std::cout << "terms = " << obs.size() << "\nqubits = " << obs.num_qubits() << "\nsubschemes = " << n_sub
              << "\nfull V evaluation: " << fmt(t_v) << " s\nfull-batch gradient: " << fmt(t_g)
              << " s\nsampling " << list.size() << " measurements: " << fmt(t_s) << " s\n";
    if (!std::isfinite(sink)) {
        std::cout << "(cost not finite)\n";
    }
    return kOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Composite LBCS measurement schemes: train, evaluate, sample, estimate, simulate"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Manifest manifest;
    for (int i = 0; i < argc; ++i) {
        manifest.argv.emplace_back(argv[i]);
    }

    OptimizeArgs opt;
    auto *optimize = app.add_subcommand("optimize", "Train a composite LBCS scheme for a Hamiltonian");
    optimize->add_option("--hamiltonian", opt.hamiltonian, "Hamiltonian file")->required();
    optimize->add_option("--subschemes", opt.subschemes, "Number of LBCS sub-schemes")->required();
    optimize->add_option("--out", opt.out, "Output prefix for .model.json, .trace.csv, .manifest.json")->required();
    optimize->add_option("--batch-size", opt.config.batch_size, "Terms per mini-batch")->capture_default_str();
    optimize->add_option("--lr-beta", opt.config.lr_beta, "Learning rate of sub-scheme parameters")
        ->capture_default_str();
    optimize->add_option("--lr-r", opt.config.lr_r, "Learning rate of sub-scheme weights (with TTUR)")
        ->capture_default_str();
    bool no_rescale = false;
    bool no_ttur = false;
    optimize->add_flag("--no-rescale", no_rescale, "Disable the 1/r_k gradient rescale");
    optimize->add_flag("--no-ttur", no_ttur, "Use --lr-beta for the weights as well");
    optimize->add_option("--seed", opt.config.seed, "Master seed")->capture_default_str();
    optimize->add_option("--threads", opt.threads, "Worker cap")->capture_default_str();
    optimize->add_option("--stop-window", opt.config.stop_window, "Steps in the stop-rule window")
        ->capture_default_str();
    optimize->add_option("--stop-rel", opt.config.stop_rel, "Required relative improvement per window")
        ->capture_default_str();
    optimize->add_option("--sharpness", opt.config.softplus_sharpness, "SoftPlus sharpness")->capture_default_str();
    optimize->add_option("--near-one-hot", opt.config.near_one_hot, "Initial mass on each seeded operator")
        ->capture_default_str();
    optimize->add_option("--h-floor", opt.config.h_floor, "Floor on h_j inside the batch cost")
        ->capture_default_str();
    optimize->add_option("--eval-interval", opt.config.eval_interval, "Steps between full-cost evaluations")
        ->capture_default_str();
    optimize->add_option("--max-steps", opt.config.max_steps, "Hard cap on optimizer steps")->capture_default_str();

    EvaluateArgs eva;
    auto *evaluate = app.add_subcommand("evaluate", "Average one-shot variance of a model or measurement list");
    evaluate->add_option("--hamiltonian", eva.hamiltonian, "Hamiltonian file")->required();
    auto *eva_model = evaluate->add_option("--model", eva.model, "Model file");
    auto *eva_list = evaluate->add_option("--measurements", eva.measurements, "Measurement list file");
    eva_model->excludes(eva_list);
    evaluate->add_option("--out", eva.out, "Write the report as JSON");

    SampleArgs smp;
    auto *sample = app.add_subcommand("sample", "Draw measurements from a model");
    sample->add_option("--model", smp.model, "Model file")->required();
    sample->add_option("--shots", smp.shots, "Number of measurements")->required();
    sample->add_option("--seed", smp.seed, "Master seed")->capture_default_str();
    sample->add_option("--threads", smp.threads, "Worker cap")->capture_default_str();
    sample->add_option("--out", smp.out, "Measurement list file (default: stdout)");

    EstimateArgs est;
    auto *estimate_cmd = app.add_subcommand("estimate", "Estimate <O> from an outcome file");
    estimate_cmd->add_option("--hamiltonian", est.hamiltonian, "Hamiltonian file")->required();
    estimate_cmd->add_option("--outcomes", est.outcomes, "Outcome file")->required();
    estimate_cmd->add_option("--out", est.out, "Write the report as JSON");

    SimulateArgs sim;
    auto *simulate = app.add_subcommand("simulate", "Run repeated simulated experiments on a known state");
    simulate->add_option("--hamiltonian", sim.hamiltonian, "Hamiltonian file")->required();
    auto *sim_model = simulate->add_option("--model", sim.model, "Model file");
    auto *sim_list = simulate->add_option("--measurements", sim.measurements, "Measurement list file");
    sim_model->excludes(sim_list);
    simulate->add_option("--shots", sim.shots, "Measurements per experiment")->capture_default_str();
    simulate->add_option("--state", sim.state, "haar:<seed> or a state file")->capture_default_str();
    simulate->add_option("--repeats", sim.repeats, "Number of experiments")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
    simulate->add_option("--threads", sim.threads, "Worker cap")->capture_default_str();
    simulate->add_option("--qubit-cap", sim.qubit_cap, "Largest register to simulate")->capture_default_str();
    simulate->add_option("--outcomes-out", sim.outcomes_out, "Write the first experiment's outcome records");
    simulate->add_option("--out", sim.out, "Write the statistics report as JSON");

    BenchArgs bch;
    auto *bench = app.add_subcommand("bench", "Report wall time of the main kernels");
    bench->add_option("--hamiltonian", bch.hamiltonian, "Hamiltonian file")->required();
    bench->add_option("--subschemes", bch.subschemes, "Number of sub-schemes")->capture_default_str();
    bench->add_option("--iterations", bch.iterations, "Repetitions per kernel")->capture_default_str();
    bench->add_option("--shots", bch.shots, "Measurements to sample")->capture_default_str();
    bench->add_option("--seed", bch.seed, "Master seed")->capture_default_str();
    bench->add_option("--threads", bch.threads, "Worker cap")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*optimize) {
            opt.config.rescale = !no_rescale;
            opt.config.ttur = !no_ttur;
            manifest.command = "optimize";
            return cmd_optimize(opt, manifest);
        }
        if (*evaluate) {
            if (eva.model.empty() == eva.measurements.empty()) {
                std::cerr << "evaluate: exactly one of --model or --measurements is required\n";
                return kUsage;
            }
            manifest.command = "evaluate";
            return cmd_evaluate(eva, manifest);
        }
        if (*sample) {
            manifest.command = "sample";
            return cmd_sample(smp, manifest);
        }
        if (*estimate_cmd) {
            manifest.command = "estimate";
            return cmd_estimate(est, manifest);
        }
        if (*simulate) {
            if (sim.model.empty() == sim.measurements.empty()) {
                std::cerr << "simulate: exactly one of --model or --measurements is required\n";
                return kUsage;
            }
            manifest.command = "simulate";
            return cmd_simulate(sim, manifest);
        }
        if (*bench) {
            manifest.command = "bench";
            return cmd_bench(bch, manifest);
        }
    } catch (const NumericalError &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    } catch (const fs::filesystem_error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInput;
    }
    return kUsage;
}
