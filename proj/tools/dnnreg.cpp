// dnnreg: fit the parallel-block estimate on a CSV sample, run the
// simulation protocols, and repeat earlier runs from their manifests.
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 numerical divergence.

#include "dnnreg/errors.hpp"
#include "dnnreg/experiment.hpp"
#include "dnnreg/io.hpp"
#include "dnnreg/kernels.hpp"
#include "dnnreg/manifest.hpp"
#include "dnnreg/simulation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace dnnreg;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kDivergence = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const kernels::LayerKernels& select_kernels(const std::string& name) {
    kernels::Isa isa;
    try {
        isa = kernels::parse_isa(name);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!kernels::available(isa)) {
        throw UsageError("kernel '" + name + "' is not available on this machine");
    }
    return kernels::kernels_for(isa);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os << text;
    if (!os) throw DataError("cannot write '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(is), {}};
}

void save_manifest(const fs::path& dir, const RunManifest& m) {
    std::ostringstream os;
    write_manifest(os, m);
    write_text(dir / "manifest.json", os.str());
}

// Fit

int execute_fit(const FitRequest& req, const fs::path& out, const kernels::LayerKernels& k) {
    std::ifstream in(req.input);
    if (!in) throw DataError("cannot open '" + req.input + "'");
    const Dataset data = read_dataset_csv(in);
    FittedModel model = fit_model(req.config, data, k);
    if (req.report_l2) {
        if (data.dim() != 1) throw DataError("--report-l2 needs one-dimensional covariates");
        model.l2_error = sim::l2_error_batch(
            [&](std::span<const double> xs) { return model.predict(xs, xs.size(), k); });
    }
    fs::create_directories(out);
    std::ostringstream model_text;
    write_model(model_text, model);
    write_text(out / "model.txt", model_text.str());
    std::ostringstream pred_text;
    write_predictions_csv(pred_text, data, model.predict(data.xs(), data.size(), k));
    write_text(out / "predictions.csv", pred_text.str());

    RunManifest m;
    m.command = "fit";
    m.kernel = std::string(kernels::to_string(k.isa));
    m.version = library_version();
    m.artifacts = {"model.txt", "predictions.csv"};
    m.fit = req;
    save_manifest(out, m);

    std::cout << "schedule " << model.schedule << ", lambda " << model.lambda << ", steps "
              << model.steps;
    if (!model.stop_reason.empty()) std::cout << " (" << model.stop_reason << ")";
    std::cout << ", training risk " << model.training_risk;
    if (model.l2_error) std::cout << ", L2 error " << *model.l2_error;
    std::cout << '\n';
    return kOk;
}

// Experiment

int execute_experiment(const ExperimentSpec& spec, const fs::path& out, std::size_t jobs,
                       const kernels::LayerKernels& k) {
    const ExperimentResult result = run_experiment(spec, jobs, k);
    RunManifest m;
    m.command = "experiment";
    m.kernel = std::string(kernels::to_string(k.isa));
    m.version = library_version();
    m.artifacts = write_experiment_outputs(out, result);
    m.experiment = spec;
    save_manifest(out, m);

    for (const auto& cell : result.cells) {
        std::cout << cell.cell.label << ": ";
        if (const auto s = cell.spread()) {
            std::cout << "median " << s->median << " (IQR " << s->iqr << ")";
        } else {
            std::cout << "no valid replications";
        }
        std::cout << ", " << cell.valid() << "/" << cell.reps.size() << " valid";
        if (const auto d = cell.steps_differ_from_half_k()) std::cout << ", t_n != K/2: " << *d;
        std::cout << '\n';
    }
    if (result.any_diverged()) {
        std::cerr << "dnnreg: some replications diverged (see replications.csv)\n";
        return kDivergence;
    }
    return kOk;
}

bool block_method(Method m) {
    return m == Method::fixed || m == Method::adaptive || m == Method::split;
}

// Rerun

int execute_rerun(const fs::path& manifest_path, const fs::path& out,
                  std::optional<std::size_t> jobs, bool verify) {
    std::ifstream is(manifest_path);
    if (!is) throw DataError("cannot open '" + manifest_path.string() + "'");
    const RunManifest m = read_manifest(is);
    const auto& k = select_kernels(m.kernel);
    if (fs::exists(out) && fs::equivalent(out, manifest_path.parent_path())) {
        throw UsageError("--out must differ from the directory holding the manifest");
    }
    int code = kOk;
    if (m.experiment) {
        code = execute_experiment(*m.experiment, out, jobs.value_or(1), k);
    } else {
        code = execute_fit(*m.fit, out, k);
    }
    if (!verify) return code;

    std::size_t mismatches = 0;
    for (const auto& a : m.artifacts) {
        const bool same = read_text(manifest_path.parent_path() / a) == read_text(out / a);
        if (!same) {
            std::cerr << "dnnreg: " << a << " differs\n";
            ++mismatches;
        }
    }
    std::cout << m.artifacts.size() - mismatches << "/" << m.artifacts.size()
              << " artifacts reproduced byte-identically\n";
    return mismatches == 0 ? code : kData;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parallel-block neural network regression"};
    app.require_subcommand(1);
    app.set_version_flag("--version", library_version());

    std::string kernel = "auto";
    std::uint64_t seed = 1;

    // Settings shared by fit and experiment.
    std::optional<std::size_t> depth, width;
    std::optional<double> a_bound, b_bound;
    std::optional<std::size_t> tmin;
    std::optional<double> c8, c9, c12;
    std::optional<std::size_t> practical_cap;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
        cmd->add_option("--kernel", kernel, "Layer kernels: auto, scalar or avx2")
            ->capture_default_str();
        cmd->add_option("--depth", depth, "Depth L of every block (>= 2)");
        cmd->add_option("--width", width, "Width r of the hidden levels");
        cmd->add_option("--a-bound", a_bound, "Input-level initialization bound A");
        cmd->add_option("--b-bound", b_bound, "Inner-level initialization bound B");
        cmd->add_option("--tmin", tmin, "Smallest planned step count of the adaptive rule");
        cmd->add_option("--c8", c8, "Exponent of ln(n) in the step cap (must exceed 2L)");
        cmd->add_option("--c9", c9, "Budget constant of the stopping conditions");
        cmd->add_option("--c12", c12, "Truncation constant, beta = c12 ln(n)");
        cmd->add_option("--practical-cap", practical_cap,
                        "Upper bound on the step cap; 0 disables it");
    };
    auto apply_schedule = [&](ScheduleConfig& s) {
        if (tmin) s.t_min = *tmin;
        if (c8) s.c8 = *c8;
        if (c9) s.c9 = *c9;
        if (practical_cap) {
            s.practical_cap = *practical_cap == 0 ? std::nullopt : std::optional(*practical_cap);
        }
    };

    auto* fit = app.add_subcommand("fit", "Fit the estimate on a CSV dataset (header x1..xd,y)");
    add_common(fit);
    std::string input;
    std::string fit_out;
    std::size_t blocks = 800;
    bool adaptive = false;
    std::optional<std::size_t> fixed_steps;
    std::optional<double> lambda;
    bool report_l2 = false;
    fit->add_option("--input", input, "Dataset CSV")->required();
    fit->add_option("--out", fit_out, "Output directory")->required();
    fit->add_option("--k", blocks, "Number of parallel blocks K")->capture_default_str();
    auto* adaptive_flag = fit->add_flag("--adaptive", adaptive,
                                        "Data-dependent stepsize and step count (default)");
    fit->add_option("--fixed-steps", fixed_steps, "Fixed number of gradient-descent steps")
        ->excludes(adaptive_flag);
    fit->add_option("--lambda", lambda, "Stepsize of the fixed schedule (default 1/steps)");
    fit->add_flag("--report-l2", report_l2,
                  "Record the L2 error against the synthetic regression function");

    auto* exp = app.add_subcommand("experiment", "Run a simulation protocol");
    add_common(exp);
    std::string name;
    std::string exp_out;
    std::optional<std::size_t> reps;
    std::size_t jobs = 1;
    std::vector<std::size_t> k_filter;
    std::size_t curve_reps = 1;
    exp->add_option("name", name, "Protocol")
        ->required()
        ->check(CLI::IsMember(protocol_names()));
    exp->add_option("--out", exp_out, "Output directory")->required();
    exp->add_option("--reps", reps, "Replications per cell (protocol default otherwise)");
    exp->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    exp->add_option("--k", k_filter, "Only run cells with these block counts");
    exp->add_option("--curve-reps", curve_reps,
                    "Replications per cell whose fitted curve is written")
        ->capture_default_str();

    auto* rerun = app.add_subcommand("rerun", "Repeat a run from its manifest.json");
    std::string manifest;
    std::string rerun_out;
    std::optional<std::size_t> rerun_jobs;
    bool verify = false;
    rerun->add_option("manifest", manifest, "manifest.json of an earlier run")->required();
    rerun->add_option("--out", rerun_out, "Output directory")->required();
    rerun->add_option("--jobs", rerun_jobs, "Worker threads")->check(CLI::PositiveNumber);
    rerun->add_flag("--verify", verify,
                    "Compare every artifact with the original run (exit 2 on a difference)");

    auto* gen = app.add_subcommand("generate", "Write a sample of the synthetic model as CSV");
    std::size_t gen_n = 100;
    std::string gen_out;
    std::uint64_t gen_seed = 1;
    gen->add_option("--n", gen_n, "Sample size")->capture_default_str()->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "Seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*fit) {
            const auto& k = select_kernels(kernel);
            FitRequest req;
            req.input = fs::absolute(input).string();
            req.report_l2 = report_l2;
            auto& c = req.config;
            c.arch.blocks = blocks;
            if (depth) c.arch.depth = *depth;
            if (width) c.arch.width = *width;
            if (a_bound) c.bounds.a = *a_bound;
            if (b_bound) c.bounds.b = *b_bound;
            c.fixed_steps = fixed_steps;
            c.lambda = lambda;
            apply_schedule(c.schedule);
            if (c12) c.c12 = *c12;
            c.seed = seed;
            try {
                c.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            return execute_fit(req, fit_out, k);
        }
        if (*exp) {
            const auto& k = select_kernels(kernel);
            ExperimentSpec spec = protocol(name);
            spec.seed = seed;
            if (reps) spec.reps = *reps;
            spec.curves.reps = curve_reps;
            if (!k_filter.empty()) {
                std::erase_if(spec.cells, [&](const CellConfig& c) {
                    return !block_method(c.method) ||
                           std::find(k_filter.begin(), k_filter.end(), c.arch.blocks) ==
                               k_filter.end();
                });
                if (spec.cells.empty()) throw UsageError("--k selects no cell of " + name);
            }
            for (auto& c : spec.cells) {
                if (block_method(c.method)) {
                    if (depth) c.arch.depth = *depth;
                    if (width) c.arch.width = *width;
                    if (c.method != Method::split) {
                        if (a_bound) c.bounds.a = *a_bound;
                        if (b_bound) c.bounds.b = *b_bound;
                    }
                    apply_schedule(c.schedule);
                } else if (c.baseline.scheme.kind == InitKind::paper_style) {
                    if (a_bound) c.baseline.scheme.a = *a_bound;
                    if (b_bound) c.baseline.scheme.b = *b_bound;
                }
                if (c12) {
                    c.c12 = *c12;
                    c.baseline.c12 = *c12;
                }
                try {
                    c.validate();
                } catch (const std::invalid_argument& e) {
                    throw UsageError(c.label + ": " + e.what());
                }
            }
            return execute_experiment(spec, exp_out, jobs, k);
        }
        if (*rerun) return execute_rerun(manifest, rerun_out, rerun_jobs, verify);
        if (*gen) {
            Rng rng = substream(gen_seed, {stream::data});
            const Dataset data = sim::generate_dataset(gen_n, rng);
            std::ostringstream os;
            write_dataset_csv(os, data);
            write_text(gen_out, os.str());
            return kOk;
        }
    } catch (const UsageError& e) {
        std::cerr << "dnnreg: " << e.what() << '\n';
        return kUsage;
    } catch (const DivergenceError& e) {
        std::cerr << "dnnreg: " << e.what() << '\n';
        return kDivergence;
    } catch (const DimensionError& e) {
        std::cerr << "dnnreg: " << e.what() << '\n';
        return kData;
    } catch (const DataError& e) {
        std::cerr << "dnnreg: " << e.what() << '\n';
        return kData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "dnnreg: " << e.what() << '\n';
        return kData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "dnnreg: " << e.what() << '\n';
        return kUsage;
    }
    return kOk;
}
