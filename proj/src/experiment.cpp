#include "dnnreg/experiment.hpp"

#include "dnnreg/errors.hpp"
#include "dnnreg/network.hpp"
#include "text.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace dnnreg {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::fixed: return "fixed";
        case Method::adaptive: return "adaptive";
        case Method::split: return "split";
        case Method::baseline: return "baseline";
        case Method::fc_fixed: return "fc-fixed";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (Method m : {Method::fixed, Method::adaptive, Method::split, Method::baseline,
                     Method::fc_fixed}) {
        if (to_string(m) == name) return m;
    }
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

void CellConfig::validate() const {
    if (label.empty()) throw std::invalid_argument("cell label is empty");
    if (label.find_first_of(",/\\\"\n") != std::string::npos) {
        throw std::invalid_argument("cell label '" + label + "' contains a reserved character");
    }
    if (n < 2) throw std::invalid_argument("cell sample size must be at least 2");
    if (!(c12 > 0.0)) throw std::invalid_argument("c12 must be positive");
    switch (method) {
        case Method::fixed:
            arch.validate();
            bounds.validate();
            if (steps == 0) throw std::invalid_argument("fixed schedule needs at least one step");
            if (!(lambda > 0.0) || !std::isfinite(lambda)) {
                throw std::invalid_argument("stepsize must be positive and finite");
            }
            break;
        case Method::adaptive:
            arch.validate();
            bounds.validate();
            schedule.validate(arch.depth);
            break;
        case Method::split:
            arch.validate();
            schedule.validate(arch.depth);
            split.validate(n);
            break;
        case Method::baseline:
            baseline.validate(n);
            break;
        case Method::fc_fixed:
            baseline.scheme.validate();
            baseline.adam.validate();
            if (baseline.hidden_layers == 0 || baseline.widths.empty() || baseline.widths[0] == 0 ||
                baseline.steps.empty() || baseline.steps[0] == 0) {
                throw std::invalid_argument("fc-fixed cell needs a layer count, width and steps");
            }
            break;
    }
}

std::size_t CellResult::valid() const {
    return static_cast<std::size_t>(
        std::count_if(reps.begin(), reps.end(), [](const Replication& r) { return !r.diverged; }));
}

std::optional<sim::Spread> CellResult::spread() const {
    std::vector<double> errors;
    for (const auto& r : reps) {
        if (!r.diverged) errors.push_back(r.l2_error);
    }
    if (errors.empty()) return std::nullopt;
    return sim::median_iqr(errors);
}

std::optional<std::size_t> CellResult::steps_differ_from_half_k() const {
    if (cell.method != Method::adaptive && cell.method != Method::split) return std::nullopt;
    std::size_t count = 0;
    for (const auto& r : reps) {
        if (!r.diverged && 2 * r.steps != cell.arch.blocks) ++count;
    }
    return count;
}

bool ExperimentResult::any_diverged() const {
    for (const auto& c : cells) {
        if (c.valid() != c.reps.size()) return true;
    }
    return false;
}

std::vector<double> curve_grid(std::size_t points) {
    if (points < 2) throw std::invalid_argument("curve grid needs at least two points");
    std::vector<double> xs(points);
    for (std::size_t i = 0; i < points; ++i) {
        xs[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    xs.back() = 1.0;
    return xs;
}

namespace {

using Predictor = std::function<std::vector<double>(std::span<const double>)>;

Predictor truncated(WeightVector w, double beta, const kernels::LayerKernels& k) {
    return [w = std::move(w), beta, &k](std::span<const double> xs) {
        auto out = predict_batch(w, xs, xs.size(), k);
        for (double& v : out) v = truncate(v, beta);
        return out;
    };
}

void describe(Replication& r, const ScheduleOutcome& fit) {
    r.steps = fit.steps;
    r.lambda = fit.lambda;
    r.stop_reason = std::string(to_string(fit.stop_reason));
}

}  // namespace

Replication run_replication(const CellConfig& cell, std::uint64_t seed, std::size_t rep,
                            Curve* curve, const kernels::LayerKernels& k) {
    Rng data_rng = substream(seed, {stream::data, rep});
    const Dataset data = sim::generate_dataset(cell.n, data_rng);
    Rng fit_rng = substream(seed, {stream::fit, rep});

    Replication r;
    r.index = rep;
    Predictor predict;
    try {
        switch (cell.method) {
            case Method::fixed: {
                const WeightVector w0 = init_weights(cell.arch, cell.bounds, fit_rng);
                ScheduleOutcome fit = gd_run(w0, data, cell.lambda, cell.steps, k);
                describe(r, fit);
                r.stop_reason = "fixed";
                predict = truncated(std::move(fit.weights), truncation_level(cell.n, cell.c12), k);
                break;
            }
            case Method::adaptive: {
                ScheduleOutcome fit =
                    adaptive_fit(cell.arch, cell.bounds, data, cell.schedule, fit_rng(), k);
                describe(r, fit);
                r.doubling_index = fit.doubling_index;
                predict = truncated(std::move(fit.weights), truncation_level(cell.n, cell.c12), k);
                break;
            }
            case Method::split: {
                SelectionResult sel = split_select(cell.arch, data, cell.split, cell.schedule,
                                                   fit_rng(), cell.c12, k);
                describe(r, sel.model);
                r.doubling_index = sel.model.doubling_index;
                r.selected = "a=" + detail::format_double(sel.chosen.a) +
                             ";b=" + detail::format_double(sel.chosen.b);
                predict = truncated(std::move(sel.model.weights),
                                    truncation_level(cell.split.n_train, cell.c12), k);
                break;
            }
            case Method::baseline: {
                auto fit = std::make_shared<BaselineFit>(
                    train_baseline(cell.baseline, data, fit_rng(), k));
                r.steps = fit->steps;
                r.stop_reason = "selected";
                r.selected = "width=" + std::to_string(fit->arch.widths.front()) +
                             ";steps=" + std::to_string(fit->steps);
                predict = [fit, &k](std::span<const double> xs) {
                    return fit->predict(xs, xs.size(), k);
                };
                break;
            }
            case Method::fc_fixed: {
                const auto arch = FcArchitecture::uniform(cell.baseline.hidden_layers,
                                                          cell.baseline.widths.front(), 1);
                auto w = fc_train(arch, fc_init(arch, cell.baseline.scheme, fit_rng), data,
                                  cell.baseline.adam, cell.baseline.steps.front(), {}, nullptr, k);
                r.steps = cell.baseline.steps.front();
                r.stop_reason = "fixed";
                const double beta = truncation_level(cell.n, cell.c12);
                predict = [arch, w = std::move(w), beta, &k](std::span<const double> xs) {
                    auto out = fc_predict(arch, w, xs, xs.size(), k);
                    for (double& v : out) v = truncate(v, beta);
                    return out;
                };
                break;
            }
        }
        r.l2_error = sim::l2_error_batch(predict);
    } catch (const DivergenceError&) {
        r = Replication{};
        r.index = rep;
        r.diverged = true;
        r.stop_reason = "diverged";
        return r;
    }
    if (curve) curve->fitted = predict(curve->xs);
    return r;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t jobs,
                                const kernels::LayerKernels& k) {
    if (spec.reps == 0) throw std::invalid_argument("at least one replication is required");
    if (spec.cells.empty()) throw std::invalid_argument("experiment has no cells");
    for (const auto& c : spec.cells) c.validate();
    for (std::size_t i = 0; i < spec.cells.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (spec.cells[i].label == spec.cells[j].label) {
                throw std::invalid_argument("duplicate cell label '" + spec.cells[i].label + "'");
            }
        }
    }

    ExperimentResult result;
    const std::size_t curve_reps = std::min(spec.curves.reps, spec.reps);
    const auto xs = curve_reps > 0 ? curve_grid(spec.curves.points) : std::vector<double>{};
    for (const auto& c : spec.cells) {
        result.cells.push_back(CellResult{c, std::vector<Replication>(spec.reps)});
        for (std::size_t rep = 0; rep < curve_reps; ++rep) {
            result.curves.push_back(Curve{c.label, rep, xs, {}});
        }
    }

    const std::size_t tasks = spec.cells.size() * spec.reps;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks; t = next++) {
            const std::size_t c = t / spec.reps;
            const std::size_t rep = t % spec.reps;
            Curve* curve = rep < curve_reps ? &result.curves[c * curve_reps + rep] : nullptr;
            try {
                result.cells[c].reps[rep] = run_replication(spec.cells[c], spec.seed, rep, curve, k);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = tasks;
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, tasks);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return result;
}

namespace {

CellConfig fixed_cell(std::size_t blocks, InitBounds bounds, std::size_t steps, double lambda) {
    CellConfig c;
    c.method = Method::fixed;
    c.arch = {blocks, 4, 8, 1};
    c.bounds = bounds;
    c.steps = steps;
    c.lambda = lambda;
    return c;
}

const std::vector<std::size_t> kBlockCounts{100, 200, 400, 800, 1600};

}  // namespace

const std::vector<std::string>& protocol_names() {
    static const std::vector<std::string> names{"table1", "table2",      "table3",
                                                "table4", "table5-nnfc", "figure1"};
    return names;
}

ExperimentSpec protocol(std::string_view name) {
    ExperimentSpec spec;
    spec.name = std::string(name);
    if (name == "table1") {
        for (std::size_t k : kBlockCounts) {
            auto c = fixed_cell(k, {1000.0, 20.0}, k / 2, 2.0 / static_cast<double>(k));
            c.label = "K" + std::to_string(k);
            spec.cells.push_back(std::move(c));
        }
    } else if (name == "table2") {
        for (double b : {2.0, 20.0, 200.0, 2000.0}) {
            for (double a : {10.0, 100.0, 1000.0}) {
                auto c = fixed_cell(800, {a, b}, 400, 1.0 / 400.0);
                c.label = "A" + detail::format_double(a) + "_B" + detail::format_double(b);
                spec.cells.push_back(std::move(c));
            }
        }
    } else if (name == "table3") {
        for (std::size_t k : kBlockCounts) {
            CellConfig c;
            c.label = "K" + std::to_string(k);
            c.method = Method::adaptive;
            c.arch = {k, 4, 8, 1};
            spec.cells.push_back(std::move(c));
        }
    } else if (name == "table4") {
        for (std::size_t k : {100, 200, 400, 800}) {
            CellConfig c;
            c.label = "K" + std::to_string(k);
            c.method = Method::split;
            c.arch = {k, 4, 8, 1};
            c.split.grid = bounds_grid({10.0, 100.0, 1000.0}, {20.0, 200.0, 2000.0});
            spec.cells.push_back(std::move(c));
        }
    } else if (name == "table5-nnfc") {
        for (std::size_t layers : {2, 4, 6}) {
            CellConfig c;
            c.label = "nnfc" + std::to_string(layers);
            c.method = Method::baseline;
            c.baseline.hidden_layers = layers;
            spec.cells.push_back(std::move(c));
        }
    } else if (name == "figure1") {
        spec.reps = 10;
        for (InitKind kind : {InitKind::paper_style, InitKind::glorot_uniform,
                              InitKind::glorot_normal, InitKind::he_uniform, InitKind::he_normal}) {
            CellConfig c;
            c.label = std::string(to_string(kind));
            c.method = Method::fc_fixed;
            c.baseline.hidden_layers = 4;
            c.baseline.widths = {20};
            c.baseline.steps = {500};
            c.baseline.scheme.kind = kind;
            spec.cells.push_back(std::move(c));
        }
    } else {
        throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
    }
    return spec;
}

namespace {

void write_cell_columns(std::ostream& os, const CellConfig& c) {
    os << c.label << ',' << to_string(c.method) << ',' << c.n << ',';
    switch (c.method) {
        case Method::fixed:
        case Method::adaptive:
            os << c.arch.blocks << ',' << c.arch.depth << ',' << c.arch.width << ','
               << detail::format_double(c.bounds.a) << ',' << detail::format_double(c.bounds.b);
            break;
        case Method::split:
            os << c.arch.blocks << ',' << c.arch.depth << ',' << c.arch.width << ",,";
            break;
        case Method::baseline:
        case Method::fc_fixed:
            os << ',' << c.baseline.hidden_layers << ',';
            if (c.method == Method::fc_fixed) os << c.baseline.widths.front();
            os << ',';
            if (c.baseline.scheme.kind == InitKind::paper_style) {
                os << detail::format_double(c.baseline.scheme.a) << ','
                   << detail::format_double(c.baseline.scheme.b);
            } else {
                os << ',';
            }
            break;
    }
}

constexpr const char* kCellHeader = "cell,method,n,K,L,r,A,B";

}  // namespace

void write_replications_csv(std::ostream& os, const ExperimentResult& result) {
    os << kCellHeader
       << ",replication,l2_error,diverged,t_n,lambda,doubling_index,stop_reason,selected\n";
    for (const auto& cell : result.cells) {
        for (const auto& r : cell.reps) {
            write_cell_columns(os, cell.cell);
            os << ',' << r.index << ',';
            if (!r.diverged) os << detail::format_double(r.l2_error);
            os << ',' << (r.diverged ? 1 : 0) << ',';
            if (!r.diverged) os << r.steps;
            os << ',';
            if (r.lambda > 0.0) os << detail::format_double(r.lambda);
            os << ',';
            if (r.doubling_index) os << *r.doubling_index;
            os << ',' << r.stop_reason << ',' << r.selected << '\n';
        }
    }
}

void write_summary_csv(std::ostream& os, const ExperimentResult& result) {
    os << kCellHeader << ",reps,valid,median,iqr,t_n_differs\n";
    for (const auto& cell : result.cells) {
        write_cell_columns(os, cell.cell);
        os << ',' << cell.reps.size() << ',' << cell.valid() << ',';
        if (const auto s = cell.spread()) {
            os << detail::format_double(s->median) << ',' << detail::format_double(s->iqr);
        } else {
            os << ',';
        }
        os << ',';
        if (const auto d = cell.steps_differ_from_half_k()) os << *d;
        os << '\n';
    }
}

void write_curve_csv(std::ostream& os, const Curve& curve) {
    os << "x,m,fitted\n";
    for (std::size_t i = 0; i < curve.xs.size(); ++i) {
        os << detail::format_double(curve.xs[i]) << ','
           << detail::format_double(sim::eval_m(curve.xs[i])) << ',';
        if (!curve.fitted.empty()) os << detail::format_double(curve.fitted[i]);
        os << '\n';
    }
}

}  // namespace dnnreg
