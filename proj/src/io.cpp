#include "dnnreg/io.hpp"

#include "dnnreg/errors.hpp"
#include "text.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace dnnreg {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    for (;;) {
        const auto comma = line.find(',');
        out.push_back(trim(line.substr(0, comma)));
        if (comma == std::string_view::npos) return out;
        line.remove_prefix(comma + 1);
    }
}

std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

template <class T>
T parse_unsigned(std::string_view s, const std::string& what) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw DataError("model file: bad " + what + " '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

Dataset read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DataError("csv: missing header row");
    const auto header = split_fields(line);
    if (header.size() < 2) throw DataError("csv: header needs at least one feature and y");
    const std::size_t dim = header.size() - 1;
    for (std::size_t j = 0; j < dim; ++j) {
        if (header[j] != "x" + std::to_string(j + 1)) {
            throw DataError("csv: header column " + std::to_string(j + 1) + " is '" +
                            std::string(header[j]) + "', expected x" + std::to_string(j + 1));
        }
    }
    if (header.back() != "y") throw DataError("csv: last header column must be y");

    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != dim + 1) {
            throw DataError("csv: row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(dim + 1));
        }
        for (std::size_t j = 0; j <= dim; ++j) {
            const auto v = parse_double(fields[j]);
            if (!v || !std::isfinite(*v)) {
                throw DataError("csv: row " + std::to_string(row) + ", column " +
                                std::to_string(j + 1) + ": '" + std::string(fields[j]) +
                                "' is not a finite number");
            }
            (j < dim ? xs : ys).push_back(*v);
        }
    }
    if (ys.empty()) throw DataError("csv: no data rows");
    return Dataset(dim, std::move(xs), std::move(ys));
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
    for (std::size_t j = 0; j < data.dim(); ++j) os << 'x' << j + 1 << ',';
    os << "y\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.x(i)) os << detail::format_double(v) << ',';
        os << detail::format_double(data.y(i)) << '\n';
    }
}

void FitConfig::validate() const {
    arch.validate();
    bounds.validate();
    if (!(c12 > 0.0)) throw std::invalid_argument("c12 must be positive");
    if (fixed_steps) {
        if (*fixed_steps == 0) throw std::invalid_argument("fixed schedule needs at least one step");
        if (lambda && (!(*lambda > 0.0) || !std::isfinite(*lambda))) {
            throw std::invalid_argument("stepsize must be positive and finite");
        }
    } else {
        if (lambda) throw std::invalid_argument("a stepsize can only be given with fixed steps");
        schedule.validate(arch.depth);
    }
}

std::vector<double> FittedModel::predict(std::span<const double> rows, std::size_t count,
                                         const kernels::LayerKernels& k) const {
    auto out = predict_batch(weights, rows, count, k);
    for (double& v : out) v = truncate(v, beta);
    return out;
}

FittedModel fit_model(const FitConfig& cfg, const Dataset& data, const kernels::LayerKernels& k) {
    cfg.validate();
    if (data.dim() != cfg.arch.input_dim) {
        throw DimensionError("data has " + std::to_string(data.dim()) +
                             " features, the architecture expects " +
                             std::to_string(cfg.arch.input_dim));
    }
    ScheduleOutcome out;
    FittedModel m;
    if (cfg.fixed_steps) {
        Rng rng = substream(cfg.seed, {stream::fit});
        const WeightVector w0 = init_weights(cfg.arch, cfg.bounds, rng);
        const double lambda = cfg.lambda ? *cfg.lambda : 1.0 / static_cast<double>(*cfg.fixed_steps);
        out = gd_run(w0, data, lambda, *cfg.fixed_steps, k);
        m.schedule = "fixed";
    } else {
        out = adaptive_fit(cfg.arch, cfg.bounds, data, cfg.schedule, cfg.seed, k);
        m.schedule = "adaptive";
        m.stop_reason = std::string(to_string(out.stop_reason));
        m.doubling_index = out.doubling_index;
    }
    m.weights = std::move(out.weights);
    m.beta = truncation_level(data.size(), cfg.c12);
    m.lambda = out.lambda;
    m.steps = out.steps;
    m.sample_size = data.size();
    m.training_risk = out.trace.back().risk;
    return m;
}

void write_model(std::ostream& os, const FittedModel& model) {
    const auto& a = model.weights.arch();
    os << "dnnreg-model " << kModelFormatVersion << '\n'
       << "blocks " << a.blocks << '\n'
       << "depth " << a.depth << '\n'
       << "width " << a.width << '\n'
       << "input_dim " << a.input_dim << '\n'
       << "beta " << detail::format_double(model.beta) << '\n'
       << "schedule " << model.schedule << '\n'
       << "lambda " << detail::format_double(model.lambda) << '\n'
       << "steps " << model.steps << '\n';
    if (!model.stop_reason.empty()) os << "stop_reason " << model.stop_reason << '\n';
    if (model.doubling_index) os << "doubling_index " << *model.doubling_index << '\n';
    os << "sample_size " << model.sample_size << '\n'
       << "training_risk " << detail::format_double(model.training_risk) << '\n';
    if (model.l2_error) os << "l2_error " << detail::format_double(*model.l2_error) << '\n';
    os << "weights " << model.weights.size() << '\n';
    for (double w : model.weights.values()) os << detail::format_double(w) << '\n';
}

FittedModel read_model(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DataError("model file: empty");
    {
        std::istringstream head(line);
        std::string magic;
        int version = 0;
        if (!(head >> magic >> version) || magic != "dnnreg-model") {
            throw DataError("model file: missing 'dnnreg-model' header");
        }
        if (version != kModelFormatVersion) {
            throw DataError("model file: unsupported version " + std::to_string(version));
        }
    }
    std::map<std::string, std::string, std::less<>> kv;
    std::size_t count = 0;
    bool have_weights = false;
    while (std::getline(is, line)) {
        const std::string_view s = trim(line);
        if (s.empty()) continue;
        const auto space = s.find(' ');
        if (space == std::string_view::npos) throw DataError("model file: bad line '" + line + "'");
        const std::string key(s.substr(0, space));
        const std::string_view value = trim(s.substr(space + 1));
        if (key == "weights") {
            count = parse_unsigned<std::size_t>(value, "weight count");
            have_weights = true;
            break;
        }
        if (!kv.emplace(key, std::string(value)).second) {
            throw DataError("model file: duplicate key '" + key + "'");
        }
    }
    if (!have_weights) throw DataError("model file: missing weights section");

    auto get = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw DataError(std::string("model file: missing key '") + key + "'");
        return it->second;
    };
    auto get_double = [&](const char* key) {
        const auto v = parse_double(get(key));
        if (!v) throw DataError(std::string("model file: bad value for '") + key + "'");
        return *v;
    };

    Architecture arch;
    arch.blocks = parse_unsigned<std::size_t>(get("blocks"), "blocks");
    arch.depth = parse_unsigned<std::size_t>(get("depth"), "depth");
    arch.width = parse_unsigned<std::size_t>(get("width"), "width");
    arch.input_dim = parse_unsigned<std::size_t>(get("input_dim"), "input_dim");
    try {
        arch.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    if (count != param_count(arch)) {
        throw DataError("model file: " + std::to_string(count) + " weights, architecture needs " +
                        std::to_string(param_count(arch)));
    }
    std::vector<double> values;
    values.reserve(count);
    while (values.size() < count && std::getline(is, line)) {
        const auto v = parse_double(trim(line));
        if (!v || !std::isfinite(*v)) throw DataError("model file: bad weight '" + line + "'");
        values.push_back(*v);
    }
    if (values.size() != count) throw DataError("model file: truncated weight list");

    FittedModel m;
    m.weights = WeightVector(arch, std::move(values));
    m.beta = get_double("beta");
    if (!(m.beta > 0.0)) throw DataError("model file: truncation level must be positive");
    m.schedule = get("schedule");
    m.lambda = get_double("lambda");
    m.steps = parse_unsigned<std::size_t>(get("steps"), "steps");
    if (kv.count("stop_reason")) m.stop_reason = get("stop_reason");
    if (kv.count("doubling_index")) {
        m.doubling_index = parse_unsigned<std::size_t>(get("doubling_index"), "doubling_index");
    }
    m.sample_size = parse_unsigned<std::size_t>(get("sample_size"), "sample_size");
    m.training_risk = get_double("training_risk");
    if (kv.count("l2_error")) m.l2_error = get_double("l2_error");
    return m;
}

void write_predictions_csv(std::ostream& os, const Dataset& data,
                           std::span<const double> predictions) {
    if (predictions.size() != data.size()) {
        throw DimensionError("one prediction per sample is required");
    }
    for (std::size_t j = 0; j < data.dim(); ++j) os << 'x' << j + 1 << ',';
    os << "prediction\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.x(i)) os << detail::format_double(v) << ',';
        os << detail::format_double(predictions[i]) << '\n';
    }
}

}  // namespace dnnreg
