#include "dnnreg/manifest.hpp"

#include "dnnreg/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#ifndef DNNREG_VERSION
#define DNNREG_VERSION "unknown"
#endif

namespace dnnreg {

using nlohmann::json;

std::string library_version() { return DNNREG_VERSION; }

namespace {

json arch_json(const Architecture& a) {
    return {{"blocks", a.blocks}, {"depth", a.depth}, {"width", a.width}, {"input_dim", a.input_dim}};
}

Architecture arch_from(const json& j) {
    return {j.at("blocks").get<std::size_t>(), j.at("depth").get<std::size_t>(),
            j.at("width").get<std::size_t>(), j.at("input_dim").get<std::size_t>()};
}

json bounds_json(const InitBounds& b) { return {{"a", b.a}, {"b", b.b}}; }

InitBounds bounds_from(const json& j) { return {j.at("a").get<double>(), j.at("b").get<double>()}; }

json schedule_json(const ScheduleConfig& s) {
    json j{{"t_min", s.t_min}, {"c8", s.c8}, {"c9", s.c9}, {"practical_cap", nullptr}};
    if (s.practical_cap) j["practical_cap"] = *s.practical_cap;
    return j;
}

ScheduleConfig schedule_from(const json& j) {
    ScheduleConfig s;
    s.t_min = j.at("t_min").get<std::size_t>();
    s.c8 = j.at("c8").get<double>();
    s.c9 = j.at("c9").get<double>();
    const auto& cap = j.at("practical_cap");
    s.practical_cap = cap.is_null() ? std::nullopt : std::optional(cap.get<std::size_t>());
    return s;
}

json baseline_json(const BaselineConfig& b) {
    return {{"hidden_layers", b.hidden_layers},
            {"widths", b.widths},
            {"steps", b.steps},
            {"init", {{"kind", std::string(to_string(b.scheme.kind))},
                      {"a", b.scheme.a},
                      {"b", b.scheme.b}}},
            {"adam", {{"lr", b.adam.lr},
                      {"beta1", b.adam.beta1},
                      {"beta2", b.adam.beta2},
                      {"eps", b.adam.eps}}},
            {"n_train", b.n_train},
            {"n_test", b.n_test},
            {"c12", b.c12}};
}

BaselineConfig baseline_from(const json& j) {
    BaselineConfig b;
    b.hidden_layers = j.at("hidden_layers").get<std::size_t>();
    b.widths = j.at("widths").get<std::vector<std::size_t>>();
    b.steps = j.at("steps").get<std::vector<std::size_t>>();
    const auto& init = j.at("init");
    b.scheme = {parse_init_kind(init.at("kind").get<std::string>()), init.at("a").get<double>(),
                init.at("b").get<double>()};
    const auto& adam = j.at("adam");
    b.adam = {adam.at("lr").get<double>(), adam.at("beta1").get<double>(),
              adam.at("beta2").get<double>(), adam.at("eps").get<double>()};
    b.n_train = j.at("n_train").get<std::size_t>();
    b.n_test = j.at("n_test").get<std::size_t>();
    b.c12 = j.at("c12").get<double>();
    return b;
}

json cell_json(const CellConfig& c) {
    json grid = json::array();
    for (const auto& g : c.split.grid) grid.push_back(bounds_json(g));
    return {{"label", c.label},
            {"method", std::string(to_string(c.method))},
            {"n", c.n},
            {"arch", arch_json(c.arch)},
            {"bounds", bounds_json(c.bounds)},
            {"steps", c.steps},
            {"lambda", c.lambda},
            {"schedule", schedule_json(c.schedule)},
            {"split", {{"n_train", c.split.n_train}, {"n_test", c.split.n_test}, {"grid", grid}}},
            {"baseline", baseline_json(c.baseline)},
            {"c12", c.c12}};
}

CellConfig cell_from(const json& j) {
    CellConfig c;
    c.label = j.at("label").get<std::string>();
    c.method = parse_method(j.at("method").get<std::string>());
    c.n = j.at("n").get<std::size_t>();
    c.arch = arch_from(j.at("arch"));
    c.bounds = bounds_from(j.at("bounds"));
    c.steps = j.at("steps").get<std::size_t>();
    c.lambda = j.at("lambda").get<double>();
    c.schedule = schedule_from(j.at("schedule"));
    const auto& split = j.at("split");
    c.split.n_train = split.at("n_train").get<std::size_t>();
    c.split.n_test = split.at("n_test").get<std::size_t>();
    for (const auto& g : split.at("grid")) c.split.grid.push_back(bounds_from(g));
    c.baseline = baseline_from(j.at("baseline"));
    c.c12 = j.at("c12").get<double>();
    return c;
}

json experiment_json(const ExperimentSpec& s) {
    json cells = json::array();
    for (const auto& c : s.cells) cells.push_back(cell_json(c));
    return {{"name", s.name},
            {"seed", s.seed},
            {"reps", s.reps},
            {"curves", {{"points", s.curves.points}, {"reps", s.curves.reps}}},
            {"cells", cells}};
}

ExperimentSpec experiment_from(const json& j) {
    ExperimentSpec s;
    s.name = j.at("name").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.reps = j.at("reps").get<std::size_t>();
    s.curves.points = j.at("curves").at("points").get<std::size_t>();
    s.curves.reps = j.at("curves").at("reps").get<std::size_t>();
    for (const auto& c : j.at("cells")) s.cells.push_back(cell_from(c));
    return s;
}

json fit_json(const FitRequest& f) {
    const auto& c = f.config;
    json j{{"input", f.input},
           {"report_l2", f.report_l2},
           {"arch", arch_json(c.arch)},
           {"bounds", bounds_json(c.bounds)},
           {"fixed_steps", nullptr},
           {"lambda", nullptr},
           {"schedule", schedule_json(c.schedule)},
           {"c12", c.c12},
           {"seed", c.seed}};
    if (c.fixed_steps) j["fixed_steps"] = *c.fixed_steps;
    if (c.lambda) j["lambda"] = *c.lambda;
    return j;
}

FitRequest fit_from(const json& j) {
    FitRequest f;
    f.input = j.at("input").get<std::string>();
    f.report_l2 = j.at("report_l2").get<bool>();
    auto& c = f.config;
    c.arch = arch_from(j.at("arch"));
    c.bounds = bounds_from(j.at("bounds"));
    if (!j.at("fixed_steps").is_null()) c.fixed_steps = j.at("fixed_steps").get<std::size_t>();
    if (!j.at("lambda").is_null()) c.lambda = j.at("lambda").get<double>();
    c.schedule = schedule_from(j.at("schedule"));
    c.c12 = j.at("c12").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return f;
}

}  // namespace

void write_manifest(std::ostream& os, const RunManifest& m) {
    json j{{"format", kManifestFormatVersion},
           {"command", m.command},
           {"versions", {{"dnnreg", m.version}, {"manifest", kManifestFormatVersion}}},
           {"kernel", m.kernel},
           {"artifacts", m.artifacts}};
    if (m.experiment) {
        j["seed"] = m.experiment->seed;
        j["config"] = experiment_json(*m.experiment);
    } else if (m.fit) {
        j["seed"] = m.fit->config.seed;
        j["config"] = fit_json(*m.fit);
    }
    os << j.dump(2) << '\n';
}

RunManifest read_manifest(std::istream& is) {
    try {
        const json j = json::parse(is);
        if (j.at("format").get<int>() != kManifestFormatVersion) {
            throw DataError("manifest: unsupported format " + j.at("format").dump());
        }
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.kernel = j.at("kernel").get<std::string>();
        m.version = j.at("versions").at("dnnreg").get<std::string>();
        m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
        if (m.command == "experiment") {
            m.experiment = experiment_from(j.at("config"));
        } else if (m.command == "fit") {
            m.fit = fit_from(j.at("config"));
        } else {
            throw DataError("manifest: unknown command '" + m.command + "'");
        }
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("manifest: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("manifest: ") + e.what());
    }
}

namespace {

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path.string() + "' for writing");
    body(os);
    os.flush();
    if (!os) throw DataError("error writing '" + path.string() + "'");
}

}  // namespace

std::vector<std::string> write_experiment_outputs(const std::filesystem::path& dir,
                                                  const ExperimentResult& result) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    write_file(dir / "replications.csv",
               [&](std::ostream& os) { write_replications_csv(os, result); });
    written.push_back("replications.csv");
    write_file(dir / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, result); });
    written.push_back("summary.csv");
    if (!result.curves.empty()) std::filesystem::create_directories(dir / "curves");
    for (const auto& c : result.curves) {
        const std::string name = "curves/" + c.label + "_rep" + std::to_string(c.rep) + ".csv";
        write_file(dir / name, [&](std::ostream& os) { write_curve_csv(os, c); });
        written.push_back(name);
    }
    return written;
}

}  // namespace dnnreg
