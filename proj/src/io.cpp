#include "sblue/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

#include "sblue/errors.hpp"
#include "sblue/rng.hpp"

namespace sblue {

namespace {

using json = nlohmann::json;

const json* find(const json& j, const char* key) {
    if (!j.is_object()) return nullptr;
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& require(const json& j, const std::string& path, const char* key) {
    if (!j.is_object()) {
        throw ValidationError(path + ": expected an object");
    }
    auto it = j.find(key);
    if (it == j.end()) {
        throw ValidationError(path + "." + key + ": missing");
    }
    return *it;
}

// Reject unknown keys so config typos fail loudly instead of silently
// falling back to defaults.
void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw ValidationError(path + ": expected an object");
    }
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ValidationError(path + "." + item.key() + ": unknown field");
        }
    }
}

double get_num(const json& j, const std::string& path) {
    if (!j.is_number()) {
        throw ValidationError(path + ": expected a number");
    }
    return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) {
        throw ValidationError(path + ": expected an integer");
    }
    return j.get<int>();
}

std::uint64_t get_u64(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    }
    throw ValidationError(path + ": expected a nonnegative integer");
}

std::string get_str(const json& j, const std::string& path) {
    if (!j.is_string()) {
        throw ValidationError(path + ": expected a string");
    }
    return j.get<std::string>();
}

SyntheticSensors parse_synthetic(const json& j, const std::string& path) {
    check_keys(j, path,
               {"n_high", "n_low", "region", "noise_std_high", "noise_std_low", "threshold",
                "cost_high", "cost_low", "seed"});
    SyntheticSensors syn;
    syn.n_high = get_int(require(j, path, "n_high"), path + ".n_high");
    syn.n_low = get_int(require(j, path, "n_low"), path + ".n_low");
    if (syn.n_high < 0 || syn.n_low < 0 || syn.n_high + syn.n_low < 1) {
        throw ValidationError(path + ": sensor counts must be nonnegative and sum to >= 1");
    }
    const json& region = require(j, path, "region");
    const std::string rpath = path + ".region";
    check_keys(region, rpath, {"x_min", "x_max", "y_min", "y_max"});
    syn.x_min = get_num(require(region, rpath, "x_min"), rpath + ".x_min");
    syn.x_max = get_num(require(region, rpath, "x_max"), rpath + ".x_max");
    syn.y_min = get_num(require(region, rpath, "y_min"), rpath + ".y_min");
    syn.y_max = get_num(require(region, rpath, "y_max"), rpath + ".y_max");
    if (!std::isfinite(syn.x_min) || !std::isfinite(syn.x_max) || !(syn.x_min < syn.x_max)) {
        throw ValidationError(rpath + ": need finite x_min < x_max");
    }
    if (!std::isfinite(syn.y_min) || !std::isfinite(syn.y_max) || !(syn.y_min < syn.y_max)) {
        throw ValidationError(rpath + ": need finite y_min < y_max");
    }
    syn.noise_std_high = get_num(require(j, path, "noise_std_high"), path + ".noise_std_high");
    syn.noise_std_low = get_num(require(j, path, "noise_std_low"), path + ".noise_std_low");
    if (!std::isfinite(syn.noise_std_high) || syn.noise_std_high < 0.0 ||
        !std::isfinite(syn.noise_std_low) || syn.noise_std_low < 0.0) {
        throw ValidationError(path + ": noise_std_high/noise_std_low must be finite and >= 0");
    }
    syn.threshold = get_num(require(j, path, "threshold"), path + ".threshold");
    if (std::isnan(syn.threshold)) {
        throw ValidationError(path + ".threshold: must not be NaN");
    }
    syn.cost_high = get_num(require(j, path, "cost_high"), path + ".cost_high");
    syn.cost_low = get_num(require(j, path, "cost_low"), path + ".cost_low");
    if (!std::isfinite(syn.cost_high) || syn.cost_high < 0.0 || !std::isfinite(syn.cost_low) ||
        syn.cost_low < 0.0) {
        throw ValidationError(path + ": cost_high/cost_low must be finite and >= 0");
    }
    if (const json* s = find(j, "seed")) {
        syn.seed = get_u64(*s, path + ".seed");
    }
    return syn;
}

CemConfig parse_cem(const json& j, const std::string& path, std::uint64_t master_seed) {
    check_keys(j, path, {"n_samples", "elite_fraction", "smoothing", "max_iters", "p_init", "seed"});
    CemConfig cem;
    cem.seed = master_seed;
    if (const json* v = find(j, "n_samples")) cem.n_samples = get_int(*v, path + ".n_samples");
    if (const json* v = find(j, "elite_fraction")) {
        cem.elite_fraction = get_num(*v, path + ".elite_fraction");
    }
    if (const json* v = find(j, "smoothing")) cem.smoothing = get_num(*v, path + ".smoothing");
    if (const json* v = find(j, "max_iters")) cem.max_iters = get_int(*v, path + ".max_iters");
    if (const json* v = find(j, "p_init")) cem.p_init = get_num(*v, path + ".p_init");
    if (const json* v = find(j, "seed")) cem.seed = get_u64(*v, path + ".seed");
    validate(cem);
    return cem;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (std::string& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return fields;
}

double parse_field_num(const std::string& s, int lineno, const char* col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw SchemaError("line " + std::to_string(lineno) + ": " + col + " is not a number: '" + s +
                      "'");
}

std::ofstream open_out(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write file: " + path);
    }
    return out;
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open config file: " + path);
    }
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }

    check_keys(j, "config", {"prior", "quadrature", "sensors", "task", "output_dir", "seed"});
    RunConfig cfg;

    if (const json* s = find(j, "seed")) cfg.seed = get_u64(*s, "config.seed");
    if (const json* o = find(j, "output_dir")) {
        cfg.output_dir = get_str(*o, "config.output_dir");
        if (cfg.output_dir.empty()) {
            throw ValidationError("config.output_dir: must be nonempty");
        }
    }

    const json& prior = require(j, "config", "prior");
    check_keys(prior, "config.prior", {"mean", "kernel"});
    if (const json* m = find(prior, "mean")) {
        const double v = get_num(*m, "config.prior.mean");
        cfg.mean = v == 0.0 ? MeanSpec::zero() : MeanSpec::constant(v);
    }
    const json& kernel = require(prior, "config.prior", "kernel");
    check_keys(kernel, "config.prior.kernel", {"signal_variance", "lengthscale"});
    cfg.kernel.signal_variance =
        get_num(require(kernel, "config.prior.kernel", "signal_variance"),
                "config.prior.kernel.signal_variance");
    cfg.kernel.lengthscale = get_num(require(kernel, "config.prior.kernel", "lengthscale"),
                                     "config.prior.kernel.lengthscale");
    validate(cfg.mean);
    validate(cfg.kernel);

    if (const json* q = find(j, "quadrature")) {
        check_keys(*q, "config.quadrature", {"nodes_per_axis", "abs_tol"});
        if (const json* v = find(*q, "nodes_per_axis")) {
            cfg.quad.nodes_per_axis = get_int(*v, "config.quadrature.nodes_per_axis");
        }
        if (const json* v = find(*q, "abs_tol")) {
            cfg.quad.abs_tol = get_num(*v, "config.quadrature.abs_tol");
        }
        validate(cfg.quad);
    }

    const json& sensors = require(j, "config", "sensors");
    check_keys(sensors, "config.sensors", {"synthetic", "csv"});
    const json* syn = find(sensors, "synthetic");
    const json* csv = find(sensors, "csv");
    if ((syn != nullptr) == (csv != nullptr)) {
        throw ValidationError("config.sensors: exactly one of 'synthetic' or 'csv' is required");
    }
    if (syn) {
        cfg.sensors = parse_synthetic(*syn, "config.sensors.synthetic");
    } else {
        CsvSensors c;
        c.path = get_str(*csv, "config.sensors.csv");
        if (!std::filesystem::exists(c.path)) {
            throw ValidationError("config.sensors.csv: file not found: " + c.path);
        }
        cfg.sensors = c;
    }

    const json& task = require(j, "config", "task");
    check_keys(task, "config.task", {"reconstruct", "select", "experiment"});
    const json* rec = find(task, "reconstruct");
    const json* sel = find(task, "select");
    const json* exp = find(task, "experiment");
    const int n_tasks = (rec != nullptr) + (sel != nullptr) + (exp != nullptr);
    if (n_tasks != 1) {
        throw ValidationError("config.task: exactly one of 'reconstruct', 'select', 'experiment'");
    }
    if (rec) {
        const std::string p = "config.task.reconstruct";
        check_keys(*rec, p, {"grid"});
        const json& grid = require(*rec, p, "grid");
        const std::string gp = p + ".grid";
        check_keys(grid, gp, {"x_min", "x_max", "y_min", "y_max", "nx", "ny"});
        ReconstructTask t;
        t.grid.x_min = get_num(require(grid, gp, "x_min"), gp + ".x_min");
        t.grid.x_max = get_num(require(grid, gp, "x_max"), gp + ".x_max");
        t.grid.y_min = get_num(require(grid, gp, "y_min"), gp + ".y_min");
        t.grid.y_max = get_num(require(grid, gp, "y_max"), gp + ".y_max");
        t.grid.nx = get_int(require(grid, gp, "nx"), gp + ".nx");
        t.grid.ny = get_int(require(grid, gp, "ny"), gp + ".ny");
        validate(t.grid);
        cfg.task = t;
    } else if (sel) {
        const std::string p = "config.task.select";
        check_keys(*sel, p, {"query", "qos_var", "cem"});
        const json& query = require(*sel, p, "query");
        check_keys(query, p + ".query", {"x", "y"});
        SelectTask t;
        t.query.x = get_num(require(query, p + ".query", "x"), p + ".query.x");
        t.query.y = get_num(require(query, p + ".query", "y"), p + ".query.y");
        if (!is_finite(t.query)) {
            throw ValidationError(p + ".query: must be finite");
        }
        t.qos_var = get_num(require(*sel, p, "qos_var"), p + ".qos_var");
        if (!std::isfinite(t.qos_var) || t.qos_var <= 0.0) {
            throw ValidationError(p + ".qos_var: must be finite and > 0");
        }
        t.cem.seed = cfg.seed;
        if (const json* cem = find(*sel, "cem")) {
            t.cem = parse_cem(*cem, p + ".cem", cfg.seed);
        }
        cfg.task = t;
    } else {
        const std::string p = "config.task.experiment";
        check_keys(*exp, p, {"name"});
        ExperimentTask t;
        t.name = get_str(require(*exp, p, "name"), p + ".name");
        if (t.name != "mse-vs-counts" && t.name != "cem-vs-optimal") {
            throw ValidationError(p + ".name: must be 'mse-vs-counts' or 'cem-vs-optimal'");
        }
        if (!std::holds_alternative<SyntheticSensors>(cfg.sensors)) {
            throw ValidationError("config.task.experiment: requires sensors.synthetic parameters");
        }
        cfg.task = t;
    }
    return cfg;
}

std::uint64_t config_hash(const RunConfig& cfg) {
    // Canonical re-serialization of everything that affects the numbers; the
    // master seed and output directory are carried separately.
    json j;
    j["prior"]["mean"] = eval_mean(cfg.mean, Location{0.0, 0.0});
    j["prior"]["kernel"]["signal_variance"] = cfg.kernel.signal_variance;
    j["prior"]["kernel"]["lengthscale"] = cfg.kernel.lengthscale;
    j["quadrature"]["nodes_per_axis"] = cfg.quad.nodes_per_axis;
    j["quadrature"]["abs_tol"] = cfg.quad.abs_tol;
    if (const auto* syn = std::get_if<SyntheticSensors>(&cfg.sensors)) {
        json& s = j["sensors"]["synthetic"];
        s["n_high"] = syn->n_high;
        s["n_low"] = syn->n_low;
        s["region"] = {{"x_min", syn->x_min},
                       {"x_max", syn->x_max},
                       {"y_min", syn->y_min},
                       {"y_max", syn->y_max}};
        s["noise_std_high"] = syn->noise_std_high;
        s["noise_std_low"] = syn->noise_std_low;
        s["threshold"] = syn->threshold;
        s["cost_high"] = syn->cost_high;
        s["cost_low"] = syn->cost_low;
        if (syn->seed) s["seed"] = *syn->seed;
    } else {
        j["sensors"]["csv"] = std::get<CsvSensors>(cfg.sensors).path;
    }
    if (const auto* rec = std::get_if<ReconstructTask>(&cfg.task)) {
        json& g = j["task"]["reconstruct"]["grid"];
        g["x_min"] = rec->grid.x_min;
        g["x_max"] = rec->grid.x_max;
        g["y_min"] = rec->grid.y_min;
        g["y_max"] = rec->grid.y_max;
        g["nx"] = rec->grid.nx;
        g["ny"] = rec->grid.ny;
    } else if (const auto* sel = std::get_if<SelectTask>(&cfg.task)) {
        json& s = j["task"]["select"];
        s["query"] = {{"x", sel->query.x}, {"y", sel->query.y}};
        s["qos_var"] = sel->qos_var;
        s["cem"] = {{"n_samples", sel->cem.n_samples},
                    {"elite_fraction", sel->cem.elite_fraction},
                    {"smoothing", sel->cem.smoothing},
                    {"max_iters", sel->cem.max_iters},
                    {"p_init", sel->cem.p_init},
                    {"seed", sel->cem.seed}};
    } else {
        j["task"]["experiment"]["name"] = std::get<ExperimentTask>(cfg.task).name;
    }
    return fnv1a64(j.dump());
}

IngestResult ingest_sensors(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open sensor file: " + path);
    }
    static const std::vector<std::string> base_header = {"id",        "x",         "y",
                                                         "network",   "noise_std", "threshold",
                                                         "cost"};

    std::string line;
    int lineno = 0;
    bool have_header = false;
    bool has_reading = false;
    std::vector<Sensor> sensors;
    std::vector<std::pair<std::string, double>> readings;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;

        std::vector<std::string> fields = split_csv_line(line);
        if (!have_header) {
            const bool base_ok = fields.size() >= base_header.size() &&
                                 std::equal(base_header.begin(), base_header.end(), fields.begin());
            has_reading = fields.size() == base_header.size() + 1 && base_ok &&
                          fields.back() == "reading";
            if (!base_ok || (fields.size() != base_header.size() && !has_reading)) {
                throw SchemaError("line " + std::to_string(lineno) +
                                  ": header must be 'id,x,y,network,noise_std,threshold,cost' "
                                  "with an optional trailing 'reading' column");
            }
            have_header = true;
            continue;
        }

        const std::size_t expected = base_header.size() + (has_reading ? 1 : 0);
        if (fields.size() != expected) {
            throw SchemaError("line " + std::to_string(lineno) + ": expected " +
                              std::to_string(expected) + " fields, got " +
                              std::to_string(fields.size()));
        }

        Sensor s;
        s.id = fields[0];
        if (s.id.empty()) {
            throw SchemaError("line " + std::to_string(lineno) + ": id must be nonempty");
        }
        s.loc.x = parse_field_num(fields[1], lineno, "x");
        s.loc.y = parse_field_num(fields[2], lineno, "y");
        if (!is_finite(s.loc)) {
            throw SchemaError("line " + std::to_string(lineno) + ": x/y must be finite");
        }
        if (fields[3] == "H") {
            s.network = NetworkClass::High;
        } else if (fields[3] == "L") {
            s.network = NetworkClass::Low;
        } else {
            throw SchemaError("line " + std::to_string(lineno) + ": network must be H or L, got '" +
                              fields[3] + "'");
        }
        s.noise_std = parse_field_num(fields[4], lineno, "noise_std");
        if (!std::isfinite(s.noise_std) || s.noise_std < 0.0) {
            throw SchemaError("line " + std::to_string(lineno) +
                              ": noise_std must be finite and >= 0");
        }
        if (s.network == NetworkClass::High) {
            if (!fields[5].empty()) {
                throw SchemaError("line " + std::to_string(lineno) + ": sensor '" + s.id +
                                  "' is network H and must leave threshold empty");
            }
        } else {
            if (fields[5].empty()) {
                throw SchemaError("line " + std::to_string(lineno) + ": sensor '" + s.id +
                                  "' is network L and needs a threshold");
            }
            const double t = parse_field_num(fields[5], lineno, "threshold");
            if (std::isnan(t)) {
                throw SchemaError("line " + std::to_string(lineno) +
                                  ": threshold must not be NaN");
            }
            s.threshold = t;
        }
        s.cost = parse_field_num(fields[6], lineno, "cost");
        if (!std::isfinite(s.cost) || s.cost < 0.0) {
            throw SchemaError("line " + std::to_string(lineno) + ": cost must be finite and >= 0");
        }
        if (has_reading) {
            if (fields[7].empty()) {
                throw SchemaError("line " + std::to_string(lineno) +
                                  ": reading column present but empty");
            }
            readings.emplace_back(s.id, parse_field_num(fields[7], lineno, "reading"));
        }
        sensors.push_back(std::move(s));
    }

    if (!have_header || sensors.empty()) {
        throw SchemaError(path + ": no sensor rows");
    }

    IngestResult out;
    out.n_rows = sensors.size();
    out.arr = SensorArray(std::move(sensors));
    if (has_reading) {
        std::unordered_map<std::string, double> by_id;
        for (const auto& [id, v] : readings) by_id.emplace(id, v);
        Eigen::VectorXd r(static_cast<Eigen::Index>(out.arr.size()));
        for (std::size_t i = 0; i < out.arr.size(); ++i) {
            r[static_cast<Eigen::Index>(i)] = by_id.at(out.arr[i].id);
        }
        out.readings = std::move(r);
    }
    return out;
}

SensorArray deploy_synthetic(const SyntheticSensors& syn, std::uint64_t seed) {
    if (syn.n_high < 0 || syn.n_low < 0 || syn.n_high + syn.n_low < 1) {
        throw ValidationError("synthetic deployment needs nonnegative counts summing to >= 1");
    }
    if (!(syn.x_min < syn.x_max) || !(syn.y_min < syn.y_max)) {
        throw ValidationError("synthetic deployment region is empty");
    }
    std::vector<Sensor> sensors;
    sensors.reserve(static_cast<std::size_t>(syn.n_high + syn.n_low));
    char id[16];

    auto hi = make_engine(seed, "deploy/high");
    for (int i = 0; i < syn.n_high; ++i) {
        std::snprintf(id, sizeof id, "H%04d", i + 1);
        Sensor s;
        s.id = id;
        s.loc.x = syn.x_min + uniform01(hi) * (syn.x_max - syn.x_min);
        s.loc.y = syn.y_min + uniform01(hi) * (syn.y_max - syn.y_min);
        s.network = NetworkClass::High;
        s.noise_std = syn.noise_std_high;
        s.cost = syn.cost_high;
        sensors.push_back(std::move(s));
    }
    auto lo = make_engine(seed, "deploy/low");
    for (int i = 0; i < syn.n_low; ++i) {
        std::snprintf(id, sizeof id, "L%04d", i + 1);
        Sensor s;
        s.id = id;
        s.loc.x = syn.x_min + uniform01(lo) * (syn.x_max - syn.x_min);
        s.loc.y = syn.y_min + uniform01(lo) * (syn.y_max - syn.y_min);
        s.network = NetworkClass::Low;
        s.noise_std = syn.noise_std_low;
        s.threshold = syn.threshold;
        s.cost = syn.cost_low;
        sensors.push_back(std::move(s));
    }
    return SensorArray(std::move(sensors));
}

std::string FileHeader::comment_line() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "# config_hash=%016llx seed=%llu",
                  static_cast<unsigned long long>(config_hash),
                  static_cast<unsigned long long>(seed));
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_grid_csv(const std::string& path, const GridSpec& grid,
                    const std::vector<double>& values, const FileHeader& hdr) {
    validate(grid);
    const std::size_t n = static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny);
    if (values.size() != n) {
        throw DimensionMismatch("raster has " + std::to_string(values.size()) + " values for a " +
                                std::to_string(grid.nx) + "x" + std::to_string(grid.ny) + " grid");
    }
    const std::vector<double> xs = grid_axis(grid.x_min, grid.x_max, grid.nx);
    const std::vector<double> ys = grid_axis(grid.y_min, grid.y_max, grid.ny);
    std::ofstream out = open_out(path);
    out << hdr.comment_line() << "\nx,y,value\n";
    std::size_t k = 0;
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix, ++k) {
            out << format_double(xs[static_cast<std::size_t>(ix)]) << ','
                << format_double(ys[static_cast<std::size_t>(iy)]) << ','
                << format_double(values[k]) << '\n';
        }
    }
}

void write_grid_pgm(const std::string& path, const GridSpec& grid,
                    const std::vector<double>& values, const FileHeader& hdr) {
    validate(grid);
    const std::size_t n = static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny);
    if (values.size() != n) {
        throw DimensionMismatch("raster has " + std::to_string(values.size()) + " values for a " +
                                std::to_string(grid.nx) + "x" + std::to_string(grid.ny) + " grid");
    }
    double lo = pos_inf, hi = neg_inf;
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ValidationError("raster contains a non-finite value");
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::ofstream out = open_out(path);
    out << "P5\n"
        << hdr.comment_line() << '\n'
        << "# min=" << format_double(lo) << " max=" << format_double(hi) << '\n'
        << grid.nx << ' ' << grid.ny << "\n65535\n";
    const double span = hi - lo;
    for (double v : values) {
        const double t = span == 0.0 ? 0.0 : (v - lo) / span;
        const auto code = static_cast<unsigned>(std::lround(t * 65535.0));
        out.put(static_cast<char>((code >> 8) & 0xff));
        out.put(static_cast<char>(code & 0xff));
    }
}

void write_mask_csv(const std::string& path, const SensorArray& arr, const ActivationMask& mask,
                    const FileHeader& hdr) {
    if (mask.size() != arr.size()) {
        throw DimensionMismatch("mask/array size mismatch");
    }
    std::ofstream out = open_out(path);
    out << hdr.comment_line() << "\nid,active\n";
    for (std::size_t i = 0; i < arr.size(); ++i) {
        out << arr[i].id << ',' << int(mask.bits[i]) << '\n';
    }
}

void write_trace_csv(const std::string& path, const std::vector<CemIterRecord>& trace,
                     const FileHeader& hdr) {
    std::ofstream out = open_out(path);
    out << hdr.comment_line() << "\niter,beta,best_utility\n";
    for (const CemIterRecord& r : trace) {
        out << r.iter << ',' << format_double(r.beta) << ',' << format_double(r.best_utility)
            << '\n';
    }
}

void write_summary(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& entries,
                   const FileHeader& hdr) {
    std::ofstream out = open_out(path);
    out << hdr.comment_line() << '\n';
    for (const auto& [k, v] : entries) {
        out << k << '=' << v << '\n';
    }
}

void write_table_csv(const std::string& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<std::string>>& rows, const FileHeader& hdr) {
    std::ofstream out = open_out(path);
    out << hdr.comment_line() << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out << (i ? "," : "") << columns[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != columns.size()) {
            throw DimensionMismatch("table row width mismatch");
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << '\n';
    }
}

}  // namespace sblue
