#include "resonia/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "resonia/numerics.hpp"

namespace resonia {

using nlohmann::json;

WidthOptions RunConfig::width_options() const {
    WidthOptions w;
    w.ladder = ladder;
    w.theta = theta;
    w.R0 = R0;
    w.box = box;
    w.nodes = nodes;
    w.eta_fraction = eta_fraction;
    w.surface_offsets = surface_offsets;
    return w;
}

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& why) {
    throw Error(ErrorKind::SchemaError, field + ": " + why);
}

void require_positive(double v, const std::string& field) {
    if (!(v > 0.0)) schema_error(field, "must be positive");
}

RunConfig from_json(const json& j) {
    static const std::vector<std::string> known = {
        "schema_version", "family", "params", "dim", "grid", "ladder", "theta",
        "R0", "box", "nodes", "band", "eta_fraction", "cluster_tol",
        "surface_offsets", "out_dir", "seed", "radial2d"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            schema_error(it.key(), "unknown key");
    }

    RunConfig c;
    if (j.contains("schema_version")) {
        c.schema_version = j.at("schema_version").get<int>();
        if (c.schema_version != 1)
            throw Error(ErrorKind::VersionError,
                        "unsupported schema_version " + std::to_string(c.schema_version));
    }
    if (!j.contains("family")) schema_error("family", "required");
    c.family = j.at("family").get<std::string>();
    family_from_name(c.family);  // validates
    c.params.clear();
    if (j.contains("params")) {
        if (!j.at("params").is_object()) schema_error("params", "must be an object");
        for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) {
            if (!it.value().is_number()) schema_error("params." + it.key(), "must be a number");
            c.params[it.key()] = it.value().get<double>();
        }
    }
    if (j.contains("dim")) c.dim = j.at("dim").get<int>();
    if (c.dim != 1 && c.dim != 2) schema_error("dim", "must be 1 or 2");
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        for (auto it = g.begin(); it != g.end(); ++it)
            if (it.key() != "resolution" && it.key() != "box")
                schema_error("grid." + it.key(), "unknown key");
        if (g.contains("resolution")) c.grid_resolution = g.at("resolution").get<int>();
        if (g.contains("box")) c.grid_box = g.at("box").get<double>();
        if (c.grid_resolution < 64) schema_error("grid.resolution", "must be at least 64");
        if (c.grid_box < 0.0) schema_error("grid.box", "must be nonnegative");
    }
    if (j.contains("ladder")) {
        c.ladder = j.at("ladder").get<std::vector<double>>();
        for (size_t i = 0; i < c.ladder.size(); ++i) {
            require_positive(c.ladder[i], "ladder[" + std::to_string(i) + "]");
            if (i > 0 && !(c.ladder[i] < c.ladder[i - 1]))
                schema_error("ladder", "must be strictly decreasing");
        }
    }
    if (j.contains("theta")) c.theta = j.at("theta").get<double>();
    require_positive(c.theta, "theta");
    if (j.contains("R0")) c.R0 = j.at("R0").get<double>();
    require_positive(c.R0, "R0");
    if (j.contains("box")) c.box = j.at("box").get<double>();
    require_positive(c.box, "box");
    if (j.contains("nodes")) c.nodes = j.at("nodes").get<int>();
    if (c.nodes < 64) schema_error("nodes", "must be at least 64");
    if (j.contains("band")) {
        const json& b = j.at("band");
        for (auto it = b.begin(); it != b.end(); ++it)
            if (it.key() != "lo" && it.key() != "hi") schema_error("band." + it.key(), "unknown key");
        if (b.contains("lo")) c.band_lo = b.at("lo").get<double>();
        if (b.contains("hi")) c.band_hi = b.at("hi").get<double>();
        require_positive(c.band_lo, "band.lo");
        if (!(c.band_hi > c.band_lo)) schema_error("band.hi", "must exceed band.lo");
    }
    if (j.contains("eta_fraction")) c.eta_fraction = j.at("eta_fraction").get<double>();
    require_positive(c.eta_fraction, "eta_fraction");
    if (j.contains("cluster_tol")) c.cluster_tol = j.at("cluster_tol").get<double>();
    require_positive(c.cluster_tol, "cluster_tol");
    if (j.contains("surface_offsets")) {
        c.surface_offsets = j.at("surface_offsets").get<std::vector<double>>();
        for (size_t i = 0; i < c.surface_offsets.size(); ++i)
            if (!(c.surface_offsets[i] > 1.0))
                schema_error("surface_offsets[" + std::to_string(i) + "]", "must exceed 1");
    }
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<unsigned long long>();
    if (j.contains("radial2d")) c.radial2d = j.at("radial2d").get<bool>();
    return c;
}

json to_json(const RunConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["family"] = c.family;
    j["params"] = c.params;
    j["dim"] = c.dim;
    j["grid"] = {{"resolution", c.grid_resolution}, {"box", c.grid_box}};
    j["ladder"] = c.ladder;
    j["theta"] = c.theta;
    j["R0"] = c.R0;
    j["box"] = c.box;
    j["nodes"] = c.nodes;
    j["band"] = {{"lo", c.band_lo}, {"hi", c.band_hi}};
    j["eta_fraction"] = c.eta_fraction;
    j["cluster_tol"] = c.cluster_tol;
    j["surface_offsets"] = c.surface_offsets;
    j["out_dir"] = c.out_dir;
    j["seed"] = c.seed;
    j["radial2d"] = c.radial2d;
    return j;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaError, std::string("invalid JSON: ") + e.what());
    }
    try {
        return from_json(j);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaError, e.what());
    }
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::SchemaError, "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string emit_config(const RunConfig& cfg) {
    // nlohmann::json keeps object keys sorted, which is the canonical order.
    return to_json(cfg).dump(2) + "\n";
}

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(emit_config(cfg)); }

ArtifactHeader artifact_header(const RunConfig& cfg) {
    return {cfg.schema_version, config_hash(cfg)};
}

}  // namespace resonia
