#pragma once

#include <map>
#include <string>
#include <vector>

#include "resonia/core.hpp"
#include "resonia/potential.hpp"
#include "resonia/width.hpp"

namespace resonia {

struct RunConfig {
    int schema_version = 1;
    std::string family = "gauss_well";
    std::map<std::string, double> params{{"E0", 0.5}, {"kappa", 1.0}, {"alpha", 1.0}};
    int dim = 1;
    int grid_resolution = 2048;
    double grid_box = 0.0;  // 0: auto from the island radius
    std::vector<double> ladder{0.05, 0.04, 0.035, 0.03, 0.025};
    double theta = 0.3;
    double R0 = 4.0;
    double box = 12.0;
    int nodes = 6000;
    double band_lo = 0.25;
    double band_hi = 0.55;
    double eta_fraction = 0.2;
    double cluster_tol = 0.01;
    std::vector<double> surface_offsets{1.10, 1.15, 1.20};
    std::string out_dir = ".";
    unsigned long long seed = 1;
    bool radial2d = false;

    PotentialSpec make_potential() const { return make_spec(family, params, dim); }
    WidthOptions width_options() const;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

// Canonical serialization: sorted keys, fixed float formatting. Satisfies
// emit(parse(f)) == emit(parse(emit(parse(f)))).
std::string emit_config(const RunConfig& cfg);

// FNV-1a hash of the canonical serialization, for artifact headers.
std::string config_hash(const RunConfig& cfg);

// Every artifact carries this trio.
struct ArtifactHeader {
    int schema_version;
    std::string config_hash;
    std::string normalization = "L2(u_D)=1";
};

ArtifactHeader artifact_header(const RunConfig& cfg);

}  // namespace resonia
