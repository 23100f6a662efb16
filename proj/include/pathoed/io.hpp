#ifndef PATHOED_IO_HPP
#define PATHOED_IO_HPP

#include <map>
#include <string>
#include <vector>

#include "pathoed/bayes_utility.hpp"
#include "pathoed/navmesh.hpp"
#include "pathoed/optimizer.hpp"
#include "pathoed/policy.hpp"

namespace pathoed {

// Policy parameter document: fields `initial` (array), `transitions` (array
// of {from, to, value}, 1-based), optional `lag_weights`, `lag_mode`
// ("optimized" | "fixed-harmonic"). Values round-trip at 17 significant
// digits through nlohmann::json's shortest-round-trip encoding.
std::string save_params(const NavMesh& mesh, const PolicyParams& params);
PolicyParams load_params(const NavMesh& mesh, const std::string& text);

std::string save_desk_spec(const DeskInstanceSpec& spec);
DeskInstanceSpec load_desk_spec(const std::string& text);

// Path rendering: dash-joined 1-based vertex labels ("1-3-1").
std::string format_path(const Path& path);
Path parse_path(const std::string& text);

// Utility table CSV: rows "path,value"; '#' lines and an optional
// "path,utility" header are ignored.
std::map<Path, double> load_utility_table(const std::string& text);

// Brute-force CSV: header, one row per path, then a '#' summary line with
// count and quartiles.
std::string bruteforce_to_csv(const std::vector<Path>& paths,
                              const std::vector<double>& utilities);

// Structured-text report of an optimization run.
std::string result_to_json(const OptimizationResult& result, const NavMesh& mesh);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace pathoed

#endif
