#include "pathoed/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pathoed/errors.hpp"
#include "pathoed/oracle.hpp"

namespace pathoed {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const char* what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw ParseError(std::string("malformed ") + what + " document");
    }
    return doc;
}

}  // namespace

std::string save_params(const NavMesh& mesh, const PolicyParams& params) {
    json doc;
    doc["initial"] = std::vector<double>(params.initial.data(),
                                         params.initial.data() + params.initial.size());
    json transitions = json::array();
    for (std::size_t a = 0; a < mesh.num_arcs(); ++a) {
        const auto& [i, j] = mesh.arcs()[a];
        transitions.push_back({{"from", i + 1},
                               {"to", j + 1},
                               {"value", params.transition[static_cast<Eigen::Index>(a)]}});
    }
    doc["transitions"] = std::move(transitions);
    if (params.lag_weights.size() > 0) {
        doc["lag_weights"] =
            std::vector<double>(params.lag_weights.data(),
                                params.lag_weights.data() + params.lag_weights.size());
    }
    doc["lag_mode"] =
        params.lag_mode == LagMode::FixedHarmonic ? "fixed-harmonic" : "optimized";
    return doc.dump(2) + "\n";
}

PolicyParams load_params(const NavMesh& mesh, const std::string& text) {
    const json doc = parse_json(text, "policy parameter");
    PolicyParams params;

    if (!doc.contains("initial") || !doc["initial"].is_array()) {
        throw ParseError("policy parameters: missing `initial` array");
    }
    const auto initial = doc["initial"].get<std::vector<double>>();
    if (static_cast<int>(initial.size()) != mesh.num_vertices()) {
        throw ParseError("policy parameters: `initial` size does not match the mesh");
    }
    params.initial = Eigen::Map<const Eigen::VectorXd>(initial.data(), initial.size());

    params.transition = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_arcs()));
    std::vector<bool> seen(mesh.num_arcs(), false);
    if (!doc.contains("transitions") || !doc["transitions"].is_array()) {
        throw ParseError("policy parameters: missing `transitions` array");
    }
    for (const auto& entry : doc["transitions"]) {
        const int from = entry.at("from").get<int>() - 1;
        const int to = entry.at("to").get<int>() - 1;
        if (from < 0 || from >= mesh.num_vertices() || to < 0 || to >= mesh.num_vertices()) {
            throw ParseError("policy parameters: transition endpoint out of range");
        }
        const int arc = mesh.arc_index(from, to);
        if (arc < 0) {
            throw ParseError("policy parameters: transition (" + std::to_string(from + 1) +
                             ", " + std::to_string(to + 1) + ") is not a mesh arc");
        }
        if (seen[arc]) {
            throw ParseError("policy parameters: duplicate transition entry");
        }
        seen[arc] = true;
        params.transition[arc] = entry.at("value").get<double>();
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
        throw ParseError("policy parameters: transitions must cover every mesh arc");
    }

    if (doc.contains("lag_weights")) {
        const auto lags = doc["lag_weights"].get<std::vector<double>>();
        params.lag_weights = Eigen::Map<const Eigen::VectorXd>(lags.data(), lags.size());
    }
    if (doc.contains("lag_mode")) {
        const auto mode = doc["lag_mode"].get<std::string>();
        if (mode == "fixed-harmonic") {
            params.lag_mode = LagMode::FixedHarmonic;
        } else if (mode == "optimized") {
            params.lag_mode = LagMode::Optimized;
        } else {
            throw ParseError("policy parameters: unknown lag mode \"" + mode + "\"");
        }
    }
    return params;
}

std::string save_desk_spec(const DeskInstanceSpec& spec) {
    json doc;
    doc["rows"] = spec.rows;
    doc["cols"] = spec.cols;
    json holes = json::array();
    for (const auto& h : spec.holes) {
        holes.push_back({{"row0", h.row0}, {"col0", h.col0}, {"row1", h.row1},
                         {"col1", h.col1}});
    }
    doc["holes"] = std::move(holes);
    doc["diffusion"] = spec.diffusion;
    doc["prior_length_scale"] = spec.prior_length_scale;
    doc["prior_variance"] = spec.prior_variance;
    doc["prior_nugget"] = spec.prior_nugget;
    doc["noise_fraction"] = spec.noise_fraction;
    doc["obs_frequency"] = spec.obs_frequency;
    doc["dt"] = spec.dt;
    doc["path_length"] = spec.path_length;
    return doc.dump(2) + "\n";
}

DeskInstanceSpec load_desk_spec(const std::string& text) {
    const json doc = parse_json(text, "instance spec");
    DeskInstanceSpec spec;
    try {
        spec.rows = doc.at("rows").get<int>();
        spec.cols = doc.at("cols").get<int>();
        if (doc.contains("holes")) {
            for (const auto& h : doc["holes"]) {
                spec.holes.push_back(CellRect{h.at("row0").get<int>(), h.at("col0").get<int>(),
                                              h.at("row1").get<int>(),
                                              h.at("col1").get<int>()});
            }
        }
        if (doc.contains("diffusion")) spec.diffusion = doc["diffusion"].get<double>();
        if (doc.contains("prior_length_scale")) {
            spec.prior_length_scale = doc["prior_length_scale"].get<double>();
        }
        if (doc.contains("prior_variance")) {
            spec.prior_variance = doc["prior_variance"].get<double>();
        }
        if (doc.contains("prior_nugget")) spec.prior_nugget = doc["prior_nugget"].get<double>();
        if (doc.contains("noise_fraction")) {
            spec.noise_fraction = doc["noise_fraction"].get<double>();
        }
        if (doc.contains("obs_frequency")) spec.obs_frequency = doc["obs_frequency"].get<int>();
        if (doc.contains("dt")) spec.dt = doc["dt"].get<double>();
        if (doc.contains("path_length")) spec.path_length = doc["path_length"].get<int>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("instance spec: ") + e.what());
    }
    return spec;
}

std::string format_path(const Path& path) {
    std::ostringstream out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i > 0) out << '-';
        out << path[i] + 1;
    }
    return out.str();
}

Path parse_path(const std::string& text) {
    Path path;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, '-')) {
        try {
            const int label = std::stoi(token);
            if (label < 1) throw ParseError("path labels are 1-based");
            path.push_back(label - 1);
        } catch (const std::logic_error&) {
            throw ParseError("malformed path \"" + text + "\"");
        }
    }
    if (path.empty()) throw ParseError("empty path");
    return path;
}

std::map<Path, double> load_utility_table(const std::string& text) {
    std::map<Path, double> table;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError("utility table row needs \"path,value\"", line_no);
        }
        const std::string path_text = line.substr(first, comma - first);
        if (path_text == "path") continue;  // header
        try {
            table[parse_path(path_text)] = std::stod(line.substr(comma + 1));
        } catch (const ParseError&) {
            throw ParseError("utility table: malformed path", line_no);
        } catch (const std::logic_error&) {
            throw ParseError("utility table: malformed value", line_no);
        }
    }
    return table;
}

namespace {

std::string format_number(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

}  // namespace

std::string bruteforce_to_csv(const std::vector<Path>& paths,
                              const std::vector<double>& utilities) {
    if (paths.size() != utilities.size()) {
        throw ContractError("path and utility counts differ");
    }
    std::ostringstream out;
    out << "path,utility\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
        out << format_path(paths[i]) << ',' << format_number(utilities[i]) << '\n';
    }
    std::vector<double> sorted = utilities;
    std::sort(sorted.begin(), sorted.end());
    if (!sorted.empty()) {
        out << "# count=" << sorted.size() << ",min=" << format_number(sorted.front())
            << ",q1=" << format_number(quantile(sorted, 0.25))
            << ",median=" << format_number(quantile(sorted, 0.5))
            << ",q3=" << format_number(quantile(sorted, 0.75))
            << ",max=" << format_number(sorted.back()) << '\n';
    }
    return out.str();
}

std::string result_to_json(const OptimizationResult& result, const NavMesh& mesh) {
    json doc;
    doc["best_path"] = format_path(result.best_path);
    doc["best_utility"] = result.best_utility;
    doc["iterations"] = result.trace.records.size();
    json sample = json::array();
    for (const auto& [path, value] : result.final_sample) {
        sample.push_back({{"path", format_path(path)}, {"utility", value}});
    }
    doc["final_sample"] = std::move(sample);
    doc["optimal_params"] =
        json::parse(save_params(mesh, result.optimal_params));
    return doc.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file \"" + path + "\"");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file \"" + path + "\"");
    out << content;
}

}  // namespace pathoed
