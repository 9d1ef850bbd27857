#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "coarse/experiments.hpp"
#include "coarse/paths.hpp"

namespace coarse {

using Json = nlohmann::json;

// {"version":1,"vertices":N,"edges":[[u,v],...]}, edges with u < v sorted.
Json graph_to_json(const MetricGraph& g);
MetricGraph graph_from_json(const Json& j);

// {"version":1,"base":...,"total":...,"projection":[...],
//  "interior_depth":[...]} with null for untruncated depths, plus
// "vertex_depth" when the bundle carries one.
Json bundle_to_json(const GraphBundle& bd);
GraphBundle bundle_from_json(const Json& j);

Json path_to_json(const DottedPath& p);
Json certificate_to_json(const QiCertificate& c);
Json decomposition_to_json(const Decomposition& d);
Json constructed_path_to_json(const ConstructedPath& c, const PathReport& report);

// Subbase file: {"version":1,"vertices":[...]} or a bare array of base ids.
VertexSet vertex_set_from_json(const Json& j);

std::string graph_to_dot(const MetricGraph& g);
// Fibres as clusters.
std::string bundle_to_dot(const GraphBundle& bd);
// Total graph with rungs in blue, sigma1 in red and sigma2 in green.
std::string ladder_to_dot(const Ladder& l);

std::string flaring_csv(const std::vector<FlaringReport>& rows);
std::string mitra_csv(const MitraCurve& c);
std::string distortion_csv(const GraphBundle& bd, const DistortionProfile& d);
std::string lamination_csv(const std::vector<LaminationPair>& pairs);
// block,type,girth,projection_defect; one row per decomposition block.
std::string qpath_csv(const ConstructedPath& c, const PathReport& report);

// Throw InputError on IO failure.
std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, std::string_view text);
Json read_json(const std::filesystem::path& p);
// Two-space indent and trailing newline; keys are sorted, so the bytes
// depend only on the value.
std::string dump_json(const Json& j);

}  // namespace coarse
