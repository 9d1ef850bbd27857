#include "coarse/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "coarse/error.hpp"

namespace coarse {

namespace {

void check_version(const Json& j, const char* what) {
  if (!j.is_object()) throw InputError(std::string(what) + ": expected an object");
  if (j.value("version", 0) != 1)
    throw InputError(std::string(what) + ": unsupported or missing version");
}

template <class T>
std::vector<T> id_array(const Json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + ": expected an array");
  std::vector<T> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number_integer() || e.get<std::int64_t>() < 0)
      throw InputError(std::string(what) + ": expected non-negative integers");
    out.push_back(e.get<T>());
  }
  return out;
}

Json opt(std::optional<Distance> d) { return d ? Json(*d) : Json(nullptr); }

Json depth(Distance d) { return d == kUnreachable ? Json(nullptr) : Json(d); }

std::string csv_opt(std::optional<Distance> d) { return d ? std::to_string(*d) : ""; }

}  // namespace

Json graph_to_json(const MetricGraph& g) {
  Json edges = Json::array();
  for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
  return {{"version", 1}, {"vertices", g.vertex_count()}, {"edges", std::move(edges)}};
}

MetricGraph graph_from_json(const Json& j) {
  check_version(j, "graph");
  if (!j.contains("vertices") || !j["vertices"].is_number_integer() ||
      j["vertices"].get<std::int64_t>() < 0)
    throw InputError("graph: missing vertex count");
  const auto n = j["vertices"].get<std::size_t>();
  std::vector<Edge> edges;
  if (!j.contains("edges") || !j["edges"].is_array()) throw InputError("graph: missing edges");
  for (const auto& e : j["edges"]) {
    const auto uv = id_array<Vertex>(e, "graph edge");
    if (uv.size() != 2) throw InputError("graph: edge is not a pair");
    if (uv[0] >= n || uv[1] >= n) throw InputError("graph: edge endpoint out of range");
    edges.emplace_back(uv[0], uv[1]);
  }
  return MetricGraph(n, edges);
}

Json bundle_to_json(const GraphBundle& bd) {
  Json depths = Json::array();
  for (Distance d : bd.interior_depths()) depths.push_back(depth(d));
  Json j{{"version", 1},
         {"base", graph_to_json(bd.base())},
         {"total", graph_to_json(bd.total())},
         {"projection", bd.projection()},
         {"interior_depth", std::move(depths)}};
  if (bd.vertex_depths()) j["vertex_depth"] = *bd.vertex_depths();
  return j;
}

GraphBundle bundle_from_json(const Json& j) {
  check_version(j, "bundle");
  for (const char* key : {"base", "total", "projection"})
    if (!j.contains(key)) throw InputError(std::string("bundle: missing ") + key);
  MetricGraph base = graph_from_json(j["base"]);
  MetricGraph total = graph_from_json(j["total"]);
  auto proj = id_array<Vertex>(j["projection"], "projection");
  std::vector<Distance> depths;
  if (j.contains("interior_depth")) {
    if (!j["interior_depth"].is_array()) throw InputError("interior_depth: expected an array");
    for (const auto& e : j["interior_depth"]) {
      if (e.is_null()) {
        depths.push_back(kUnreachable);
      } else if (e.is_number_integer() && e.get<std::int64_t>() >= 0) {
        depths.push_back(e.get<Distance>());
      } else {
        throw InputError("interior_depth: expected depths or null");
      }
    }
  }
  std::optional<std::vector<Distance>> vdepth;
  if (j.contains("vertex_depth")) vdepth = id_array<Distance>(j["vertex_depth"], "vertex_depth");
  return validate_bundle(std::move(total), std::move(base), std::move(proj), std::move(depths),
                         std::move(vdepth));
}

Json path_to_json(const DottedPath& p) { return p.vertices(); }

Json certificate_to_json(const QiCertificate& c) {
  return {{"lambda", c.lambda.str()}, {"epsilon", c.epsilon.str()}};
}

Json decomposition_to_json(const Decomposition& d) {
  Json blocks = Json::array();
  for (const auto& b : d.blocks) {
    Json e{{"type", block_type_name(b.type)},
           {"t_begin", b.t_begin},
           {"t_end", b.t_end},
           {"girth", b.girth},
           {"lower", b.lower.assignment},
           {"upper", b.upper.assignment},
           {"partition_point", d.alpha[b.t_end]}};
    if (b.helper) e["helper"] = b.helper->assignment;
    e["helper_girth"] = opt(b.helper_girth);
    blocks.push_back(std::move(e));
  }
  return {{"version", 1},
          {"b0", d.b0},
          {"alpha", path_to_json(d.alpha)},
          {"r0", d.params.r0},
          {"r1", d.params.r1},
          {"slack", d.params.slack},
          {"sigma1", d.ladder.sigma1.assignment},
          {"sigma2", d.ladder.sigma2.assignment},
          {"blocks", std::move(blocks)}};
}

Json constructed_path_to_json(const ConstructedPath& c, const PathReport& report) {
  Json waypoints = Json::array();
  for (const auto& w : c.waypoints)
    waypoints.push_back({{"y", w.y}, {"section", w.section}, {"type", block_type_name(w.type)}});
  Json points = Json::array();
  for (const auto& p : c.points) points.push_back({{"u", opt(p.u)}, {"v", opt(p.v)}, {"w", opt(p.w)}});
  Json pieces = Json::array();
  for (const auto& p : c.pieces)
    pieces.push_back({{"block", p.block},
                      {"section", p.section},
                      {"next_section", p.next_section},
                      {"from_base", p.from_base},
                      {"turn_base", p.turn_base},
                      {"lift", {p.lift_begin, p.lift_end}},
                      {"fiber", {p.fiber_begin, p.fiber_end}},
                      {"filled", p.filled},
                      {"shape_case", p.shape_case}});
  Json types = Json::array();
  for (auto t : c.block_types) types.push_back(block_type_name(t));
  return {{"version", 1},
          {"path", path_to_json(c.path)},
          {"length", c.path.length()},
          {"waypoints", std::move(waypoints)},
          {"points", std::move(points)},
          {"pieces", std::move(pieces)},
          {"block_types", std::move(types)},
          {"block_girths", c.block_girths},
          {"certificate", certificate_to_json(report.certificate)},
          {"hausdorff_to_geodesic", report.hausdorff_to_geodesic},
          {"projection_defects", report.projection_defects},
          {"connected", report.connected}};
}

VertexSet vertex_set_from_json(const Json& j) {
  if (j.is_array()) return make_vertex_set(id_array<Vertex>(j, "subbase"));
  check_version(j, "subbase");
  if (!j.contains("vertices")) throw InputError("subbase: missing vertices");
  return make_vertex_set(id_array<Vertex>(j["vertices"], "subbase"));
}

std::string graph_to_dot(const MetricGraph& g) {
  std::ostringstream os;
  os << "graph G {\n";
  for (Vertex v = 0; v < g.vertex_count(); ++v) os << "  " << v << ";\n";
  for (const auto& [u, v] : g.edges()) os << "  " << u << " -- " << v << ";\n";
  os << "}\n";
  return os.str();
}

std::string bundle_to_dot(const GraphBundle& bd) {
  std::ostringstream os;
  os << "graph X {\n";
  for (Vertex b = 0; b < bd.base().vertex_count(); ++b) {
    os << "  subgraph cluster_" << b << " {\n    label=\"F_" << b << "\";\n";
    for (Vertex x : bd.fiber(b)) os << "    " << x << ";\n";
    os << "  }\n";
  }
  for (const auto& [u, v] : bd.total().edges()) {
    os << "  " << u << " -- " << v;
    if (bd.project(u) != bd.project(v)) os << " [style=dashed]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string ladder_to_dot(const Ladder& l) {
  const auto& x = l.bundle.total();
  std::vector<char> on_rung(x.vertex_count(), 0);
  for (const auto& r : l.rungs)
    for (Vertex v : r.vertices()) on_rung[v] = 1;
  std::vector<const char*> colour(x.vertex_count(), nullptr);
  for (Vertex v : l.sigma1.assignment) colour[v] = "red";
  for (Vertex v : l.sigma2.assignment) colour[v] = colour[v] ? "purple" : "green";
  std::ostringstream os;
  os << "graph L {\n";
  for (Vertex v = 0; v < x.vertex_count(); ++v) {
    if (colour[v]) {
      os << "  " << v << " [color=" << colour[v] << ",style=filled];\n";
    } else if (on_rung[v]) {
      os << "  " << v << " [color=blue];\n";
    }
  }
  std::vector<std::pair<Vertex, Vertex>> rung_edges;
  for (const auto& r : l.rungs)
    for (std::size_t i = 1; i < r.size(); ++i)
      if (r[i] != r[i - 1]) rung_edges.emplace_back(std::min(r[i], r[i - 1]), std::max(r[i], r[i - 1]));
  std::sort(rung_edges.begin(), rung_edges.end());
  for (const auto& e : x.edges()) {
    os << "  " << e.first << " -- " << e.second;
    if (std::binary_search(rung_edges.begin(), rung_edges.end(), e))
      os << " [color=blue,penwidth=2]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string flaring_csv(const std::vector<FlaringReport>& rows) {
  std::ostringstream os;
  os << "k,n,M,nu,samples\n";
  for (const auto& r : rows)
    os << r.k << ',' << r.n << ',' << r.m << ',' << (r.nu ? r.nu->str() : "") << ','
       << r.samples << '\n';
  return os.str();
}

std::string mitra_csv(const MitraCurve& c) {
  std::ostringstream os;
  os << "N,M,pairs\n";
  for (const auto& e : c.samples) os << e.n << ',' << csv_opt(e.m) << ',' << e.pairs << '\n';
  return os.str();
}

std::string distortion_csv(const GraphBundle& bd, const DistortionProfile& d) {
  std::ostringstream os;
  os << "M,dY_max,envelope\n";
  for (Distance m = 0; m < d.dy_max.size(); ++m)
    os << m << ',' << d.dy_max[m] << ',' << (d.dominated ? std::to_string(d.envelope(bd, m)) : "")
       << '\n';
  return os.str();
}

std::string lamination_csv(const std::vector<LaminationPair>& pairs) {
  std::ostringstream os;
  os << "z1,z2,d_fiber,d_X,pi_diam\n";
  for (const auto& p : pairs)
    os << p.z1 << ',' << p.z2 << ',' << p.d_fiber << ',' << p.d_x << ',' << p.pi_diameter << '\n';
  return os.str();
}

std::string qpath_csv(const ConstructedPath& c, const PathReport& report) {
  std::ostringstream os;
  os << "block,type,girth,projection_defect\n";
  for (std::size_t i = 0; i < c.block_types.size(); ++i)
    os << i << ',' << block_type_name(c.block_types[i]) << ',' << c.block_girths[i] << ','
       << (i < report.projection_defects.size() ? std::to_string(report.projection_defects[i]) : "")
       << '\n';
  return os.str();
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& p, std::string_view text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  out << text;
  if (!out) throw InputError("write failed: " + p.string());
}

Json read_json(const std::filesystem::path& p) {
  try {
    return Json::parse(read_text(p));
  } catch (const Json::parse_error& e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace coarse
