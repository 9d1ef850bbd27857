#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "coarse/error.hpp"
#include "coarse/generators.hpp"
#include "coarse/io.hpp"
#include "coarse/parallel.hpp"
#include "manifest.hpp"

namespace coarse::cli {

namespace fs = std::filesystem;

namespace {

const char* error_kind(const Error& e) {
  if (dynamic_cast<const InputError*>(&e)) return "InputError";
  if (dynamic_cast<const SizeError*>(&e)) return "SizeError";
  if (dynamic_cast<const ConnectivityError*>(&e)) return "ConnectivityError";
  if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
  if (dynamic_cast<const InvariantError*>(&e)) return "InvariantError";
  if (dynamic_cast<const DependencyError*>(&e)) return "DependencyError";
  if (dynamic_cast<const GateError*>(&e)) return "GateError";
  return "Error";
}

// Files read and written by one command, and its manifest.
class Run {
 public:
  Run(std::string command, std::vector<std::string> args, fs::path out_dir, Json config,
      std::optional<std::uint64_t> seed)
      : out_dir_(std::move(out_dir)) {
    m_.command = std::move(command);
    m_.args = std::move(args);
    m_.config_hash = sha256_hex(config.dump());
    m_.seed = seed;
  }

  void input(const fs::path& p) { m_.inputs.push_back({p.string(), sha256_hex(read_text(p))}); }

  void output(const std::string& name, const std::string& content) {
    const fs::path p = out_dir_ / name;
    write_text(p, content);
    m_.outputs.push_back({p.string(), sha256_hex(content)});
  }

  void finish() const {
    write_text(out_dir_ / (m_.command + ".manifest.json"), dump_json(manifest_to_json(m_)));
  }

 private:
  fs::path out_dir_;
  RunManifest m_;
};

struct Loaded {
  GraphBundle bd;
  std::optional<ExtensionBundle> ext;
  SectionFactory sections;
};

Json extension_spec_to_json(const ExtensionSpec& s) {
  return {{"automorphism", s.automorphism},
          {"inverse", s.inverse},
          {"fiber_radius", s.fiber_radius},
          {"base_radius", s.base_radius}};
}

ExtensionSpec extension_spec_from_json(const Json& j) {
  ExtensionSpec s;
  try {
    if (j.contains("automorphism")) s.automorphism = j["automorphism"].get<std::vector<std::string>>();
    if (j.contains("inverse")) s.inverse = j["inverse"].get<std::vector<std::string>>();
    if (j.contains("fiber_radius")) s.fiber_radius = j["fiber_radius"].get<Distance>();
    if (j.contains("base_radius")) s.base_radius = j["base_radius"].get<Distance>();
  } catch (const Json::exception& e) {
    throw InputError(std::string("extension spec: ") + e.what());
  }
  return s;
}

// Bundles written by `gen --example extension` carry their generator record;
// they are regenerated so translate sections are available.
Loaded load_bundle(const fs::path& p, Run& run) {
  run.input(p);
  const Json j = read_json(p);
  Loaded l{bundle_from_json(j), std::nullopt, {}};
  if (j.contains("generator") && j["generator"].value("example", "") == "extension") {
    l.ext = gen_extension(extension_spec_from_json(j["generator"]));
    if (l.ext->bundle.total().fingerprint() != l.bd.total().fingerprint() ||
        l.ext->bundle.projection() != l.bd.projection())
      throw InputError(p.string() + ": bundle does not match its generator record");
    l.bd = l.ext->bundle;
    l.sections = l.ext->section_factory();
  } else {
    l.sections = lift_section_factory(l.bd);
  }
  return l;
}

Vertex parse_id(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoul(text, &used);
    if (used == text.size()) return static_cast<Vertex>(v);
  } catch (const std::logic_error&) {
  }
  throw InputError(std::string("bad ") + what + " '" + text + "'");
}

// "17" is a total id; "k:word" names t^k w in an extension bundle.
Vertex parse_vertex(const std::string& text, const Loaded& l) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const Vertex v = parse_id(text, "vertex");
      l.bd.total().check_vertex(v);
      return v;
    }
    if (!l.ext) throw InputError("vertex '" + text + "' needs an extension bundle");
    return l.ext->vertex(std::stoi(text.substr(0, colon)), text.substr(colon + 1));
  } catch (const std::logic_error&) {
    throw InputError("bad vertex '" + text + "'");
  }
}

VertexSet load_subbase(const fs::path& p, Run& run) {
  run.input(p);
  return vertex_set_from_json(read_json(p));
}

// Deepest trusted base vertex of a, then its deepest vertex; smallest ids
// on ties.
Vertex default_basepoint(const GraphBundle& bd, const VertexSet& a) {
  std::optional<Vertex> best_b;
  for (Vertex b : a)
    if (!best_b || bd.interior_depth(b) > bd.interior_depth(*best_b)) best_b = b;
  if (!best_b) throw InputError("empty subbase");
  std::optional<Vertex> best;
  auto depth = [&](Vertex x) { return bd.vertex_depths() ? (*bd.vertex_depths())[x] : Distance(1); };
  for (Vertex x : bd.fiber(*best_b))
    if (bd.trusted_vertex(x) && (!best || depth(x) > depth(*best))) best = x;
  if (!best) throw InputError("no trusted basepoint over the subbase");
  return *best;
}

struct GateFlags {
  std::string k = "1";
  Distance n = 2, m = 1;
  std::size_t samples = 400;
  bool waive = false;
  std::optional<Distance> r0, r1, slack;

  void add(CLI::App* sub) {
    sub->add_option("--gate-k", k, "lift constant of the flaring gate")->capture_default_str();
    sub->add_option("--gate-n", n, "half window of the flaring gate")->capture_default_str();
    sub->add_option("--gate-M", m, "threshold of the flaring gate")->capture_default_str();
    sub->add_option("--gate-samples", samples, "pairs drawn by the gate")->capture_default_str();
    sub->add_flag("--waive-gate", waive, "skip the flaring gate");
    sub->add_option("--r0", r0, "neck radius (default M + 2)");
    sub->add_option("--r1", r1, "type II neck radius (default 3 r0)");
    sub->add_option("--slack", slack, "type I girth window width");
  }

  DecompositionParams params(const Loaded& l, std::uint64_t seed, std::ostream& out) const {
    DecompositionParams p;
    if (waive) {
      p.policy = GatePolicy::Waive;
      p.sections = l.sections;
      out << "flaring gate waived\n";
    } else {
      FlaringOptions o;
      o.samples = samples;
      o.seed = seed;
      o.sections = l.sections;
      const auto gate = check_flaring(l.bd, Rational::parse(k), n, m, o);
      out << "flaring gate k=" << gate.k << " n=" << gate.n << " M=" << gate.m
          << " nu=" << (gate.nu ? gate.nu->str() : "none") << " samples=" << gate.samples << "\n";
      p = params_from_gate(gate, l.sections);
    }
    if (r0) {
      p.r0 = *r0;
      if (!r1) p.r1 = 3 * *r0;
    }
    if (r1) p.r1 = *r1;
    if (slack) p.slack = *slack;
    out << "R0=" << p.r0 << " R1=" << p.r1 << " slack=" << p.slack << "\n";
    return p;
  }
};

Json config_of(const CLI::App* sub) {
  Json cfg = Json::object();
  for (const CLI::Option* o : sub->get_options()) {
    const std::string name = o->get_name();
    if (o->count() == 0 || name == "--help" || name == "--out-dir") continue;
    cfg[name] = o->results();
  }
  return cfg;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coarse geometry of finite metric graph bundles", "coarse"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker threads (0: hardware)");

  fs::path out_dir = ".";
  std::uint64_t seed = 0;
  std::map<CLI::App*, std::function<void(Run&)>> runners;
  std::map<CLI::App*, bool> seeded;

  auto command = [&](const char* name, const char* help, bool needs_seed) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-o,--out-dir", out_dir, "directory for artifacts")->capture_default_str();
    auto* s = sub->add_option("--seed", seed, "random seed");
    if (needs_seed) s->required();
    seeded[sub] = needs_seed;
    return sub;
  };

  // gen
  std::string example, base_spec, fiber_spec;
  Distance radius = 0, fiber_radius = 4;
  std::size_t fiber_size = 64;
  fs::path ext_spec_file;
  {
    auto* sub = command("gen", "generate an example bundle", false);
    sub->add_option("--example", example, "product, dilation or extension")
        ->required()
        ->check(CLI::IsMember({"product", "dilation", "extension"}));
    sub->add_option("--radius", radius, "base radius (default 6, dilation 4)");
    sub->add_option("--base", base_spec, "product base graph spec (default path:2R+1)");
    sub->add_option("--fiber", fiber_spec, "product fibre graph spec (default cycle:8)");
    sub->add_option("--fiber-size", fiber_size, "dilation fibre length")->capture_default_str();
    sub->add_option("--fiber-radius", fiber_radius, "extension word length bound")
        ->capture_default_str();
    sub->add_option("--spec", ext_spec_file, "extension spec JSON")->check(CLI::ExistingFile);
    runners[sub] = [&](Run& run) {
      GraphBundle bd;
      Json gen;
      if (example == "product") {
        const Distance r = radius ? radius : 6;
        if (base_spec.empty()) base_spec = "path:" + std::to_string(2 * r + 1);
        if (fiber_spec.empty()) fiber_spec = "cycle:8";
        bd = gen_product(make_graph(base_spec), make_graph(fiber_spec));
        gen = {{"example", "product"}, {"base", base_spec}, {"fiber", fiber_spec}};
      } else if (example == "dilation") {
        const Distance r = radius ? radius : 4;
        bd = gen_dilation(2 * r, fiber_size);
        gen = {{"example", "dilation"}, {"base_len", 2 * r}, {"fiber_size", fiber_size}};
      } else {
        ExtensionSpec spec;
        if (!ext_spec_file.empty()) {
          run.input(ext_spec_file);
          spec = extension_spec_from_json(read_json(ext_spec_file));
        }
        if (radius) spec.base_radius = radius;
        if (ext_spec_file.empty()) spec.fiber_radius = fiber_radius;
        const auto ext = gen_extension(spec);
        bd = ext.bundle;
        gen = extension_spec_to_json(spec);
        gen["example"] = "extension";
      }
      Json j = bundle_to_json(bd);
      j["generator"] = gen;
      run.output("bundle.json", dump_json(j));
      out << example << ": " << bd.total().vertex_count() << " vertices over "
          << bd.base().vertex_count() << " base vertices\n";
    };
  }

  // validate
  fs::path bundle_file;
  auto bundle_arg = [&](CLI::App* sub) {
    sub->add_option("bundle", bundle_file, "bundle JSON")->required()->check(CLI::ExistingFile);
  };
  {
    auto* sub = command("validate", "validate a bundle and print its eta table", false);
    bundle_arg(sub);
    runners[sub] = [&](Run& run) {
      const auto l = load_bundle(bundle_file, run);
      const auto& bd = l.bd;
      std::size_t trusted = 0;
      for (Vertex x = 0; x < bd.total().vertex_count(); ++x) trusted += bd.trusted_vertex(x);
      out << "valid bundle: " << bd.total().vertex_count() << " vertices, "
          << bd.total().edge_count() << " edges, base " << bd.base().vertex_count()
          << " vertices, max fibre diameter " << bd.max_fiber_diameter() << ", trusted "
          << trusted << "\n";
      out << "M eta\n";
      const auto& eta = bd.eta_profile();
      for (std::size_t m = 0; m < eta.size(); ++m) out << m << ' ' << eta[m] << '\n';
    };
  }

  // lift
  std::string from, to;
  {
    auto* sub = command("lift", "lift a base geodesic through a vertex", false);
    bundle_arg(sub);
    sub->add_option("--from", from, "total vertex")->required();
    sub->add_option("--to", to, "base vertex")->required();
    runners[sub] = [&](Run& run) {
      const auto l = load_bundle(bundle_file, run);
      const Vertex x = parse_vertex(from, l);
      const Vertex b = parse_id(to, "base vertex");
      l.bd.base().check_vertex(b);
      const auto lift = lift_geodesic(l.bd, geodesic(l.bd.base(), l.bd.project(x), b), x);
      const Distance d = l.bd.total().distance(lift.front(), lift.back());
      run.output("lift.json",
                 dump_json({{"path", path_to_json(lift)}, {"length", lift.length()}, {"d_X", d}}));
      out << "lift of length " << lift.length() << ", d_X " << d << "\n";
    };
  }

  // delta
  std::string part = "total";
  fs::path graph_file;
  std::uint64_t delta_samples = 2'000'000;
  std::size_t exhaustive_cap = 400;
  {
    auto* sub = command("delta", "Gromov delta of a graph or a bundle part", true);
    sub->add_option("input", graph_file, "graph or bundle JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--part", part, "total, base or fiber:B for bundles")->capture_default_str();
    sub->add_option("--samples", delta_samples, "quadruples when sampling")->capture_default_str();
    sub->add_option("--exhaustive-cap", exhaustive_cap, "largest exhaustive scan")
        ->capture_default_str();
    runners[sub] = [&](Run& run) {
      run.input(graph_file);
      const Json j = read_json(graph_file);
      MetricGraph g;
      if (j.contains("total")) {
        const auto bd = bundle_from_json(j);
        if (part == "total") {
          g = bd.total();
        } else if (part == "base") {
          g = bd.base();
        } else if (part.rfind("fiber:", 0) == 0) {
          const Vertex b = parse_id(part.substr(6), "fibre");
          bd.base().check_vertex(b);
          g = bd.fiber_graph(b);
        } else {
          throw InputError("unknown part '" + part + "'");
        }
      } else {
        g = graph_from_json(j);
      }
      DeltaOptions o;
      o.allow_sampling = true;
      o.exhaustive_cap = exhaustive_cap;
      o.samples = delta_samples;
      o.seed = seed;
      const auto r = gromov_delta(g, o);
      run.output("delta.json", dump_json({{"delta", r.delta.str()},
                                          {"witness", r.witness},
                                          {"sampled", r.sampled},
                                          {"quadruples", r.quadruples_examined}}));
      out << "delta " << r.delta << (r.sampled ? " (sampled lower bound)" : "") << "\n";
    };
  }

  // flaring
  std::string k_text = "1";
  Distance n_half = 2, m_thr = 1;
  std::optional<Distance> m_max;
  std::size_t samples = 400;
  {
    auto* sub = command("flaring", "flaring table", true);
    bundle_arg(sub);
    sub->add_option("--k", k_text, "lift constant")->capture_default_str();
    sub->add_option("--n", n_half, "half window")->capture_default_str();
    sub->add_option("--M", m_thr, "threshold")->capture_default_str();
    sub->add_option("--M-max", m_max, "tabulate thresholds 0..M-max");
    sub->add_option("--samples", samples, "pairs drawn per row")->capture_default_str();
    runners[sub] = [&](Run& run) {
      const auto l = load_bundle(bundle_file, run);
      FlaringOptions o;
      o.samples = samples;
      o.seed = seed;
      o.sections = l.sections;
      std::vector<FlaringReport> rows;
      const Distance lo = m_max ? 0 : m_thr, hi = m_max ? *m_max : m_thr;
      for (Distance m = lo; m <= hi; ++m)
        rows.push_back(check_flaring(l.bd, Rational::parse(k_text), n_half, m, o));
      run.output("flaring.csv", flaring_csv(rows));
      for (const auto& r : rows)
        out << "M=" << r.m << " nu=" << (r.nu ? r.nu->str() : "none") << " samples=" << r.samples
            << "\n";
    };
  }

  // ladder
  GateFlags gate;
  std::optional<Vertex> b0;
  bool dot = false;
  {
    auto* sub = command("ladder", "decompose the ladder between two sections", true);
    bundle_arg(sub);
    sub->add_option("--from", from, "vertex on the first section")->required();
    sub->add_option("--to", to, "vertex on the second section")->required();
    sub->add_option("--b0", b0, "base vertex of the scanned rung (default pi(from))");
    sub->add_flag("--dot", dot, "also write ladder.dot");
    gate.add(sub);
    runners[sub] = [&](Run& run) {
      const auto l = load_bundle(bundle_file, run);
      const Vertex x = parse_vertex(from, l), y = parse_vertex(to, l);
      const auto params = gate.params(l, seed, out);
      const Ladder lad = make_ladder(make_section(l.bd, l.sections(x)), make_section(l.bd, l.sections(y)));
      const auto d = decompose_ladder(lad, b0 ? *b0 : l.bd.project(x), params);
      Json j = decomposition_to_json(d);
      const auto failures = verify_decomposition(d);
      j["verification_failures"] = failures;
      run.output("ladder.json", dump_json(j));
      if (dot) run.output("ladder.dot", ladder_to_dot(lad));
      for (std::size_t i = 0; i < d.blocks.size(); ++i)
        out << "block " << i << ' ' << block_type_name(d.blocks[i].type) << " girth "
            << d.blocks[i].girth << "\n";
      out << (failures.empty() ? "decomposition verified\n" : "decomposition FAILED verification\n");
    };
  }

  // qpath
  fs::path subbase_file;
  {
    auto* sub = command("qpath", "construct c(y, y') and optionally its modification", true);
    bundle_arg(sub);
    sub->add_option("--from", from, "start vertex")->required();
    sub->add_option("--to", to, "end vertex")->required();
    sub->add_option("--subbase", subbase_file, "subbase JSON for the modified path")
        ->check(CLI::ExistingFile);
    sub->add_flag("--dot", dot, "also write the ladder overlay");
    gate.add(sub);
    runners[sub] = [&](Run& run) {
      const auto l = load_bundle(bundle_file, run);
      const Vertex y = parse_vertex(from, l), y2 = parse_vertex(to, l);
      const auto params = gate.params(l, seed, out);
      const auto c = construct_c(l.bd, y, y2, make_section(l.bd, l.sections(y)),
                                 make_section(l.bd, l.sections(y2)), params);
      const auto rep = verify_path(c, l.bd.total());
      run.output("qpath.json", dump_json(constructed_path_to_json(c, rep)));
      run.output("qpath.csv", qpath_csv(c, rep));
      if (dot) run.output("qpath.dot", ladder_to_dot(c.ladder));
      out << "c: length " << c.path.length() << ", d_X " << l.bd.total().distance(y, y2)
          << ", certificate (" << rep.certificate.lambda << ", " << rep.certificate.epsilon
          << "), Hd " << rep.hausdorff_to_geodesic << "\n";
      if (!subbase_file.empty()) {
        const auto a = load_subbase(subbase_file, run);
        const auto cbar = construct_c_bar(l.bd, a, c);
        const auto rb = verify_path(cbar.path, cbar.y.bundle.total());
        Json jb = constructed_path_to_json(cbar.path, rb);
        jb["parent_ids"] = cbar.y.total_ids;
        const auto shapes = check_shapes(c, cbar);
        jb["shape_violations"] = shapes;
        run.output("qpath_bar.json", dump_json(jb));
        run.output("qpath_bar.csv", qpath_csv(cbar.path, rb));
        out << "c-bar: length " << cbar.path.path.length() << ", certificate ("
            << rb.certificate.lambda << ", " << rb.certificate.epsilon << "), Hd "
            << rb.hausdorff_to_geodesic << ", shape violations " << shapes.size() << "\n";
      }
    };
  }

  // pullback
  fs::path map_file;
  Distance lipschitz = 1;
  {
    auto* sub = command("pullback", "pull a bundle back along a base map", false);
    bundle_arg(sub);
    sub->add_option("--base1", graph_file, "graph JSON of the new base")->required()->check(CLI::ExistingFile);
    sub->add_option("--map", map_file, "JSON array: image of each new base vertex")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--lipschitz", lipschitz, "bound on d(g u, g v) over edges")->capture_default_str();
    runners[sub] = [&](Run& run) {
      const auto l = load_bundle(bundle_file, run);
      run.input(graph_file);
      run.input(map_file);
      const auto b1 = graph_from_json(read_json(graph_file));
      const Json jm = read_json(map_file);
      if (!jm.is_array()) throw InputError("map: expected an array");
      std::vector<Vertex> g;
      for (const auto& e : jm) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 0) throw InputError("map: expected ids");
        g.push_back(e.get<Vertex>());
      }
      const auto pb = pullback(l.bd, b1, g, lipschitz);
      Json j = bundle_to_json(pb.bundle);
      j["parent_ids"] = pb.morphism.vertex_map;
      run.output("pullback.json", dump_json(j));
      const auto iso = check_isomorphism(pb.morphism);
      out << "pullback: " << pb.bundle.total().vertex_count() << " vertices; fibre maps ("
          << iso.fiber_worst.certificate.lambda << ", " << iso.fiber_worst.certificate.epsilon
          << ")\n";
    };
  }

  // restrict
  {
    auto* sub = command("restrict", "restrict a bundle to a connected subbase", false);
    bundle_arg(sub);
    sub->add_option("--subbase", subbase_file, "subbase JSON")->required()->check(CLI::ExistingFile);
    runners[sub] = [&](Run& run) {
      const auto l = load_bundle(bundle_file, run);
      const auto r = restrict_bundle(l.bd, load_subbase(subbase_file, run));
      Json j = bundle_to_json(r.bundle);
      j["parent_ids"] = r.total_ids;
      run.output("restrict.json", dump_json(j));
      out << "restriction: " << r.bundle.total().vertex_count() << " vertices over "
          << r.bundle.base().vertex_count() << " base vertices\n";
    };
  }

  // mitra
  Distance n_max = 6;
  std::size_t pairs = 50;
  std::string basepoint;
  {
    auto* sub = command("mitra", "Mitra function of the bundle over a subbase", true);
    bundle_arg(sub);
    sub->add_option("--subbase", subbase_file, "subbase JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--Nmax", n_max, "largest ball radius")->capture_default_str();
    sub->add_option("--pairs", pairs, "accepted pairs per N")->capture_default_str();
    sub->add_option("--p", basepoint, "basepoint (default: deepest trusted vertex over the subbase)");
    runners[sub] = [&](Run& run) {
      const auto l = load_bundle(bundle_file, run);
      const auto a = load_subbase(subbase_file, run);
      const Vertex p = basepoint.empty() ? default_basepoint(l.bd, a) : parse_vertex(basepoint, l);
      const auto c = mitra_curve(l.bd, a, p, n_max, pairs, seed);
      run.output("mitra.csv", mitra_csv(c));
      out << "basepoint " << p << "\nN M pairs running_max\n";
      Distance running = 0;
      std::optional<Distance> m1, last;
      for (const auto& e : c.samples) {
        if (e.m) running = std::max(running, *e.m);
        if (e.n == 1) m1 = running;
        last = running;
        out << e.n << ' ' << (e.m ? std::to_string(*e.m) : "-") << ' ' << e.pairs << ' ' << running
            << "\n";
      }
      if (m1 && last)
        out << "trend: running max rises by " << static_cast<long>(*last) - static_cast<long>(*m1)
            << " from N=1 to N=" << n_max << " (finite range only)\n";
    };
  }

  // distortion
  Distance dist_m_max = 16;
  {
    auto* sub = command("distortion", "distortion of the bundle over a subbase", false);
    bundle_arg(sub);
    sub->add_option("--subbase", subbase_file, "subbase JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--Mmax", dist_m_max, "largest ambient distance")->capture_default_str();
    runners[sub] = [&](Run& run) {
      const auto l = load_bundle(bundle_file, run);
      const auto d = distortion_profile(l.bd, load_subbase(subbase_file, run), dist_m_max);
      run.output("distortion.csv", distortion_csv(l.bd, d));
      if (d.dominated) {
        out << "envelope " << d.envelope.a << "M + " << d.envelope.b << " + eta(" << d.envelope.c
            << "M + " << d.envelope.d << ") dominates over " << d.pairs << " pairs\n";
      } else {
        out << "no envelope with slope <= " << kMaxEnvelopeSlope << " dominates\n";
      }
    };
  }

  // diagonal
  Vertex split = 0;
  std::size_t diag_pairs = 1000;
  {
    auto* sub = command("diagonal", "diagonal embedding of a fibre into the two halves", true);
    bundle_arg(sub);
    sub->add_option("--split", split, "base vertex")->required();
    sub->add_option("--pairs", diag_pairs, "sampled fibre pairs")->capture_default_str();
    runners[sub] = [&](Run& run) {
      const auto l = load_bundle(bundle_file, run);
      const auto r = diagonal_embedding_measure(l.bd, split, diag_pairs, seed);
      run.output("diagonal.json", dump_json({{"pairs", r.pairs},
                                             {"max_ratio_sq", r.max_ratio_sq.str()},
                                             {"min_ratio_sq", r.min_ratio_sq.str()},
                                             {"upper_violations", r.upper_violations},
                                             {"certificate", certificate_to_json(r.certificate)}}));
      out << r.pairs << " pairs, ratio^2 in [" << r.min_ratio_sq << ", " << r.max_ratio_sq
          << "], upper violations " << r.upper_violations << ", lambda " << r.certificate.lambda
          << "\n";
    };
  }

  // laminate
  Vertex fiber_b = 0;
  std::string ratio = "3/2";
  {
    auto* sub = command("laminate", "fibre pairs that are close in the total space", false);
    bundle_arg(sub);
    sub->add_option("--fiber", fiber_b, "base vertex of the fibre")->required();
    sub->add_option("--ratio", ratio, "minimum d_fiber / d_X")->capture_default_str();
    runners[sub] = [&](Run& run) {
      const auto l = load_bundle(bundle_file, run);
      const auto found = detect_lamination_pairs(l.bd, fiber_b, Rational::parse(ratio));
      run.output("lamination.csv", lamination_csv(found));
      out << found.size() << " pairs with d_fiber >= " << ratio << " d_X\n";
    };
  }

  // export
  std::string what = "bundle";
  {
    auto* sub = command("export", "DOT export", false);
    sub->add_option("input", graph_file, "graph or bundle JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--what", what, "graph, base, total, bundle or ladder")
        ->capture_default_str()
        ->check(CLI::IsMember({"graph", "base", "total", "bundle", "ladder"}));
    sub->add_option("--from", from, "ladder: vertex on the first section");
    sub->add_option("--to", to, "ladder: vertex on the second section");
    runners[sub] = [&](Run& run) {
      std::string text;
      if (what == "graph") {
        run.input(graph_file);
        text = graph_to_dot(graph_from_json(read_json(graph_file)));
      } else {
        const auto l = load_bundle(graph_file, run);
        if (what == "base") {
          text = graph_to_dot(l.bd.base());
        } else if (what == "total") {
          text = graph_to_dot(l.bd.total());
        } else if (what == "bundle") {
          text = bundle_to_dot(l.bd);
        } else {
          if (from.empty() || to.empty()) throw InputError("ladder export needs --from and --to");
          const Vertex x = parse_vertex(from, l), y = parse_vertex(to, l);
          text = ladder_to_dot(make_ladder(make_section(l.bd, l.sections(x)),
                                           make_section(l.bd, l.sections(y))));
        }
      }
      run.output("export.dot", text);
      out << "wrote export.dot\n";
    };
  }

  // calibrate
  std::size_t cal_pairs = 200;
  {
    auto* sub = command("calibrate", "99th percentiles of path certificates over seeded pairs", true);
    bundle_arg(sub);
    sub->add_option("--subbase", subbase_file, "subbase JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--pairs", cal_pairs, "sampled pairs")->capture_default_str();
    gate.add(sub);
    runners[sub] = [&](Run& run) {
      const auto l = load_bundle(bundle_file, run);
      const auto a = load_subbase(subbase_file, run);
      const auto params = gate.params(l, seed, out);
      const auto cal = calibrate_paths(sample_paths(l.bd, a, params, cal_pairs, seed));
      const Rational f(5, 4);
      Json j{{"pairs", cal.pairs},
             {"p99", {{"lambda_c", cal.lambda_c.str()},
                      {"epsilon_c", cal.epsilon_c.str()},
                      {"hd_c", cal.hd_c},
                      {"lambda_c_bar", cal.lambda_c_bar.str()},
                      {"epsilon_c_bar", cal.epsilon_c_bar.str()},
                      {"hd_c_bar", cal.hd_c_bar}}},
             {"bound", {{"lambda_c", (f * cal.lambda_c).str()},
                        {"epsilon_c", (f * cal.epsilon_c).str()},
                        {"hd_c", (f * Rational(cal.hd_c)).str()},
                        {"lambda_c_bar", (f * cal.lambda_c_bar).str()},
                        {"epsilon_c_bar", (f * cal.epsilon_c_bar).str()},
                        {"hd_c_bar", (f * Rational(cal.hd_c_bar)).str()}}}};
      run.output("calibration.json", dump_json(j));
      out << "p99 over " << cal.pairs << " pairs: c (" << cal.lambda_c << ", " << cal.epsilon_c
          << ") Hd " << cal.hd_c << "; c-bar (" << cal.lambda_c_bar << ", " << cal.epsilon_c_bar
          << ") Hd " << cal.hd_c_bar << "\n";
    };
  }

  // replay
  fs::path manifest_file;
  CLI::App* replay = app.add_subcommand("replay", "re-run a manifest and compare output digests");
  replay->add_option("manifest", manifest_file, "manifest JSON")->required()->check(CLI::ExistingFile);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (threads) set_thread_count(threads);
    if (const char* dir = std::getenv("COARSE_CACHE_DIR"); dir && *dir) {
      auto cfg = oracle_config();
      cfg.spill_dir = fs::path(dir);
      set_oracle_config(cfg);
    }
    if (replay->parsed()) {
      const auto m = manifest_from_json(read_json(manifest_file));
      std::ostringstream sink;
      const int code = cli_dispatch(m.args, sink, err);
      if (code != kOk) return code;
      std::size_t bad = 0;
      for (const auto& o : m.outputs)
        if (sha256_hex(read_text(o.path)) != o.sha256) {
          out << "digest mismatch: " << o.path << "\n";
          ++bad;
        }
      out << (bad ? "replay differs\n" : "replay identical\n");
      return bad ? kModuleError : kOk;
    }
    for (auto& [sub, runner] : runners) {
      if (!sub->parsed()) continue;
      Run run(sub->get_name(), args, out_dir, config_of(sub),
              seeded[sub] || sub->get_option("--seed")->count() ? std::optional(seed) : std::nullopt);
      runner(run);
      run.finish();
    }
    return kOk;
  } catch (const Error& e) {
    err << Json{{"error", error_kind(e)}, {"message", e.what()}}.dump() << "\n";
    return kModuleError;
  } catch (const std::exception& e) {
    err << Json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return kModuleError;
  }
}

}  // namespace coarse::cli
