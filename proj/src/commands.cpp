#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fkdyn/blocks.hpp"
#include "fkdyn/boundary.hpp"
#include "fkdyn/config.hpp"
#include "fkdyn/dynamics.hpp"
#include "fkdyn/error.hpp"
#include "fkdyn/exact.hpp"
#include "fkdyn/experiments.hpp"
#include "fkdyn/lattice.hpp"
#include "fkdyn/rng.hpp"
#include "fkdyn/state.hpp"
#include "fkdyn/stats.hpp"

namespace fkdyn::cmd {

using ojson = nlohmann::ordered_json;

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// JSON cannot hold inf/nan; they become null.
ojson jnum(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

template <class T, class F>
T parse_as(const std::string& name, const std::string& v, F&& f) {
  try {
    size_t used = 0;
    T x = f(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::logic_error&) {
    fail(ErrorCode::invalid_argument, "bad value for --" + name + ": '" + v + "'");
  }
}

}  // namespace

Args::Args(const std::vector<ParamSpec>& specs, const std::map<std::string, std::string>& given) : given_(given) {
  for (const auto& s : specs) {
    order_.push_back(s.name);
    values_[s.name] = s.def;
  }
  for (const auto& [k, v] : given) {
    require(values_.count(k) > 0, ErrorCode::invalid_argument, "unknown parameter --" + k);
    values_[k] = v;
  }
}

const std::string& Args::str(const std::string& name) const {
  auto it = values_.find(name);
  require(it != values_.end(), ErrorCode::internal, "undeclared parameter " + name);
  return it->second;
}

int Args::integer(const std::string& name) const {
  return parse_as<int>(name, str(name), [](const std::string& s, size_t* u) { return std::stoi(s, u); });
}

uint64_t Args::u64(const std::string& name) const {
  const std::string& v = str(name);
  require(v.empty() || v[0] != '-', ErrorCode::invalid_argument, "--" + name + " must be nonnegative");
  return parse_as<uint64_t>(name, v, [](const std::string& s, size_t* u) { return std::stoull(s, u); });
}

double Args::real(const std::string& name) const {
  return parse_as<double>(name, str(name), [](const std::string& s, size_t* u) { return std::stod(s, u); });
}

bool Args::flag(const std::string& name) const {
  const std::string& v = str(name);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::invalid_argument, "bad boolean for --" + name + ": '" + v + "'");
}

std::vector<double> Args::reals(const std::string& name) const {
  std::vector<double> out;
  for (const auto& item : split_list(str(name)))
    out.push_back(parse_as<double>(name, item, [](const std::string& s, size_t* u) { return std::stod(s, u); }));
  require(!out.empty(), ErrorCode::invalid_argument, "--" + name + " is empty");
  return out;
}

std::vector<int> Args::integers(const std::string& name) const {
  std::vector<int> out;
  for (const auto& item : split_list(str(name)))
    out.push_back(parse_as<int>(name, item, [](const std::string& s, size_t* u) { return std::stoi(s, u); }));
  require(!out.empty(), ErrorCode::invalid_argument, "--" + name + " is empty");
  return out;
}

ojson Args::record() const {
  ojson j = ojson::object();
  for (const auto& k : order_) j[k] = values_.at(k);
  return j;
}

namespace {

// ---------------------------------------------------------------------------
// shared helpers

struct Box2 {
  int n;
  int l;
};

Box2 dims(const Args& a) {
  const int n = a.integer("n");
  const int l = a.str("l").empty() ? n : a.integer("l");
  require(n >= 1 && l >= 1, ErrorCode::invalid_argument, "need n, l >= 1");
  return {n, l};
}

EdgeSetVariant variant_of(const Args& a) {
  const auto& v = a.str("variant");
  if (v == "full") return EdgeSetVariant::full;
  if (v == "modified") return EdgeSetVariant::modified;
  fail(ErrorCode::invalid_argument, "--variant must be full or modified");
}

Params params_of(const Args& a) {
  Params prm{a.real("p"), a.real("q")};
  prm.validate();
  return prm;
}

std::string bc_id(const std::string& spec) { return spec == "free" || spec == "wired" ? spec : "custom"; }

RngStream rng_of(const Args& a) { return RngStream(a.u64("seed")); }

int threads_of(const Args& a) {
  const int t = a.integer("threads");
  require(t >= 1, ErrorCode::invalid_argument, "--threads must be positive");
  return t;
}

std::vector<ParamSpec> with_common(std::vector<ParamSpec> p) {
  p.push_back({"seed", "0", "root seed"});
  p.push_back({"threads", "1", "replica threads (results do not depend on it)"});
  return p;
}

const ParamSpec kN{"n", "8", "width of the rectangle"};
const ParamSpec kL{"l", "", "height (defaults to n)"};
const ParamSpec kP{"p", "0.5", "edge parameter"};
const ParamSpec kQ{"q", "2", "cluster weight"};
const ParamSpec kBc{"bc", "free", "free | wired | JSON | file"};
const ParamSpec kVariant{"variant", "full", "full | modified edge set"};

ParamSpec with_default(ParamSpec s, std::string def) {
  s.def = std::move(def);
  return s;
}

ojson bc_json(const BoundaryCondition& bc) { return ojson::parse(bc_to_json(bc)); }

// ---------------------------------------------------------------------------

Output run_simulate(const Args& a) {
  const auto [n, l] = dims(a);
  const Lattice lat = Lattice::build_rect(n, l, variant_of(a));
  const auto bc = parse_bc(a.str("bc"), n, l);
  const Params prm = params_of(a);
  const uint64_t steps = a.u64("max-steps");
  uint64_t every = a.u64("every");
  if (every == 0) every = std::max<uint64_t>(1, steps / 100);
  const auto& st = a.str("start");
  require(st == "empty" || st == "full", ErrorCode::invalid_argument, "--start must be empty or full");
  Kernel k(lat, bc);
  const auto rows = simulate_trace(k, FkConfig(lat.num_edges(), st == "full"), prm, steps, every, rng_of(a));
  Output o;
  std::string csv = "step,open,components\n";
  double mean_open = 0;
  for (const auto& r : rows) {
    csv += std::to_string(r.step) + "," + std::to_string(r.open) + "," + std::to_string(r.components) + "\n";
    mean_open += r.open;
  }
  mean_open /= rows.size();
  o.csv = std::move(csv);
  o.summary = {{"edges", lat.num_edges()},
               {"rows", rows.size()},
               {"final_open", rows.back().open},
               {"final_components", rows.back().components},
               {"mean_open", mean_open}};
  o.line = "simulate: " + std::to_string(steps) + " steps, final open " + std::to_string(rows.back().open) + "/" +
           std::to_string(lat.num_edges()) + ", components " + std::to_string(rows.back().components);
  return o;
}

Output run_couple(const Args& a) {
  const auto [n, l] = dims(a);
  const Lattice lat = Lattice::build_rect(n, l, variant_of(a));
  const auto bc = parse_bc(a.str("bc"), n, l);
  const Params prm = params_of(a);
  const int reps = a.integer("reps");
  require(reps >= 1, ErrorCode::invalid_argument, "--reps must be positive");
  const auto st = coupling_time(lat, bc, prm, a.u64("max-steps"), reps, rng_of(a), threads_of(a));
  Output o;
  o.csv = "rep,coupled,steps\n";
  for (size_t i = 0; i < st.runs.size(); ++i)
    o.csv += std::to_string(i) + "," + (st.runs[i].coupled ? "1" : "0") + "," + std::to_string(st.runs[i].steps) +
             "\n";
  o.summary = {{"reps", reps},     {"censored", st.censored}, {"median", st.median},
               {"q25", st.q25},    {"q75", st.q75},           {"t_quarter", st.t_quarter}};
  o.line = "couple: median " + num(st.median) + " steps over " + std::to_string(reps) + " runs, " +
           std::to_string(st.censored) + " censored";
  return o;
}

Output run_cftp(const Args& a) {
  const auto [n, l] = dims(a);
  const Lattice lat = Lattice::build_rect(n, l, variant_of(a));
  const auto bc = parse_bc(a.str("bc"), n, l);
  const Params prm = params_of(a);
  const int reps = a.integer("reps");
  require(reps >= 1, ErrorCode::invalid_argument, "--reps must be positive");
  Kernel k(lat, bc);
  const RngStream root = rng_of(a);
  Output o;
  o.csv = "rep,T,epochs,open,components,config\n";
  double mean_open = 0, mean_t = 0;
  for (int i = 0; i < reps; ++i) {
    CftpStats cs;
    const FkConfig s = cftp_sample(k, prm, root.split(static_cast<uint64_t>(i)), {}, &cs);
    o.csv += std::to_string(i) + "," + std::to_string(cs.T) + "," + std::to_string(cs.epochs) + "," +
             std::to_string(s.count_open()) + "," + std::to_string(k.component_count(s)) + "," +
             serialize_config(lat, s) + "\n";
    mean_open += s.count_open();
    mean_t += static_cast<double>(cs.T);
  }
  o.summary = {{"reps", reps}, {"mean_open", mean_open / reps}, {"mean_T", mean_t / reps}};
  o.line = "cftp: " + std::to_string(reps) + " exact samples, mean open " + num(mean_open / reps);
  return o;
}

Region parse_L(const Lattice& lat, const std::string& spec) {
  if (spec == "top") return Region::box(lat, 0, lat.l(), lat.n(), lat.l());
  if (spec == "bottom") return Region::box(lat, 0, 0, lat.n(), 0);
  const auto parts = split_list(spec);
  require(parts.size() == 4, ErrorCode::invalid_argument, "--L must be top, bottom or x0,y0,x1,y1");
  std::array<int, 4> b{};
  for (int i = 0; i < 4; ++i)
    b[i] = parse_as<int>("L", parts[i], [](const std::string& s, size_t* u) { return std::stoi(s, u); });
  return Region::box(lat, b[0], b[1], b[2], b[3]);
}

Output run_gap_table(const Args& a) {
  const auto [n, l] = dims(a);
  const Lattice lat = Lattice::build_rect(n, l);
  require(lat.num_edges() <= kMaxMatrixEdges, ErrorCode::size_cap, "gap-table needs at most 12 edges");
  const auto bc = parse_bc(a.str("bc"), n, l);
  const Region L = parse_L(lat, a.str("L"));
  const double eps = a.real("mix-eps");
  Output o;
  o.csv = "n,l,bc_id,p,q,gap_fk,gap_mhb,t_mix,phi_star\n";
  ojson rows = ojson::array();
  for (double q : a.reals("q"))
    for (double p : a.reals("p")) {
      Params prm{p, q};
      prm.validate();
      const ExactChain fk = fk_transition_matrix(lat, bc, prm);
      const double g_fk = spectrum(fk).gap;
      const double g_mhb = spectrum(mhb_transition_matrix(lat, bc, L, prm)).gap;
      const int tmix = tv_mixing_time(fk, eps);
      const CutResult cut = min_conductance(fk, level_set_family(lat.num_edges()));
      o.csv += std::to_string(n) + "," + std::to_string(l) + "," + bc_id(a.str("bc")) + "," + num(p) + "," + num(q) +
               "," + num(g_fk) + "," + num(g_mhb) + "," + std::to_string(tmix) + "," + num(cut.phi) + "\n";
      rows.push_back({{"p", p},
                      {"q", q},
                      {"gap_fk", g_fk},
                      {"gap_mhb", g_mhb},
                      {"t_mix", tmix},
                      {"phi_star", cut.phi},
                      {"phi_star_exhaustive", cut.exhaustive}});
    }
  o.summary = {{"edges", lat.num_edges()}, {"L_edges", L.inner_edges().size()}, {"rows", rows}};
  o.line = "gap-table: " + std::to_string(rows.size()) + " rows, gap_fk " + num(rows[0]["gap_fk"].get<double>());
  return o;
}

void group_rows(std::string& csv, const std::string& name, const GroupOfRectangles& g) {
  for (size_t i = 0; i < g.slabs().size(); ++i)
    csv += name + "," + std::to_string(i) + "," + std::to_string(g.slabs()[i].a) + "," +
           std::to_string(g.slabs()[i].b) + "\n";
}

Output run_split(const Args& a) {
  const auto [n, l] = dims(a);
  const auto bc = parse_bc(a.str("bc"), n, l);
  const int m = a.integer("m") > 0 ? a.integer("m") : default_m(l);
  const auto g = GroupOfRectangles::whole(n, l);
  require(is_compatible(g, bc, m), ErrorCode::precondition, "bc is not compatible with the box at this m");
  const SplitResult r = split(g, bc, m);
  Output o;
  o.csv = "group,slab,a,b\n";
  group_rows(o.csv, "A_int", r.A_int);
  group_rows(o.csv, "A_ext", r.A_ext);
  group_rows(o.csv, "R_int", r.R_int);
  group_rows(o.csv, "R_ext", r.R_ext);
  const double W = g.width();
  o.summary = {{"m", m},
               {"c_star", r.c_star},
               {"d_star", r.d_star},
               {"W", g.width()},
               {"frac_A_int", r.A_int.width() / W},
               {"frac_R_int", r.R_int.width() / W},
               {"frac_R_ext", r.R_ext.width() / W},
               {"A_int_compatible", is_compatible(r.A_int, bc, m)},
               {"A_ext_compatible", is_compatible(r.A_ext, bc, m)}};
  if (a.flag("trace")) o.summary["trace"] = ojson::parse(r.trace);
  o.line = "split: c* = " + std::to_string(r.c_star) + ", d* = " + std::to_string(r.d_star) +
           ", W(A_int)/W = " + num(r.A_int.width() / W);
  return o;
}

Output run_msm_scan(const Args& a) {
  const auto [n, l] = dims(a);
  const Lattice lat = Lattice::build_rect(n, l);
  const auto bc = parse_bc(a.str("bc"), n, l);
  const Params prm = params_of(a);
  const int reps = a.integer("reps");
  const auto& method = a.str("method");
  require(method == "cftp" || method == "chains", ErrorCode::invalid_argument, "--method must be cftp or chains");
  const int e = lat.edge_between({n / 2, l / 2}, {n / 2 + 1, l / 2});
  require(e >= 0, ErrorCode::precondition, "lattice too small for a central edge");
  const RngStream root = rng_of(a);
  Output o;
  o.csv = "r,delta,difference,half_width,p_wired,p_free,samples\n";
  std::vector<double> rs, deltas, xs, ys, ws;
  ojson pts = ojson::array();
  const auto radii = a.integers("r");
  for (size_t i = 0; i < radii.size(); ++i) {
    const int r = radii[i];
    require(r >= 1, ErrorCode::invalid_argument, "--r values must be positive");
    const Box b = edge_box(lat, e, r);
    const Region block = Region::box(lat, b[0], b[1], b[2], b[3]);
    const RngStream rng = root.split(static_cast<uint64_t>(r));
    const MsmEstimate est =
        method == "cftp" ? msm_delta(lat, bc, block, e, prm, rng, {reps, a.flag("rao-blackwell"), threads_of(a)})
                         : msm_delta_chains(lat, bc, block, e, prm, rng, a.u64("max-steps") / 10, a.u64("max-steps"));
    o.csv += std::to_string(r) + "," + num(est.delta) + "," + num(est.difference) + "," + num(est.half_width) + "," +
             num(est.p_wired) + "," + num(est.p_free) + "," + std::to_string(est.samples) + "\n";
    pts.push_back({{"r", r}, {"delta", est.delta}, {"half_width", est.half_width}});
    rs.push_back(r);
    deltas.push_back(est.delta);
    const double se = est.half_width / normal_quantile(0.975);
    if (est.delta > 0 && se > 0) {
      xs.push_back(r);
      ys.push_back(std::log(est.delta));
      ws.push_back((est.delta / se) * (est.delta / se));
    }
  }
  bool decreasing = true;
  for (size_t i = 1; i < deltas.size(); ++i) decreasing = decreasing && deltas[i] < deltas[i - 1];
  o.summary = {{"edge", e}, {"points", pts}, {"strictly_decreasing", decreasing}, {"fit_points", xs.size()}};
  if (xs.size() >= 3) {
    const LinearFit f = linear_fit(xs, ys, ws, true);
    o.summary["slope"] = f.slope;
    o.summary["slope_ci95"] = f.slope_ci95;
    o.summary["slope_negative"] = f.slope + f.slope_ci95 < 0;
  } else {
    o.summary["slope"] = nullptr;
    o.summary["slope_ci95"] = nullptr;
    o.summary["slope_negative"] = false;
  }
  o.line = std::string("msm-scan: ") + (decreasing ? "strictly decreasing" : "not strictly decreasing") + " over " +
           std::to_string(radii.size()) + " radii";
  return o;
}

Output run_edc(const Args& a) {
  const auto [n, l] = dims(a);
  const bool dual = a.flag("dual");
  const Lattice lat = Lattice::build_rect(n, l, dual ? EdgeSetVariant::modified : variant_of(a));
  const auto bc = parse_bc(a.str("bc"), n, l);
  const Params prm = params_of(a);
  const Lattice target = dual ? dual_lattice(lat).dual : lat;
  int dmax = a.integer("max-dist"), margin = a.integer("margin");
  if (dmax <= 0) dmax = std::max(1, std::min(target.n(), target.l()) / 2);
  if (margin < 0) margin = std::min(target.n(), target.l()) / 4;
  const auto pairs = row_pairs(target, dmax, margin);
  require(!pairs.empty(), ErrorCode::precondition, "no vertex pairs fit inside the margin");
  EdcOptions opt;
  opt.samples = a.integer("reps");
  opt.dual = dual;
  opt.use_bc = a.flag("use-bc");
  opt.threads = threads_of(a);
  const EdcFit fit = edc_estimate(lat, bc, prm, pairs, rng_of(a), opt);
  Output o;
  o.csv = "distance,trials,connected,prob\n";
  for (const auto& p : fit.points)
    o.csv += std::to_string(p.distance) + "," + std::to_string(p.trials) + "," + std::to_string(p.connected) + "," +
             num(p.prob) + "\n";
  o.summary = {{"pairs", pairs.size()}, {"c", fit.c}, {"c_ci95", fit.c_ci95}, {"decays", fit.decays}};
  o.line = std::string("edc: ") + (dual ? "dual " : "") + "c = " + num(fit.c) + " +/- " + num(fit.c_ci95) +
           (fit.decays ? ", decays" : ", no decay");
  return o;
}

Output run_unfold(const Args& a) {
  const auto [n, l] = dims(a);
  const Lattice lat = Lattice::build_rect(n, l);
  const auto bc = parse_bc(a.str("bc"), n, l);
  const UnfoldResult u = unfold_frame(lat, a.integer("r"), bc);
  Output o;
  o.csv = "qx,qy,preimage\n";
  for (int v = 0; v < u.q.num_vertices(); ++v) {
    const Vertex qv = u.q.vertex(v);
    std::string pre;
    for (int w : u.vertex_preimage[v]) {
      const Vertex lv = lat.vertex(w);
      if (!pre.empty()) pre += ";";
      pre += std::to_string(lv.x) + ":" + std::to_string(lv.y);
    }
    o.csv += std::to_string(qv.x) + "," + std::to_string(qv.y) + "," + pre + "\n";
  }
  const bool real = is_realizable(u.xi);
  o.summary = {{"q_n", u.q.n()},
               {"q_l", u.q.l()},
               {"frame_edges", u.frame_edges},
               {"q_edges", u.q_edges},
               {"duplicated_edges", u.duplicated_edges},
               {"audit_ok", u.audit_ok},
               {"wired_columns", u.wired_columns},
               {"realizable", real},
               {"xi", bc_json(u.xi)}};
  o.line = "unfold: Q is " + std::to_string(u.q.n()) + " x " + std::to_string(u.q.l()) +
           ", realizable: " + (real ? "true" : "false") + ", audit: " + (u.audit_ok ? "ok" : "FAILED");
  return o;
}

SourceGraph parse_graph(const std::string& spec) {
  require(!spec.empty(), ErrorCode::invalid_argument, "--graph is empty");
  if ((spec[0] == 'K' || spec[0] == 'P') && spec.size() > 1 && spec.find('-') == std::string::npos) {
    const int k = parse_as<int>("graph", spec.substr(1), [](const std::string& s, size_t* u) { return std::stoi(s, u); });
    require(k >= 2 && k <= 16, ErrorCode::invalid_argument, "--graph size must be in [2, 16]");
    return spec[0] == 'K' ? SourceGraph::complete(k) : SourceGraph::path(k);
  }
  SourceGraph g;
  for (const auto& item : split_list(spec)) {
    const auto dash = item.find('-');
    require(dash != std::string::npos, ErrorCode::invalid_argument, "--graph edges look like 0-1,1-2");
    const auto conv = [](const std::string& s, size_t* u) { return std::stoi(s, u); };
    const int x = parse_as<int>("graph", item.substr(0, dash), conv);
    const int y = parse_as<int>("graph", item.substr(dash + 1), conv);
    g.edges.push_back({x, y});
    g.num_vertices = std::max({g.num_vertices, x + 1, y + 1});
  }
  return g;
}

Output run_embed(const Args& a) {
  const auto [n, l] = dims(a);
  const SourceGraph g = parse_graph(a.str("graph"));
  const EmbeddedGraph emb = embed_graph(g, n, l, a.integer("stride"));
  const Lattice lat = Lattice::build_rect(n, l);
  Output o;
  o.csv = "graph_edge,a,b,x_a,x_b,lattice_edge\n";
  for (size_t i = 0; i < g.edges.size(); ++i) {
    const int x = emb.stride * static_cast<int>(i);
    o.csv += std::to_string(i) + "," + std::to_string(g.edges[i].first) + "," + std::to_string(g.edges[i].second) +
             "," + std::to_string(x) + "," + std::to_string(x + 1) + "," + std::to_string(emb.l_edges[i]) + "\n";
  }
  const bool real = is_realizable(emb.bc);
  o.summary = {{"graph_vertices", g.num_vertices},
               {"graph_edges", g.edges.size()},
               {"blocks", emb.bc.nontrivial_blocks().size()},
               {"realizable", real},
               {"bc", bc_json(emb.bc)}};
  o.line = "embed: " + std::to_string(g.edges.size()) + " edges on the top side, realizable: " +
           (real ? "true" : "false");
  return o;
}

Output run_slowmix(const Args& a) {
  SlowmixOptions opt;
  opt.reps = a.integer("reps");
  opt.threads = threads_of(a);
  opt.lam_lo = a.real("lam-lo");
  opt.lam_step = a.real("lam-step");
  opt.rel_depth = a.real("rel-depth");
  opt.max_steps_free = a.u64("max-steps");
  opt.run_coupling = a.flag("coupling");
  opt.tiny_n = a.integer("tiny-n");
  opt.tiny_l = a.integer("tiny-l");
  const SlowmixReport rep = slowmix_pipeline(a.real("q"), a.integer("ell"), a.integer("n"), rng_of(a), opt);
  Output o;
  o.csv = "lambda,bimodal";
  for (int s = 1; s <= rep.ell; ++s) o.csv += ",h" + std::to_string(s);
  o.csv += "\n";
  for (size_t i = 0; i < rep.scan.lambdas.size(); ++i) {
    o.csv += num(rep.scan.lambdas[i]) + "," + (rep.scan.bimodal[i] ? "1" : "0");
    for (double h : rep.scan.hist[i]) o.csv += "," + num(h);
    o.csv += "\n";
  }
  o.inconclusive = rep.inconclusive;
  ojson win = {{"found", rep.scan.found}, {"lo", rep.scan.lo}, {"hi", rep.scan.hi}, {"mid", rep.scan.mid}};
  o.summary = {{"inconclusive", rep.inconclusive}, {"window", win}};
  if (rep.inconclusive) {
    o.line = "slowmix: inconclusive, no bimodal window found";
    return o;
  }
  o.summary["lambda"] = rep.lambda;
  o.summary["p"] = rep.p;
  o.summary["a"] = {{"antimode", rep.antimode},
                    {"cut_threshold", rep.cut.threshold},
                    {"cut_at_most", rep.cut.at_most},
                    {"cut_mass", rep.cut_mass},
                    {"phi_cut", rep.phi_cut},
                    {"best_threshold", rep.best_threshold},
                    {"best_phi_cut", rep.best_phi_cut},
                    {"tiny_n", opt.tiny_n},
                    {"tiny_l", opt.tiny_l},
                    {"tiny_gap", rep.tiny_gap},
                    {"tiny_phi_lower", rep.tiny_phi_lower},
                    {"tiny_phi_upper", rep.tiny_phi_upper},
                    {"ratio", jnum(rep.ratio_a)},
                    {"pass", rep.pass_a}};
  o.summary["c"] = {{"phi_A_M", rep.am_phi}, {"phi_A_M_complement", rep.am_phi_complement}, {"mass_A_M", rep.am_mass}};
  if (opt.run_coupling)
    o.summary["b"] = {{"reps", opt.reps},
                      {"median_free", rep.median_free},
                      {"censored_free", rep.censored_free},
                      {"median_embedded", rep.median_embedded},
                      {"censored_embedded", rep.censored_embedded},
                      {"cap_embedded", rep.cap_embedded},
                      {"ratio", rep.ratio_b},
                      {"pass", rep.pass_b}};
  o.line = "slowmix: window [" + num(rep.scan.lo) + ", " + num(rep.scan.hi) + "], lambda " + num(rep.lambda) +
           "; (a) ratio " + num(rep.ratio_a) + (rep.pass_a ? " pass" : " fail");
  if (opt.run_coupling) o.line += "; (b) ratio " + num(rep.ratio_b) + (rep.pass_b ? " pass" : " fail");
  return o;
}

Output run_typical(const Args& a) {
  const int n = a.integer("n");
  const int pad = a.integer("pad") > 0 ? a.integer("pad") : std::max(1, n / 2);
  const Params prm = params_of(a);
  const double alpha = a.real("alpha");
  const auto bcs = typical_samples(n, pad, prm, a.integer("reps"), rng_of(a), threads_of(a));
  const TypicalityRate tr = typicality_rate(bcs, alpha);
  Output o;
  o.csv = "rep,blocks,maxL,in_c_alpha,in_c_alpha_star\n";
  for (size_t i = 0; i < bcs.size(); ++i)
    o.csv += std::to_string(i) + "," + std::to_string(bcs[i].nontrivial_blocks().size()) + "," +
             std::to_string(localization(bcs[i])) + "," + (in_C_alpha(bcs[i], alpha) ? "1" : "0") + "," +
             (in_C_alpha_star(bcs[i], alpha) ? "1" : "0") + "\n";
  o.summary = {{"pad", pad},
               {"samples", tr.samples},
               {"rate", tr.rate},
               {"rate_lo95", tr.rate_lo},
               {"rate_star", tr.rate_star},
               {"rate_star_lo95", tr.rate_star_lo}};
  o.line = "typical: C_alpha rate " + num(tr.rate) + ", C_alpha* rate " + num(tr.rate_star) + " over " +
           std::to_string(tr.samples) + " samples";
  return o;
}

std::string describe_bc(const BoundaryCondition& bc) {
  if (bc.num_blocks() == 1) return "wired";
  if (bc.is_free()) return "free";
  return std::to_string(bc.nontrivial_blocks().size()) + " wired blocks";
}

Output run_bc_check(const Args& a) {
  const auto [n, l] = dims(a);
  const auto bc = parse_bc(a.str("bc"), n, l);
  const bool real = is_realizable(bc);
  const int maxl = localization(bc);
  Output o;
  const auto cyc = boundary_cycle_of(n, l);
  o.csv = "position,x,y,block\n";
  for (int i = 0; i < bc.cycle_length(); ++i)
    o.csv += std::to_string(i) + "," + std::to_string(cyc[i] % (n + 1)) + "," + std::to_string(cyc[i] / (n + 1)) +
             "," + std::to_string(bc.label(i)) + "\n";
  o.summary = {{"realizable", real}, {"blocks", bc.num_blocks()}, {"maxL", maxl}};
  std::string dual = "n/a";
  if (real) {
    const BoundaryCondition d = dual_bc(bc, Lattice::build_rect(n, l, EdgeSetVariant::modified));
    dual = describe_bc(d);
    o.summary["dual"] = bc_json(d);
  } else {
    o.summary["dual"] = nullptr;
  }
  o.line = std::string("realizable: ") + (real ? "true" : "false") + ", dual: " + dual + ", maxL: " +
           std::to_string(maxl);
  if (a.real("alpha") > 0) {
    const double alpha = a.real("alpha");
    o.summary["in_c_alpha"] = in_C_alpha(bc, alpha);
    o.summary["in_c_alpha_star"] = real ? ojson(in_C_alpha_star(bc, alpha)) : ojson(nullptr);
    o.line += std::string(", C_alpha: ") + (in_C_alpha(bc, alpha) ? "true" : "false");
  }
  return o;
}

std::vector<Command> build_commands() {
  std::vector<Command> c;
  c.push_back({"simulate", "run heat-bath FK dynamics and record a trace",
               with_common({kN, kL, kP, kQ, kBc, kVariant, {"max-steps", "10000", "number of updates"},
                            {"every", "0", "trace stride (0: steps/100)"}, {"start", "empty", "empty | full"}}),
               run_simulate});
  c.push_back({"couple", "coupling times of the extremal grand coupling",
               with_common({kN, kL, kP, kQ, kBc, kVariant, {"max-steps", "10000000", "step cap per run"},
                            {"reps", "50", "independent runs"}}),
               run_couple});
  c.push_back({"cftp", "exact samples by coupling from the past",
               with_common({with_default(kN, "3"), kL, kP, kQ, kBc, kVariant, {"reps", "100", "samples"}}),
               run_cftp});
  c.push_back({"gap-table", "exact gaps, mixing time and conductance on a small rectangle",
               with_common({with_default(kN, "1"), kL, {"p", "0.5", "comma list"}, {"q", "2", "comma list"}, kBc,
                            {"L", "top", "MHB vertex set: top | bottom | x0,y0,x1,y1"},
                            {"mix-eps", "0.25", "TV threshold for t_mix"}}),
               run_gap_table});
  c.push_back({"split", "split a box along a disconnecting interval of its top side",
               with_common({with_default(kN, "1200"), with_default(kL, "4"), kBc, {"m", "0", "margin (0: default)"},
                            {"trace", "false", "include the decision trace"}}),
               run_split});
  c.push_back({"msm-scan", "wired-vs-free edge marginal gap over box radii",
               with_common({with_default(kN, "32"), kL, with_default(kP, "0.3"), kQ, kBc,
                            {"r", "2,4,6,8", "comma list of radii"}, {"reps", "10000", "samples per radius"},
                            {"rao-blackwell", "true", "score by conditional probability"},
                            {"method", "cftp", "cftp | chains"},
                            {"max-steps", "1000000", "chain steps for --method chains"}}),
               run_msm_scan});
  c.push_back({"edc", "connection probability decay with distance",
               with_common({with_default(kN, "16"), kL, with_default(kP, "0.1"), kQ, kBc, kVariant,
                            {"reps", "2000", "samples"}, {"dual", "false", "connections of the dual configuration"},
                            {"use-bc", "false", "count boundary wirings as connections"},
                            {"max-dist", "0", "largest distance (0: half the side)"},
                            {"margin", "-1", "distance from the boundary (-1: quarter side)"}}),
               run_edc});
  c.push_back({"unfold", "unfold the boundary frame into a thin rectangle",
               with_common({with_default(kN, "14"), kL, {"r", "1", "block scale"}, kBc}), run_unfold});
  c.push_back({"embed", "embed a graph into the top side and build its boundary condition",
               with_common({with_default(kN, "12"), kL, {"graph", "K3", "K<k>, P<k> or 0-1,1-2,..."},
                            {"stride", "4", "column stride between carrier edges"}}),
               run_embed});
  c.push_back({"slowmix", "bottleneck and coupling-time comparison for an embedded clique",
               with_common({with_default(kN, "60"), with_default(kQ, "5"), {"ell", "6", "clique size"},
                            {"reps", "50", "coupling runs per bc"}, {"max-steps", "17179869184", "free-bc step cap"},
                            {"lam-lo", "0.5", "scan start"}, {"lam-step", "0.02", "scan step"},
                            {"rel-depth", "0.02", "antimode depth"}, {"coupling", "true", "run the coupling part"},
                            {"tiny-n", "3", "comparison chain width"}, {"tiny-l", "1", "comparison chain height"}}),
               run_slowmix});
  c.push_back({"typical", "localization of boundary conditions induced by the exterior",
               with_common({with_default(kN, "32"), {"pad", "0", "padding (0: n/2)"}, with_default(kP, "0.3"), kQ,
                            {"alpha", "6", "localization exponent"}, {"reps", "500", "samples"}}),
               run_typical});
  c.push_back({"bc-check", "realizability, dual and localization of a boundary condition",
               with_common({kN, kL, kBc, {"alpha", "0", "also test C_alpha when positive"}}), run_bc_check});
  return c;
}

}  // namespace

BoundaryCondition parse_bc(const std::string& spec, int n, int l) {
  if (spec == "free") return BoundaryCondition::free(n, l);
  if (spec == "wired") return BoundaryCondition::wired(n, l);
  std::string text = spec;
  if (spec.empty() || spec[0] != '{') {
    std::ifstream in(spec);
    require(in.good(), ErrorCode::invalid_argument, "--bc: not free, wired, JSON or a readable file: " + spec);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  BoundaryCondition bc = bc_from_json(text);
  require(bc.n() == n && bc.l() == l, ErrorCode::invalid_argument, "--bc dimensions do not match --n/--l");
  return bc;
}

const std::vector<Command>& commands() {
  static const std::vector<Command> all = build_commands();
  return all;
}

const Command* find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return &c;
  return nullptr;
}

RunResult run_command(const std::string& name, const std::map<std::string, std::string>& values) {
  const Command* c = find_command(name);
  require(c != nullptr, ErrorCode::invalid_argument, "unknown command '" + name + "'");
  const Args args(c->params, values);
  Output o = c->run(args);
  ojson doc = {{"command", name}, {"params", args.record()}, {"summary", o.summary}};
  RunResult r;
  r.csv = std::move(o.csv);
  r.json = doc.dump(2) + "\n";
  r.line = std::move(o.line);
  r.inconclusive = o.inconclusive;
  return r;
}

}  // namespace fkdyn::cmd
