#include "app.hpp"

#include "ssg/corpus.hpp"
#include "ssg/spec_json.hpp"
#include "ssg/ssg.hpp"

#include "CLI11.hpp"

#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace ssg::app {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

using nlohmann::json;
namespace sj = ssg::json;

/// Usage problems outside the JSON schema (flags, missing seed, empty corpus).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Record {
  std::string check_id;
  std::string ref;
  json inputs = json::object();
  json values = json::object();
  std::optional<double> discrepancy;
  std::optional<double> tolerance;
  bool pass = true;
  bool diagnostic = false;
  std::string note;
};

Record make_record(std::string id, std::string ref, json inputs, json values) {
  Record r;
  r.check_id = std::move(id);
  r.ref = std::move(ref);
  r.inputs = std::move(inputs);
  r.values = std::move(values);
  return r;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json point_json(const Vec& x) { return json(to_std(x)); }

json record_json(const Record& r) {
  json j;
  j["check_id"] = r.check_id;
  j["ref"] = r.ref;
  j["inputs_digest"] = hex64(fnv1a(r.inputs.dump()));
  j["inputs"] = r.inputs;
  j["values"] = r.values;
  j["discrepancy"] = r.discrepancy ? finite_or_null(*r.discrepancy) : json(nullptr);
  j["tolerance"] = r.tolerance ? json(*r.tolerance) : json(nullptr);
  j["pass"] = r.pass;
  j["diagnostic"] = r.diagnostic;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Record check(std::string id, std::string ref, json inputs, json values, double discrepancy, double tol) {
  Record r = make_record(std::move(id), std::move(ref), std::move(inputs), std::move(values));
  r.discrepancy = discrepancy;
  r.tolerance = tol;
  r.pass = std::isfinite(discrepancy) && discrepancy <= tol;
  return r;
}

/// Passes iff margin >= -slack; discrepancy is the shortfall below zero.
Record margin_check(std::string id, std::string ref, json inputs, json values, double margin, double slack = 0.0) {
  values["margin"] = finite_or_null(margin);
  Record r = check(std::move(id), std::move(ref), std::move(inputs), std::move(values),
                   std::isfinite(margin) ? std::max(0.0, -margin) : margin, slack);
  return r;
}

Record from_report(const CheckReport& c, std::string ref, json inputs) {
  json v{{"expected", finite_or_null(c.expected)}, {"actual", finite_or_null(c.actual)}};
  if (c.observed_order) v["observed_order"] = finite_or_null(*c.observed_order);
  if (!c.ladder.empty()) v["ladder"] = c.ladder;
  Record r = make_record(c.check_id, std::move(ref), std::move(inputs), std::move(v));
  r.discrepancy = c.abs_discrepancy;
  r.tolerance = c.tolerance;
  r.pass = c.pass;
  r.note = c.note;
  return r;
}

Record diagnostic(std::string id, std::string ref, json inputs, json values) {
  Record r = make_record(std::move(id), std::move(ref), std::move(inputs), std::move(values));
  r.diagnostic = true;
  return r;
}

Record error_record(std::string id, std::string ref, json inputs, const Error& e) {
  Record r = make_record(std::move(id), std::move(ref), std::move(inputs), json::object());
  r.pass = false;
  r.note = e.what();
  return r;
}

/// Evaluates f(0..count-1) on up to `jobs` threads; results keep index order,
/// and the exception of the lowest failing index is rethrown.
template <class F>
auto parallel_map(int count, int jobs, F&& f) -> std::vector<decltype(f(0))> {
  using T = decltype(f(0));
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  auto work = [&](int start) {
    for (int k = start; k < count; k += jobs) {
      try {
        slots[k].emplace(f(k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (jobs <= 1 || count <= 1) {
    jobs = 1;
    work(0);
  } else {
    jobs = std::min(jobs, count);
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  std::vector<T> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
    out.push_back(std::move(*slots[k]));
  }
  return out;
}

struct Context {
  std::string command;
  std::string action;
  json config = json::object();
  std::string config_digest = "none";
  Tolerances tol;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::map<std::string, double> flags;  // numeric command flags given on the command line
  std::vector<Record> records;
  std::vector<std::pair<std::string, std::string>> csv;  // file name, content

  json inputs(json extra = json::object()) const {
    extra["command"] = action.empty() ? command : command + " " + action;
    extra["config"] = config_digest;
    return extra;
  }

  const json& params() const {
    static const json empty = json::object();
    auto it = config.find("params");
    if (it == config.end()) return empty;
    if (!it->is_object()) sj::fail("/params", "expected an object");
    return *it;
  }

  bool has_param(const std::string& key) const { return flags.count(key) || params().contains(key); }

  double number(const std::string& key, double dflt) const {
    if (auto f = flags.find(key); f != flags.end()) return f->second;
    return sj::number_or(params(), key, dflt, "/params");
  }

  int integer(const std::string& key, int dflt) const {
    if (auto f = flags.find(key); f != flags.end()) {
      if (f->second != std::floor(f->second)) throw UsageError("--" + key + " must be an integer");
      return static_cast<int>(f->second);
    }
    if (!params().contains(key)) return dflt;
    return sj::integer(params()[key], "/params/" + key);
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> dflt) const {
    if (!params().contains(key)) return dflt;
    return to_std(sj::vector(params()[key], "/params/" + key));
  }

  GraphSpec graph() const { return sj::graph_spec(sj::at(config, "graph", ""), "/graph"); }
  PotentialSpec potential() const { return sj::potential_spec(sj::at(config, "potential", ""), "/potential"); }
  Signature signature(Signature dflt = Signature::euclidean()) const {
    return config.contains("signature") ? sj::signature(config["signature"], "/signature") : dflt;
  }
  std::vector<Vec> grid(int n) const { return sj::grid(sj::at(config, "grid", ""), n, "/grid"); }

  std::uint64_t require_seed() const {
    if (!seed) throw UsageError("this command is randomized and needs --seed or a \"seed\" field in the config");
    return *seed;
  }

  void add(Record r) { records.push_back(std::move(r)); }
};

// ---------------------------------------------------------------------------
// Commands

void cmd_residual(Context& ctx) {
  const GraphSpec g = ctx.graph();
  const Signature sig = ctx.signature();
  const auto grid = ctx.grid(g.n);
  auto recs = parallel_map(static_cast<int>(grid.size()), ctx.jobs, [&](int k) {
    const json in = ctx.inputs({{"point", point_json(grid[k])}, {"signature", sig.name()}});
    try {
      const Vec R = shrinker_residual(eval_jet(g, grid[k], 2), sig);
      return check("shrinker_residual", "shrinker_system", in, {{"residual", to_std(R)}}, R.norm(), ctx.tol.algebra);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::invalid_spec) throw;
      return error_record("shrinker_residual", "shrinker_system", in, e);
    }
  });
  for (auto& r : recs) ctx.add(std::move(r));
}

void cmd_identity(Context& ctx) {
  const GraphSpec g = ctx.graph();
  const auto grid = ctx.grid(g.n);
  auto recs = parallel_map(static_cast<int>(grid.size()), ctx.jobs, [&](int k) {
    const json in = ctx.inputs({{"point", point_json(grid[k])}});
    std::vector<Record> out;
    try {
      const auto c = identity_31_check(g, grid[k], ctx.tol);
      Record a = from_report(c.analytic, "volume_laplacian_identity", in);
      a.values["rhs"] = c.rhs;
      out.push_back(std::move(a));
      out.push_back(from_report(c.oracle, "volume_laplacian_identity", in));
    } catch (const Error& e) {
      out.push_back(error_record("volume_laplacian_identity", "volume_laplacian_identity", in, e));
    }
    return out;
  });
  for (auto& v : recs)
    for (auto& r : v) ctx.add(std::move(r));
}

void cmd_conditions(Context& ctx) {
  const GraphSpec g = ctx.graph();
  const auto grid = ctx.grid(g.n);
  const double beta = ctx.number("beta", 8.0);
  const Thm10Report rep = thm10_conditions(g, grid, beta, ctx.tol);
  const json in = ctx.inputs({{"beta", beta}, {"points", grid.size()}});
  ctx.add(diagnostic("condition_cross_products", "rigidity_conditions", in,
                     {{"holds", rep.cond_i}, {"worst_product", rep.worst_product}}));
  ctx.add(diagnostic("condition_volume_bound", "rigidity_conditions", in,
                     {{"holds", rep.cond_ii}, {"max_detg", rep.max_detg}, {"beta", beta}}));
  ctx.add(diagnostic("condition_commuting_hessians", "rigidity_conditions", in,
                     {{"holds", rep.cond_iii}, {"max_commutator", rep.max_commutator}}));
}

std::vector<Vec> scan_values(const Context& ctx) {
  const json& p = ctx.params();
  std::vector<Vec> cs;
  if (!p.contains("c")) {
    for (double c : {0.1, 0.5, 1.0, 2.0}) {
      cs.push_back(Vec::Constant(1, c));
      cs.push_back(Vec::Constant(1, -c));
    }
    return cs;
  }
  const json& arr = p["c"];
  if (!arr.is_array() || arr.empty()) sj::fail("/params/c", "expected a nonempty array");
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string ptr = "/params/c/" + std::to_string(k);
    cs.push_back(arr[k].is_array() ? sj::vector(arr[k], ptr) : Vec::Constant(1, sj::number(arr[k], ptr)));
    if (cs.back().size() < 1) sj::fail(ptr, "initial value needs at least one component");
  }
  return cs;
}

std::string trajectory_csv(const ShootResult& s, int m) {
  std::ostringstream os;
  os.precision(17);
  os << "r";
  for (int a = 1; a <= m; ++a) os << ",u" << a;
  for (int a = 1; a <= m; ++a) os << ",ur" << a;
  os << "\n";
  for (const auto& st : s.trajectory) {
    os << st.r;
    for (int a = 0; a < m; ++a) os << "," << st.u(a);
    for (int a = 0; a < m; ++a) os << "," << st.ur(a);
    os << "\n";
  }
  return os.str();
}

void cmd_rotsym(Context& ctx) {
  const auto cs = scan_values(ctx);
  const int n = ctx.integer("n", 2);
  const double r_max = ctx.number("r_max", 50.0);
  if (n < 1) throw UsageError("rotsym needs n >= 1");
  struct Out {
    ShootResult base;
    ShootResult halved;
  };
  auto runs = parallel_map(static_cast<int>(cs.size()), ctx.jobs, [&](int k) {
    return Out{shoot(cs[k], n, r_max), shoot(cs[k], n, r_max, {}, IntegratorTolerances{0.5e-10, 0.5e-12})};
  });
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const auto& s = runs[k].base;
    const auto& h = runs[k].halved;
    const std::string file = "rotsym_" + std::to_string(k) + ".csv";
    ctx.csv.emplace_back(file, trajectory_csv(s, static_cast<int>(cs[k].size())));
    const double rel = s.end_radius > 0 ? std::abs(h.end_radius - s.end_radius) / s.end_radius : 0.0;
    json v{{"outcome", to_string(s.outcome)},
           {"end_radius", s.end_radius},
           {"exceeded", s.exceeded},
           {"max_abs_u", s.max_abs_u},
           {"max_abs_ur", s.max_abs_ur},
           {"halved_tolerance_end_radius", h.end_radius},
           {"relative_radius_change", rel},
           {"trajectory_csv", file},
           {"summary", s.outcome == ShootOutcome::global_to_rmax ? "trajectory reached r_max"
                                                                  : "no entire solution found from this initial value"}};
    ctx.add(diagnostic("rotsym_shoot", "radial_reduction",
                       ctx.inputs({{"c", to_std(cs[k])}, {"n", n}, {"r_max", r_max}}), std::move(v)));
  }
}

void cmd_rescale(Context& ctx) {
  const GraphSpec g = ctx.graph();
  const double T = ctx.number("T", 1.0);
  const auto times = ctx.numbers("times", {0.0, 0.5 * T});
  const auto grid = ctx.grid(g.n);
  const int count = static_cast<int>(grid.size() * times.size());
  auto recs = parallel_map(count, ctx.jobs, [&](int k) {
    const Vec& x = grid[k / times.size()];
    const double t = times[k % times.size()];
    const json in = ctx.inputs({{"point", point_json(x)}, {"t", t}, {"T", T}});
    std::vector<Record> out;
    try {
      const HeatResidual h = heat_residual(g, T, x, t, ctx.tol);
      out.push_back(check("rescaled_heat_two_routes", "rescaled_heat_operator", in,
                          {{"direct", to_std(h.direct)}, {"via_residual", to_std(h.via_residual)}}, h.discrepancy,
                          ctx.tol.analytic * std::max(1.0, h.direct.cwiseAbs().maxCoeff())));
      out.push_back(from_report(h.time_derivative, "rescaled_heat_operator", in));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::invalid_spec) throw;
      out.push_back(error_record("rescaled_heat_two_routes", "rescaled_heat_operator", in, e));
    }
    return out;
  });
  for (auto& v : recs)
    for (auto& r : v) ctx.add(std::move(r));
}

void cmd_growth(Context& ctx) {
  const GraphSpec g = ctx.graph();
  const auto radii = ctx.numbers("radii", {1.0, 10.0, 100.0});
  const int ball = ctx.integer("ball_samples", kBallSupSamples);
  const int sphere = ctx.integer("sphere_samples", kSphereSamples);
  const GrowthReport rep = growth_bound_check(g, radii, ball, sphere);
  std::ostringstream csv;
  csv.precision(17);
  csv << "radius,min_margin,min_curvature_margin\n";
  for (const auto& row : rep.rows) {
    csv << row.radius << "," << row.min_margin << "," << row.min_curvature_margin << "\n";
    const json in = ctx.inputs({{"radius", row.radius}, {"ball_samples", ball}, {"sphere_samples", sphere}});
    ctx.add(margin_check("linear_growth_bound", "linear_growth", in,
                         {{"sup_u2", rep.sup_u2}, {"sup_radius", rep.sup_radius}, {"sampling_error", rep.sampling_error}},
                         row.min_margin));
    ctx.add(margin_check("mean_curvature_growth_bound", "mean_curvature_growth", in,
                         {{"constant", rep.curvature_constant}}, row.min_curvature_margin));
  }
  ctx.csv.emplace_back("growth.csv", csv.str());
}

void cmd_constants(Context& ctx) {
  const double s = ctx.number("s", 4.0), sigma = ctx.number("sigma", 1.0), tau = ctx.number("tau", 1.0),
               c = ctx.number("c", 1.0), r0 = ctx.number("r0", 1.0);
  const int n = ctx.integer("n", 2);
  const json in = ctx.inputs({{"s", s}, {"n", n}, {"sigma", sigma}, {"tau", tau}, {"c", c}, {"r0", r0}});

  const S0Result s0 = s0_solve();
  Record sr = check("s0_bracket", "growth_threshold", in,
                    {{"s0", s0.s0}, {"lo", s0.lo}, {"hi", s0.hi}, {"iterations", s0.iterations}}, s0.residual,
                    ctx.tol.algebra);
  sr.pass = sr.pass && s0.s0 > 3.4 && s0.s0 < 3.5;
  ctx.add(std::move(sr));
  ctx.add(check("g_at_one", "growth_threshold", in, {{"g", growth_g(1.0)}}, std::abs(growth_g(1.0) - 0.5),
                ctx.tol.algebra));

  if (s > 1.0) {
    const ZetaWitness z = zeta_witness(s);
    json v{{"zeta", z.zeta}, {"in_range", z.in_range}};
    if (z.in_range)
      ctx.add(margin_check("zeta_witness", "zeta_witness", in, v, z.margin, ctx.tol.algebra));
    else
      ctx.add(diagnostic("zeta_witness", "zeta_witness", in, {{"zeta", z.zeta}, {"margin", z.margin}, {"in_range", false}}));
  }

  try {
    const GrowthConstants gc = growth_constants(s, n, sigma, tau, c, r0);
    const double bound = 0.5 * (n * sigma + 1.0) * gc.k2 / (gc.k2 - 1.0);
    const double margin = std::min({gc.k2 - 1.0, 2.0 - gc.k2, gc.R0sq - bound + ctx.tol.algebra * std::max(1.0, bound)});
    ctx.add(margin_check("growth_constants", "growth_constants", in,
                         {{"theta", gc.theta}, {"k", gc.k}, {"k2", gc.k2}, {"R0sq", gc.R0sq}, {"R0", gc.R0},
                          {"sup_radius", bound_sup_radius(gc)}},
                         margin));
    if (ctx.config.contains("graph")) {
      const GraphSpec g = ctx.graph();
      const auto ball = ball_points(g.n, 1.0, ctx.integer("ball_samples", 4000));
      for (double R : ctx.numbers("lemma_radii", {2.0 * gc.R0})) {
        const json lin = ctx.inputs({{"s", s}, {"n", n}, {"R", R}});
        try {
          const GrowthAlternative l = lemma9_check(gc, g, R, ball);
          Record r = check("lemma_alternative", "lemma_alternative", lin,
                           {{"r", l.r}, {"sup_R", l.sup_R}, {"sup_r", l.sup_r}, {"margin_decay_form", l.margin_decay_form},
                            {"margin_doubling_form", l.margin_doubling_form}},
                           l.either() ? 0.0 : std::min(-l.margin_decay_form, -l.margin_doubling_form), 0.0);
          ctx.add(std::move(r));
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::invalid_spec) throw;
          ctx.add(error_record("lemma_alternative", "lemma_alternative", lin, e));
        }
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_spec) throw;
    ctx.add(error_record("growth_constants", "growth_constants", in, e));
  }
}

template <class F>
void per_point(Context& ctx, const std::vector<Vec>& grid, const std::string& id, const std::string& ref, F&& f) {
  auto recs = parallel_map(static_cast<int>(grid.size()), ctx.jobs, [&](int k) {
    const json in = ctx.inputs({{"point", point_json(grid[k])}});
    std::vector<Record> out;
    try {
      f(grid[k], in, out);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::invalid_spec) throw;
      out.push_back(error_record(id, ref, in, e));
    }
    return out;
  });
  for (auto& v : recs)
    for (auto& r : v) ctx.add(std::move(r));
}

void cmd_lagrangian(Context& ctx) {
  const std::string act = ctx.action;
  const PotentialSpec ps = ctx.potential();
  const auto grid = ctx.grid(ps.n);
  if (act == "residual-euclid" || act == "residual-pseudo") {
    const bool pseudo = act == "residual-pseudo";
    const std::string ref = pseudo ? "potential_equation_pseudo" : "potential_equation_euclid";
    const std::optional<double> expected =
        ctx.has_param("expected") ? std::optional<double>(ctx.number("expected", 0.0)) : std::nullopt;
    per_point(ctx, grid, "potential_residual", ref, [&](const Vec& x, const json& in, std::vector<Record>& out) {
      const double r = pseudo ? pseudo_potential_residual(ps, x) : euclid_potential_residual(ps, x);
      if (expected)
        out.push_back(check("potential_residual", ref, in, {{"residual", r}, {"expected", *expected}},
                            std::abs(r - *expected), ctx.tol.algebra * std::max(1.0, std::abs(*expected))));
      else
        out.push_back(diagnostic("potential_residual", ref, in, {{"residual", r}}));
    });
  } else if (act == "phase") {
    per_point(ctx, grid, "phase_gradient_fd", "phase_gradient", [&](const Vec& x, const json& in, std::vector<Record>& out) {
      const PhaseValue pv = phase_residual(ps, x);
      Record r = from_report(phase_gradient_fd_check(ps, x, ctx.tol), "phase_gradient", in);
      r.values["theta"] = pv.theta;
      r.values["residual"] = pv.residual;
      out.push_back(std::move(r));
    });
  } else if (act == "lewy") {
    per_point(ctx, grid, "lewy_round_trip", "lewy_rotation", [&](const Vec& x, const json& in, std::vector<Record>& out) {
      const LewyPoint lp = lewy_rotate(ps, x);
      const double scale = std::max(1.0, lp.D2w.cwiseAbs().maxCoeff());
      out.push_back(check("lewy_inversion", "lewy_rotation", in,
                          {{"xbar", to_std(lp.xbar)}, {"Dw", to_std(lp.Dw)}, {"w", lp.w}}, lp.inversion,
                          ctx.tol.algebra * std::max(1.0, x.cwiseAbs().maxCoeff())));
      out.push_back(check("lewy_round_trip", "lewy_rotation", in, {{"d2w_positive_definite", lp.d2w_positive_definite}},
                          lp.roundtrip, ctx.tol.algebra * scale));
      const MongeAmpereCheck mc = monge_ampere_check(ps, x);
      if (mc.domain_ok)
        out.push_back(check("monge_ampere_two_sides", "monge_ampere", in,
                            {{"eta_residual", mc.eta_residual}, {"w_residual", mc.w_residual}}, mc.discrepancy,
                            ctx.tol.analytic * std::max(1.0, std::abs(mc.eta_residual))));
      else
        out.push_back(diagnostic("monge_ampere_domain", "monge_ampere", in,
                                 {{"domain_ok", false}, {"note", "D^2 w is not positive definite here"}}));
    });
  } else if (act == "consistency") {
    per_point(ctx, grid, "potential_gradient_bridge", "potential_gradient_bridge",
              [&](const Vec& x, const json& in, std::vector<Record>& out) {
                const GradientConsistency gc = gradient_consistency(ps, x);
                out.push_back(check("potential_gradient_bridge", "potential_gradient_bridge", in,
                                    {{"potential_side", to_std(gc.potential_side)}, {"system_side", to_std(gc.system_side)}},
                                    gc.discrepancy,
                                    ctx.tol.analytic * std::max(1.0, gc.system_side.cwiseAbs().maxCoeff())));
              });
  } else {
    throw UsageError("lagrangian needs one of residual-euclid, residual-pseudo, phase, lewy, consistency");
  }
}

void cmd_pseudo(Context& ctx) {
  const std::string act = ctx.action;
  if (act == "stardx") {
    const GraphSpec g = ctx.graph();
    per_point(ctx, ctx.grid(g.n), "stardx_two_routes", "stardx", [&](const Vec& x, const json& in, std::vector<Record>& out) {
      const StarDx s = star_dx(eval_jet(g, x, 1));
      out.push_back(check("stardx_two_routes", "stardx", in, {{"value", s.value}, {"value_sv", s.value_sv}}, s.discrepancy,
                          ctx.tol.analytic * 0.1 * std::max(1.0, s.value)));
    });
  } else if (act == "identity") {
    const GraphSpec g = ctx.graph();
    const double step = ctx.number("frame_step", 1e-2);
    per_point(ctx, ctx.grid(g.n), "stardx_frame_gradient", "stardx_gradient",
              [&](const Vec& x, const json& in, std::vector<Record>& out) {
                const auto c = grad_stardx_identity(g, x, ctx.tol);
                out.push_back(from_report(c.analytic, "stardx_gradient", in));
                out.push_back(from_report(c.oracle, "stardx_gradient", in));
                for (int i = 0; i < g.n; ++i)
                  for (int j = 0; j < g.n; ++j) {
                    json ij = in;
                    ij["i"] = i;
                    ij["j"] = j;
                    out.push_back(from_report(frame_hessian_check(g, x, i, j, ctx.tol, FDPolicy{step, 3}),
                                              "frame_second_derivative", ij));
                  }
              });
  } else if (act == "inequality") {
    const std::uint64_t seed = ctx.require_seed();
    const int draws = ctx.integer("draws", 1000), n = ctx.integer("n", 3), m = ctx.integer("m", 2);
    const double lmax = ctx.number("lambda_max", 0.9);
    if (draws < 1 || n < 1 || m < 1 || n > 8 || m > 8) throw UsageError("inequality needs draws >= 1 and 1 <= n, m <= 8");
    if (!(lmax >= 0.0 && lmax < 1.0)) throw UsageError("lambda_max must lie in [0, 1)");
    corpus::Rng rng(seed);
    double worst = std::numeric_limits<double>::infinity(), worst_id = 0.0;
    int worst_draw = 0;
    for (int k = 0; k < draws; ++k) {
      const auto r = frame_inequality_check(corpus::random_pseudo_frame_data(n, m, lmax, rng));
      if (r.min_margin() < worst) {
        worst = r.min_margin();
        worst_draw = k;
      }
      worst_id = std::max(worst_id, r.square_identity_discrepancy);
    }
    const json in = ctx.inputs({{"seed", seed}, {"draws", draws}, {"n", n}, {"m", m}, {"lambda_max", lmax}});
    ctx.add(margin_check("frame_inequalities", "frame_inequalities", in, {{"worst_draw", worst_draw}}, worst,
                         ctx.tol.algebra));
    ctx.add(check("volume_square_identity", "volume_square_identity", in, {}, worst_id, ctx.tol.algebra));
  } else if (act == "decay") {
    const GraphSpec g = ctx.graph();
    const auto radii = ctx.numbers("radii", {1.0, 2.0, 4.0, 8.0});
    const int dirs = ctx.integer("directions", 64);
    const DecayProfile p = decay_diagnostic(g, radii, dirs);
    std::ostringstream csv;
    csv.precision(17);
    csv << "radius,max_ratio,min_detg,failed_samples\n";
    json rows = json::array();
    for (const auto& r : p.rows) {
      csv << r.radius << "," << r.max_ratio << "," << r.min_detg << "," << r.failed_samples << "\n";
      rows.push_back({{"radius", r.radius}, {"max_ratio", r.max_ratio}, {"min_detg", finite_or_null(r.min_detg)},
                      {"failed_samples", r.failed_samples}});
    }
    ctx.csv.emplace_back("decay.csv", csv.str());
    ctx.add(diagnostic("decay_profile", "decay_profile", ctx.inputs({{"radii", radii}, {"directions", dirs}}),
                       {{"rows", rows}, {"trend", p.trend}, {"hypothesis_suspect", p.hypothesis_suspect},
                        {"failures", p.failures}, {"csv", "decay.csv"}}));
  } else {
    throw UsageError("pseudo needs one of stardx, identity, inequality, decay");
  }
}

// ---------------------------------------------------------------------------
// Built-in corpus

const std::vector<std::string> kCorpusModules = {"tensor_jets", "geometry", "identity", "rotsym",
                                                 "rescaling",   "lagrangian", "pseudo"};

void corpus_module(Context& ctx, const std::string& mod, corpus::Rng& rng) {
  const Tolerances& tol = ctx.tol;
  auto in = [&](json extra) {
    extra["module"] = mod;
    return ctx.inputs(std::move(extra));
  };
  if (mod == "tensor_jets") {
    for (int t = 0; t < 3; ++t) {
      const GraphSpec g = corpus::random_poly_spec(2, 2, 4, rng);
      const Vec x = random_ball_points(2, 1.0, 1, rng)[0];
      const Jet j = eval_jet(g, x, 2);
      for (int a = 0; a < 2; ++a) {
        const FDJet fd = finite_diff_jet([&](const Vec& y) { return eval_jet(g, y, 0).u(a); }, x, FDPolicy::default_at(x));
        for (int i = 0; i < 2; ++i) {
          std::vector<double> lad;
          for (const auto& v : fd.grad_levels) lad.push_back(v(i));
          ctx.add(from_report(richardson_check("jet_gradient_fd", j.du(a, i), lad, RichardsonOptions{tol.oracle, 1.8, -1}),
                              "graph_jets", in({{"trial", t}, {"component", a}, {"axis", i}})));
        }
      }
    }
  } else if (mod == "geometry") {
    for (int t = 0; t < 10; ++t) {
      const bool pseudo = t % 2 == 1;
      const int n = 1 + t % 4, m = 1 + (t / 2) % 3;
      const GraphSpec g = corpus::linear_spec(corpus::random_matrix_with_norm(m, n, pseudo ? 0.9 : 4.0, rng));
      double worst = 0.0;
      for (const auto& x : random_ball_points(n, 10.0, 50, rng))
        worst = std::max(worst, shrinker_residual(eval_jet(g, x, 2), pseudo ? Signature::pseudo() : Signature::euclidean()).norm());
      ctx.add(check("linear_residual", "shrinker_system", in({{"trial", t}, {"signature", pseudo ? "pseudo" : "euclidean"}}),
                    {}, worst, tol.algebra));
    }
  } else if (mod == "identity") {
    for (int t = 0; t < 3; ++t) {
      const GraphSpec g = corpus::random_poly_spec(2, 2, 3, rng);
      for (const auto& x : random_ball_points(2, 1.0, 3, rng)) {
        const auto c = identity_31_check(g, x, tol);
        ctx.add(from_report(c.analytic, "volume_laplacian_identity", in({{"trial", t}, {"point", point_json(x)}})));
        ctx.add(from_report(c.oracle, "volume_laplacian_identity", in({{"trial", t}, {"point", point_json(x)}})));
      }
    }
    double worst = 0.0, chain = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 200; ++t) {
      const int n = 1 + t % 4, m = 1 + (t / 4) % 4;
      worst = std::max(worst, frame_reduction_38(corpus::random_frame_data(n, m, 2.0, rng)).discrepancy);
      chain = std::min(chain, frame_ssh_chain_margin(corpus::random_frame_data_bounded_products(n, m, rng), 1.0 / (2.0 * n)));
    }
    ctx.add(check("frame_reduction", "frame_reduction", in({{"draws", 200}}), {}, worst, tol.algebra));
    ctx.add(margin_check("ssh_chain", "rigidity_conditions", in({{"draws", 200}}), {}, chain, tol.algebra));
  } else if (mod == "rotsym") {
    const ShootResult z = shoot(Vec::Zero(1), 2, 50.0);
    Record r = check("rotsym_zero_data", "radial_reduction", in({{"c", 0}}), {{"outcome", to_string(z.outcome)}},
                     z.max_abs_u, tol.algebra);
    r.pass = r.pass && z.outcome == ShootOutcome::global_to_rmax;
    ctx.add(std::move(r));
    for (double c : {0.5, 1.0}) {
      const ShootResult s = shoot(Vec::Constant(1, c), 2, 50.0);
      ctx.add(diagnostic("rotsym_shoot", "radial_reduction", in({{"c", c}}),
                         {{"outcome", to_string(s.outcome)}, {"end_radius", s.end_radius}}));
    }
  } else if (mod == "rescaling") {
    for (int t = 0; t < 3; ++t) {
      const GraphSpec g = corpus::random_poly_spec(2, 1 + t % 2, 3, rng);
      for (const auto& x : random_ball_points(2, 1.0, 3, rng)) {
        const HeatResidual h = heat_residual(g, 1.0, x, 0.25, tol);
        ctx.add(check("rescaled_heat_two_routes", "rescaled_heat_operator", in({{"trial", t}, {"point", point_json(x)}}), {},
                      h.discrepancy, tol.analytic * 0.1));
      }
    }
    const S0Result s0 = s0_solve();
    ctx.add(check("s0_bracket", "growth_threshold", in({}), {{"s0", s0.s0}}, s0.residual, tol.algebra));
    double worst = std::numeric_limits<double>::infinity();
    for (double s = s0_value(); s <= 20.0; s += 0.01) worst = std::min(worst, zeta_witness(s).margin);
    ctx.add(margin_check("zeta_sweep", "zeta_witness", in({}), {}, worst, tol.algebra));
  } else if (mod == "lagrangian") {
    for (int t = 0; t < 3; ++t) {
      const PotentialSpec v = corpus::random_potential(2, 4, rng);
      double worst = 0.0;
      for (const auto& x : random_ball_points(2, 1.5, 10, rng)) worst = std::max(worst, gradient_consistency(v, x).discrepancy);
      ctx.add(check("potential_gradient_bridge", "potential_gradient_bridge", in({{"trial", t}}), {}, worst, tol.analytic * 0.1));
    }
    const double c = 0.5;
    const PotentialSpec q{3, make_iso_quadratic(c)};
    const Vec x = Vec::Constant(3, 0.4);
    ctx.add(check("quadratic_arctan", "potential_equation_euclid", in({{"c", c}}), {},
                  std::abs(euclid_potential_residual(q, x) - 3.0 * std::atan(c)), tol.algebra));
    ctx.add(check("quadratic_log", "potential_equation_pseudo", in({{"c", c}}), {},
                  std::abs(pseudo_potential_residual(q, x) - 1.5 * std::log((1 + c) / (1 - c))), tol.algebra));
  } else if (mod == "pseudo") {
    double worst = std::numeric_limits<double>::infinity(), ident = 0.0;
    for (int t = 0; t < 200; ++t) {
      const auto r = frame_inequality_check(corpus::random_pseudo_frame_data(1 + t % 4, 1 + (t / 4) % 4, 0.9, rng));
      worst = std::min(worst, r.min_margin());
      ident = std::max(ident, r.square_identity_discrepancy);
    }
    ctx.add(margin_check("frame_inequalities", "frame_inequalities", in({{"draws", 200}}), {}, worst, tol.algebra));
    ctx.add(check("volume_square_identity", "volume_square_identity", in({{"draws", 200}}), {}, ident, tol.algebra));
    const GraphSpec g = corpus::adapted_pseudo_spec(2, 2, {Rational(1, 2), Rational(-1, 3)}, rng);
    const auto c = grad_stardx_identity(g, Vec::Zero(2), tol);
    ctx.add(from_report(c.analytic, "stardx_gradient", in({})));
    ctx.add(from_report(c.oracle, "stardx_gradient", in({})));
  }
}

void cmd_corpus(Context& ctx) {
  std::vector<std::string> mods = kCorpusModules;
  if (ctx.config.contains("corpus")) {
    const json& c = ctx.config["corpus"];
    if (!c.is_array()) sj::fail("/corpus", "expected an array of module names");
    mods.clear();
    for (std::size_t k = 0; k < c.size(); ++k) {
      const std::string ptr = "/corpus/" + std::to_string(k);
      if (!c[k].is_string()) sj::fail(ptr, "expected a module name");
      const auto name = c[k].get<std::string>();
      if (std::find(kCorpusModules.begin(), kCorpusModules.end(), name) == kCorpusModules.end())
        sj::fail(ptr, "unknown corpus module '" + name + "'");
      mods.push_back(name);
    }
    if (mods.empty()) sj::fail("/corpus", "corpus is empty");
  }
  const std::uint64_t seed = ctx.seed.value_or(20240601);
  json summary = json::object();
  for (std::size_t k = 0; k < mods.size(); ++k) {
    corpus::Rng rng(seed + 7919 * k);
    const std::size_t before = ctx.records.size();
    corpus_module(ctx, mods[k], rng);
    int checks = 0, passed = 0;
    for (std::size_t r = before; r < ctx.records.size(); ++r)
      if (!ctx.records[r].diagnostic) {
        ++checks;
        passed += ctx.records[r].pass;
      }
    summary[mods[k]] = {{"checks", checks}, {"passed", passed}};
  }
  ctx.add(diagnostic("corpus_summary", "plumbing", ctx.inputs({{"seed", seed}}), {{"modules", summary}}));
}

// ---------------------------------------------------------------------------

void apply_tolerance(Tolerances& tol, const std::string& tier, double value, const std::string& where) {
  if (!(value > 0.0) || !std::isfinite(value)) throw UsageError(where + ": tolerance must be positive");
  if (tier == "algebra")
    tol.algebra = value;
  else if (tier == "analytic")
    tol.analytic = value;
  else if (tier == "oracle")
    tol.oracle = value;
  else
    throw UsageError(where + ": unknown tolerance tier '" + tier + "' (algebra, analytic, oracle)");
}

int execute(Context& ctx, const std::filesystem::path& out_dir, std::ostream& out) {
  const std::map<std::string, void (*)(Context&)> table = {
      {"residual", cmd_residual}, {"identity", cmd_identity},     {"conditions", cmd_conditions},
      {"rotsym", cmd_rotsym},     {"rescale", cmd_rescale},       {"growth", cmd_growth},
      {"constants", cmd_constants}, {"lagrangian", cmd_lagrangian}, {"pseudo", cmd_pseudo},
      {"corpus", cmd_corpus}};
  table.at(ctx.command)(ctx);

  std::filesystem::create_directories(out_dir);
  std::ofstream rep(out_dir / "report.jsonl", std::ios::trunc);
  if (!rep) throw UsageError("cannot write " + (out_dir / "report.jsonl").string());
  int checks = 0, failed = 0, diags = 0;
  for (const auto& r : ctx.records) {
    rep << record_json(r).dump() << "\n";
    if (r.diagnostic) {
      ++diags;
    } else {
      ++checks;
      failed += !r.pass;
    }
  }
  for (const auto& [name, content] : ctx.csv) {
    std::ofstream f(out_dir / name, std::ios::trunc);
    f << content;
  }
  out << ctx.command << (ctx.action.empty() ? "" : " " + ctx.action) << ": " << checks << " checks, " << failed
      << " failed, " << diags << " diagnostics; report " << (out_dir / "report.jsonl").string() << "\n";
  return failed == 0 ? kExitPass : kExitFail;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Numerical checks for graphical self-shrinkers"};
  Context ctx;
  std::string config_path, out_dir = "ssg_out";
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  cli.add_option("command", ctx.command, "residual | identity | conditions | rotsym | rescale | growth | constants | "
                                         "lagrangian | pseudo | corpus")
      ->required()
      ->check(CLI::IsMember({"residual", "identity", "conditions", "rotsym", "rescale", "growth", "constants",
                             "lagrangian", "pseudo", "corpus"}));
  cli.add_option("action", ctx.action, "sub-action for lagrangian and pseudo");
  cli.add_option("--config", config_path, "scene config (JSON)");
  cli.add_option("--out", out_dir, "output directory for report.jsonl and CSV files");
  auto* seed_opt = cli.add_option("--seed", seed, "random seed (u64)");
  cli.add_option("--tol-override", overrides, "TIER=VALUE, tiers algebra | analytic | oracle");
  cli.add_option("--jobs", ctx.jobs, "worker threads")->check(CLI::Range(1, 256));
  std::map<std::string, double> flag_values;
  std::map<std::string, CLI::Option*> flag_opts;
  for (const char* name : {"s", "n", "sigma", "tau", "c", "r0", "T", "beta", "r-max"})
    flag_opts[name] = cli.add_option(std::string("--") + name, flag_values[name]);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    cli.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    cli.exit(e, out, err);
    return kExitSchema;
  }

  try {
    for (const auto& [name, opt] : flag_opts)
      if (opt->count()) ctx.flags[name == "r-max" ? "r_max" : name] = flag_values[name];
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw UsageError("cannot open config '" + config_path + "'");
      std::stringstream buf;
      buf << f.rdbuf();
      try {
        ctx.config = json::parse(buf.str());
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::invalid_spec, std::string("/: malformed JSON: ") + e.what());
      }
      if (!ctx.config.is_object()) sj::fail("", "config must be a JSON object");
      ctx.config_digest = hex64(fnv1a(ctx.config.dump()));
      if (ctx.config.contains("seed")) {
        if (!ctx.config["seed"].is_number_unsigned()) sj::fail("/seed", "expected a non-negative integer");
        ctx.seed = ctx.config["seed"].get<std::uint64_t>();
      }
      if (ctx.config.contains("tolerances")) {
        const auto& t = ctx.config["tolerances"];
        if (!t.is_object()) sj::fail("/tolerances", "expected an object");
        for (auto it = t.begin(); it != t.end(); ++it)
          apply_tolerance(ctx.tol, it.key(), sj::number(it.value(), "/tolerances/" + it.key()), "/tolerances");
      }
    }
    if (seed_opt->count()) ctx.seed = seed;
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw UsageError("--tol-override expects TIER=VALUE, got '" + o + "'");
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(o.substr(eq + 1), &used);
        if (used != o.size() - eq - 1) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw UsageError("--tol-override value is not a number: '" + o + "'");
      }
      apply_tolerance(ctx.tol, o.substr(0, eq), v, "--tol-override");
    }
    if (!ctx.action.empty() && ctx.command != "lagrangian" && ctx.command != "pseudo")
      throw UsageError("command '" + ctx.command + "' takes no sub-action");
    return execute(ctx, out_dir, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::invalid_spec ? kExitSchema : kExitFail;
  } catch (const nlohmann::json::exception& e) {
    err << "error: invalid-spec: " << e.what() << "\n";
    return kExitSchema;
  }
}

}  // namespace ssg::app
