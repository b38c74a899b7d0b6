#pragma once

#include "CLI11.hpp"
#include "rieszlab/io.hpp"

namespace rieszlab {

// Exit codes: 0 success, 2 configuration error, 3 numerical-failure flags.
namespace cli_detail {

struct Ctx {
  std::string out_dir = "results";
  uint64_t seed = 1;
  bool force = false;
  bool numerical_flag = false;

  std::filesystem::path run_dir(const std::string& cmd, const json& cfg) const {
    return std::filesystem::path(out_dir) / cmd / run_hash(cfg, seed);
  }
  void emit(const std::string& cmd, const json& cfg,
            const std::vector<std::pair<std::string, std::string>>& files) const {
    auto dir = run_dir(cmd, cfg);
    for (const auto& [name, body] : files) write_text_file(dir / name, body, force);
    write_text_file(dir / "manifest.json", manifest_body(cmd, cfg, seed), true);
  }
};

inline std::vector<double> split_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "inf" || tok == "infinity")
      out.push_back(kInf);
    else
      out.push_back(std::stod(tok));
  }
  if (out.empty()) throw std::invalid_argument("empty numeric list");
  return out;
}

inline LoadedMeasure load_measure(const std::string& path) {
  return measure_from_json(load_json_file(path));
}

inline int cmd_mh(Ctx& ctx, const std::string& gauge_spec, double s, int d,
                  const std::string& kappas, const std::string& Ns) {
  GaugeFunction h = gauge_from_spec(gauge_spec, d);
  json cfg = {{"gauge", gauge_spec}, {"s", s}, {"d", d}, {"kappa", kappas}, {"N", Ns}};
  CsvWriter csv({"beta_or_gauge_id", "s", "d", "kappa", "N", "M", "residual"});
  for (double kappa : split_list(kappas))
    for (double N : split_list(Ns)) {
      MhQuery q{h, s, kappa, N};
      double M = solve_mh(q, 1e-10);
      double F = sqr(kappa) * detail::mh_integral(q, M, 1e-13);
      csv.row({h.id(), fmt17(s), std::to_string(d), fmt17(kappa),
               std::isinf(N) ? "inf" : fmt17(N), fmt17(M), fmt17(F - 1.0)});
    }
  ctx.emit("mh", cfg, {{"records.csv", csv.str()}});
  return 0;
}

inline int cmd_riesz(Ctx& ctx, const std::string& measure_path, double s, const std::string& mode,
                     double eps, const std::string& center, double halfwidth, int points) {
  auto m = load_measure(measure_path);
  DiscreteMeasure nu = m.atoms ? *m.atoms : m.cantor->atomize();
  int d = nu.dim();
  RieszContext rc{s, d};
  std::vector<double> c = split_list(center);
  if (int(c.size()) != d) throw std::invalid_argument("riesz: --center must have d entries");
  json cfg = {{"measure", measure_path}, {"s", s},         {"mode", mode},
              {"eps", eps},              {"center", center}, {"halfwidth", halfwidth},
              {"points", points}};
  std::vector<std::string> header;
  for (int a = 0; a < d; ++a) header.push_back("x" + std::to_string(a));
  header.push_back("eps");
  for (int a = 0; a < d; ++a) header.push_back("R" + std::to_string(a));
  header.push_back("magnitude");
  CsvWriter csv(header);
  // axis-aligned grid sweep along every axis through the center
  std::vector<std::vector<double>> grid;
  if (d == 1) {
    for (int i = 0; i < points; ++i)
      grid.push_back({c[0] - halfwidth + 2.0 * halfwidth * i / std::max(1, points - 1)});
  } else {
    int per = std::max(2, int(std::lround(std::pow(double(points), 1.0 / d))));
    std::vector<int> idx(size_t(d), 0);
    while (true) {
      std::vector<double> p(static_cast<size_t>(d));
      for (int a = 0; a < d; ++a)
        p[size_t(a)] = c[size_t(a)] - halfwidth + 2.0 * halfwidth * idx[size_t(a)] / (per - 1);
      grid.push_back(p);
      int a = 0;
      for (; a < d; ++a) {
        if (++idx[size_t(a)] < per) break;
        idx[size_t(a)] = 0;
      }
      if (a == d) break;
    }
  }
  for (const auto& p : grid) {
    std::vector<std::string> row;
    for (int a = 0; a < d; ++a) row.push_back(fmt17(p[size_t(a)]));
    if (mode == "maximal") {
      auto v = maximal_transform(nu, rc, p);
      row.push_back("sup");
      for (int a = 0; a < d; ++a) row.push_back("");
      row.push_back(v.at_atom ? "inf" : fmt17(v.value));
    } else {
      VectorValue v = mode == "modified" ? modified_transform(nu, rc, p, eps)
                                         : truncated_transform(nu, rc, p, eps);
      row.push_back(fmt17(eps));
      for (int a = 0; a < d; ++a) row.push_back(fmt17(v.components[size_t(a)]));
      row.push_back(fmt17(v.magnitude));
    }
    csv.row(row);
  }
  ctx.emit("riesz", cfg, {{"records.csv", csv.str()}});
  return 0;
}

inline int cmd_opnorm(Ctx& ctx, const std::string& measure_path, double s, double eps, bool sup) {
  auto m = load_measure(measure_path);
  DiscreteMeasure mu = m.atoms ? *m.atoms : m.cantor->atomize();
  RieszContext rc{s, mu.dim()};
  json cfg = {{"measure", measure_path}, {"s", s}, {"eps", sup ? 0.0 : eps}, {"sup", sup}};
  CsvWriter csv({"measure_id", "s", "eps_or_sup", "norm"});
  if (sup) {
    auto r = operator_sup_norm(mu, rc, 1e-8);
    if (!r.all_converged) ctx.numerical_flag = true;
    csv.row({m.id, fmt17(s), "sup", fmt17(r.value)});
  } else {
    auto A = assemble_operator(mu, rc, eps);
    auto r = operator_norm(A, 1e-10);
    if (!r.converged) ctx.numerical_flag = true;
    csv.row({m.id, fmt17(s), fmt17(eps), fmt17(r.value)});
  }
  ctx.emit("opnorm", cfg, {{"records.csv", csv.str()}});
  return 0;
}

inline int cmd_wolff(Ctx& ctx, const std::string& measure_path, double s,
                     const std::string& queries_path) {
  auto m = load_measure(measure_path);
  RieszContext rc{s, m.dim()};
  std::vector<std::vector<double>> queries;
  if (!queries_path.empty())
    for (const auto& q : load_json_file(queries_path)) queries.push_back(q.get<std::vector<double>>());
  json cfg = {{"measure", measure_path}, {"s", s}, {"queries", queries_path}};
  WolffReport rep = m.atoms ? wolff_report(*m.atoms, rc, queries)
                            : wolff_report(*m.cantor, rc, queries);
  CsvWriter csv({"measure_id", "s", "kind", "value"});
  csv.row({m.id, fmt17(s), "sup_support", fmt17(rep.sup_support)});
  csv.row({m.id, fmt17(s), "energy", fmt17(rep.energy)});
  for (size_t i = 0; i < rep.potential.size(); ++i)
    csv.row({m.id, fmt17(s), "W(q" + std::to_string(i) + ")", fmt17(rep.potential[i])});
  ctx.emit("wolff", cfg, {{"records.csv", csv.str()}});
  return 0;
}

inline int cmd_content(Ctx& ctx, const std::string& measure_path, double s, double P,
                       const std::string& mode, double eps, int depth,
                       const std::string& gauge_spec, bool dump_cells) {
  auto m = load_measure(measure_path);
  DiscreteMeasure nu = m.atoms ? *m.atoms : m.cantor->atomize();
  RieszContext rc{s, nu.dim()};
  GaugeFunction h = gauge_from_spec(gauge_spec, nu.dim());
  json cfg = {{"measure", measure_path}, {"s", s},      {"P", P},          {"mode", mode},
              {"eps", eps},              {"depth", depth}, {"gauge", gauge_spec}};
  SuperlevelMode md = mode == "absolute" ? SuperlevelMode::absolute
                      : mode == "eps"    ? SuperlevelMode::fixed_eps
                                         : SuperlevelMode::maximal;
  Cube w = auto_window(nu, rc, P);
  auto cells = superlevel_cells(nu, rc, P, w, depth, md, eps);
  auto bracket = content_bracket(cells, h);
  json rep = {{"upper", bracket.upper},
              {"lower", bracket.lower},
              {"depth", bracket.depth},
              {"cells", bracket.cells},
              {"gauge", h.id()},
              {"duality_ratio", bracket.duality_ratio},
              {"boundary", dyadic::touches_boundary(cells)}};
  std::vector<std::pair<std::string, std::string>> files = {{"report.json", rep.dump(2) + "\n"}};
  if (dump_cells) {
    std::vector<std::string> header;
    for (int a = 0; a < nu.dim(); ++a) header.push_back("c" + std::to_string(a));
    CsvWriter csv(header);
    for (uint64_t code : cells.cells) {
      auto c = dyadic::cell_center(cells, code);
      std::vector<std::string> row;
      for (double x : c) row.push_back(fmt17(x));
      csv.row(row);
    }
    files.emplace_back("cells.csv", csv.str());
  }
  ctx.emit("content", cfg, files);
  return 0;
}

inline int cmd_capacity(Ctx& ctx, const std::string& measure_path, double s) {
  auto m = load_measure(measure_path);
  RieszContext rc{s, m.dim()};
  json cfg = {{"measure", measure_path}, {"s", s}};
  CapacityFunctionalReport rep;
  if (m.cantor)
    rep = riesz_energy_comparison(m.cantor->as_cubes(), rc, 1e-8, m.id);
  else
    rep = gamma_functional_from_measure(*m.atoms, rc, 1e-9, m.id);
  json out = {{"measure_id", rep.measure_id},
              {"interpretation", "lower bound modulo c(s,d)"},
              {"norm_mu", rep.norm_mu},
              {"energy", rep.energy},
              {"gamma_functional", rep.functional},
              {"riesz_energy", rep.riesz_energy},
              {"cap_functional", rep.cap_functional},
              {"energy_ratio", rep.energy_ratio},
              {"notes", rep.notes}};
  ctx.emit("capacity", cfg, {{"report.json", out.dump(2) + "\n"}});
  return 0;
}

inline int cmd_cartan_upper(Ctx& ctx, const json& cfg) {
  int d = cfg.at("d").get<int>();
  double s = cfg.at("s").get<double>();
  GaugeFunction h = gauge_from_json(cfg.at("gauge"), d);
  RieszContext rc{s, d};
  int depth = cfg.value("depth", d == 1 ? 11 : 7);
  double eta = cfg.value("eta", 1.0);
  int trials = cfg.value("trials_per", 2);
  CsvWriter csv({"family", "N", "P", "content_upper", "denominator", "ratio", "boundary"});
  bool any_flag = false;
  for (const auto& fam : cfg.at("families")) {
    std::string family = fam.get<std::string>();
    for (int N : cfg.at("N").get<std::vector<int>>()) {
      for (int t = 0; t < trials; ++t) {
        uint64_t sd = hash_combine(ctx.seed, fnv1a(family) + uint64_t(N) * 131 + uint64_t(t));
        DiscreteMeasure nu = family == "clustered" ? clustered_atoms(d, size_t(N), sd, true)
                             : family == "cantor"
                                 ? random_cantor_build(h, rc, 1.0,
                                                       std::max(1, int(std::log2(N) / d)), eta, sd)
                                       .nu()
                                 : uniform_random_atoms(d, size_t(N), sd, true);
        double diam = dist(nu.bounding_box_corner(), nu.bounding_box_far());
        double Rt = cfg.value("P_rel", 0.35) * std::max(diam, 1e-6);
        double P = nu.total_variation() / std::pow(Rt, s);
        double denom = solve_mh(MhQuery{h, s, nu.total_variation() / P,
                                        std::max<double>(2.0, double(nu.natoms()))});
        auto rec = cartan_upper_record(nu, rc, h, P, depth, denom);
        any_flag = any_flag || rec.boundary_flag;
        csv.row({family, std::to_string(rec.N), fmt17(rec.P), fmt17(rec.content_upper),
                 fmt17(rec.denominator), fmt17(rec.ratio), rec.boundary_flag ? "1" : "0"});
      }
    }
  }
  if (any_flag) ctx.numerical_flag = true;
  ctx.emit("cartan-upper", cfg, {{"records.csv", csv.str()}});
  return 0;
}

inline int cmd_cartan_lower(Ctx& ctx, const json& cfg) {
  CartanLowerConfig c{gauge_from_json(cfg.at("gauge"), cfg.at("d").get<int>()),
                      cfg.at("s").get<double>(),
                      cfg.at("d").get<int>(),
                      cfg.value("M", 1.0),
                      cfg.at("n").get<int>(),
                      cfg.value("eta", 1.0),
                      cfg.value("trials", 4096),
                      ctx.seed,
                      cfg.value("delta_grid", 256),
                      cfg.value("content_depth", 10),
                      0};
  auto res = cartan_lower_experiment(c);
  CsvWriter csv({"delta_star", "content_lower", "threshold_scale", "m", "n", "trials"});
  csv.row({fmt17(res.delta_star), fmt17(res.content_lower), fmt17(res.threshold_scale),
           std::to_string(res.m), std::to_string(c.n), std::to_string(c.trials)});
  CsvWriter lev({"k", "j_k", "theta", "max_abs_xi", "var_xi"});
  for (size_t k = 0; k < res.level_stats.size(); ++k) {
    const auto& st = res.level_stats[k];
    lev.row({std::to_string(k), std::to_string(st.level_j), fmt17(st.theta),
             fmt17(st.max_abs_xi), fmt17(st.var_xi)});
  }
  if (res.delta_star <= 0.0) ctx.numerical_flag = true;
  ctx.emit("cartan-lower", cfg, {{"records.csv", csv.str()}, {"levels.csv", lev.str()}});
  return 0;
}

inline int cmd_large_s(Ctx& ctx, const json& cfg) {
  int d = cfg.at("d").get<int>();
  double s = cfg.at("s").get<double>();
  GaugeFunction h = gauge_from_json(cfg.at("gauge"), d);
  RieszContext rc{s, d};
  double sep = cfg.value("separation", 1e6);
  double P = cfg.value("P", 1.0);
  int depth = cfg.value("depth", 24);
  CsvWriter csv({"N", "P", "content_upper", "denominator", "ratio", "boundary"});
  bool any_flag = false;
  for (int N : cfg.at("N").get<std::vector<int>>()) {
    std::vector<double> flat;
    for (int i = 0; i < N; ++i)
      for (int a = 0; a < d; ++a) flat.push_back(a == 0 ? sep * i : 0.0);
    DiscreteMeasure nu(d, std::move(flat), std::vector<double>(size_t(N), 1.0));
    auto rec = large_s_record(nu, rc, h, P, depth);
    any_flag = any_flag || rec.boundary_flag;
    csv.row({std::to_string(N), fmt17(rec.P), fmt17(rec.content_upper), fmt17(rec.denominator),
             fmt17(rec.ratio), rec.boundary_flag ? "1" : "0"});
  }
  if (any_flag) ctx.numerical_flag = true;
  ctx.emit("large-s", cfg, {{"records.csv", csv.str()}});
  return 0;
}

}  // namespace cli_detail

inline int run_cli(std::vector<std::string> args) {
  using namespace cli_detail;
  CLI::App app{"numerical laboratory for Riesz transforms, Hausdorff contents and capacities"};
  app.require_subcommand(1);
  app.fallthrough();
  Ctx ctx;
  app.add_option("--out", ctx.out_dir, "output directory (default: results)");
  app.add_option("--seed", ctx.seed, "master random seed");
  app.add_flag("--force", ctx.force, "overwrite existing outputs");
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");

  // mh
  auto* mh = app.add_subcommand("mh", "critical content scale M_h(kappa, N)");
  std::string gauge_spec = "power:1", kappas = "1", Ns = "2";
  double s = 0.5;
  int d = 1;
  mh->add_option("--gauge", gauge_spec);
  mh->add_option("--s", s);
  mh->add_option("--d", d);
  mh->add_option("--kappa", kappas);
  mh->add_option("--N", Ns);

  // riesz
  auto* riesz = app.add_subcommand("riesz", "evaluate a Riesz transform on a grid");
  std::string measure_path, mode = "trunc", center = "0", queries_path;
  double eps = 1e-3, halfwidth = 2.0, P = 1.0;
  int points = 65, depth = 10;
  bool sup = false, dump_cells = false;
  riesz->add_option("--measure", measure_path)->required();
  riesz->add_option("--s", s);
  riesz->add_option("--mode", mode)->check(CLI::IsMember({"trunc", "modified", "maximal"}));
  riesz->add_option("--eps", eps);
  riesz->add_option("--center", center);
  riesz->add_option("--halfwidth", halfwidth);
  riesz->add_option("--points", points);

  // opnorm
  auto* opnorm = app.add_subcommand("opnorm", "L2(mu) operator norm");
  opnorm->add_option("--measure", measure_path)->required();
  opnorm->add_option("--s", s);
  opnorm->add_option("--eps", eps);
  opnorm->add_flag("--sup", sup, "take the sup over the eps breakpoint grid");

  // wolff
  auto* wolff = app.add_subcommand("wolff", "Wolff potentials and energy");
  wolff->add_option("--measure", measure_path)->required();
  wolff->add_option("--s", s);
  wolff->add_option("--queries", queries_path, "JSON array of query points");

  // content
  auto* content = app.add_subcommand("content", "content bracket of a superlevel set");
  content->add_option("--measure", measure_path)->required();
  content->add_option("--s", s);
  content->add_option("--P", P);
  content->add_option("--mode", mode)->check(CLI::IsMember({"maximal", "eps", "absolute"}));
  content->add_option("--eps", eps);
  content->add_option("--depth", depth);
  content->add_option("--gauge", gauge_spec);
  content->add_flag("--dump-cells", dump_cells);

  // capacity
  auto* capacity = app.add_subcommand("capacity", "capacity lower-bound functionals");
  capacity->add_option("--measure", measure_path)->required();
  capacity->add_option("--s", s);

  auto* upper = app.add_subcommand("cartan-upper", "content/M_h ratio experiment");
  auto* lower = app.add_subcommand("cartan-lower", "randomized lower-bound experiment");
  auto* larges = app.add_subcommand("large-s", "s >= d content bound experiment");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    int rc = 0;
    if (mh->parsed()) rc = cmd_mh(ctx, gauge_spec, s, d, kappas, Ns);
    else if (riesz->parsed())
      rc = cmd_riesz(ctx, measure_path, s, mode, eps, center, halfwidth, points);
    else if (opnorm->parsed()) rc = cmd_opnorm(ctx, measure_path, s, eps, sup);
    else if (wolff->parsed()) rc = cmd_wolff(ctx, measure_path, s, queries_path);
    else if (content->parsed())
      rc = cmd_content(ctx, measure_path, s, P, mode, eps, depth, gauge_spec, dump_cells);
    else if (capacity->parsed()) rc = cmd_capacity(ctx, measure_path, s);
    else if (upper->parsed()) rc = cmd_cartan_upper(ctx, load_json_file(config_path));
    else if (lower->parsed()) rc = cmd_cartan_lower(ctx, load_json_file(config_path));
    else if (larges->parsed()) rc = cmd_large_s(ctx, load_json_file(config_path));
    if (rc != 0) return rc;
    return ctx.numerical_flag ? 3 : 0;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
}

}  // namespace rieszlab
