#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "gw/errors.hpp"
#include "gw/gaussian.hpp"
#include "gw/mc.hpp"
#include "gw/pangloss.hpp"
#include "gw/rdf.hpp"
#include "gw/region.hpp"
#include "gw/wchannel.hpp"

#include "emit.hpp"
#include "problem.hpp"

namespace {

using gwtool::aux_json;
using gwtool::fmt17;
using gwtool::load_problem;
using gwtool::matrix_json;
using gwtool::print_matrix;
using gwtool::ProblemError;
using gwtool::ProblemFile;
using gwtool::rate_line;
using gwtool::vector_json;
using nlohmann::json;

struct Options {
  bool json = false;
  bool bits = false;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

std::uint64_t resolved_seed(const Options& g, const ProblemFile& pf) {
  return g.seed_given ? g.seed : pf.seed;
}

void emit_json(const json& j) { std::printf("%s\n", j.dump(2).c_str()); }

json active_set_json(const std::vector<gw::Index>& idx) {
  json arr = json::array();
  for (const gw::Index i : idx) arr.push_back(i);
  return arr;
}

int cmd_rdf(const ProblemFile& pf, const Options& g, const std::string& which,
            int source) {
  if (which == "joint") {
    const gw::JointRdfSolution sol =
        gw::joint_rdf(pf.spec, pf.require_distortion("rdf --which joint"),
                      pf.joint);
    const gw::Index p1 = pf.spec.p1;
    const double ad1 = sol.q_e.topLeftCorner(p1, p1).trace();
    const double ad2 =
        sol.q_e.bottomRightCorner(pf.spec.p2, pf.spec.p2).trace();
    if (g.json) {
      emit_json(json{{"which", "joint"},
                     {"rate_nats", sol.rate},
                     {"rate_bits", sol.rate / std::log(2.0)},
                     {"iterations", sol.iterations},
                     {"kkt_residual", sol.kkt_residual},
                     {"achieved_d1", ad1},
                     {"achieved_d2", ad2},
                     {"q_e", matrix_json(sol.q_e)}});
    } else {
      std::printf("%s\n", rate_line("rate", sol.rate, g.bits).c_str());
      std::printf("iterations = %d\n", sol.iterations);
      std::printf("kkt_residual = %s\n", fmt17(sol.kkt_residual).c_str());
      std::printf("achieved_d1 = %s\n", fmt17(ad1).c_str());
      std::printf("achieved_d2 = %s\n", fmt17(ad2).c_str());
      print_matrix("q_e", sol.q_e);
    }
    return 0;
  }

  const gw::DistortionPair& dist = pf.require_distortion("rdf");
  const double delta = source == 1 ? dist.d1 : dist.d2;
  gw::WaterfillSolution sol;
  if (which == "marginal") {
    sol = gw::marginal_rdf(source == 1 ? pf.spec.q_x1 : pf.spec.q_x2, delta);
  } else {
    const gw::CondCov cond =
        gw::cond_cov_from_aux(pf.spec, pf.require_aux("rdf --which conditional"));
    sol = gw::conditional_rdf(source == 1 ? cond.q1w : cond.q2w, delta);
  }
  if (g.json) {
    emit_json(json{{"which", which},
                   {"source", source},
                   {"rate_nats", sol.rate},
                   {"rate_bits", sol.rate / std::log(2.0)},
                   {"water_level", sol.water_level},
                   {"eigenvalues", vector_json(sol.eigenvalues)},
                   {"allocations", vector_json(sol.allocations)},
                   {"active_set", active_set_json(sol.active_set)},
                   {"achieved_distortion", sol.q_e.trace()},
                   {"q_e", matrix_json(sol.q_e)}});
  } else {
    std::printf("%s\n", rate_line("rate", sol.rate, g.bits).c_str());
    std::printf("water_level = %s\n", fmt17(sol.water_level).c_str());
    std::printf("eigenvalues =");
    for (gw::Index i = 0; i < sol.eigenvalues.size(); ++i) {
      std::printf(" %s", fmt17(sol.eigenvalues[i]).c_str());
    }
    std::printf("\nallocations =");
    for (gw::Index i = 0; i < sol.allocations.size(); ++i) {
      std::printf(" %s", fmt17(sol.allocations[i]).c_str());
    }
    std::printf("\nachieved_distortion = %s\n", fmt17(sol.q_e.trace()).c_str());
    print_matrix("q_e", sol.q_e);
  }
  return 0;
}

int cmd_mi(const ProblemFile& pf, const Options& g) {
  const gw::CondCov cond =
      gw::cond_cov_from_aux(pf.spec, pf.require_aux("mi"));
  const double mi = gw::mutual_information(pf.spec, cond);
  if (g.json) {
    emit_json(json{{"mi_nats", mi}, {"mi_bits", mi / std::log(2.0)}});
  } else {
    std::printf("%s\n", rate_line("mi", mi, g.bits).c_str());
  }
  return 0;
}

json rate_point_json(const gw::RatePoint& pt) {
  return {{"r0_nats", pt.r0},
          {"r1_nats", pt.r1},
          {"r2_nats", pt.r2},
          {"achieved_d1", pt.achieved_d1},
          {"achieved_d2", pt.achieved_d2}};
}

int cmd_tg(const ProblemFile& pf, const Options& g, bool ci) {
  gw::OptOptions opts = pf.solver;
  opts.seed = resolved_seed(g, pf);
  const gw::DistortionPair& dist = pf.require_distortion("tg");
  const gw::OptResult res =
      ci ? gw::minimize_tcig(pf.spec, dist, pf.weights, opts)
         : gw::minimize_tg(pf.spec, dist, pf.weights, opts);
  if (g.json) {
    emit_json(json{{"objective", ci ? "tcig" : "tg"},
                   {"value_nats", res.value},
                   {"value_bits", res.value / std::log(2.0)},
                   {"converged", res.converged},
                   {"kkt_residual", res.kkt_residual},
                   {"iterations", res.iterations},
                   {"argmin", aux_json(res.argmin)},
                   {"rate_point", rate_point_json(res.rate_point)}});
  } else {
    std::printf("%s\n", rate_line("value", res.value, g.bits).c_str());
    std::printf("converged = %s\n", res.converged ? "true" : "false");
    std::printf("kkt_residual = %s\n", fmt17(res.kkt_residual).c_str());
    std::printf("iterations = %ld\n", res.iterations);
    std::printf("%s\n", rate_line("r0", res.rate_point.r0, g.bits).c_str());
    std::printf("%s\n", rate_line("r1", res.rate_point.r1, g.bits).c_str());
    std::printf("%s\n", rate_line("r2", res.rate_point.r2, g.bits).c_str());
    std::printf("achieved_d1 = %s\n", fmt17(res.rate_point.achieved_d1).c_str());
    std::printf("achieved_d2 = %s\n", fmt17(res.rate_point.achieved_d2).c_str());
    print_matrix("c", res.argmin.c);
  }
  if (!res.converged) {
    std::fprintf(stderr,
                 "warning: optimizer stopped with kkt_residual = %s\n",
                 fmt17(res.kkt_residual).c_str());
    return 4;
  }
  return 0;
}

int cmd_region(const ProblemFile& pf, const Options& g, int grid_density,
               const std::string& out_path) {
  gw::RegionOptions ro = pf.sweep;
  ro.seed = resolved_seed(g, pf);
  if (grid_density > 0) {
    ro.rotations = grid_density;
    ro.scales = grid_density;
  }
  const gw::DistortionPair& dist = pf.require_distortion("region");
  const gw::RegionSweep sweep = gw::enumerate_region(pf.spec, dist, ro);
  const double joint = gw::joint_rdf(pf.spec, dist, pf.joint).rate;
  const double m1 = gw::marginal_rdf(pf.spec.q_x1, dist.d1).rate;
  const double m2 = gw::marginal_rdf(pf.spec.q_x2, dist.d2).rate;

  std::ofstream file_out;
  std::ostream* out = nullptr;
  if (!out_path.empty()) {
    file_out.open(out_path, std::ios::binary);
    if (!file_out) throw ProblemError("cannot open output file '" + out_path + "'");
    out = &file_out;
  }

  if (g.json) {
    json points = json::array();
    for (const gw::RatePoint& pt : sweep.points) {
      const gw::OuterBoundSlack s = gw::check_outer_bounds(pt, joint, m1, m2);
      json row = rate_point_json(pt);
      row["n"] = pt.aux.n;
      row["s_sum"] = s.s_sum;
      row["s_1"] = s.s1;
      row["s_2"] = s.s2;
      points.push_back(std::move(row));
    }
    const json doc{{"skipped", sweep.skipped},
                   {"joint_rate_nats", joint},
                   {"marginal_rate1_nats", m1},
                   {"marginal_rate2_nats", m2},
                   {"points", std::move(points)}};
    if (out) {
      (*out) << doc.dump(2) << "\n";
    } else {
      emit_json(doc);
    }
    return 0;
  }

  std::string text = "r0,r1,r2,achieved_d1,achieved_d2,n,s_sum,s_1,s_2\n";
  for (const gw::RatePoint& pt : sweep.points) {
    const gw::OuterBoundSlack s = gw::check_outer_bounds(pt, joint, m1, m2);
    text += fmt17(pt.r0) + "," + fmt17(pt.r1) + "," + fmt17(pt.r2) + "," +
            fmt17(pt.achieved_d1) + "," + fmt17(pt.achieved_d2) + "," +
            std::to_string(pt.aux.n) + "," + fmt17(s.s_sum) + "," +
            fmt17(s.s1) + "," + fmt17(s.s2) + "\n";
  }
  if (out) {
    (*out) << text;
  } else {
    std::fputs(text.c_str(), stdout);
  }
  if (sweep.skipped > 0) {
    std::fprintf(stderr, "note: %d design nodes skipped as infeasible\n",
                 sweep.skipped);
  }
  return 0;
}

json pangloss_json(const gw::PanglossReport& rep) {
  return {{"on_plane", rep.on_plane},
          {"r0_nats", rep.r0},
          {"r1_nats", rep.r1},
          {"r2_nats", rep.r2},
          {"joint_rate_nats", rep.joint_rate},
          {"sum_rate_gap", rep.sum_rate_gap},
          {"ci_residual", rep.ci_residual},
          {"markov_residual", rep.markov_residual},
          {"achieved_d1", rep.achieved_d1},
          {"achieved_d2", rep.achieved_d2}};
}

void print_pangloss(const gw::PanglossReport& rep, const Options& g) {
  std::printf("on_plane = %s\n", rep.on_plane ? "true" : "false");
  std::printf("%s\n", rate_line("r0", rep.r0, g.bits).c_str());
  std::printf("%s\n", rate_line("r1", rep.r1, g.bits).c_str());
  std::printf("%s\n", rate_line("r2", rep.r2, g.bits).c_str());
  std::printf("%s\n", rate_line("joint_rate", rep.joint_rate, g.bits).c_str());
  std::printf("sum_rate_gap = %s\n", fmt17(rep.sum_rate_gap).c_str());
  std::printf("ci_residual = %s\n", fmt17(rep.ci_residual).c_str());
  std::printf("markov_residual = %s\n", fmt17(rep.markov_residual).c_str());
  std::printf("achieved_d1 = %s\n", fmt17(rep.achieved_d1).c_str());
  std::printf("achieved_d2 = %s\n", fmt17(rep.achieved_d2).c_str());
}

int cmd_pangloss(const ProblemFile& pf, const Options& g) {
  const gw::DistortionPair& dist = pf.require_distortion("pangloss");
  if (pf.aux) {
    const gw::PanglossReport rep = gw::pangloss_check(pf.spec, *pf.aux, dist);
    if (g.json) {
      emit_json(pangloss_json(rep));
    } else {
      print_pangloss(rep, g);
    }
    return rep.on_plane ? 0 : 5;
  }
  if (pf.spec.p1 != 1 || pf.spec.p2 != 1) {
    throw ProblemError(
        "pangloss without an 'aux' block is only defined for scalar pairs");
  }
  const gw::PanglossSearch found = gw::find_pangloss_scalar(pf.spec, dist);
  if (g.json) {
    json doc = pangloss_json(found.report);
    doc["found"] = found.found;
    doc["aux"] = aux_json(found.aux);
    emit_json(doc);
  } else {
    std::printf("found = %s\n", found.found ? "true" : "false");
    print_pangloss(found.report, g);
    print_matrix("c", found.aux.c);
  }
  return found.found ? 0 : 5;
}

int cmd_validate(const ProblemFile& pf, const Options& g, long samples) {
  if (samples < 2) throw ProblemError("--samples must be at least 2");
  const gw::ValidationReport rep = gw::validate_realization(
      pf.spec, pf.require_aux("validate"), pf.require_distortion("validate"),
      static_cast<gw::Index>(samples), resolved_seed(g, pf));
  if (g.json) {
    emit_json(json{{"count", rep.count},
                   {"analytic_mi_nats", rep.analytic_mi},
                   {"empirical_mi_nats", rep.empirical_mi},
                   {"mi_gap", rep.mi_gap},
                   {"mi_band", rep.mi_band},
                   {"analytic_d1", rep.analytic_d1},
                   {"empirical_d1", rep.empirical_d1},
                   {"d1_gap", rep.d1_gap},
                   {"d1_band", rep.d1_band},
                   {"analytic_d2", rep.analytic_d2},
                   {"empirical_d2", rep.empirical_d2},
                   {"d2_gap", rep.d2_gap},
                   {"d2_band", rep.d2_band},
                   {"max_cov_z", rep.max_cov_z},
                   {"empirical_cov_error", rep.empirical_cov_error},
                   {"mi_ok", rep.mi_ok},
                   {"d1_ok", rep.d1_ok},
                   {"d2_ok", rep.d2_ok},
                   {"cov_ok", rep.cov_ok},
                   {"pass", rep.pass}});
  } else {
    std::printf("count = %lld\n", static_cast<long long>(rep.count));
    std::printf("%s\n", rate_line("analytic_mi", rep.analytic_mi, g.bits).c_str());
    std::printf("%s\n", rate_line("empirical_mi", rep.empirical_mi, g.bits).c_str());
    std::printf("mi_gap = %s\n", fmt17(rep.mi_gap).c_str());
    std::printf("mi_band = %s\n", fmt17(rep.mi_band).c_str());
    std::printf("analytic_d1 = %s\n", fmt17(rep.analytic_d1).c_str());
    std::printf("empirical_d1 = %s\n", fmt17(rep.empirical_d1).c_str());
    std::printf("d1_gap = %s\n", fmt17(rep.d1_gap).c_str());
    std::printf("d1_band = %s\n", fmt17(rep.d1_band).c_str());
    std::printf("analytic_d2 = %s\n", fmt17(rep.analytic_d2).c_str());
    std::printf("empirical_d2 = %s\n", fmt17(rep.empirical_d2).c_str());
    std::printf("d2_gap = %s\n", fmt17(rep.d2_gap).c_str());
    std::printf("d2_band = %s\n", fmt17(rep.d2_band).c_str());
    std::printf("max_cov_z = %s\n", fmt17(rep.max_cov_z).c_str());
    std::printf("empirical_cov_error = %s\n",
                fmt17(rep.empirical_cov_error).c_str());
    std::printf("pass = %s\n", rep.pass ? "true" : "false");
  }
  return rep.pass ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate-region toolkit for correlated Gaussian vector pairs"};
  app.require_subcommand(1);

  Options g;
  app.add_flag("--json", g.json, "machine-readable JSON on stdout");
  app.add_flag("--bits", g.bits,
               "lead rate displays with bits instead of nats (display only)");
  CLI::Option* seed_opt =
      app.add_option("--seed", g.seed, "root seed (overrides the file's seed)");

  std::string file;
  std::string which = "marginal";
  int source = 1;
  bool ci = false;
  int grid_density = 0;
  std::string out_path;
  long samples = 100000;

  CLI::App* rdf = app.add_subcommand("rdf", "rate-distortion functions");
  rdf->add_option("file", file, "problem file")->required();
  rdf->add_option("--which", which, "marginal, conditional, or joint")
      ->check(CLI::IsMember({"marginal", "conditional", "joint"}));
  rdf->add_option("--source", source, "source index for marginal/conditional")
      ->check(CLI::IsMember({1, 2}));

  CLI::App* mi = app.add_subcommand("mi", "common-message information rate");
  mi->add_option("file", file, "problem file")->required();

  CLI::App* tg =
      app.add_subcommand("tg", "minimize the weighted rate functional");
  tg->add_option("file", file, "problem file")->required();
  tg->add_flag("--ci", ci, "restrict to conditionally independent auxiliaries");

  CLI::App* region =
      app.add_subcommand("region", "sweep achievable rate triples");
  region->add_option("file", file, "problem file")->required();
  region->add_option("--grid-density", grid_density,
                     "directions and scales per auxiliary dimension");
  region->add_option("--out", out_path, "write the point cloud to a file");

  CLI::App* pangloss =
      app.add_subcommand("pangloss", "minimal-sum-rate plane diagnostics");
  pangloss->add_option("file", file, "problem file")->required();

  CLI::App* validate =
      app.add_subcommand("validate", "Monte Carlo check of a realization");
  validate->add_option("file", file, "problem file")->required();
  validate->add_option("--samples", samples, "sample count");

  for (CLI::App* sub : {rdf, mi, tg, region, pangloss, validate}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    const ProblemFile pf = load_problem(file);
    if (rdf->parsed()) return cmd_rdf(pf, g, which, source);
    if (mi->parsed()) return cmd_mi(pf, g);
    if (tg->parsed()) return cmd_tg(pf, g, ci);
    if (region->parsed()) return cmd_region(pf, g, grid_density, out_path);
    if (pangloss->parsed()) return cmd_pangloss(pf, g);
    if (validate->parsed()) return cmd_validate(pf, g, samples);
  } catch (const gw::NonConvergence& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const gw::NonSymmetricInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const gw::DimensionMismatch& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const gw::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ProblemError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
