#include "problem.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <utility>

#include "json.hpp"

#include "gw/errors.hpp"
#include "gw/tolerances.hpp"

namespace gwtool {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ProblemError(what); }

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!ok.count(item.key())) {
      fail("unknown field '" + item.key() + "' in " + where);
    }
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail("missing field '" + std::string(key) + "' in " + where);
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + " must be a number");
  return v.get<double>();
}

gw::Matrix as_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where + " must be an array of rows");
  const auto rows = static_cast<gw::Index>(v.size());
  gw::Index cols = -1;
  gw::Matrix m;
  for (gw::Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array()) fail(where + " rows must be arrays");
    if (cols < 0) {
      cols = static_cast<gw::Index>(row.size());
      if (cols == 0) fail(where + " rows must be non-empty");
      m.resize(rows, cols);
    } else if (static_cast<gw::Index>(row.size()) != cols) {
      fail(where + " rows have inconsistent lengths");
    }
    for (gw::Index j = 0; j < cols; ++j) {
      m(i, j) = as_number(row[static_cast<std::size_t>(j)],
                          where + " entries");
    }
  }
  return m;
}

gw::Index as_dim(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where + " must be an integer");
  const auto d = v.get<long long>();
  if (d <= 0) fail(where + " must be positive");
  return static_cast<gw::Index>(d);
}

}  // namespace

const gw::AuxParam& ProblemFile::require_aux(const char* cmd) const {
  if (!aux) fail(std::string(cmd) + " needs an 'aux' block in the problem file");
  return *aux;
}

const gw::DistortionPair& ProblemFile::require_distortion(
    const char* cmd) const {
  if (!distortion) {
    fail(std::string(cmd) + " needs a 'distortion' block in the problem file");
  }
  return *distortion;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open problem file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail("problem file is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) fail("problem file must be a JSON object");
  reject_unknown(doc, "problem file",
                 {"p1", "p2", "q_x1", "q_x2", "q_x1x2", "aux", "distortion",
                  "weights", "solver", "seed"});

  ProblemFile pf;
  pf.spec.p1 = as_dim(require(doc, "p1", "problem file"), "p1");
  pf.spec.p2 = as_dim(require(doc, "p2", "problem file"), "p2");
  pf.spec.q_x1 = as_matrix(require(doc, "q_x1", "problem file"), "q_x1");
  pf.spec.q_x2 = as_matrix(require(doc, "q_x2", "problem file"), "q_x2");
  pf.spec.q_x1x2 = as_matrix(require(doc, "q_x1x2", "problem file"), "q_x1x2");
  try {
    pf.spec.validate();
  } catch (const gw::Error& e) {
    fail("invalid source description: " + std::string(e.what()));
  }

  if (const auto it = doc.find("aux"); it != doc.end()) {
    const json& a = *it;
    if (!a.is_object()) fail("'aux' must be an object");
    reject_unknown(a, "aux", {"n", "q_w", "c"});
    gw::AuxParam aux;
    aux.c = as_matrix(require(a, "c", "aux"), "aux.c");
    if (aux.c.rows() != pf.spec.p1 + pf.spec.p2) {
      fail("aux.c must have p1 + p2 rows");
    }
    aux.n = aux.c.cols();
    if (const auto nit = a.find("n"); nit != a.end()) {
      if (as_dim(*nit, "aux.n") != aux.n) {
        fail("aux.n disagrees with the column count of aux.c");
      }
    }
    if (const auto qit = a.find("q_w"); qit != a.end()) {
      aux.q_w = as_matrix(*qit, "aux.q_w");
      if (aux.q_w.rows() != aux.n || aux.q_w.cols() != aux.n) {
        fail("aux.q_w must be n x n");
      }
      if (!gw::is_symmetric(aux.q_w, gw::tol::sym)) {
        fail("aux.q_w must be symmetric");
      }
    } else {
      aux.q_w = gw::Matrix::Identity(aux.n, aux.n);
    }
    pf.aux = std::move(aux);
  }

  if (const auto it = doc.find("distortion"); it != doc.end()) {
    const json& d = *it;
    if (!d.is_object()) fail("'distortion' must be an object");
    reject_unknown(d, "distortion", {"d1", "d2"});
    gw::DistortionPair dist;
    dist.d1 = as_number(require(d, "d1", "distortion"), "distortion.d1");
    dist.d2 = as_number(require(d, "d2", "distortion"), "distortion.d2");
    if (!(dist.d1 > 0.0) || !(dist.d2 > 0.0)) {
      fail("distortion budgets must be positive");
    }
    pf.distortion = dist;
  }

  if (const auto it = doc.find("weights"); it != doc.end()) {
    const json& w = *it;
    if (!w.is_object()) fail("'weights' must be an object");
    reject_unknown(w, "weights", {"a1", "a2"});
    pf.weights.a1 = as_number(require(w, "a1", "weights"), "weights.a1");
    pf.weights.a2 = as_number(require(w, "a2", "weights"), "weights.a2");
    try {
      pf.weights.validate();
    } catch (const gw::Error& e) {
      fail(e.what());
    }
  }

  if (const auto it = doc.find("solver"); it != doc.end()) {
    const json& s = *it;
    if (!s.is_object()) fail("'solver' must be an object");
    reject_unknown(s, "solver",
                   {"n", "multistarts", "max_pattern_iterations",
                    "max_descent_iterations", "pattern_tol", "threads",
                    "rotations", "scales", "max_iterations", "opt_tol",
                    "kkt_tol"});
    auto get_int = [&](const char* key, auto& field) {
      if (const auto f = s.find(key); f != s.end()) {
        if (!f->is_number_integer()) fail(std::string("solver.") + key + " must be an integer");
        field = static_cast<std::decay_t<decltype(field)>>(f->get<long long>());
      }
    };
    auto get_num = [&](const char* key, double& field) {
      if (const auto f = s.find(key); f != s.end()) {
        field = as_number(*f, std::string("solver.") + key);
      }
    };
    get_int("n", pf.solver.n);
    get_int("multistarts", pf.solver.multistarts);
    get_int("max_pattern_iterations", pf.solver.max_pattern_iterations);
    get_int("max_descent_iterations", pf.solver.max_descent_iterations);
    get_num("pattern_tol", pf.solver.pattern_tol);
    get_int("threads", pf.solver.threads);
    pf.sweep.threads = pf.solver.threads;
    get_int("rotations", pf.sweep.rotations);
    get_int("scales", pf.sweep.scales);
    get_int("max_iterations", pf.joint.max_iterations);
    get_num("opt_tol", pf.joint.opt_tol);
    get_num("kkt_tol", pf.joint.kkt_tol);
    if (pf.solver.multistarts < 1 || pf.sweep.rotations < 1 ||
        pf.sweep.scales < 1) {
      fail("solver budgets must be at least 1");
    }
  }

  if (const auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_integer()) fail("seed must be an integer");
    if (!it->is_number_unsigned() && it->get<long long>() < 0) {
      fail("seed must be nonnegative");
    }
    pf.seed = it->get<std::uint64_t>();
  }
  return pf;
}

}  // namespace gwtool
