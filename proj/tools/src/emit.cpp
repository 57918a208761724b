#include "emit.hpp"

#include <cmath>
#include <cstdio>

namespace gwtool {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json matrix_json(const gw::Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (gw::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (gw::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_json(const gw::Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (gw::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

nlohmann::json aux_json(const gw::AuxParam& aux) {
  return {{"n", aux.n}, {"q_w", matrix_json(aux.q_w)}, {"c", matrix_json(aux.c)}};
}

std::string rate_line(const std::string& name, double nats, bool bits_first) {
  const double bits = nats / std::log(2.0);
  if (bits_first) {
    return name + " = " + fmt17(bits) + " bits (" + fmt17(nats) + " nats)";
  }
  return name + " = " + fmt17(nats) + " nats (" + fmt17(bits) + " bits)";
}

void print_matrix(const std::string& name, const gw::Matrix& m) {
  std::printf("%s = [\n", name.c_str());
  for (gw::Index i = 0; i < m.rows(); ++i) {
    std::printf("  ");
    for (gw::Index j = 0; j < m.cols(); ++j) {
      std::printf("%s%s", fmt17(m(i, j)).c_str(),
                  j + 1 < m.cols() ? ", " : "");
    }
    std::printf("\n");
  }
  std::printf("]\n");
}

}  // namespace gwtool
