#pragma once

#include <string>

#include "json.hpp"

#include "gw/linalg.hpp"
#include "gw/wchannel.hpp"

namespace gwtool {

// All numeric text output goes through one formatter so every surface
// honors the 17-significant-digit round-trip contract.
std::string fmt17(double v);

nlohmann::json matrix_json(const gw::Matrix& m);
nlohmann::json vector_json(const gw::Vector& v);
nlohmann::json aux_json(const gw::AuxParam& aux);

// Rate line in nats and bits; `bits_first` flips which unit leads. It
// only changes presentation, never a stored value.
std::string rate_line(const std::string& name, double nats, bool bits_first);

void print_matrix(const std::string& name, const gw::Matrix& m);

}  // namespace gwtool
