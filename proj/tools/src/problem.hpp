#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "gw/gaussian.hpp"
#include "gw/rdf.hpp"
#include "gw/region.hpp"
#include "gw/wchannel.hpp"

namespace gwtool {

// Any defect in the input document itself: unreadable file, malformed
// JSON, unknown fields, shape or invariant violations. Maps to exit 2.
class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemFile {
  gw::SourceSpec spec;
  std::optional<gw::AuxParam> aux;
  std::optional<gw::DistortionPair> distortion;
  gw::WeightPair weights{};
  gw::OptOptions solver{};
  gw::RegionOptions sweep{};
  gw::JointRdfOptions joint{};
  std::uint64_t seed = 0;

  const gw::AuxParam& require_aux(const char* cmd) const;
  const gw::DistortionPair& require_distortion(const char* cmd) const;
};

ProblemFile load_problem(const std::string& path);

}  // namespace gwtool
