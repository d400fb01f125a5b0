#pragma once

#include <string>

#include "bioscape/configuration.hpp"
#include "bioscape/model.hpp"
#include "bioscape/syntax.hpp"

namespace bioscape::testing {

inline Model model_from(const std::string& text) { return Model(parse_model(text)); }

inline LocatedProcess located(const Model& m, const std::string& entity, Vec3 at,
                              std::vector<Name> args = {}) {
  LocatedProcess lp;
  lp.process = ProcessTerm::instance(entity, std::move(args));
  lp.shape = m.entity(entity).shape;
  lp.placement.origin = at;
  return lp;
}

inline ExtendedConfiguration config_of(std::vector<LocatedProcess> members) {
  ExtendedConfiguration f;
  for (auto& lp : members) f.members.emplace_back(std::move(lp));
  return f;
}

}  // namespace bioscape::testing
