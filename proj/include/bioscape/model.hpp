#pragma once

#include <string_view>
#include <unordered_map>

#include "bioscape/syntax.hpp"

namespace bioscape {

/// Indexed, read-only view of a parsed model: the definition table D, the
/// channel environment E and the region table. Immutable after
/// construction and safe to share between threads.
class Model {
 public:
  explicit Model(ModelFile file);

  const ModelFile& file() const { return file_; }

  const EntityDefinition* find_entity(std::string_view name) const;
  /// Throws std::out_of_range for undefined entities.
  const EntityDefinition& entity(std::string_view name) const;
  const ChannelDecl* find_channel(std::string_view name) const;
  /// `all` is always defined.
  const Region& region(std::string_view name) const;

  /// Shape of a process: Nil is empty, an instance has its entity's shape,
  /// restriction is transparent and parallel composition juxtaposes.
  Shape sha(const ProcessTerm& p) const;

  /// Entity names in alphabetical order.
  const std::vector<Name>& entity_names() const { return entity_names_; }
  /// Global channel names; runtime restrictions are kept disjoint from these.
  const std::set<Name>& channel_names() const { return channel_names_; }
  /// Largest bounding radius of any entity shape.
  double max_shape_radius() const { return max_shape_radius_; }

 private:
  ModelFile file_;
  std::unordered_map<std::string, std::size_t> entities_;
  std::unordered_map<std::string, std::size_t> channels_;
  std::unordered_map<std::string, std::size_t> regions_;
  std::vector<Name> entity_names_;
  std::set<Name> channel_names_;
  Region all_ = Region::all();
  double max_shape_radius_ = 0.0;
};

}  // namespace bioscape
