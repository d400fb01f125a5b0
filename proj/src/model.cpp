#include "bioscape/model.hpp"

#include <algorithm>

namespace bioscape {

Model::Model(ModelFile file) : file_(std::move(file)) {
  for (std::size_t i = 0; i < file_.definitions.size(); ++i) {
    const auto& d = file_.definitions[i];
    entities_.emplace(d.name, i);
    entity_names_.push_back(d.name);
    for (const auto& part : d.shape.parts()) {
      max_shape_radius_ = std::max(max_shape_radius_, bounding_radius(part));
    }
  }
  std::sort(entity_names_.begin(), entity_names_.end());
  for (std::size_t i = 0; i < file_.channels.size(); ++i) {
    channels_.emplace(file_.channels[i].name, i);
    channel_names_.insert(file_.channels[i].name);
  }
  for (std::size_t i = 0; i < file_.regions.size(); ++i) regions_.emplace(file_.regions[i].name, i);
}

const EntityDefinition* Model::find_entity(std::string_view name) const {
  auto it = entities_.find(std::string(name));
  return it == entities_.end() ? nullptr : &file_.definitions[it->second];
}

const EntityDefinition& Model::entity(std::string_view name) const {
  const auto* d = find_entity(name);
  if (!d) throw std::out_of_range("undefined entity '" + std::string(name) + "'");
  return *d;
}

const ChannelDecl* Model::find_channel(std::string_view name) const {
  auto it = channels_.find(std::string(name));
  return it == channels_.end() ? nullptr : &file_.channels[it->second];
}

const Region& Model::region(std::string_view name) const {
  if (name == "all") return all_;
  auto it = regions_.find(std::string(name));
  if (it == regions_.end()) throw std::out_of_range("unknown region '" + std::string(name) + "'");
  return file_.regions[it->second].region;
}

Shape Model::sha(const ProcessTerm& p) const {
  return std::visit(
      [&](const auto& n) -> Shape {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, NilTerm>) {
          return Shape::empty();
        } else if constexpr (std::is_same_v<N, InstanceTerm>) {
          return entity(n.entity).shape;
        } else if constexpr (std::is_same_v<N, ParTerm>) {
          return compose_shapes(sha(n.left), sha(n.right));
        } else {
          return sha(n.body);
        }
      },
      p.node().value);
}

}  // namespace bioscape
