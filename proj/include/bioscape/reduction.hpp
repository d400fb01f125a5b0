#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bioscape/configuration.hpp"
#include "bioscape/model.hpp"
#include "bioscape/random.hpp"

namespace bioscape {

enum class RedexKind { Move, Delay, Com };

inline constexpr std::size_t kNoMember = std::numeric_limits<std::size_t>::max();

/// Refers to untimed located members of a configuration by index.
/// For Com, `first` is the sender and `second` the receiver.
struct RedexHandle {
  RedexKind kind = RedexKind::Delay;
  std::size_t first = kNoMember;
  std::size_t second = kNoMember;
  std::size_t branch = 0;          // branch of first's definition
  std::size_t partner_branch = 0;  // branch of second's definition (Com)
  Name channel;                    // resolved channel name (Com)

  std::vector<std::size_t> members() const {
    if (second == kNoMember) return {first};
    return {first, second};
  }
  friend bool operator==(const RedexHandle&, const RedexHandle&) = default;
};

/// Raised when a communication prefix names a channel that is neither
/// restricted in the configuration nor declared globally.
class UndeclaredChannel : public std::runtime_error {
 public:
  explicit UndeclaredChannel(const Name& channel)
      : std::runtime_error("channel '" + channel + "' is not declared") {}
};

struct StochasticCandidate {
  RedexHandle handle;
  double rate = 0.0;
  bool fixed = false;  // duration is exactly 1/rate
  SpatialFragment reduct;
};

struct MoveCandidate {
  RedexHandle handle;
  Placement new_placement;
  SpatialFragment reduct;
};

/// Channel declaration visible to f: its restrictions first, then E.
const ChannelDecl* lookup_channel(const ExtendedConfiguration& f, const Model& model,
                                  const Name& name);

/// One handle per untimed instance whose definition has a mov branch.
std::vector<RedexHandle> enumerate_move_redexes(const ExtendedConfiguration& f,
                                                const Model& model);

/// One Delay handle per delay branch of each untimed instance, and one Com
/// handle per (sender, receiver, branch pair) on the same channel with
/// distinct members within the channel radius. Ordered by first member,
/// then branch, then partner.
std::vector<RedexHandle> enumerate_stoc_redexes(const ExtendedConfiguration& f,
                                                const Model& model);

/// Samples a translation for the member (choosing uniformly among its mov
/// branches if there are several). Returns nullopt when the sampled
/// position leaves the entity's movement space. No overlap check.
std::optional<MoveCandidate> apply_move(const RedexHandle& h, const ExtendedConfiguration& f,
                                        const Model& model, CounterRng& rng);

/// Builds the reduct of a stochastic redex at the reactants' placements.
/// Fresh restriction names avoid f's restrictions and the global channels.
/// No overlap check.
StochasticCandidate apply_stoc(const RedexHandle& h, const ExtendedConfiguration& f,
                               const Model& model);

}  // namespace bioscape
