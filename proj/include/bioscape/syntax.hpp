#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bioscape/geometry.hpp"

namespace bioscape {

/// Channel names and variables share one namespace.
using Name = std::string;

bool is_valid_name(std::string_view text);

/// a@r,rad. `fixed` selects deterministic durations (1/r) for reactions on it.
struct ChannelDecl {
  Name name;
  double rate = 0.0;
  double radius = 0.0;
  bool fixed = false;
  friend bool operator==(const ChannelDecl&, const ChannelDecl&) = default;
};

struct DelayPrefix {
  double rate = 0.0;
  bool fixed = false;
  friend bool operator==(const DelayPrefix&, const DelayPrefix&) = default;
};
struct OutputPrefix {
  Name channel;
  Name message;
  friend bool operator==(const OutputPrefix&, const OutputPrefix&) = default;
};
struct InputPrefix {
  Name channel;
  Name binder;
  friend bool operator==(const InputPrefix&, const InputPrefix&) = default;
};
struct MovePrefix {
  friend bool operator==(const MovePrefix&, const MovePrefix&) = default;
};

using Prefix = std::variant<DelayPrefix, OutputPrefix, InputPrefix, MovePrefix>;

struct ProcessNode;

/// Immutable process term: 0 | X(u...) | P|Q | (new a@r,rad)P.
/// Copies share structure.
class ProcessTerm {
 public:
  ProcessTerm();  // the inert process

  static ProcessTerm nil() { return ProcessTerm(); }
  static ProcessTerm instance(Name entity, std::vector<Name> args = {});
  static ProcessTerm par(ProcessTerm left, ProcessTerm right);
  static ProcessTerm restrict(ChannelDecl channel, ProcessTerm body);

  const ProcessNode& node() const { return *node_; }
  bool is_nil() const;
  bool is_instance() const;

  friend bool operator==(const ProcessTerm& a, const ProcessTerm& b);

 private:
  explicit ProcessTerm(std::shared_ptr<const ProcessNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ProcessNode> node_;
};

struct NilTerm {
  friend bool operator==(const NilTerm&, const NilTerm&) = default;
};
struct InstanceTerm {
  Name entity;
  std::vector<Name> args;
  friend bool operator==(const InstanceTerm&, const InstanceTerm&) = default;
};
struct ParTerm {
  ProcessTerm left;
  ProcessTerm right;
  friend bool operator==(const ParTerm&, const ParTerm&) = default;
};
struct RestrictTerm {
  ChannelDecl channel;
  ProcessTerm body;
  friend bool operator==(const RestrictTerm&, const RestrictTerm&) = default;
};

struct ProcessNode {
  std::variant<NilTerm, InstanceTerm, ParTerm, RestrictTerm> value;
};

struct Branch {
  Prefix prefix;
  ProcessTerm continuation;
  friend bool operator==(const Branch&, const Branch&) = default;
};

/// pi.P [+ M]; at least one branch.
struct ChoiceBody {
  std::vector<Branch> branches;
  friend bool operator==(const ChoiceBody&, const ChoiceBody&) = default;
};

/// X(x...) = M^{space, step, shape}
struct EntityDefinition {
  Name name;
  std::vector<Name> params;
  ChoiceBody body;
  Name space;
  double step = 0.0;
  Shape shape;
  friend bool operator==(const EntityDefinition&, const EntityDefinition&) = default;
};

struct RegionDecl {
  Name name;
  Region region;
  friend bool operator==(const RegionDecl&, const RegionDecl&) = default;
};

struct InitialPopulation {
  std::int64_t count = 0;
  Name entity;
  std::vector<Name> args;
  Name region;
  friend bool operator==(const InitialPopulation&, const InitialPopulation&) = default;
};

struct ModelFile {
  std::vector<ChannelDecl> channels;
  std::vector<RegionDecl> regions;
  std::vector<EntityDefinition> definitions;
  std::vector<InitialPopulation> initial;
  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

struct Diagnostic {
  int line = 0;
  int column = 0;
  std::string message;
};

/// Raised by parse_model; carries every diagnostic found.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics,
                               std::string_view file_name = "");

ModelFile parse_model(std::string_view text);
std::string pretty_print(const ModelFile& model);
std::string to_string(const ProcessTerm& p);
std::string to_string(const Prefix& p);

std::set<Name> free_variables(const ProcessTerm& p);
std::set<Name> free_variables(const ChoiceBody& m);

/// Every name occurring in p, bound or free.
void collect_names(const ProcessTerm& p, std::set<Name>& out);

/// A name built from `base` that is not in `avoid`.
Name fresh_name(const Name& base, const std::set<Name>& avoid);

/// Capture-avoiding simultaneous substitution p[values/keys].
ProcessTerm substitute(const ProcessTerm& p, const std::map<Name, Name>& bindings);
/// p[actuals/formals]; throws std::invalid_argument on arity mismatch.
ProcessTerm substitute(const ProcessTerm& p, const std::vector<Name>& formals,
                       const std::vector<Name>& actuals);

}  // namespace bioscape
