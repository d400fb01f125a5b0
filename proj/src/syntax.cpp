#include "bioscape/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace bioscape {

namespace {

const std::shared_ptr<const ProcessNode>& nil_node() {
  static const auto node = std::make_shared<const ProcessNode>(ProcessNode{NilTerm{}});
  return node;
}

void free_variables_into(const ProcessTerm& p, std::set<Name>& out) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, InstanceTerm>) {
          out.insert(n.args.begin(), n.args.end());
        } else if constexpr (std::is_same_v<N, ParTerm>) {
          free_variables_into(n.left, out);
          free_variables_into(n.right, out);
        } else if constexpr (std::is_same_v<N, RestrictTerm>) {
          std::set<Name> inner;
          free_variables_into(n.body, inner);
          inner.erase(n.channel.name);
          out.insert(inner.begin(), inner.end());
        }
      },
      p.node().value);
}

}  // namespace

bool is_valid_name(std::string_view text) {
  if (text.empty() || !std::isalpha(static_cast<unsigned char>(text.front()))) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

ProcessTerm::ProcessTerm() : node_(nil_node()) {}

ProcessTerm ProcessTerm::instance(Name entity, std::vector<Name> args) {
  return ProcessTerm(std::make_shared<const ProcessNode>(
      ProcessNode{InstanceTerm{std::move(entity), std::move(args)}}));
}

ProcessTerm ProcessTerm::par(ProcessTerm left, ProcessTerm right) {
  return ProcessTerm(std::make_shared<const ProcessNode>(
      ProcessNode{ParTerm{std::move(left), std::move(right)}}));
}

ProcessTerm ProcessTerm::restrict(ChannelDecl channel, ProcessTerm body) {
  return ProcessTerm(std::make_shared<const ProcessNode>(
      ProcessNode{RestrictTerm{std::move(channel), std::move(body)}}));
}

bool ProcessTerm::is_nil() const { return std::holds_alternative<NilTerm>(node_->value); }

bool ProcessTerm::is_instance() const {
  return std::holds_alternative<InstanceTerm>(node_->value);
}

bool operator==(const ProcessTerm& a, const ProcessTerm& b) {
  return a.node_ == b.node_ || a.node_->value == b.node_->value;
}

ModelError::ModelError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(format_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics,
                               std::string_view file_name) {
  std::ostringstream out;
  for (const auto& d : diagnostics) {
    if (!file_name.empty()) out << file_name << ':';
    out << d.line << ':' << d.column << ": error: " << d.message << '\n';
  }
  return out.str();
}

std::set<Name> free_variables(const ProcessTerm& p) {
  std::set<Name> out;
  free_variables_into(p, out);
  return out;
}

std::set<Name> free_variables(const ChoiceBody& m) {
  std::set<Name> out;
  for (const auto& branch : m.branches) {
    std::set<Name> cont = free_variables(branch.continuation);
    std::visit(
        [&](const auto& pi) {
          using P = std::decay_t<decltype(pi)>;
          if constexpr (std::is_same_v<P, OutputPrefix>) {
            out.insert(pi.channel);
            out.insert(pi.message);
          } else if constexpr (std::is_same_v<P, InputPrefix>) {
            out.insert(pi.channel);
            cont.erase(pi.binder);
          }
        },
        branch.prefix);
    out.insert(cont.begin(), cont.end());
  }
  return out;
}

void collect_names(const ProcessTerm& p, std::set<Name>& out) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, InstanceTerm>) {
          out.insert(n.args.begin(), n.args.end());
        } else if constexpr (std::is_same_v<N, ParTerm>) {
          collect_names(n.left, out);
          collect_names(n.right, out);
        } else if constexpr (std::is_same_v<N, RestrictTerm>) {
          out.insert(n.channel.name);
          collect_names(n.body, out);
        }
      },
      p.node().value);
}

Name fresh_name(const Name& base, const std::set<Name>& avoid) {
  // Strip an existing numeric suffix so repeated renaming does not grow names.
  Name stem = base;
  const auto underscore = stem.rfind('_');
  if (underscore != Name::npos && underscore > 0 && underscore + 1 < stem.size() &&
      std::all_of(stem.begin() + static_cast<std::ptrdiff_t>(underscore) + 1, stem.end(),
                  [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    stem.resize(underscore);
  }
  for (std::size_t k = 1;; ++k) {
    Name candidate = stem + "_" + std::to_string(k);
    if (!avoid.count(candidate)) return candidate;
  }
}

ProcessTerm substitute(const ProcessTerm& p, const std::map<Name, Name>& bindings) {
  if (bindings.empty()) return p;
  return std::visit(
      [&](const auto& n) -> ProcessTerm {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, NilTerm>) {
          return p;
        } else if constexpr (std::is_same_v<N, InstanceTerm>) {
          std::vector<Name> args = n.args;
          bool changed = false;
          for (auto& a : args) {
            if (auto it = bindings.find(a); it != bindings.end()) {
              a = it->second;
              changed = true;
            }
          }
          return changed ? ProcessTerm::instance(n.entity, std::move(args)) : p;
        } else if constexpr (std::is_same_v<N, ParTerm>) {
          return ProcessTerm::par(substitute(n.left, bindings), substitute(n.right, bindings));
        } else {
          const std::set<Name> body_free = free_variables(n.body);
          std::map<Name, Name> inner;
          bool captures = false;
          for (const auto& [key, value] : bindings) {
            if (key == n.channel.name || !body_free.count(key)) continue;
            inner.emplace(key, value);
            if (value == n.channel.name) captures = true;
          }
          ChannelDecl channel = n.channel;
          if (captures) {
            std::set<Name> avoid = body_free;
            collect_names(n.body, avoid);
            for (const auto& [key, value] : bindings) {
              avoid.insert(key);
              avoid.insert(value);
            }
            channel.name = fresh_name(n.channel.name, avoid);
            inner.emplace(n.channel.name, channel.name);
          }
          if (inner.empty()) return p;
          return ProcessTerm::restrict(std::move(channel), substitute(n.body, inner));
        }
      },
      p.node().value);
}

ProcessTerm substitute(const ProcessTerm& p, const std::vector<Name>& formals,
                       const std::vector<Name>& actuals) {
  if (formals.size() != actuals.size()) {
    throw std::invalid_argument("substitution arity mismatch: " + std::to_string(formals.size()) +
                                " formals, " + std::to_string(actuals.size()) + " actuals");
  }
  std::map<Name, Name> bindings;
  for (std::size_t i = 0; i < formals.size(); ++i) {
    if (formals[i] != actuals[i]) bindings[formals[i]] = actuals[i];
  }
  return substitute(p, bindings);
}

}  // namespace bioscape
