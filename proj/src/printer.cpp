#include <charconv>
#include <sstream>

#include "bioscape/syntax.hpp"

namespace bioscape {

namespace {

// Shortest round-trip form, always with a '.' or exponent so that the
// literal cannot merge with a following '.' prefix separator.
std::string number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string text(buf, end);
  if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
  return text;
}

std::string join(const std::vector<Name>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out;
}

std::string channel_text(const ChannelDecl& c) {
  std::string out = c.name + "@" + number(c.rate) + "," + number(c.radius);
  if (c.fixed) out += " fixed";
  return out;
}

std::string atom(const ProcessTerm& p);

std::string process(const ProcessTerm& p) {
  if (const auto* par = std::get_if<ParTerm>(&p.node().value)) {
    // '|' associates to the left, so only a right-nested Par needs brackets.
    return process(par->left) + " | " + atom(par->right);
  }
  return atom(p);
}

std::string atom(const ProcessTerm& p) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, NilTerm>) {
          return "0";
        } else if constexpr (std::is_same_v<N, InstanceTerm>) {
          return n.entity + "(" + join(n.args) + ")";
        } else if constexpr (std::is_same_v<N, ParTerm>) {
          return "(" + process(p) + ")";
        } else {
          return "(new " + channel_text(n.channel) + ") " + atom(n.body);
        }
      },
      p.node().value);
}

std::string region_text(const Region& region) {
  return std::visit(
      [](const auto& r) -> std::string {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, AllRegion>) {
          return "all";
        } else if constexpr (std::is_same_v<R, BoxRegion>) {
          return "box(" + number(r.min.x()) + ", " + number(r.min.y()) + ", " +
                 number(r.min.z()) + ", " + number(r.max.x()) + ", " + number(r.max.y()) + ", " +
                 number(r.max.z()) + ")";
        } else {
          std::string out = "union(";
          for (std::size_t i = 0; i < r.parts.size(); ++i) {
            if (i) out += ", ";
            out += region_text(r.parts[i]);
          }
          return out + ")";
        }
      },
      region.value);
}

std::string shape_text(const Shape& shape) {
  // Entity shapes are single primitives.
  if (shape.parts().empty()) return "sphere(0.0)";
  const auto& part = shape.parts().front();
  if (const auto* s = std::get_if<Sphere>(&part)) return "sphere(" + number(s->radius) + ")";
  const Vec3& h = std::get<Box>(part).half_extents;
  return "box(" + number(h.x()) + ", " + number(h.y()) + ", " + number(h.z()) + ")";
}

}  // namespace

std::string to_string(const ProcessTerm& p) { return process(p); }

std::string to_string(const Prefix& prefix) {
  return std::visit(
      [](const auto& pi) -> std::string {
        using P = std::decay_t<decltype(pi)>;
        if constexpr (std::is_same_v<P, DelayPrefix>) {
          return "delay@" + number(pi.rate) + (pi.fixed ? " fixed" : "");
        } else if constexpr (std::is_same_v<P, OutputPrefix>) {
          return "!" + pi.channel + "(" + pi.message + ")";
        } else if constexpr (std::is_same_v<P, InputPrefix>) {
          return "?" + pi.channel + "(" + pi.binder + ")";
        } else {
          return "mov";
        }
      },
      prefix);
}

std::string pretty_print(const ModelFile& model) {
  std::ostringstream out;
  out << "# channels\n";
  for (const auto& c : model.channels) out << "channel " << channel_text(c) << '\n';
  out << "\n# regions\n";
  for (const auto& r : model.regions) out << "region " << r.name << ' ' << region_text(r.region) << '\n';
  out << "\n# entities\n";
  for (const auto& d : model.definitions) {
    out << "entity " << d.name << '(' << join(d.params) << ") =";
    for (std::size_t i = 0; i < d.body.branches.size(); ++i) {
      const auto& b = d.body.branches[i];
      out << (i ? "\n    + " : "\n    ") << to_string(b.prefix) << '.' << atom(b.continuation);
    }
    out << "\n    space " << d.space << " step " << number(d.step) << " shape "
        << shape_text(d.shape) << '\n';
  }
  out << "\n# initial population\n";
  for (const auto& init : model.initial) {
    out << "init " << init.count << ' ' << init.entity << '(' << join(init.args) << ") in "
        << init.region << '\n';
  }
  return out.str();
}

}  // namespace bioscape
