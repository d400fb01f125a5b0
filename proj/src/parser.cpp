#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "bioscape/syntax.hpp"

namespace bioscape {

namespace {

enum class TokenKind { Identifier, Number, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  int line = 1;
  int column = 1;
};

const std::set<std::string, std::less<>> kKeywords = {
    "channel", "region", "entity", "init", "space", "step", "shape", "new",
    "delay",   "mov",    "fixed",  "in",   "all",   "box",  "sphere", "union"};

bool is_statement_keyword(const Token& t) {
  return t.kind == TokenKind::Identifier &&
         (t.text == "channel" || t.text == "region" || t.text == "entity" || t.text == "init");
}

struct SyntaxError {
  Diagnostic diagnostic;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run(std::vector<Diagnostic>& diagnostics) {
    std::vector<Token> tokens;
    while (true) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= text_.size()) {
        tokens.push_back(t);
        return tokens;
      }
      const char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c))) {
        t.kind = TokenKind::Identifier;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '_')) {
          t.text += advance();
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos_ + 1 < text_.size() &&
                  std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        t.kind = TokenKind::Number;
        if (c == '-') t.text += advance();
        read_digits(t.text);
        if (peek(0) == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
          t.text += advance();
          read_digits(t.text);
        }
        if ((peek(0) == 'e' || peek(0) == 'E') &&
            (std::isdigit(static_cast<unsigned char>(peek(1))) ||
             ((peek(1) == '+' || peek(1) == '-') &&
              std::isdigit(static_cast<unsigned char>(peek(2)))))) {
          t.text += advance();
          if (peek(0) == '+' || peek(0) == '-') t.text += advance();
          read_digits(t.text);
        }
      } else if (std::string_view("@,().+|!?=").find(c) != std::string_view::npos) {
        t.kind = TokenKind::Punct;
        t.text = advance();
      } else {
        diagnostics.push_back({line_, column_, std::string("unexpected character '") + c + "'"});
        advance();
        continue;
      }
      tokens.push_back(std::move(t));
    }
  }

 private:
  char peek(std::size_t k) const { return pos_ + k < text_.size() ? text_[pos_ + k] : '\0'; }

  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void read_digits(std::string& out) {
    while (std::isdigit(static_cast<unsigned char>(peek(0)))) out += advance();
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

// A branch before desugaring: pi1.pi2...pik.P
struct SugaredBranch {
  std::vector<Prefix> chain;
  ProcessTerm tail;
};

struct ParsedEntity {
  EntityDefinition definition;  // body filled in by desugaring
  std::vector<SugaredBranch> branches;
};

struct NameUse {
  Name name;
  Token at;
  std::vector<Name> scope;
};

struct InstanceUse {
  Name entity;
  std::size_t arity;
  Token at;
};

struct RegionUse {
  Name region;
  Token at;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<Diagnostic>& diagnostics)
      : tokens_(std::move(tokens)), diagnostics_(diagnostics) {}

  ModelFile run() {
    while (peek().kind != TokenKind::End) {
      try {
        statement();
      } catch (const SyntaxError& e) {
        diagnostics_.push_back(e.diagnostic);
        recover();
      }
    }
    check_references();
    if (!diagnostics_.empty()) return {};
    return assemble();
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return tokens_[std::min(pos_ + k, tokens_.size() - 1)];
  }

  Token next() {
    Token t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const Token& at, const std::string& message) const {
    throw SyntaxError{{at.line, at.column, message}};
  }

  static std::string describe(const Token& t) {
    if (t.kind == TokenKind::End) return "end of input";
    return "'" + t.text + "'";
  }

  bool at_punct(char c) const {
    return peek().kind == TokenKind::Punct && peek().text.size() == 1 && peek().text[0] == c;
  }

  bool at_keyword(std::string_view kw) const {
    return peek().kind == TokenKind::Identifier && peek().text == kw;
  }

  void expect_punct(char c) {
    if (!at_punct(c)) fail(peek(), std::string("expected '") + c + "' but found " + describe(peek()));
    next();
  }

  void expect_keyword(std::string_view kw) {
    if (!at_keyword(kw)) {
      fail(peek(), "expected '" + std::string(kw) + "' but found " + describe(peek()));
    }
    next();
  }

  Token name(const char* what) {
    const Token& t = peek();
    if (t.kind != TokenKind::Identifier) fail(t, std::string("expected ") + what + " but found " + describe(t));
    if (kKeywords.count(t.text)) fail(t, "keyword '" + t.text + "' cannot be used as " + what);
    return next();
  }

  double number(const char* what, bool nonnegative) {
    const Token t = peek();
    if (t.kind != TokenKind::Number) fail(t, std::string("expected ") + what + " but found " + describe(t));
    next();
    double value = 0.0;
    const auto [end, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (ec != std::errc() || end != t.text.data() + t.text.size()) {
      fail(t, "malformed number '" + t.text + "'");
    }
    if (nonnegative && value < 0.0) fail(t, std::string(what) + " must be non-negative");
    return value;
  }

  void recover() {
    next();
    while (peek().kind != TokenKind::End && !is_statement_keyword(peek())) next();
  }

  void statement() {
    const Token& t = peek();
    if (at_keyword("channel")) {
      next();
      channel_statement();
    } else if (at_keyword("region")) {
      next();
      region_statement();
    } else if (at_keyword("entity")) {
      next();
      entity_statement();
    } else if (at_keyword("init")) {
      next();
      init_statement();
    } else {
      fail(t, "expected 'channel', 'region', 'entity' or 'init' but found " + describe(t));
    }
  }

  ChannelDecl channel_spec(Token& at) {
    at = name("channel name");
    ChannelDecl decl;
    decl.name = at.text;
    expect_punct('@');
    decl.rate = number("rate", true);
    expect_punct(',');
    decl.radius = number("radius", true);
    if (at_keyword("fixed")) {
      next();
      decl.fixed = true;
    }
    return decl;
  }

  void channel_statement() {
    Token at;
    ChannelDecl decl = channel_spec(at);
    if (channel_index_.count(decl.name)) {
      diagnostics_.push_back({at.line, at.column, "duplicate channel '" + decl.name + "'"});
      return;
    }
    channel_index_[decl.name] = channels_.size();
    channels_.push_back(std::move(decl));
  }

  Region region_expr() {
    if (at_keyword("all")) {
      next();
      return Region::all();
    }
    if (at_keyword("box")) {
      next();
      expect_punct('(');
      double v[6];
      for (int i = 0; i < 6; ++i) {
        if (i) expect_punct(',');
        v[i] = number("coordinate", false);
      }
      const Token close = peek();
      expect_punct(')');
      if (v[0] > v[3] || v[1] > v[4] || v[2] > v[5]) {
        fail(close, "box region needs min <= max on every axis");
      }
      return Region::box(Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]));
    }
    if (at_keyword("union")) {
      next();
      expect_punct('(');
      UnionRegion u;
      u.parts.push_back(region_expr());
      while (at_punct(',')) {
        next();
        u.parts.push_back(region_expr());
      }
      expect_punct(')');
      return Region{std::move(u)};
    }
    const Token ref = name("region");
    auto it = region_index_.find(ref.text);
    if (it == region_index_.end()) fail(ref, "unknown region '" + ref.text + "'");
    return regions_[it->second].region;
  }

  void region_statement() {
    const Token at = name("region name");
    Region region = region_expr();
    if (region_index_.count(at.text)) {
      diagnostics_.push_back({at.line, at.column, "duplicate region '" + at.text + "'"});
      return;
    }
    region_index_[at.text] = regions_.size();
    regions_.push_back({at.text, std::move(region)});
  }

  std::vector<Name> name_list(std::vector<Token>* positions) {
    std::vector<Name> names;
    expect_punct('(');
    if (!at_punct(')')) {
      while (true) {
        const Token t = name("name");
        names.push_back(t.text);
        if (positions) positions->push_back(t);
        if (!at_punct(',')) break;
        next();
      }
    }
    expect_punct(')');
    return names;
  }

  void use_name(const Token& t, const std::vector<Name>& scope) {
    name_uses_.push_back({t.text, t, scope});
  }

  bool at_prefix() const {
    return at_keyword("delay") || at_keyword("mov") || at_punct('!') || at_punct('?');
  }

  Prefix prefix(std::vector<Name>& scope) {
    if (at_keyword("mov")) {
      next();
      return MovePrefix{};
    }
    if (at_keyword("delay")) {
      next();
      expect_punct('@');
      DelayPrefix d;
      d.rate = number("delay rate", true);
      if (at_keyword("fixed")) {
        next();
        d.fixed = true;
      }
      return d;
    }
    const bool output = at_punct('!');
    if (!output && !at_punct('?')) {
      fail(peek(), "expected a prefix (delay, mov, !, ?) but found " + describe(peek()));
    }
    next();
    const Token channel = name("channel");
    use_name(channel, scope);
    expect_punct('(');
    const Token arg = name(output ? "message name" : "binder");
    expect_punct(')');
    if (output) {
      use_name(arg, scope);
      return OutputPrefix{channel.text, arg.text};
    }
    scope.push_back(arg.text);
    return InputPrefix{channel.text, arg.text};
  }

  ProcessTerm process(std::vector<Name>& scope) {
    ProcessTerm left = atom(scope);
    while (at_punct('|')) {
      next();
      left = ProcessTerm::par(std::move(left), atom(scope));
    }
    return left;
  }

  ProcessTerm atom(std::vector<Name>& scope) {
    const Token t = peek();
    if (t.kind == TokenKind::Number) {
      if (t.text != "0") fail(t, "expected a process but found " + describe(t));
      next();
      return ProcessTerm::nil();
    }
    if (at_punct('(')) {
      next();
      if (at_keyword("new")) {
        next();
        Token at;
        ChannelDecl decl = channel_spec(at);
        expect_punct(')');
        scope.push_back(decl.name);
        ProcessTerm body = atom(scope);
        scope.pop_back();
        return ProcessTerm::restrict(std::move(decl), std::move(body));
      }
      ProcessTerm inner = process(scope);
      expect_punct(')');
      return inner;
    }
    const Token entity = name("entity name or '0'");
    std::vector<Token> positions;
    std::vector<Name> args = name_list(&positions);
    for (const auto& p : positions) use_name(p, scope);
    instance_uses_.push_back({entity.text, args.size(), entity});
    return ProcessTerm::instance(entity.text, std::move(args));
  }

  SugaredBranch branch(const std::vector<Name>& params) {
    std::vector<Name> scope = params;
    SugaredBranch b;
    b.chain.push_back(prefix(scope));
    while (at_punct('.')) {
      next();
      if (at_prefix()) {
        b.chain.push_back(prefix(scope));
      } else {
        b.tail = process(scope);
        break;
      }
    }
    return b;
  }

  Shape shape() {
    if (at_keyword("sphere")) {
      next();
      expect_punct('(');
      const double r = number("radius", true);
      expect_punct(')');
      return Shape::sphere(r);
    }
    if (at_keyword("box")) {
      next();
      expect_punct('(');
      const double x = number("half extent", true);
      expect_punct(',');
      const double y = number("half extent", true);
      expect_punct(',');
      const double z = number("half extent", true);
      expect_punct(')');
      return Shape::box(x, y, z);
    }
    fail(peek(), "expected 'sphere' or 'box' but found " + describe(peek()));
  }

  Token region_ref() {
    if (at_keyword("all")) return next();
    const Token t = name("region");
    region_uses_.push_back({t.text, t});
    return t;
  }

  void entity_statement() {
    const Token at = name("entity name");
    ParsedEntity e;
    e.definition.name = at.text;
    std::vector<Token> param_tokens;
    e.definition.params = name_list(&param_tokens);
    for (std::size_t i = 0; i < param_tokens.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (param_tokens[i].text == param_tokens[j].text) {
          fail(param_tokens[i], "duplicate parameter '" + param_tokens[i].text + "'");
        }
      }
    }
    expect_punct('=');
    e.branches.push_back(branch(e.definition.params));
    while (at_punct('+')) {
      next();
      e.branches.push_back(branch(e.definition.params));
    }
    expect_keyword("space");
    e.definition.space = region_ref().text;
    expect_keyword("step");
    e.definition.step = number("step", true);
    expect_keyword("shape");
    e.definition.shape = shape();
    if (entity_index_.count(at.text)) {
      diagnostics_.push_back({at.line, at.column, "duplicate entity '" + at.text + "'"});
      return;
    }
    entity_index_[at.text] = entities_.size();
    entities_.push_back(std::move(e));
  }

  void init_statement() {
    const Token count_token = peek();
    const double count = number("instance count", true);
    if (count < 1.0 || count != static_cast<double>(static_cast<std::int64_t>(count))) {
      fail(count_token, "instance count must be a positive integer");
    }
    const Token entity = name("entity name");
    std::vector<Token> positions;
    InitialPopulation init;
    init.count = static_cast<std::int64_t>(count);
    init.entity = entity.text;
    init.args = name_list(&positions);
    for (const auto& p : positions) use_name(p, {});
    instance_uses_.push_back({entity.text, init.args.size(), entity});
    expect_keyword("in");
    init.region = region_ref().text;
    initial_.push_back(std::move(init));
  }

  void check_references() {
    for (const auto& use : name_uses_) {
      if (std::find(use.scope.begin(), use.scope.end(), use.name) != use.scope.end()) continue;
      if (channel_index_.count(use.name)) continue;
      diagnostics_.push_back({use.at.line, use.at.column, "unbound name '" + use.name + "'"});
    }
    for (const auto& use : instance_uses_) {
      auto it = entity_index_.find(use.entity);
      if (it == entity_index_.end()) {
        diagnostics_.push_back(
            {use.at.line, use.at.column, "undefined entity '" + use.entity + "'"});
        continue;
      }
      const std::size_t expected = entities_[it->second].definition.params.size();
      if (expected != use.arity) {
        diagnostics_.push_back({use.at.line, use.at.column,
                                "entity '" + use.entity + "' expects " + std::to_string(expected) +
                                    " argument(s), got " + std::to_string(use.arity)});
      }
    }
    for (const auto& use : region_uses_) {
      if (!region_index_.count(use.region)) {
        diagnostics_.push_back({use.at.line, use.at.column, "unknown region '" + use.region + "'"});
      }
    }
    std::sort(diagnostics_.begin(), diagnostics_.end(), [](const Diagnostic& a, const Diagnostic& b) {
      return std::tie(a.line, a.column) < std::tie(b.line, b.column);
    });
  }

  // pi1.pi2.P becomes pi1.Y(params') with Y = pi2.P, where params' adds the
  // binder of pi1 (if any) to the parameters in scope.
  ModelFile assemble() {
    std::set<Name> taken;
    for (const auto& e : entities_) taken.insert(e.definition.name);
    ModelFile model;
    model.channels = channels_;
    model.regions = regions_;
    for (auto& e : entities_) {
      std::vector<EntityDefinition> auxiliaries;
      for (auto& b : e.branches) {
        e.definition.body.branches.push_back(
            desugar(e.definition, e.definition.params, b.chain, 0, b.tail, taken, auxiliaries));
      }
      model.definitions.push_back(std::move(e.definition));
      for (auto& aux : auxiliaries) model.definitions.push_back(std::move(aux));
    }
    model.initial = initial_;
    return model;
  }

  Branch desugar(const EntityDefinition& owner, const std::vector<Name>& params,
                 const std::vector<Prefix>& chain, std::size_t i, const ProcessTerm& tail,
                 std::set<Name>& taken, std::vector<EntityDefinition>& auxiliaries) {
    if (i + 1 == chain.size()) return Branch{chain[i], tail};
    std::vector<Name> inner_params = params;
    if (const auto* in = std::get_if<InputPrefix>(&chain[i])) {
      if (std::find(inner_params.begin(), inner_params.end(), in->binder) == inner_params.end()) {
        inner_params.push_back(in->binder);
      }
    }
    EntityDefinition aux;
    aux.name = fresh_name(owner.name, taken);
    taken.insert(aux.name);
    aux.params = inner_params;
    aux.space = owner.space;
    aux.step = owner.step;
    aux.shape = owner.shape;
    const std::size_t slot = auxiliaries.size();
    auxiliaries.push_back(aux);
    Branch inner = desugar(owner, inner_params, chain, i + 1, tail, taken, auxiliaries);
    auxiliaries[slot].body.branches.push_back(std::move(inner));
    return Branch{chain[i], ProcessTerm::instance(aux.name, inner_params)};
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic>& diagnostics_;

  std::vector<ChannelDecl> channels_;
  std::unordered_map<Name, std::size_t> channel_index_;
  std::vector<RegionDecl> regions_;
  std::unordered_map<Name, std::size_t> region_index_;
  std::vector<ParsedEntity> entities_;
  std::unordered_map<Name, std::size_t> entity_index_;
  std::vector<InitialPopulation> initial_;

  std::vector<NameUse> name_uses_;
  std::vector<InstanceUse> instance_uses_;
  std::vector<RegionUse> region_uses_;
};

}  // namespace

ModelFile parse_model(std::string_view text) {
  std::vector<Diagnostic> diagnostics;
  std::vector<Token> tokens = Lexer(text).run(diagnostics);
  ModelFile model = Parser(std::move(tokens), diagnostics).run();
  if (!diagnostics.empty()) throw ModelError(std::move(diagnostics));
  return model;
}

}  // namespace bioscape
