#include "scnoise/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "scnoise/errors.hpp"

namespace scnoise {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

struct Token {
  std::string text;
  int line = 0;
  int col = 0;
};

[[noreturn]] void syntax_error(int line, int col, const std::string& msg) {
  fail(Errc::SyntaxError, "line " + std::to_string(line) + ", col " + std::to_string(col) +
                              ": " + msg);
}

std::vector<std::vector<Token>> tokenize(std::string_view text) {
  std::vector<std::vector<Token>> lines;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start)
        toks.push_back({std::string(line.substr(start, i - start)), lineno,
                        static_cast<int>(start) + 1});
    }
    if (!toks.empty()) lines.push_back(std::move(toks));
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return lines;
}

double suffix_multiplier(const std::string& sfx, const Token& tok) {
  if (sfx.empty()) return 1.0;
  if (sfx == "meg") return 1e6;
  if (sfx.size() == 1) {
    switch (sfx[0]) {
      case 'a': return 1e-18;
      case 'f': return 1e-15;
      case 'p': return 1e-12;
      case 'n': return 1e-9;
      case 'u': return 1e-6;
      case 'm': return 1e-3;
      case 'k': return 1e3;
      case 'g': return 1e9;
      case 't': return 1e12;
    }
  }
  syntax_error(tok.line, tok.col, "unknown SI suffix '" + sfx + "'");
}

double parse_value_token(const Token& tok) {
  const char* begin = tok.text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) syntax_error(tok.line, tok.col, "expected a number, got '" + tok.text + "'");
  return v * suffix_multiplier(lower(end), tok);
}

int parse_int_token(const Token& tok) {
  const char* begin = tok.text.c_str();
  char* end = nullptr;
  long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0')
    syntax_error(tok.line, tok.col, "expected an integer, got '" + tok.text + "'");
  return static_cast<int>(v);
}

const Token& need(const std::vector<Token>& toks, std::size_t i, const char* what) {
  if (i >= toks.size()) {
    const Token& last = toks.back();
    syntax_error(last.line, last.col + static_cast<int>(last.text.size()),
                 std::string("missing ") + what);
  }
  return toks[i];
}

void expect_count(const std::vector<Token>& toks, std::size_t n) {
  if (toks.size() > n)
    syntax_error(toks[n].line, toks[n].col, "unexpected token '" + toks[n].text + "'");
}

// splits "key=value"; empty key if no '='
std::pair<std::string, std::string> keyval(const Token& tok) {
  auto eq = tok.text.find('=');
  if (eq == std::string::npos) return {"", tok.text};
  return {lower(tok.text.substr(0, eq)), tok.text.substr(eq + 1)};
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double parse_si_value(std::string_view token) {
  Token t{std::string(token), 0, 0};
  return parse_value_token(t);
}

Circuit parse_netlist(std::string_view text) {
  Circuit c;
  bool have_ground = false;
  for (const auto& toks : tokenize(text)) {
    const std::string kw = lower(toks[0].text);
    if (kw == ".phases") {
      c.n_phases = parse_int_token(need(toks, 1, "phase count"));
      expect_count(toks, 2);
    } else if (kw == ".ground") {
      c.ground = need(toks, 1, "ground node").text;
      have_ground = true;
      expect_count(toks, 2);
    } else if (kw == ".port") {
      const std::string name = need(toks, 1, "port name").text;
      Port p{need(toks, 2, "port node k").text, need(toks, 3, "port node l").text};
      expect_count(toks, 4);
      if (!c.ports.emplace(name, p).second)
        fail(Errc::DuplicateName, "duplicate port '" + name + "'");
    } else if (kw == "c" || kw == "r") {
      const std::string name = need(toks, 1, "element name").text;
      const std::string n1 = need(toks, 2, "node").text;
      const std::string n2 = need(toks, 3, "node").text;
      double v = parse_value_token(need(toks, 4, "value"));
      expect_count(toks, 5);
      if (kw == "c")
        c.elements.push_back(Capacitor{name, n1, n2, v});
      else
        c.elements.push_back(Resistor{name, n1, n2, v});
    } else if (kw == "sw") {
      Switch sw;
      sw.name = need(toks, 1, "switch name").text;
      sw.n1 = need(toks, 2, "node").text;
      sw.n2 = need(toks, 3, "node").text;
      bool have_ron = false, have_closed = false;
      for (std::size_t i = 4; i < toks.size(); ++i) {
        auto [key, val] = keyval(toks[i]);
        if (key == "ron") {
          sw.ron = parse_value_token({val, toks[i].line, toks[i].col});
          have_ron = true;
        } else if (key == "closed") {
          std::stringstream ss(val);
          std::string part;
          while (std::getline(ss, part, ','))
            sw.closed_in.insert(parse_int_token({part, toks[i].line, toks[i].col}));
          have_closed = true;
        } else {
          syntax_error(toks[i].line, toks[i].col, "expected ron=/closed=, got '" + toks[i].text + "'");
        }
      }
      if (!have_ron) syntax_error(toks[3].line, toks[3].col, "switch requires ron=");
      if (!have_closed || sw.closed_in.empty())
        syntax_error(toks[3].line, toks[3].col, "switch requires closed=<p1>[,<p2>...]");
      c.elements.push_back(std::move(sw));
    } else if (kw == "ota") {
      Ota ota;
      ota.name = need(toks, 1, "ota name").text;
      bool have[5] = {};
      for (std::size_t i = 2; i < toks.size(); ++i) {
        auto [key, val] = keyval(toks[i]);
        Token vt{val, toks[i].line, toks[i].col};
        if (key == "inp") { ota.inp = val; have[0] = true; }
        else if (key == "inn") { ota.inn = val; have[1] = true; }
        else if (key == "out") { ota.out = val; have[2] = true; }
        else if (key == "gm") { ota.gm = parse_value_token(vt); have[3] = true; }
        else if (key == "gamma") { ota.gamma = parse_value_token(vt); have[4] = true; }
        else syntax_error(toks[i].line, toks[i].col, "unexpected '" + toks[i].text + "'");
      }
      static const char* kKeys[] = {"inp", "inn", "out", "gm", "gamma"};
      for (int i = 0; i < 5; ++i)
        if (!have[i])
          syntax_error(toks[1].line, toks[1].col, std::string("ota requires ") + kKeys[i] + "=");
      c.elements.push_back(std::move(ota));
    } else {
      syntax_error(toks[0].line, toks[0].col, "unknown directive '" + toks[0].text + "'");
    }
  }
  if (!have_ground) fail(Errc::MissingGround, "netlist has no .ground directive");
  c.finalize();
  return c;
}

void Circuit::finalize() {
  if (n_phases < 1) fail(Errc::NonPositiveValue, "phase count must be >= 1");
  if (ground.empty()) fail(Errc::MissingGround, "ground node is not set");

  nodes.clear();
  std::set<std::string> names_c, names_r, names_sw, names_ota;
  auto unique_in = [](std::set<std::string>& seen, const std::string& name, const char* kind) {
    if (!seen.insert(name).second)
      fail(Errc::DuplicateName, std::string("duplicate ") + kind + " '" + name + "'");
  };

  for (const Element& e : elements) {
    if (const auto* cap = std::get_if<Capacitor>(&e)) {
      unique_in(names_c, cap->name, "capacitor");
      if (!(cap->farads > 0))
        fail(Errc::NonPositiveValue, "capacitor '" + cap->name + "' must be > 0");
      nodes.insert(cap->n1);
      nodes.insert(cap->n2);
    } else if (const auto* res = std::get_if<Resistor>(&e)) {
      unique_in(names_r, res->name, "resistor");
      if (!(res->ohms > 0))
        fail(Errc::NonPositiveValue, "resistor '" + res->name + "' must be > 0");
      nodes.insert(res->n1);
      nodes.insert(res->n2);
    } else if (const auto* sw = std::get_if<Switch>(&e)) {
      unique_in(names_sw, sw->name, "switch");
      if (!(sw->ron > 0)) fail(Errc::NonPositiveValue, "switch '" + sw->name + "' ron must be > 0");
      for (int p : sw->closed_in)
        if (p < 1 || p > n_phases)
          fail(Errc::UnknownPhase, "switch '" + sw->name + "' closed in unknown phase " +
                                       std::to_string(p));
      nodes.insert(sw->n1);
      nodes.insert(sw->n2);
    } else if (const auto* ota = std::get_if<Ota>(&e)) {
      unique_in(names_ota, ota->name, "ota");
      if (!(ota->gm > 0)) fail(Errc::NonPositiveValue, "ota '" + ota->name + "' gm must be > 0");
      if (ota->gamma < 0)
        fail(Errc::NonPositiveValue, "ota '" + ota->name + "' gamma must be >= 0");
      if (ota->inp == ota->inn)
        fail(Errc::SyntaxError, "ota '" + ota->name + "' inputs must be distinct nodes");
      nodes.insert(ota->inp);
      nodes.insert(ota->inn);
      nodes.insert(ota->out);
    }
  }
  bool ground_referenced = nodes.count(ground) != 0;
  for (const auto& [name, p] : ports) {
    nodes.insert(p.k);
    nodes.insert(p.l);
    if (p.k == ground || p.l == ground) ground_referenced = true;
  }
  if (!ground_referenced)
    fail(Errc::MissingGround, "ground node '" + ground + "' is referenced by no element or port");
  nodes.insert(ground);
}

std::string serialize_netlist(const Circuit& circuit) {
  std::string out;
  out += ".phases " + std::to_string(circuit.n_phases) + "\n";
  out += ".ground " + circuit.ground + "\n";
  for (const Element& e : circuit.elements) {
    if (const auto* cap = std::get_if<Capacitor>(&e)) {
      out += "C " + cap->name + " " + cap->n1 + " " + cap->n2 + " " + fmt_double(cap->farads) + "\n";
    } else if (const auto* res = std::get_if<Resistor>(&e)) {
      out += "R " + res->name + " " + res->n1 + " " + res->n2 + " " + fmt_double(res->ohms) + "\n";
    } else if (const auto* sw = std::get_if<Switch>(&e)) {
      out += "SW " + sw->name + " " + sw->n1 + " " + sw->n2 + " ron=" + fmt_double(sw->ron) +
             " closed=";
      bool first = true;
      for (int p : sw->closed_in) {
        if (!first) out += ",";
        out += std::to_string(p);
        first = false;
      }
      out += "\n";
    } else if (const auto* ota = std::get_if<Ota>(&e)) {
      out += "OTA " + ota->name + " inp=" + ota->inp + " inn=" + ota->inn + " out=" + ota->out +
             " gm=" + fmt_double(ota->gm) + " gamma=" + fmt_double(ota->gamma) + "\n";
    }
  }
  for (const auto& [name, p] : circuit.ports) out += ".port " + name + " " + p.k + " " + p.l + "\n";
  return out;
}

const Capacitor* Circuit::find_capacitor(std::string_view name) const {
  for (const Element& e : elements)
    if (const auto* cap = std::get_if<Capacitor>(&e); cap && cap->name == name) return cap;
  return nullptr;
}
Capacitor* Circuit::find_capacitor(std::string_view name) {
  return const_cast<Capacitor*>(std::as_const(*this).find_capacitor(name));
}
const Ota* Circuit::find_ota(std::string_view name) const {
  for (const Element& e : elements)
    if (const auto* ota = std::get_if<Ota>(&e); ota && ota->name == name) return ota;
  return nullptr;
}
Ota* Circuit::find_ota(std::string_view name) {
  return const_cast<Ota*>(std::as_const(*this).find_ota(name));
}
Switch* Circuit::find_switch(std::string_view name) {
  for (Element& e : elements)
    if (auto* sw = std::get_if<Switch>(&e); sw && sw->name == name) return sw;
  return nullptr;
}
Resistor* Circuit::find_resistor(std::string_view name) {
  for (Element& e : elements)
    if (auto* res = std::get_if<Resistor>(&e); res && res->name == name) return res;
  return nullptr;
}
std::vector<const Ota*> Circuit::otas() const {
  std::vector<const Ota*> out;
  for (const Element& e : elements)
    if (const auto* ota = std::get_if<Ota>(&e)) out.push_back(ota);
  return out;
}
const Port& Circuit::port(std::string_view name) const {
  auto it = ports.find(std::string(name));
  if (it == ports.end()) fail(Errc::UnresolvedName, "unknown port '" + std::string(name) + "'");
  return it->second;
}

}  // namespace scnoise
