#include "fermi/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fermi {

namespace {

using nlohmann::json;

int parse_spin(const json& j, const std::string& where) {
  if (j.is_number_integer()) {
    const int s = j.get<int>();
    if (s == 0 || s == 1) return s;
  } else if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "up") return Up;
    if (s == "down") return Down;
  }
  throw ModelParseError(where + ": spin must be 0, 1, \"up\" or \"down\"");
}

std::vector<int> parse_site(const json& j, int d, const std::string& where) {
  if (j.is_number_integer() && d == 1) return {j.get<int>()};
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw ModelParseError(where + ": site must be an integer array of length d");
  std::vector<int> x;
  for (const auto& c : j) {
    if (!c.is_number_integer()) throw ModelParseError(where + ": site coordinates must be integers");
    x.push_back(c.get<int>());
  }
  return x;
}

template <class T>
T scalar(const json& root, const char* key, T fallback) {
  if (!root.contains(key)) return fallback;
  const json& v = root.at(key);
  if constexpr (std::is_same_v<T, int>) {
    if (!v.is_number_integer()) throw ModelParseError(std::string("field '") + key + "' must be an integer");
  } else {
    if (!v.is_number()) throw ModelParseError(std::string("field '") + key + "' must be a number");
  }
  return v.get<T>();
}

}  // namespace

ModelFile parse_model_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ModelParseError("model description must be a JSON object");

  ModelFile m;
  m.spec.d = scalar<int>(root, "d", 1);
  m.spec.L = scalar<int>(root, "L", 4);
  if (m.spec.d < 1 || m.spec.L < 1) throw ModelParseError("d and L must be positive");
  m.params.t = scalar<double>(root, "t", 1.0);
  m.params.t_prime = scalar<double>(root, "t_prime", 0.0);
  m.params.mu = scalar<double>(root, "mu", 0.2);
  m.params.beta = scalar<double>(root, "beta", 1.0);
  if (!(m.params.beta > 0)) throw ModelParseError("beta must be positive");
  m.interaction = InteractionCoefficients(m.spec.d);

  if (root.contains("interaction")) {
    const json& blocks = root.at("interaction");
    if (!blocks.is_array()) throw ModelParseError("'interaction' must be an array");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const json& blk = blocks[b];
      const std::string bw = "interaction[" + std::to_string(b) + "]";
      if (!blk.is_object() || !blk.contains("order") || !blk.at("order").is_number_integer())
        throw ModelParseError(bw + ": needs an integer 'order'");
      const int l = blk.at("order").get<int>();
      if (l < 1) throw ModelParseError(bw + ": order must be >= 1");
      if (!blk.contains("entries") || !blk.at("entries").is_array())
        throw ModelParseError(bw + ": needs an 'entries' array");
      const json& entries = blk.at("entries");
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const json& en = entries[e];
        const std::string ew = bw + ".entries[" + std::to_string(e) + "]";
        if (!en.is_object()) throw ModelParseError(ew + ": must be an object");
        if (!en.contains("Xi") || !en.contains("Phi") || !en.at("Xi").is_array() || !en.at("Phi").is_array())
          throw ModelParseError(ew + ": needs 'Xi' and 'Phi' arrays");
        if (static_cast<int>(en.at("Xi").size()) != l || static_cast<int>(en.at("Phi").size()) != l)
          throw ModelParseError(ew + ": 'Xi' and 'Phi' must have length order");
        std::vector<int> Xi, Phi;
        for (const auto& s : en.at("Xi")) Xi.push_back(parse_spin(s, ew));
        for (const auto& s : en.at("Phi")) Phi.push_back(parse_spin(s, ew));
        const double re = en.contains("re") ? scalar<double>(en, "re", 0.0) : 0.0;
        const double im = en.contains("im") ? scalar<double>(en, "im", 0.0) : 0.0;
        if (!en.contains("X") || en.at("X").is_null()) {
          if (l != 1) throw ModelParseError(ew + ": 'X' may be omitted only for order 1");
          m.interaction.add_uniform(Xi[0], Phi[0], cplx(re, im));
          continue;
        }
        const json& X = en.at("X");
        if (!X.is_array() || static_cast<int>(X.size()) != l)
          throw ModelParseError(ew + ": 'X' must list order sites");
        std::vector<std::vector<int>> sites;
        for (const auto& x : X) sites.push_back(parse_site(x, m.spec.d, ew));
        m.interaction.add(std::move(sites), std::move(Xi), std::move(Phi), cplx(re, im));
      }
    }
  }
  if (auto bad = m.interaction.hermiticity_violation()) throw ModelInvariantError(*bad);
  return m;
}

ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelParseError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_json(ss.str());
}

}  // namespace fermi
