#include "exactlm/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace exactlm {

namespace {

std::vector<std::vector<std::string>> tokenize(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (!tokens.empty()) lines.push_back(std::move(tokens));
  }
  return lines;
}

double parse_prob(const std::string& tok) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw InputError("bad numeric token '" + tok + "'");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ModelFile parse_autoregressive(const std::vector<std::vector<std::string>>& lines) {
  std::vector<std::string> interior;
  std::string eos_name;
  int order = -1;
  std::vector<std::pair<std::vector<std::string>, std::vector<double>>> rows;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& t = lines[i];
    if (t[0] == "symbols") {
      interior.assign(t.begin() + 1, t.end());
    } else if (t[0] == "eos") {
      if (t.size() != 2) throw InputError("eos line expects one symbol name");
      eos_name = t[1];
    } else if (t[0] == "order") {
      if (t.size() != 2) throw InputError("order line expects one integer");
      order = static_cast<int>(parse_prob(t[1]));
    } else if (t[0] == "row") {
      auto bar = std::find(t.begin(), t.end(), "|");
      if (bar == t.end()) throw InputError("row line missing '|' separator");
      std::vector<std::string> ctx(t.begin() + 1, bar);
      std::vector<double> probs;
      for (auto it = bar + 1; it != t.end(); ++it) probs.push_back(parse_prob(*it));
      rows.emplace_back(std::move(ctx), std::move(probs));
    } else {
      throw InputError("unknown directive '" + t[0] + "' in autoregressive model");
    }
  }
  if (interior.empty()) throw InputError("autoregressive model needs a symbols line");
  if (eos_name.empty()) throw InputError("autoregressive model needs an eos line");
  if (order < 0) throw InputError("autoregressive model needs an order line");

  std::vector<std::string> names = interior;
  names.push_back(eos_name);
  Alphabet alphabet = Alphabet::create(names, static_cast<int32_t>(interior.size()));

  std::unordered_map<String, std::vector<double>, StringHash> table;
  for (auto& [ctx_names, probs] : rows) {
    String ctx;
    for (const auto& name : ctx_names) {
      auto id = alphabet.find(name);
      if (!id || *id == alphabet.eos_index)
        throw InputError("bad context symbol '" + name + "'");
      ctx.push_back(*id);
    }
    if (probs.size() != static_cast<std::size_t>(alphabet.size()))
      throw InputError("row has wrong number of probabilities");
    if (!table.emplace(std::move(ctx), std::move(probs)).second)
      throw InputError("duplicate context row");
  }
  return AutoregressiveLM::create(std::move(alphabet), order, std::move(table));
}

ModelFile parse_tabular(const std::vector<std::vector<std::string>>& lines) {
  std::vector<std::string> items;
  std::vector<double> probs;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& t = lines[i];
    if (t[0] != "item" || t.size() != 3)
      throw InputError("tabular model lines must be 'item <id> <probability>'");
    items.push_back(t[1]);
    probs.push_back(parse_prob(t[2]));
  }
  return TabularLM::from_probs(std::move(items), std::move(probs));
}

}  // namespace

ModelFile parse_model(std::string_view text) {
  auto lines = tokenize(text);
  if (lines.empty() || lines[0][0] != "model" || lines[0].size() != 2)
    throw InputError("model file must start with 'model autoregressive|tabular'");
  if (lines[0][1] == "autoregressive") return parse_autoregressive(lines);
  if (lines[0][1] == "tabular") return parse_tabular(lines);
  throw InputError("unknown model kind '" + lines[0][1] + "'");
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

RewardFunction parse_reward(std::string_view text) {
  auto lines = tokenize(text);
  if (lines.empty() || lines[0][0] != "reward")
    throw InputError("reward file must start with 'reward'");
  std::optional<double> bound;
  std::unordered_map<std::string, double> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& t = lines[i];
    if (t[0] == "bound") {
      if (t.size() != 2) throw InputError("bound line expects one number");
      bound = parse_prob(t[1]);
    } else if (t[0] == "item") {
      if (t.size() != 3) throw InputError("reward lines must be 'item <id> <value>'");
      if (!values.emplace(t[1], parse_prob(t[2])).second)
        throw InputError("duplicate reward item '" + t[1] + "'");
    } else {
      throw InputError("unknown directive '" + t[0] + "' in reward file");
    }
  }
  return bound ? RewardFunction::create(std::move(values), *bound)
               : RewardFunction::from_values(std::move(values));
}

RewardFunction load_reward(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open reward file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_reward(buf.str());
}

std::string format_model(const TabularLM& lm) {
  std::ostringstream out;
  out << "model tabular\n";
  for (std::size_t i = 0; i < lm.size(); ++i)
    out << "item " << lm.items[i] << ' ' << fmt(std::exp(lm.logprobs[i])) << '\n';
  return out.str();
}

std::string format_model(const AutoregressiveLM& lm) {
  std::ostringstream out;
  out << "model autoregressive\nsymbols";
  for (int32_t i = 0; i < lm.alphabet.size(); ++i) {
    if (i != lm.alphabet.eos_index) out << ' ' << lm.alphabet.symbols[static_cast<std::size_t>(i)];
  }
  out << "\neos " << lm.alphabet.symbols[static_cast<std::size_t>(lm.alphabet.eos_index)];
  out << "\norder " << lm.order << '\n';

  std::vector<String> contexts;
  for (const auto& [ctx, _] : lm.table) contexts.push_back(ctx);
  std::sort(contexts.begin(), contexts.end());
  for (const auto& ctx : contexts) {
    out << "row";
    for (SymbolId s : ctx) out << ' ' << lm.alphabet.symbols[static_cast<std::size_t>(s)];
    out << " |";
    const auto& dist = lm.table.at(ctx);
    // Interior symbols first, EOS last, matching the symbols/eos lines.
    for (int32_t i = 0; i < lm.alphabet.size(); ++i) {
      if (i != lm.alphabet.eos_index) out << ' ' << fmt(dist[static_cast<std::size_t>(i)]);
    }
    out << ' ' << fmt(dist[static_cast<std::size_t>(lm.alphabet.eos_index)]) << '\n';
  }
  return out.str();
}

std::string format_reward(const RewardFunction& reward) {
  std::ostringstream out;
  out << "reward\nbound " << fmt(reward.bound) << '\n';
  std::vector<std::string> keys;
  for (const auto& [k, _] : reward.values) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (const auto& k : keys) out << "item " << k << ' ' << fmt(reward.values.at(k)) << '\n';
  return out.str();
}

}  // namespace exactlm
