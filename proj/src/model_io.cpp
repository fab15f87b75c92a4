#include <charconv>
#include <fstream>
#include <sstream>

#include "fairprobe/error.hpp"
#include "fairprobe/models.hpp"

namespace fairprobe {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::logistic: return "logistic";
    case ModelKind::tree: return "tree";
    case ModelKind::planted: return "planted";
    case ModelKind::external: return "external";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "logistic") return ModelKind::logistic;
  if (name == "tree") return ModelKind::tree;
  if (name == "planted") return ModelKind::planted;
  if (name == "external") return ModelKind::external;
  throw UsageError("unknown model kind '" + std::string(name) + "'");
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

namespace {

std::string header(const Model& model, std::size_t params) {
  std::string out(kModelFormatTag);
  out += "\nkind ";
  out += to_string(model.kind());
  out += "\nalphabet";
  for (const auto l : model.alphabet()) out += " " + std::to_string(l);
  out += "\nparams " + std::to_string(params) + "\n";
  return out;
}

// Line-oriented reader: each line is a keyword followed by whitespace tokens.
class Reader {
 public:
  explicit Reader(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines_.push_back(line);
    }
  }

  bool done() const { return next_ >= lines_.size(); }

  std::string raw() {
    if (done()) throw ParseError("model file truncated");
    return lines_[next_++];
  }

  std::vector<std::string> expect(std::string_view keyword) {
    const auto line = raw();
    std::istringstream in(line);
    std::string word;
    in >> word;
    if (word != keyword)
      throw ParseError("model file line " + std::to_string(next_) + ": expected '" +
                       std::string(keyword) + "', found '" + word + "'");
    std::vector<std::string> tokens;
    while (in >> word) tokens.push_back(word);
    return tokens;
  }

  std::string_view peek_keyword() const {
    if (done()) return {};
    const std::string_view l = lines_[next_];
    return l.substr(0, l.find(' '));
  }

  std::size_t line() const { return next_; }

 private:
  std::vector<std::string> lines_;
  std::size_t next_ = 0;
};

template <class T>
T number(const std::string& token, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw ParseError("model file line " + std::to_string(line) + ": bad number '" + token + "'");
  return v;
}

std::string single(const std::vector<std::string>& tokens, std::size_t line) {
  if (tokens.size() != 1)
    throw ParseError("model file line " + std::to_string(line) + ": expected one value");
  return tokens.front();
}

}  // namespace

std::string serialize_model(const Model& model) {
  if (const auto* m = dynamic_cast<const LogisticModel*>(&model)) {
    std::string out = header(model, m->weights().size());
    out += "weights";
    for (const auto w : m->weights()) out += " " + format_double(w);
    out += "\nbias " + format_double(m->bias()) + "\n";
    return out;
  }
  if (const auto* m = dynamic_cast<const TreeModel*>(&model)) {
    std::string out = header(model, m->param_count());
    out += "nodes " + std::to_string(m->nodes().size()) + "\n";
    for (const auto& n : m->nodes()) {
      if (n.leaf)
        out += "leaf " + std::to_string(n.label) + "\n";
      else
        out += "split " + std::to_string(n.param) + " " + std::to_string(n.threshold) + "\n";
    }
    return out;
  }
  if (const auto* m = dynamic_cast<const PlantedModel*>(&model)) {
    std::string out = header(model, m->domain().size());
    const auto& s = m->spec();
    out += "biased " + std::to_string(s.biased_param) + " " + std::to_string(s.biased_value) + "\n";
    out += std::string("empty ") + (s.empty_region ? "true" : "false") + "\n";
    for (const auto& [index, iv] : s.region)
      out += "region " + std::to_string(index) + " " + std::to_string(iv.lo) + " " +
             std::to_string(iv.hi) + "\n";
    return out;
  }
  throw ContractError("model kind '" + std::string(to_string(model.kind())) +
                      "' has no file serialization");
}

ModelHandle parse_model(std::string_view text, const InputDomain& domain) {
  Reader r(text);
  if (r.raw() != kModelFormatTag)
    throw ParseError("model file does not start with '" + std::string(kModelFormatTag) + "'");
  const auto kind = parse_model_kind(single(r.expect("kind"), r.line()));
  Alphabet alphabet;
  for (const auto& t : r.expect("alphabet")) alphabet.push_back(number<Label>(t, r.line()));
  const auto params = number<std::size_t>(single(r.expect("params"), r.line()), r.line());
  if (params != domain.size())
    throw SchemaError("model declares " + std::to_string(params) + " parameters, domain has " +
                      std::to_string(domain.size()));

  switch (kind) {
    case ModelKind::logistic: {
      std::vector<double> w;
      for (const auto& t : r.expect("weights")) w.push_back(number<double>(t, r.line()));
      const double b = number<double>(single(r.expect("bias"), r.line()), r.line());
      if (alphabet != binary_alphabet()) throw ParseError("logistic model alphabet must be -1 1");
      return std::make_shared<LogisticModel>(domain, std::move(w), b);
    }
    case ModelKind::tree: {
      const auto count = number<std::size_t>(single(r.expect("nodes"), r.line()), r.line());
      std::vector<TreeNode> nodes(count);
      // Preorder: rebuild child links with an explicit stack of open splits.
      std::vector<std::size_t> open;
      for (std::size_t i = 0; i < count; ++i) {
        if (i > 0) {
          if (open.empty()) throw ParseError("tree nodes beyond a complete tree");
          auto& parent = nodes[open.back()];
          if (parent.left < 0) {
            parent.left = static_cast<int>(i);
          } else {
            parent.right = static_cast<int>(i);
            open.pop_back();
          }
        }
        if (r.peek_keyword() == "leaf") {
          nodes[i].label = number<Label>(single(r.expect("leaf"), r.line()), r.line());
        } else {
          const auto t = r.expect("split");
          if (t.size() != 2) throw ParseError("split needs parameter and threshold");
          nodes[i].leaf = false;
          nodes[i].param = number<std::size_t>(t[0], r.line());
          nodes[i].threshold = number<Value>(t[1], r.line());
          open.push_back(i);
        }
      }
      if (!open.empty()) throw ParseError("tree node list is incomplete");
      return std::make_shared<TreeModel>(params, std::move(nodes), std::move(alphabet));
    }
    case ModelKind::planted: {
      PlantedBiasSpec spec;
      const auto b = r.expect("biased");
      if (b.size() != 2) throw ParseError("biased needs parameter and value");
      spec.biased_param = number<std::size_t>(b[0], r.line());
      spec.biased_value = number<Value>(b[1], r.line());
      const auto e = single(r.expect("empty"), r.line());
      if (e != "true" && e != "false") throw ParseError("empty must be true or false");
      spec.empty_region = e == "true";
      while (!r.done()) {
        const auto t = r.expect("region");
        if (t.size() != 3) throw ParseError("region needs parameter, lo and hi");
        spec.region[number<std::size_t>(t[0], r.line())] =
            Interval{number<Value>(t[1], r.line()), number<Value>(t[2], r.line())};
      }
      return make_planted(domain, std::move(spec));
    }
    case ModelKind::external:
      break;
  }
  throw ParseError("external models cannot be loaded from a model file");
}

void save_model(const std::filesystem::path& path, const Model& model) {
  const auto text = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot write model file " + path.string());
  out << text;
}

ModelHandle load_model(const std::filesystem::path& path, const InputDomain& domain) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), domain);
}

}  // namespace fairprobe
