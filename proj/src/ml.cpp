#include "edgeward/ml.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "edgeward/error.hpp"
#include "edgeward/rng.hpp"

namespace edgeward::ml {

const std::array<const char*, kFeatureCount + 1> kColumnNames = {
    "Pregnancies", "Glucose", "BloodPressure", "SkinThickness", "Insulin",
    "BMI",         "DiabetesPedigreeFunction", "Age", "Outcome"};

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

std::vector<PatientRecord> parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<PatientRecord> out;
  std::size_t lineNo = 0;
  bool header = true;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++lineNo;
    if (trim(line).empty()) continue;
    auto f = fields(line);
    if (f.size() != kFeatureCount + 1)
      throw Error(ErrorKind::ParseError,
                  fmt::format("line {}: expected {} columns, found {}", lineNo, kFeatureCount + 1, f.size()));
    if (header) {
      double probe;
      if (parse_double(f[0], probe))
        throw Error(ErrorKind::ParseError, "line 1: header row required, found numeric data");
      header = false;
      continue;
    }
    PatientRecord r;
    for (int i = 0; i < kFeatureCount; ++i)
      if (!parse_double(f[i], r.features[i]))
        throw Error(ErrorKind::ParseError, fmt::format("line {}: column {} is not a finite number", lineNo,
                                                       kColumnNames[i]));
    double outcome;
    if (!parse_double(f[kFeatureCount], outcome) || (outcome != 0.0 && outcome != 1.0))
      throw Error(ErrorKind::ParseError, fmt::format("line {}: Outcome must be 0 or 1", lineNo));
    r.outcome = static_cast<int>(outcome);
    out.push_back(r);
  }
  if (header) throw Error(ErrorKind::ParseError, "empty input: header row required");
  return out;
}

static std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::DatasetMissing, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<PatientRecord> load_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

std::string file_sha256(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr))
    throw Error(ErrorKind::IoError, "sha256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

Preprocessed preprocess(const std::vector<PatientRecord>& records) {
  Preprocessed out;
  auto& s = out.summary;
  s.total = records.size();
  for (const auto& r : records) {
    (r.outcome == 1 ? s.totalDiabetic : s.totalNonDiabetic)++;
    if (r.diastolic_bp() == 0.0 || r.skin_thickness_mm() == 0.0 || r.bmi() == 0.0) continue;
    out.records.push_back(r);
    (r.outcome == 1 ? s.diabetic : s.nonDiabetic)++;
  }
  s.kept = out.records.size();
  return out;
}

Split split(std::vector<PatientRecord> records, double trainFraction, std::uint64_t seed) {
  if (!(trainFraction > 0.0 && trainFraction < 1.0))
    throw Error(ErrorKind::InvalidArgument, "trainFraction must be in (0, 1)");
  Rng rng(seed);
  for (std::size_t i = records.size(); i > 1; --i) std::swap(records[i - 1], records[rng.below(i)]);
  const auto nTrain = static_cast<std::size_t>(std::llround(records.size() * trainFraction));
  Split s;
  s.train.assign(records.begin(), records.begin() + nTrain);
  s.validation.assign(records.begin() + nTrain, records.end());
  return s;
}

double entropy(const std::vector<std::size_t>& classCounts) {
  const std::size_t n = std::accumulate(classCounts.begin(), classCounts.end(), std::size_t{0});
  if (n == 0) throw Error(ErrorKind::AllZero, "entropy of empty counts");
  double h = 0.0;
  for (auto c : classCounts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Tree growing

namespace {

double h2(std::size_t a, std::size_t b) {
  if (a + b == 0) return 0.0;
  return entropy({a, b});
}

struct Grower {
  const std::vector<PatientRecord>& data;
  int maxDepth;
  Tree tree;

  int grow(std::vector<std::size_t>& idx, int depth) {
    TreeNode node;
    for (auto i : idx) node.counts[data[i].outcome]++;
    const int self = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(node);
    if (depth >= maxDepth || node.counts[0] == 0 || node.counts[1] == 0) return self;

    const double parentH = h2(node.counts[0], node.counts[1]);
    const double n = static_cast<double>(idx.size());
    double bestGain = 1e-12;
    int bestFeature = -1;
    double bestThreshold = 0.0;

    std::vector<std::size_t> order = idx;
    for (int f = 0; f < kFeatureCount; ++f) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data[a].features[f] < data[b].features[f];
      });
      std::array<std::size_t, 2> left{};
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        left[data[order[k]].outcome]++;
        const double v = data[order[k]].features[f];
        const double next = data[order[k + 1]].features[f];
        if (!(v < next)) continue;
        const std::size_t nl = k + 1;
        const double hl = h2(left[0], left[1]);
        const double hr = h2(node.counts[0] - left[0], node.counts[1] - left[1]);
        const double gain = parentH - (nl / n) * hl - ((n - nl) / n) * hr;
        if (gain > bestGain) {
          bestGain = gain;
          bestFeature = f;
          bestThreshold = v + (next - v) / 2.0;
        }
      }
    }
    if (bestFeature < 0) return self;

    std::vector<std::size_t> li, ri;
    for (auto i : idx) (data[i].features[bestFeature] <= bestThreshold ? li : ri).push_back(i);
    tree.nodes[self].feature = bestFeature;
    tree.nodes[self].threshold = bestThreshold;
    const int l = grow(li, depth + 1);
    tree.nodes[self].left = l;
    const int r = grow(ri, depth + 1);
    tree.nodes[self].right = r;
    return self;
  }
};

int depth_from(const Tree& t, int i) {
  const auto& n = t.nodes[i];
  if (n.feature < 0) return 0;
  return 1 + std::max(depth_from(t, n.left), depth_from(t, n.right));
}

}  // namespace

int Tree::depth() const { return nodes.empty() ? 0 : depth_from(*this, 0); }

ForestModel train_forest(const std::vector<PatientRecord>& train, const ForestParams& params, std::uint64_t seed) {
  if (train.empty()) throw Error(ErrorKind::InvalidArgument, "empty training set");
  if (params.nTrees < 1 || params.maxDepth < 0) throw Error(ErrorKind::InvalidArgument, "bad forest params");
  std::size_t positives = 0;
  for (const auto& r : train) positives += r.outcome;
  if (positives == 0 || positives == train.size())
    throw Error(ErrorKind::SingleClass, "training set contains a single class");

  ForestModel model;
  model.params = params;
  model.trainSeed = seed;
  model.trees.reserve(params.nTrees);
  const std::size_t n = train.size();
  for (int t = 1; t <= params.nTrees; ++t) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = rng.below(n);
    Grower g{train, params.maxDepth, {}};
    g.grow(sample, 0);
    model.trees.push_back(std::move(g.tree));
  }
  return model;
}

int tree_predict(const Tree& tree, const PatientRecord& r, int tieClass) {
  int i = 0;
  while (tree.nodes[i].feature >= 0) {
    const auto& n = tree.nodes[i];
    i = r.features[n.feature] <= n.threshold ? n.left : n.right;
  }
  const auto& c = tree.nodes[i].counts;
  if (c[0] == c[1]) return tieClass;
  return c[1] > c[0] ? 1 : 0;
}

Prediction predict(const ForestModel& model, const PatientRecord& r) {
  std::size_t ones = 0;
  for (const auto& t : model.trees) ones += tree_predict(t, r, model.params.tieClass);
  const std::size_t zeros = model.trees.size() - ones;
  Prediction p;
  p.voteFraction = model.trees.empty() ? 0.0 : static_cast<double>(ones) / model.trees.size();
  p.cls = ones == zeros ? model.params.tieClass : (ones > zeros ? 1 : 0);
  return p;
}

EvalReport evaluate(const ForestModel& model, const std::vector<PatientRecord>& validation, std::size_t nTrain) {
  if (validation.empty()) throw Error(ErrorKind::InvalidArgument, "empty validation set");
  EvalReport rep;
  rep.nTrain = nTrain;
  rep.nValidation = validation.size();
  std::size_t correct = 0;
  for (const auto& r : validation) {
    const int p = predict(model, r).cls;
    rep.confusion[r.outcome][p]++;
    correct += p == r.outcome;
  }
  rep.accuracy = static_cast<double>(correct) / validation.size();
  return rep;
}

std::string report_csv(const EvalReport& r) {
  return fmt::format("accuracy,n_train,n_validation,tn,fp,fn,tp\n{:.6f},{},{},{},{},{},{}\n", r.accuracy, r.nTrain,
                     r.nValidation, r.confusion[0][0], r.confusion[0][1], r.confusion[1][0], r.confusion[1][1]);
}

std::string report_text(const EvalReport& r) {
  return fmt::format(
      "accuracy      {:.4f} ({} train / {} validation)\n"
      "confusion     pred=0  pred=1\n"
      "  true=0      {:6}  {:6}\n"
      "  true=1      {:6}  {:6}\n",
      r.accuracy, r.nTrain, r.nValidation, r.confusion[0][0], r.confusion[0][1], r.confusion[1][0], r.confusion[1][1]);
}

// ---------------------------------------------------------------------------
// Model file
//
//   edgeward-forest 1
//   params n_trees=100 max_depth=5 max_features=all criterion=entropy tie_class=1 seed=42
//   tree 0
//   S <feature> <threshold>      internal node, preorder
//   L <count0> <count1>          leaf
//   end

std::string serialize(const ForestModel& model) {
  std::string out = "edgeward-forest 1\n";
  out += fmt::format("params n_trees={} max_depth={} max_features=all criterion=entropy tie_class={} seed={}\n",
                     model.trees.size(), model.params.maxDepth, model.params.tieClass, model.trainSeed);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    out += fmt::format("tree {}\n", t);
    const auto& nodes = model.trees[t].nodes;
    // Recursive preorder from the root reproduces the node vector order.
    std::vector<int> stack{0};
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      const auto& n = nodes[i];
      if (n.feature < 0) {
        out += fmt::format("L {} {}\n", n.counts[0], n.counts[1]);
      } else {
        out += fmt::format("S {} {:.17g}\n", n.feature, n.threshold);
        stack.push_back(n.right);
        stack.push_back(n.left);
      }
    }
    out += "end\n";
  }
  return out;
}

namespace {

struct LineReader {
  std::istringstream in;
  std::size_t lineNo = 0;
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++lineNo;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::ParseError, fmt::format("model line {}: {}", lineNo, what));
  }
};

int read_subtree(LineReader& rd, Tree& tree, int depth) {
  if (depth > 64) rd.fail("tree too deep");
  std::string line;
  if (!rd.next(line)) rd.fail("unexpected end of file");
  std::istringstream ls(line);
  std::string tag;
  ls >> tag;
  const int self = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (tag == "L") {
    std::size_t c0, c1;
    if (!(ls >> c0 >> c1)) rd.fail("bad leaf");
    tree.nodes[self].counts = {c0, c1};
  } else if (tag == "S") {
    int f;
    std::string thr;
    if (!(ls >> f >> thr) || f < 0 || f >= kFeatureCount) rd.fail("bad split");
    char* end = nullptr;
    const double t = std::strtod(thr.c_str(), &end);
    if (end == thr.c_str() || *end) rd.fail("bad threshold");
    tree.nodes[self].feature = f;
    tree.nodes[self].threshold = t;
    const int l = read_subtree(rd, tree, depth + 1);
    tree.nodes[self].left = l;
    const int r = read_subtree(rd, tree, depth + 1);
    tree.nodes[self].right = r;
  } else {
    rd.fail("expected S or L, got '" + tag + "'");
  }
  return self;
}

}  // namespace

ForestModel deserialize(std::string_view text) {
  LineReader rd{std::istringstream(std::string(text))};
  std::string line;
  if (!rd.next(line) || line != "edgeward-forest 1") rd.fail("missing or unsupported header");
  if (!rd.next(line) || line.rfind("params ", 0) != 0) rd.fail("missing params line");

  ForestModel m;
  std::size_t nTrees = 0;
  {
    std::istringstream ps(line.substr(7));
    std::string kv;
    while (ps >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) rd.fail("bad param '" + kv + "'");
      const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
      try {
        if (k == "n_trees") nTrees = std::stoul(v);
        else if (k == "max_depth") m.params.maxDepth = std::stoi(v);
        else if (k == "tie_class") m.params.tieClass = std::stoi(v);
        else if (k == "seed") m.trainSeed = std::stoull(v);
        else if (k == "max_features" && v != "all") rd.fail("only max_features=all is supported");
        else if (k == "criterion" && v != "entropy") rd.fail("only criterion=entropy is supported");
      } catch (const std::logic_error&) {
        rd.fail("bad value for " + k);
      }
    }
  }
  m.params.nTrees = static_cast<int>(nTrees);
  for (std::size_t t = 0; t < nTrees; ++t) {
    if (!rd.next(line) || line != fmt::format("tree {}", t)) rd.fail(fmt::format("expected 'tree {}'", t));
    Tree tree;
    read_subtree(rd, tree, 0);
    if (!rd.next(line) || line != "end") rd.fail("expected 'end'");
    m.trees.push_back(std::move(tree));
  }
  if (rd.next(line)) rd.fail("trailing content");
  return m;
}

}  // namespace edgeward::ml
