#include "textseam/model_io.hpp"

#include <fstream>

#include "textseam/error.hpp"

namespace textseam {

namespace {

ojson matrix_to_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const ojson& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.at(0).size() : 0;
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    const auto values = rows.at(i).get<std::vector<double>>();
    if (values.size() != c) throw ValidationError("model: ragged matrix");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = values[j];
  }
  return m;
}

ojson tree_to_json(const RegressionTree& tree) {
  ojson nodes = ojson::array();
  for (const auto& n : tree.nodes) {
    if (n.feature < 0) {
      nodes.push_back({{"leaf", n.value}});
    } else {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
  }
  return nodes;
}

RegressionTree tree_from_json(const ojson& nodes, std::size_t dim) {
  RegressionTree tree;
  for (const auto& j : nodes) {
    RegressionTree::Node n;
    if (j.contains("leaf")) {
      n.value = j.at("leaf").get<double>();
    } else {
      n.feature = j.at("feature").get<int>();
      n.threshold = j.at("threshold").get<double>();
      n.left = j.at("left").get<int>();
      n.right = j.at("right").get<int>();
    }
    tree.nodes.push_back(n);
  }
  const int count = static_cast<int>(tree.nodes.size());
  if (count == 0) throw ValidationError("model: empty tree");
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    if (n.feature < 0) continue;
    if (static_cast<std::size_t>(n.feature) >= dim) throw ValidationError("model: split feature out of range");
    if (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) || n.left >= count || n.right >= count)
      throw ValidationError("model: bad child index");
  }
  return tree;
}

ojson binary_svm_to_json(const BinarySvm& m) {
  return {{"alpha", m.alpha}, {"y", m.y}, {"bias", m.bias}, {"converged", m.converged}, {"iterations", m.iterations}};
}

BinarySvm binary_svm_from_json(const ojson& j) {
  BinarySvm m;
  m.alpha = j.at("alpha").get<std::vector<double>>();
  m.y = j.at("y").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<std::size_t>();
  if (m.alpha.size() != m.y.size()) throw ValidationError("model: alpha and y differ in length");
  return m;
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }
}

}  // namespace

ojson to_json(const LogRegModel& model) {
  return {{"n_classes", model.n_classes},
          {"dim", model.dim},
          {"weights", matrix_to_json(model.weights)},
          {"mean", model.standardizer.mean},
          {"stddev", model.standardizer.stddev}};
}

LogRegModel logreg_from_json(const ojson& body) {
  return guarded([&] {
    LogRegModel m;
    m.n_classes = body.at("n_classes").get<std::size_t>();
    m.dim = body.at("dim").get<std::size_t>();
    m.weights = matrix_from_json(body.at("weights"));
    m.standardizer.mean = body.at("mean").get<std::vector<double>>();
    m.standardizer.stddev = body.at("stddev").get<std::vector<double>>();
    if (m.weights.rows() != m.n_classes || m.weights.cols() != m.dim + 1 || m.standardizer.mean.size() != m.dim ||
        m.standardizer.stddev.size() != m.dim)
      throw ValidationError("model: logreg shapes disagree");
    return m;
  });
}

ojson to_json(const GbtModel& model) {
  ojson rounds = ojson::array();
  for (const auto& round : model.rounds) {
    ojson trees = ojson::array();
    for (const auto& t : round) trees.push_back(tree_to_json(t));
    rounds.push_back(std::move(trees));
  }
  return {{"mode", to_string(model.mode)},  {"n_classes", model.n_classes},   {"dim", model.dim},
          {"learning_rate", model.learning_rate}, {"base_score", model.base_score}, {"train_loss", model.train_loss},
          {"rounds", std::move(rounds)}};
}

GbtModel gbt_from_json(const ojson& body) {
  return guarded([&] {
    GbtModel m;
    m.mode = parse_gbt_mode(body.at("mode").get<std::string>());
    m.n_classes = body.at("n_classes").get<std::size_t>();
    m.dim = body.at("dim").get<std::size_t>();
    m.learning_rate = body.at("learning_rate").get<double>();
    m.base_score = body.at("base_score").get<std::vector<double>>();
    m.train_loss = body.at("train_loss").get<std::vector<double>>();
    const std::size_t per_round = m.mode == GbtMode::multiclass ? m.n_classes : 1;
    if (m.base_score.size() != per_round) throw ValidationError("model: base_score has the wrong length");
    for (const auto& round : body.at("rounds")) {
      std::vector<RegressionTree> trees;
      for (const auto& t : round) trees.push_back(tree_from_json(t, m.dim));
      if (trees.size() != per_round) throw ValidationError("model: wrong tree count in a round");
      m.rounds.push_back(std::move(trees));
    }
    return m;
  });
}

ojson to_json(const KsvmModel& model) {
  ojson machines = ojson::array();
  for (std::size_t c = 0; c < model.present.size(); ++c) {
    machines.push_back(model.present[c] ? binary_svm_to_json(model.machines[c]) : ojson(nullptr));
  }
  return {{"C", model.C}, {"converged", model.converged}, {"machines", std::move(machines)}};
}

KsvmModel ksvm_from_json(const ojson& body) {
  return guarded([&] {
    KsvmModel m;
    m.C = body.at("C").get<double>();
    m.converged = body.at("converged").get<bool>();
    for (const auto& j : body.at("machines")) {
      m.present.push_back(!j.is_null());
      m.machines.push_back(j.is_null() ? BinarySvm{} : binary_svm_from_json(j));
    }
    if (m.present.size() != static_cast<std::size_t>(kNumLabels)) throw ValidationError("model: expected 10 machines");
    return m;
  });
}

ojson to_json(const GakSvmModel& model) {
  return {{"sigma", model.sigma},
          {"standardize", model.standardize},
          {"scaler_mean", model.scaler.mean},
          {"scaler_stddev", model.scaler.stddev},
          {"train_series", model.train_series},
          {"svm", to_json(model.svm)}};
}

GakSvmModel gak_svm_from_json(const ojson& body) {
  return guarded([&] {
    GakSvmModel m;
    m.sigma = body.at("sigma").get<double>();
    m.standardize = body.at("standardize").get<bool>();
    m.scaler.mean = body.at("scaler_mean").get<double>();
    m.scaler.stddev = body.at("scaler_stddev").get<double>();
    m.train_series = body.at("train_series").get<std::vector<std::vector<double>>>();
    m.svm = ksvm_from_json(body.at("svm"));
    for (std::size_t c = 0; c < m.svm.present.size(); ++c) {
      if (m.svm.present[c] && m.svm.machines[c].alpha.size() != m.train_series.size())
        throw ValidationError("model: dual coefficients do not match the training series");
    }
    return m;
  });
}

ojson to_json(const WindowBinaryModel& model) { return {{"gbt", to_json(model.gbt)}}; }

WindowBinaryModel window_model_from_json(const ojson& body) {
  return guarded([&] { return WindowBinaryModel{gbt_from_json(body.at("gbt"))}; });
}

ojson model_document(std::string_view kind, ojson body) {
  return {{"format", kModelFormat}, {"version", kModelFormatVersion}, {"kind", kind}, {"model", std::move(body)}};
}

std::string check_model_document(const ojson& doc) {
  return guarded([&] {
    if (doc.at("format").get<std::string>() != kModelFormat) throw ValidationError("not a textseam model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw ValidationError("unsupported model format version " + std::to_string(version));
    return doc.at("kind").get<std::string>();
  });
}

void write_model_file(const ojson& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

ojson read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("model file not found: " + path.string());
  try {
    return ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace textseam
