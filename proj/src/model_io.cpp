#include "mkoc/model_io.hpp"

#include <cstring>
#include <fstream>

namespace mkoc {

namespace {

constexpr char kMagic[4] = {'M', 'K', 'O', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void put(std::ostream& out, T v) {
  put_bytes(out, &v, sizeof(v));
}

void put_matrix(std::ostream& out, const Matrix& m) {
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  put_bytes(out, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

void get_bytes(std::istream& in, void* p, std::size_t n,
               const std::string& path) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in)
    throw Error(ErrorCode::Parse, "truncated model file '" + path + "'");
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T v;
  get_bytes(in, &v, sizeof(v), path);
  return v;
}

Matrix get_matrix(std::istream& in, const std::string& path) {
  const auto rows = get<std::uint64_t>(in, path);
  const auto cols = get<std::uint64_t>(in, path);
  if (rows > (1u << 24) || cols > (1u << 24))
    throw Error(ErrorCode::Parse, "implausible matrix size in '" + path + "'");
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  get_bytes(in, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()),
            path);
  return m;
}

void put_layer(std::ostream& out, const TrainedLayer& l) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(l.recipe.kind));
  put<std::int32_t>(out, l.recipe.knn_k);
  put<std::int32_t>(out, l.recipe.cda_clusters);
  put<double>(out, l.recipe.lle_reg);
  put<std::uint64_t>(out, l.recipe.seed);
  put<double>(out, l.hp.c);
  put<double>(out, l.hp.lambda);
  put<double>(out, l.sigma);
  put<double>(out, l.residual);
  put_matrix(out, l.train_inputs);
  put_matrix(out, l.weights);
}

TrainedLayer get_layer(std::istream& in, const std::string& path) {
  TrainedLayer l;
  l.recipe.kind = static_cast<GraphKind>(get<std::uint32_t>(in, path));
  l.recipe.knn_k = get<std::int32_t>(in, path);
  l.recipe.cda_clusters = get<std::int32_t>(in, path);
  l.recipe.lle_reg = get<double>(in, path);
  l.recipe.seed = get<std::uint64_t>(in, path);
  l.hp.c = get<double>(in, path);
  l.hp.lambda = get<double>(in, path);
  l.sigma = get<double>(in, path);
  l.residual = get<double>(in, path);
  l.train_inputs = get_matrix(in, path);
  l.weights = get_matrix(in, path);
  return l;
}

}  // namespace

void save_model(const ModelBundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::Io, "cannot write model file '" + path + "'");
  put_bytes(out, kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, bundle.scaler ? 1u : 0u);
  const MkocModel& m = bundle.model;
  put<double>(out, m.r);
  put<double>(out, m.eta);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.threshold_kind));
  put<double>(out, m.threshold);
  put<double>(out, m.train_output_mean);
  if (bundle.scaler) {
    const MinMaxScaler& s = *bundle.scaler;
    put<std::uint64_t>(out, static_cast<std::uint64_t>(s.col_min.cols()));
    put_bytes(out, s.col_min.data(),
              sizeof(double) * static_cast<std::size_t>(s.col_min.size()));
    put_bytes(out, s.col_max.data(),
              sizeof(double) * static_cast<std::size_t>(s.col_max.size()));
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.encoders.size() + 1));
  for (const TrainedLayer& l : m.encoders) put_layer(out, l);
  put_layer(out, m.head);
  if (!out)
    throw Error(ErrorCode::Io, "write failed for model file '" + path + "'");
}

ModelBundle load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open model file '" + path + "'");
  char magic[4];
  get_bytes(in, magic, sizeof(magic), path);
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorCode::Parse, "'" + path + "' is not a model file");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion)
    throw Error(ErrorCode::Parse, "unsupported model version " +
                                      std::to_string(version) + " in '" +
                                      path + "'");
  const auto flags = get<std::uint32_t>(in, path);

  ModelBundle bundle;
  MkocModel& m = bundle.model;
  m.r = get<double>(in, path);
  m.eta = get<double>(in, path);
  m.threshold_kind = static_cast<ThresholdKind>(get<std::uint32_t>(in, path));
  m.threshold = get<double>(in, path);
  m.train_output_mean = get<double>(in, path);
  if (flags & 1u) {
    const auto cols = get<std::uint64_t>(in, path);
    MinMaxScaler s;
    s.col_min.resize(static_cast<Index>(cols));
    s.col_max.resize(static_cast<Index>(cols));
    get_bytes(in, s.col_min.data(), sizeof(double) * cols, path);
    get_bytes(in, s.col_max.data(), sizeof(double) * cols, path);
    bundle.scaler = std::move(s);
  }
  const auto n_layers = get<std::uint32_t>(in, path);
  if (n_layers < 1)
    throw Error(ErrorCode::Parse, "model file '" + path + "' has no layers");
  for (std::uint32_t i = 0; i + 1 < n_layers; ++i)
    m.encoders.push_back(get_layer(in, path));
  m.head = get_layer(in, path);
  return bundle;
}

std::vector<Verdict> bundle_predict(const ModelBundle& bundle, const Matrix& x) {
  if (bundle.scaler) return predict(bundle.model, bundle.scaler->apply(x));
  return predict(bundle.model, x);
}

}  // namespace mkoc
