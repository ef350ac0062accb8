#ifndef MKOC_MODEL_IO_HPP
#define MKOC_MODEL_IO_HPP

#include <optional>
#include <string>

#include "mkoc/data.hpp"
#include "mkoc/model.hpp"

namespace mkoc {

// A fitted model plus the feature scaler it was trained behind, so saved
// models score raw feature rows.
struct ModelBundle {
  MkocModel model;
  std::optional<MinMaxScaler> scaler;
};

// Versioned binary format; write -> read -> write round-trips bit-exactly.
void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

// Scores raw rows, applying the bundle scaler when present.
std::vector<Verdict> bundle_predict(const ModelBundle& bundle, const Matrix& x);

}  // namespace mkoc

#endif
