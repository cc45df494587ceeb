#pragma once

#include <string>
#include <string_view>

namespace taskrec {

enum class ModelKind { feat_nnls, ifts, als_neg, feat_reg };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

} // namespace taskrec
