#include "taskrec/model_kind.hpp"

#include "taskrec/errors.hpp"

namespace taskrec {

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::feat_nnls: return "feat-nnls";
    case ModelKind::ifts: return "ifts";
    case ModelKind::als_neg: return "als-neg";
    case ModelKind::feat_reg: return "feat-reg";
    }
    throw ValidationError("unknown model kind");
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "feat-nnls") return ModelKind::feat_nnls;
    if (name == "ifts") return ModelKind::ifts;
    if (name == "als-neg") return ModelKind::als_neg;
    if (name == "feat-reg") return ModelKind::feat_reg;
    throw ValidationError("unknown model kind: " + std::string(name));
}

} // namespace taskrec
