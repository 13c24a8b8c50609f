#pragma once

#include <iosfwd>
#include <string>

#include "kernelrep/kernel_ae.hpp"
#include "kernelrep/kpca.hpp"
#include "kernelrep/simple_contrastive.hpp"
#include "kernelrep/spectral_contrastive.hpp"

namespace kernelrep {

/// Text model format, version 1:
///
///   kernelrep-model 1
///   type <simple|spectral|ae|kpca>
///   kernel <name> <family> <gamma> <depth>
///   scalar <name> <value>
///   matrix <name> <rows> <cols>
///   <rows lines of cols values>
///   end
///
/// Doubles are written with 17 significant digits, so a round trip is exact.
inline constexpr int kModelFormatVersion = 1;

void save_model(std::ostream& out, const SimpleContrastiveModel& model);
void save_model(std::ostream& out, const SpectralModel& model);
void save_model(std::ostream& out, const KernelAEModel& model);
void save_model(std::ostream& out, const KPCAModel& model);

SimpleContrastiveModel load_simple_model(std::istream& in);
SpectralModel load_spectral_model(std::istream& in);
KernelAEModel load_ae_model(std::istream& in);
KPCAModel load_kpca_model(std::istream& in);

/// Reads only the `type` line of a saved model.
std::string peek_model_type(std::istream& in);

}  // namespace kernelrep
