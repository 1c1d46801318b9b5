#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "loadveil/profiles.hpp"

namespace loadveil {

enum class MeasureId {
  CS, dCS, R2, dR2, Rp, CE, dCE, dERz, dERnz, dFMed, dFMr, dFM, K, KL, dKL,
  LV, MIs, MIi, MIm, dMIb, dMIs, dMIi, RUr, RUw, TVD,
};

inline constexpr int kMeasureCount = 25;

// Direction in which the raw value means more privacy.  oriented_value is
// normalized so that higher always means more private.
enum class Orientation { HigherMorePrivate, LowerMorePrivate };

// A measure plus hyperparameter overrides.  Recognized keys: h (histogram
// bins), k (nn count), clusters, tau (edge threshold; default derives from
// x), w (alignment window), base (log base), estimator (0 histogram, 1 nn),
// range_lo/range_hi (explicit histogram range), k_reg (regression nn
// count).  Unknown keys are rejected.  `features` is the segmentation
// vector consumed only by MIm.
struct MeasureSpec {
  MeasureId id;
  std::map<std::string, double> params;
  std::vector<double> features;
};

struct PrivacyScore {
  double value = 0.0;
  MeasureId id = MeasureId::CS;
  double oriented_value = 0.0;
  std::string note;  // degeneracies worth surfacing, empty otherwise
};

struct MeasureInfo {
  MeasureId id;
  std::string_view name;
  Orientation orientation;
  bool uses_differences;   // operates on first differences of both series
  bool reconstructed;      // implementation fixed here, not by a reference
  std::string_view formula;
};

const std::vector<MeasureInfo>& measure_catalog();
const MeasureInfo& measure_info(MeasureId id);
std::string_view measure_name(MeasureId id);
Orientation measure_orientation(MeasureId id);
MeasureId measure_from_name(std::string_view name);

// Evaluates the measure on a (user load, grid load) pair.  Both profiles
// must have the same length; difference-based measures need T >= 3.
PrivacyScore evaluate(const MeasureSpec& spec, const LoadProfile& x, const LoadProfile& y);

}  // namespace loadveil
