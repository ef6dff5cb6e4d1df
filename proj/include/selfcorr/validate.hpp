#pragma once

// Fast self-check suite behind `selfcorr validate`.

#include <functional>
#include <string>
#include <vector>

#include "selfcorr/gaussian.hpp"

namespace selfcorr {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Implementations under test. Replacing one lets a caller confirm the suite
/// actually notices a broken implementation.
struct ValidationHooks {
  std::function<double(const GaussianParams&, const GaussianParams&)> gaussian_w2;
};

ValidationHooks default_hooks();

std::vector<PropertyResult> run_validation(const ValidationHooks& hooks = default_hooks());

}  // namespace selfcorr
