#include "quadsim/model.hpp"

#include <cmath>

namespace quadsim {

namespace {

void require_positive(ValidationReport& rep, double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    rep.failures.push_back(std::string(name) + " must be positive and finite");
  }
}

void require_nonneg(ValidationReport& rep, double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    rep.failures.push_back(std::string(name) + " must be non-negative and finite");
  }
}

void finish(ValidationReport& rep) {
  if (!rep.failures.empty()) {
    rep.level = ValidationLevel::Fail;
  } else if (!rep.warnings.empty()) {
    rep.level = ValidationLevel::Warn;
  } else {
    rep.level = ValidationLevel::Pass;
  }
}

}  // namespace

ValidationReport validate_params(const QuadcopterParams& p) {
  ValidationReport rep;
  require_positive(rep, p.M, "M");
  require_positive(rep, p.l, "l");
  require_positive(rep, p.g, "g");
  require_positive(rep, p.Jxx, "Jxx");
  require_positive(rep, p.Jyy, "Jyy");
  require_positive(rep, p.Jzz, "Jzz");
  require_positive(rep, p.Jp, "Jp");
  require_nonneg(rep, p.gamma1, "gamma1");
  require_nonneg(rep, p.gamma2, "gamma2");
  if (rep.failures.empty() && p.Jzz > p.Jxx + p.Jyy) {
    rep.warnings.push_back("Jzz exceeds Jxx + Jyy (planar-body bound violated; "
                           "typical of measured inertias)");
  }
  finish(rep);
  return rep;
}

ValidationReport validate_propeller(const PropellerModel& m) {
  ValidationReport rep;
  require_positive(rep, m.h1, "h1");
  require_positive(rep, m.c1, "c1");
  require_positive(rep, m.g1, "g1");
  require_nonneg(rep, m.g2, "g2");
  if (!(m.h2 >= 0.0 && m.h2 <= 255.0)) {
    rep.failures.push_back("h2 must lie in [0, 255]");
  }
  finish(rep);
  return rep;
}

}  // namespace quadsim
