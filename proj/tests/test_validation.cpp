#include <doctest.h>

#include "tjm/validation.hpp"

using namespace tjm;
using namespace tjm::validation;

// Only the cheap checks and the mutation hooks run here; the full
// acceptance matrix lives in the dedicated acceptance binary.

TEST_CASE("trotter order check passes at second order") {
  const CheckReport r = check_trotter_order(Scale::Quick);
  CHECK(r.pass);
  CHECK(r.observed > 3.0);
  CHECK(r.observed < 5.0);
}

TEST_CASE("mutation: first-order splitting is detected by the order check") {
  const CheckReport r = check_trotter_order(Scale::Quick, /*trotter_order=*/1);
  // the error ratio collapses to ~2
  CHECK(r.observed > 1.6);
  CHECK(r.observed < 2.4);
}

TEST_CASE("mutation: a biased martingale jump ratio fails the mean check") {
  StepperTweaks biased;
  biased.jump_ratio_scale = 1.25;
  const CheckReport r = check_martingale_mean(Scale::Quick, biased);
  CHECK_FALSE(r.pass);
}

TEST_CASE("tdvp exactness check holds at quick scale") {
  const CheckReport r = check_tdvp_exactness(Scale::Quick);
  CHECK(r.pass);
}

TEST_CASE("completeness and trace check holds at quick scale") {
  const CheckReport r = check_completeness_and_trace(Scale::Quick);
  CHECK(r.pass);
}

TEST_CASE("reports serialize to JSON") {
  std::vector<CheckReport> reports{{"sample_check", 0.5, 1.0, true, 0.01, "detail"}};
  const std::string path = "validation_report_test.json";
  write_report_json(reports, path);
  std::remove(path.c_str());
}
