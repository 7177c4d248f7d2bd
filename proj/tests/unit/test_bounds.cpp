#include <gtest/gtest.h>

#include <cmath>

#include "ucp/bounds.hpp"
#include "ucp/error.hpp"
#include "ucp/weights.hpp"

namespace {

TEST(SupervisedBounds, MarginalAndConditional) {
  auto b = ucp::supervised_coverage_bounds(99, 0.1, 0.1);
  EXPECT_NEAR(b.marginal.lo, 0.9, 1e-15);
  EXPECT_NEAR(b.marginal.hi, 0.91, 1e-15);
  auto big = ucp::supervised_coverage_bounds(2000, 0.1, 0.1);
  const double half = std::sqrt(std::log(20.0) / 4000.0);
  EXPECT_NEAR(half, 0.02737, 5e-6);
  EXPECT_NEAR(big.marginal.lo - big.conditional.lo, half, 1e-15);
  EXPECT_NEAR(big.conditional.hi - big.marginal.hi, half, 1e-15);
  auto huge = ucp::supervised_coverage_bounds(100000000, 0.1, 0.1);
  EXPECT_LT(huge.conditional.hi - huge.conditional.lo, 1e-3);
}

ucp::BoundInputs base() {
  ucp::BoundInputs in;
  in.n = 1000;
  in.m = 1000;
  in.delta = 0.1;
  in.kappa = 1.0;
  in.rkhs_norm = 10.0;
  in.approx_error = 0.0;
  in.num_candidates = 1;
  return in;
}

TEST(ExcessGapKernel, NumericValues) {
  auto in = base();
  EXPECT_NEAR(ucp::excess_gap_kernel(in), 2.0 * (1 + std::sqrt(std::log(20.0))) * std::sqrt(0.002) * 10, 1e-12);
  EXPECT_NEAR(ucp::excess_gap_kernel(in), 2.442, 1e-3);  // stated to three decimals
  in.rkhs_norm = 0.0;
  EXPECT_EQ(ucp::excess_gap_kernel(in), 0.0);
}

TEST(ExcessGapKernel, ScalingAndUnionFlag) {
  auto in = base();
  const double g = ucp::excess_gap_kernel(in);
  in.n *= 2;
  in.m *= 2;
  EXPECT_NEAR(ucp::excess_gap_kernel(in), g / std::sqrt(2.0), 1e-12);
  in = base();
  in.num_candidates = 10;
  const double with = ucp::excess_gap_kernel(in, true);
  const double without = ucp::excess_gap_kernel(in, false);
  EXPECT_GT(with, without);
  EXPECT_NEAR(without, g, 1e-15);
}

TEST(ExcessGapKernel, MonotoneInDocumentedDirections) {
  auto in = base();
  in.approx_error = 0.01;
  const double g = ucp::excess_gap_kernel(in);
  auto moved = [&](auto edit) {
    auto c = in;
    edit(c);
    return ucp::excess_gap_kernel(c);
  };
  EXPECT_LT(moved([](auto& c) { c.n *= 1.5; }), g);
  EXPECT_LT(moved([](auto& c) { c.m *= 1.5; }), g);
  EXPECT_GT(moved([](auto& c) { c.rkhs_norm *= 1.5; }), g);
  EXPECT_GT(moved([](auto& c) { c.approx_error += 0.01; }), g);
  EXPECT_GT(moved([](auto& c) { c.delta /= 2; }), g);
}

TEST(ExcessGapGeneral, Values) {
  ucp::BoundInputs in;
  in.n = in.m = 1000;
  in.delta = 0.1;
  in.v_opt = 0.0;
  EXPECT_EQ(ucp::excess_gap_general(in, 0.0, 0.0, 0.0), 0.0);
  in.v_opt = 0.01;
  in.approx_error = 0.02;
  EXPECT_NEAR(ucp::excess_gap_general(in, 0.005, 0.005, 1.0), 0.05 + std::sqrt(0.002 * std::log(20.0) / 2), 1e-15);
  EXPECT_NEAR(ucp::excess_gap_general(in, 0.005, 0.005, 1.0), 0.1047, 5e-5);
  EXPECT_NEAR(ucp::excess_gap_general(in, 0.005, 0.005, 0.0), 0.05, 1e-15);
}

TEST(ObjectiveValueBound, Values) {
  const double v = ucp::objective_value_bound(1.0, 1.0, 100, 100, 0.5, 0.0);
  EXPECT_NEAR(v, 0.4 + 2 * std::sqrt(0.02 * std::log(2.0) / 2), 1e-15);
  EXPECT_NEAR(v, 0.5665, 5e-5);
  EXPECT_NEAR(ucp::objective_value_bound(1.0, 1.0, 100, 100, 0.5, 1e-3) - v, 1e-3, 1e-15);
  EXPECT_LT(ucp::objective_value_bound(1.0, 1.0, 1e14, 1e14, 0.5, 0.0), 1e-6);
}

TEST(CoverageErrorBound, ClosedForm) {
  auto in = base();
  in.approx_error = 0.03;
  EXPECT_NEAR(ucp::coverage_error_bound_kernel(in), 0.03 + 2 * (1 + std::sqrt(std::log(10.0))) * 10 * std::sqrt(0.002),
              1e-12);
}

TEST(DiagnosticE, Cases) {
  ucp::ScoreMatrix s;
  s.values.resize(1, 2);
  s.values << 0.1, 0.9;
  const std::vector<ucp::Label> y{0};
  ucp::LabelWeights half(ucp::Vector::Constant(2, 0.5), 2);
  EXPECT_DOUBLE_EQ(ucp::coverage_diagnostic_E(half, s, 0.5, y), 0.5);
  EXPECT_DOUBLE_EQ(ucp::coverage_diagnostic_E(half, s, 1.0, y), 0.0);
  EXPECT_DOUBLE_EQ(ucp::coverage_diagnostic_E(ucp::supervised_weights(y, 2), s, 0.5, y), 0.0);
  ucp::LabelWeights wrong(2, 2);
  EXPECT_THROW((void)ucp::coverage_diagnostic_E(wrong, s, 0.5, y), ucp::ShapeError);
}

TEST(BoundInputs, Validation) {
  auto in = base();
  in.delta = 0.0;
  EXPECT_THROW(in.validate(), ucp::ValidationError);
  in = base();
  in.rkhs_norm = -1.0;
  EXPECT_THROW(in.validate(), ucp::ValidationError);
}

}  // namespace
