#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "rjbma/errors.hpp"

namespace rjbma {
namespace {

Table small_table() {
  Table t;
  t.add("Y", {1.0, 2.0, 3.0, 4.0});
  t.add("trt", {0, 1, 0, 1});
  t.add("X_1", {2.0, 4.0, 6.0, 3.0});
  t.add("Z_1", {1, 0, 0, 1});
  t.add("extra", {9, 9, 9, 9});
  return t;
}

const CandidateSpec kSpec{{"X_1"}, {"Z_1"}, {"X_1", "Z_1"}};

TEST(DataModel, ValidatesAndRescales) {
  const Dataset d = validate_dataset(small_table(), "Y", "trt", kSpec);
  EXPECT_EQ(d.n(), 4u);
  EXPECT_EQ(d.continuous_names, std::vector<std::string>{"X_1"});
  EXPECT_EQ(d.scale[0], (ScaleInfo{2.0, 6.0}));
  EXPECT_EQ(d.covariates.continuous[0], (std::vector<double>{0.0, 0.5, 1.0, 0.25}));
  EXPECT_EQ(d.continuous_raw[0], (std::vector<double>{2.0, 4.0, 6.0, 3.0}));
}

TEST(DataModel, ToTableRoundTrips) {
  const Dataset d = validate_dataset(small_table(), "Y", "trt", kSpec);
  EXPECT_EQ(validate_dataset(to_table(d), "Y", "trt", kSpec), d);
}

TEST(DataModel, ErrorsNameTheColumn) {
  Table t = small_table();
  try {
    validate_dataset(t, "Outcome", "trt", kSpec);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Outcome"), std::string::npos);
  }
  t.columns[3][0] = 2.0;
  try {
    validate_dataset(t, "Y", "trt", kSpec);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Z_1"), std::string::npos);
  }
  t = small_table();
  t.columns[1][2] = 0.5;
  EXPECT_THROW(validate_dataset(t, "Y", "trt", kSpec), ValidationError);
  t = small_table();
  t.columns[2] = {1, 1, 1, 1};
  EXPECT_THROW(validate_dataset(t, "Y", "trt", kSpec), ValidationError);
  t = small_table();
  t.columns[0][1] = std::nan("");
  EXPECT_THROW(validate_dataset(t, "Y", "trt", kSpec), ValidationError);
}

TEST(DataModel, CandidateRules) {
  EXPECT_THROW(validate_candidates({{"X_1"}, {}, {"Z_1"}}, "Y", "trt"), ValidationError);
  EXPECT_THROW(validate_candidates({{"X_1"}, {"X_1"}, {}}, "Y", "trt"), ValidationError);
  EXPECT_THROW(validate_candidates({{"trt"}, {}, {}}, "Y", "trt"), ValidationError);
  EXPECT_THROW(validate_candidates({}, "Y", "Y"), ValidationError);
  EXPECT_NO_THROW(validate_candidates(testing::benchmark_spec(), "Y", "trt"));
}

TEST(DataModel, NewDataIsClampedWithWarning) {
  const Dataset d = validate_dataset(small_table(), "Y", "trt", kSpec);
  Table raw;
  raw.add("trt", {1, 0});
  raw.add("X_1", {0.0, 5.0});
  raw.add("Z_1", {0, 1});
  const NewData nd = prepare_newdata(raw, d);
  EXPECT_EQ(nd.covariates.continuous[0], (std::vector<double>{0.0, 0.75}));
  ASSERT_EQ(nd.warnings.size(), 1u);
  EXPECT_NE(nd.warnings[0].find("X_1"), std::string::npos);
}

TEST(DataModel, SpecDefaultsAndValidation) {
  const auto [m, p] = default_specs();
  EXPECT_EQ(m.iter, 4000);
  EXPECT_EQ(m.warmup, 2000);
  EXPECT_EQ(m.thin, 1);
  EXPECT_EQ(m.chains, 4);
  EXPECT_DOUBLE_EQ(m.sigma_v, 0.1);
  EXPECT_TRUE(m.bma);
  EXPECT_DOUBLE_EQ(p.lambda_1, 0.1);
  EXPECT_DOUBLE_EQ(p.lambda_2, 1.0);
  EXPECT_DOUBLE_EQ(p.a_0, 0.01);
  EXPECT_DOUBLE_EQ(p.b_0, 0.01);
  EXPECT_EQ(p.degree, 3);
  EXPECT_EQ(p.k_max, 9);
  EXPECT_DOUBLE_EQ(p.w, 1.0);
  EXPECT_DOUBLE_EQ(p.sigma_B, std::sqrt(20.0));
  McmcSpecs bad = m;
  bad.warmup = bad.iter;
  EXPECT_THROW(validate(bad), ValidationError);
  bad = m;
  bad.thin = 0;
  EXPECT_THROW(validate(bad), ValidationError);
  PriorParams badp = p;
  badp.sigma_B = 0.0;
  EXPECT_THROW(validate(badp), ValidationError);
}

}  // namespace
}  // namespace rjbma
