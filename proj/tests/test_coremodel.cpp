#include <gtest/gtest.h>

#include "stochdispatch/coremodel.hpp"
#include "stochdispatch/errors.hpp"
#include "support.hpp"

namespace sd = stochdispatch;

TEST(ValidateSystem, XMinAboveXMaxNamesGenerator) {
  sd::SystemModel s = testsupport::desk_system();
  s.generators[1].x_min = 10.0;
  s.generators[1].x_max = 5.0;
  const sd::ValidationReport r = sd::validate_system(s);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].field, "generators[1].x_min");
  EXPECT_NE(r[0].message.find("g2"), std::string::npos);
}

TEST(ValidateSystem, ValidTwoGeneratorFleetIsClean) {
  EXPECT_TRUE(sd::validate_system(testsupport::desk_system()).empty());
}

TEST(ValidateSystem, CPlusBelowCMinusFlagged) {
  sd::SystemModel s = testsupport::desk_system();
  s.loads[0].c_plus = 10.0;
  s.loads[0].c_minus = 50.0;
  const sd::ValidationReport r = sd::validate_system(s);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NE(r[0].message.find("c_plus <= c_minus"), std::string::npos);
}

TEST(ValidateSystem, ReportsEveryViolation) {
  sd::SystemModel s = testsupport::desk_system();
  s.generators[0].ramp_up = -1.0;
  s.generators[0].cost = -3.0;
  s.wind[0].spill_cost = -1.0;
  EXPECT_EQ(sd::validate_system(s).size(), 3u);
  s.generators.clear();
  EXPECT_FALSE(sd::validate_system(s).empty());
}

TEST(ValidateSystem, ZeroCapacityRejected) {
  sd::SystemModel s = testsupport::desk_system();
  for (auto& g : s.generators) g.x_max = 0.0;
  EXPECT_FALSE(sd::validate_system(s).empty());
}

TEST(ValidateSystem, IsPure) {
  sd::SystemModel s = testsupport::desk_system();
  s.loads[0].c_plus = 1.0;
  const auto a = sd::validate_system(s);
  const auto b = sd::validate_system(s);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].field, b[i].field);
    EXPECT_EQ(a[i].message, b[i].message);
  }
}

TEST(ValidateStep, ChecksDimensionsAndPrevDispatch) {
  const sd::SystemModel s = testsupport::desk_system();
  sd::TimestepInput t = testsupport::desk_step();
  EXPECT_TRUE(sd::validate_step(s, t).empty());
  t.prev_dispatch = std::vector<double>{50.0, 150.0};
  ASSERT_EQ(sd::validate_step(s, t).size(), 1u);
  t.prev_dispatch = std::vector<double>{50.0};
  EXPECT_EQ(sd::validate_step(s, t).size(), 1u);
  t.prev_dispatch.reset();
  t.demand = {-1.0};
  t.wind_forecast = {1.0, 2.0};
  EXPECT_EQ(sd::validate_step(s, t).size(), 2u);
}

TEST(RequireValid, ThrowsWithFormattedReport) {
  sd::SystemModel s = testsupport::desk_system();
  s.loads[0].c_plus = 1.0;
  try {
    sd::require_valid(sd::validate_system(s), "system");
    FAIL() << "expected InputError";
  } catch (const sd::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("loads[0].c_plus"), std::string::npos);
  }
  EXPECT_NO_THROW(sd::require_valid({}, "system"));
}
