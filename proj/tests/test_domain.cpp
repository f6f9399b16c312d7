#include <gtest/gtest.h>

#include "mgc/domain.hpp"

namespace {

using namespace mgc;

TEST(Domain, WeekdayDayAndNightTariff) {
  const GridContract ct;
  // 2019-05-22 is a Wednesday.
  EXPECT_DOUBLE_EQ(import_price_at(make_instant(2019, 5, 22, 12), ct), 0.20);
  EXPECT_DOUBLE_EQ(import_price_at(make_instant(2019, 5, 22, 21), ct), 0.12);
  EXPECT_DOUBLE_EQ(import_price_at(make_instant(2019, 5, 22, 4, 59), ct), 0.12);
  EXPECT_DOUBLE_EQ(import_price_at(make_instant(2019, 5, 22, 5, 0), ct), 0.20);
  EXPECT_DOUBLE_EQ(import_price_at(make_instant(2019, 5, 22, 20, 0), ct), 0.12);
}

TEST(Domain, WeekendIsNightTariff) {
  const GridContract ct;
  EXPECT_DOUBLE_EQ(import_price_at(make_instant(2019, 5, 25, 12), ct), 0.12);
  EXPECT_DOUBLE_EQ(import_price_at(make_instant(2019, 5, 26, 12), ct), 0.12);
}

TEST(Domain, NextBoundaryIsStrictlyLater) {
  const MarketClock clock;
  EXPECT_EQ(next_boundary(make_instant(2019, 5, 22, 10, 7), clock), make_instant(2019, 5, 22, 10, 15));
  EXPECT_EQ(next_boundary(make_instant(2019, 5, 22, 10, 15), clock), make_instant(2019, 5, 22, 10, 30));
  EXPECT_EQ(next_boundary(make_instant(2019, 5, 22, 23, 59), clock), make_instant(2019, 5, 23, 0, 0));
  EXPECT_DOUBLE_EQ(time_to_boundary_hours(make_instant(2019, 5, 22, 10, 7), clock), 8.0 / 60.0);
  EXPECT_DOUBLE_EQ(time_to_boundary_hours(make_instant(2019, 5, 22, 10, 0), clock), 0.25);
}

TEST(Domain, ClockCounts) {
  const MarketClock clock;
  EXPECT_EQ(clock.n_periods(), 96);
  EXPECT_EQ(clock.steps_per_period(), 15);
  MarketClock bad;
  bad.step = minutes{7};
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Domain, StorageValidation) {
  StorageDevice s;
  s.s_max = 10;
  s.s_init = 11;
  EXPECT_THROW(s.validate(), ConfigError);
  s.s_init = 5;
  s.eta_charge = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.eta_charge = 1.0;
  s.s_end = 12.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.s_end = 3.0;
  EXPECT_NO_THROW(s.validate());
}

TEST(Domain, SplitSampleUsesShares) {
  DeviceFleet f;
  f.non_flexible_loads[0].share = 0.75;
  f.sheddable_loads.push_back({"hvac", 0.25, 1.0});
  f.steerable_generators.push_back({"diesel", 300.0, 0.3});
  const auto s = split_sample(f, 400.0, 200.0);
  EXPECT_DOUBLE_EQ(s.total_load_kw(), 200.0);
  EXPECT_DOUBLE_EQ(s.total_pv_kw(), 400.0);
  EXPECT_DOUBLE_EQ(s.steerable_kw[0], 300.0);
}

TEST(Domain, RealizedAveragePower) {
  MicrogridState st;
  EXPECT_EQ(st.realized_average_kw(), 0.0);
  st.period_import_kwh = 10.0;
  st.elapsed_in_period = minutes{5};
  EXPECT_NEAR(st.realized_average_kw(), 120.0, 1e-12);
}

}  // namespace
