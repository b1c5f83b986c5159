// Copyright 2026 The lambdarc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "lambdarc/allocation.hpp"
#include "lambdarc/rng.hpp"

using namespace lambdarc;

TEST_CASE("gop_budget formula") {
  AllocatorState st;
  st.r_avg = 0.1;
  st.r_am = 0.01;
  st.overflow_accum = 0.4;
  st.smooth_window = 40;
  CHECK(gop_budget(st, 8) == Approx(0.64));

  st.r_am = 0.0;
  st.overflow_accum = 0.0;
  CHECK(gop_budget(st, 8) == Approx(0.8));

  SECTION("severe overflow drives the raw budget negative; callers clamp") {
    st.overflow_accum = 100.0;
    const double raw = gop_budget(st, 8);
    CHECK(raw < 0.0);
    const double min_rate_bpp = 0.001;
    CHECK(std::max(raw, 8 * min_rate_bpp) == Approx(0.008));
  }

  CHECK_THROWS_AS(gop_budget(st, 0), std::invalid_argument);
}

TEST_CASE("amortize_intra") {
  AllocatorState st;
  st.intra_period = 33;
  amortize_intra(st, 0.04, 0.36);
  CHECK(st.r_am == Approx(0.01));
  CHECK(st.frames_left_in_intra_period == 32);

  SECTION("zero overhead amortizes to zero") {
    amortize_intra(st, 0.05, 0.05);
    CHECK(st.r_am == 0.0);
  }

  SECTION("amortized total equals the overhead exactly") {
    amortize_intra(st, 0.04, 0.36, 33);
    CHECK(st.r_am * 32 == Approx(0.36 - 0.04).epsilon(1e-15));
  }

  SECTION("one-frame period with non-zero overhead is an error") {
    CHECK_THROWS_AS(amortize_intra(st, 0.04, 0.36, 1), std::invalid_argument);
    CHECK_NOTHROW(amortize_intra(st, 0.04, 0.04, 1));
  }
}

TEST_CASE("record_frame ledger rules") {
  AllocatorState st;
  st.r_avg = 0.1;

  SECTION("non-intra on target leaves the window unchanged") {
    record_frame(st, 0.1, 0.1, false);
    CHECK(st.overflow_accum == 0.0);
  }

  SECTION("non-intra overflow accumulates additively") {
    record_frame(st, 0.1, 0.12, false);
    record_frame(st, 0.1, 0.12, false);
    CHECK(st.overflow_accum == Approx(0.04));
  }

  SECTION("intra frames never touch the window") {
    record_frame(st, 0.1, 5.0, true);
    CHECK(st.overflow_accum == 0.0);
  }

  SECTION("amortization expires when the intra period ends") {
    st.intra_period = 4;
    amortize_intra(st, 0.1, 0.4, 4);
    CHECK(st.r_am > 0.0);
    record_frame(st, 0.1, 0.1, false);
    record_frame(st, 0.1, 0.1, false);
    CHECK(st.r_am > 0.0);
    record_frame(st, 0.1, 0.1, false);
    CHECK(st.frames_left_in_intra_period == 0);
    CHECK(st.r_am == 0.0);
  }
}

TEST_CASE("scheduled window compensation is retired from the ledger") {
  AllocatorState st;
  st.r_avg = 0.1;
  st.smooth_window = 40;
  st.overflow_accum = 2.0;

  const double budget = gop_budget(st, 8);
  CHECK(budget == Approx((0.1 - 2.0 / 40.0) * 8));
  schedule_compensation(st, 8);
  CHECK(st.overflow_accum == Approx(2.0 - 2.0 / 40.0 * 8));

  SECTION("repeated budgeting pays the whole debt down over one window") {
    for (int i = 0; i < 20; ++i) schedule_compensation(st, 8);
    CHECK(std::abs(st.overflow_accum) < 0.05);
  }

  SECTION("negative debt retires symmetrically") {
    st.overflow_accum = -1.0;
    schedule_compensation(st, 4);
    CHECK(st.overflow_accum == Approx(-0.9));
  }
}

TEST_CASE("allocate_pictures") {
  const double min_rate_bpp = 100.0 / (416.0 * 240.0);

  SECTION("single frame receives the whole budget at the model's lambda") {
    const PictureModel pic{{4.4, -1.35, 0.005, 1.0}, 1.0, 1};
    const GopAllocation out = allocate_pictures({&pic, 1}, 0.1, min_rate_bpp);
    CHECK(out.budgets.size() == 1);
    CHECK(out.budgets[0].target_bpp == Approx(0.1).epsilon(1e-4));
    CHECK(out.central_lambda == Approx(92.2).epsilon(1e-3));
    CHECK_FALSE(out.floor_limited);
  }

  SECTION("two identical frames with equal weights split evenly") {
    const PictureModel pic{{4.4, -1.35, 0.005, 1.0}, 2.0, 2};
    const std::vector<PictureModel> pics{pic, pic};
    const GopAllocation out = allocate_pictures(pics, 0.2, min_rate_bpp);
    CHECK(out.budgets[0].target_bpp == Approx(0.1).epsilon(1e-4));
    CHECK(out.budgets[1].target_bpp == Approx(out.budgets[0].target_bpp));
  }

  SECTION("budget below the floor pins every frame at minRate") {
    const PictureModel pic{{4.4, -1.35, 0.005, 1.0}, 1.0, 1};
    const std::vector<PictureModel> pics{pic, pic};
    const GopAllocation out = allocate_pictures(pics, 1.5 * min_rate_bpp, min_rate_bpp);
    CHECK(out.floor_limited);
    CHECK(out.budgets[0].target_bpp == Approx(min_rate_bpp));
    CHECK(out.budgets[1].target_bpp == Approx(min_rate_bpp));
    CHECK(out.budgets[0].min_rate_bits == kMinRateBits);
  }

  SECTION("achieved total matches the requested budget within tolerance") {
    SplitMix64 rng(404);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<PictureModel> pics;
      const int n = rng.uniform_int(2, 8);
      for (int i = 0; i < n; ++i) {
        pics.push_back({{rng.log_uniform(1.0, 10.0), rng.uniform(-1.8, -1.0),
                         rng.uniform(0.0, 0.01), 1.0},
                        rng.uniform(1.0, 10.0), rng.uniform_int(1, 4)});
      }
      const double r_gop = rng.uniform(0.05, 2.0);
      const GopAllocation out = allocate_pictures(pics, r_gop, min_rate_bpp);
      double total = 0.0;
      for (const FrameBudget& b : out.budgets) total += b.target_bpp;
      if (!out.floor_limited) {
        CHECK(std::abs(total - r_gop) <= std::max(1e-6, 1e-4 * r_gop));
      }
    }
  }

  SECTION("total rate is non-increasing in the central lambda") {
    SplitMix64 rng(505);
    std::vector<PictureModel> pics;
    for (int i = 0; i < 6; ++i) {
      pics.push_back({{rng.log_uniform(1.0, 10.0), rng.uniform(-1.8, -1.0),
                       rng.uniform(0.0, 0.01), 1.0},
                      rng.uniform(1.0, 10.0), 2});
    }
    auto total_at = [&](double lam) {
      double s = 0.0;
      for (const PictureModel& p : pics) {
        s += std::max(bpp_from_lambda(p.coeffs, lam * p.omega), min_rate_bpp);
      }
      return s;
    };
    double prev = total_at(1e-4);
    for (double lam = 1e-3; lam <= 1e6; lam *= 3.0) {
      const double cur = total_at(lam);
      CHECK(cur <= prev + 1e-15);
      prev = cur;
    }
  }

  SECTION("scaling every omega leaves budgets unchanged") {
    SplitMix64 rng(606);
    std::vector<PictureModel> pics;
    for (int i = 0; i < 5; ++i) {
      pics.push_back({{rng.log_uniform(1.0, 10.0), rng.uniform(-1.8, -1.0),
                       rng.uniform(0.0, 0.01), 1.0},
                      rng.uniform(1.0, 10.0), 3});
    }
    const GopAllocation base = allocate_pictures(pics, 0.5, min_rate_bpp);
    for (double s : {0.25, 4.0}) {
      std::vector<PictureModel> scaled = pics;
      for (PictureModel& p : scaled) p.omega *= s;
      const GopAllocation out = allocate_pictures(scaled, 0.5, min_rate_bpp);
      for (std::size_t i = 0; i < pics.size(); ++i) {
        CHECK(out.budgets[i].target_bpp == Approx(base.budgets[i].target_bpp).epsilon(1e-6));
      }
      CHECK(out.central_lambda == Approx(base.central_lambda / s).epsilon(1e-6));
    }
  }
}

TEST_CASE("omega defaults per structure kind") {
  const auto ra = omega_defaults(GopKind::RandomAccess);
  CHECK(ra[1] == 1.0);
  CHECK(ra[2] == 2.5);
  CHECK(ra[3] == 4.5);
  CHECK(ra[4] == 10.0);
  for (GopKind kind : {GopKind::LowDelayP, GopKind::LowDelayB}) {
    const auto ld = omega_defaults(kind);
    CHECK(ld[1] == 1.0);
    CHECK(ld[2] == 4.0);
    CHECK(ld[3] == 5.0);
  }
}

TEST_CASE("intra_target") {
  AllocatorState st;
  st.intra_period = 32;
  st.r_avg = 0.1;
  CHECK(intra_target(st, 0.04, 4.0) == Approx(0.16));

  SECTION("capped at half the intra period consumption") {
    CHECK(intra_target(st, 1.0, 4.0) == Approx(0.5 * 32 * 0.1));
  }

  SECTION("kappa = 1 passes the inter estimate through when under the cap") {
    CHECK(intra_target(st, 0.04, 1.0) == Approx(0.04));
  }

  CHECK_THROWS_AS(intra_target(st, 0.0, 4.0), std::invalid_argument);
}
