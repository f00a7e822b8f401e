#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "loopsurro/errors.hpp"
#include "loopsurro/sampling.hpp"
#include "loopsurro/sobol.hpp"
#include "test_support.hpp"

using namespace loopsurro;

namespace {

InputBounds unit_box(std::size_t dim) {
  InputBounds b;
  b.dims.assign(dim, Interval{0.0, 1.0});
  return b;
}

// Largest |fraction inside [0,a)x[0,b) - a*b| over a 64x64 grid of anchors.
double grid_star_discrepancy(const Matrix& pts) {
  const std::size_t n = pts.cols();
  double worst = 0.0;
  for (int ia = 1; ia <= 64; ++ia) {
    for (int ib = 1; ib <= 64; ++ib) {
      const double a = ia / 64.0, b = ib / 64.0;
      std::size_t inside = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (pts(0, j) < a && pts(1, j) < b) ++inside;
      worst = std::max(worst, std::abs(static_cast<double>(inside) / n - a * b));
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE("sampling") {

TEST_CASE("profile_bounds on the simpleloop trajectory") {
  const Problem p = simpleloop();
  const InputBounds b = profile_bounds(p, 0.0, 2.0, 1000);
  REQUIRE(b.size() == 3);
  CHECK(b.dims[1].min == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(b.dims[1].max == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(std::abs(b.dims[2].min) < 1e-15);
  CHECK(b.dims[2].max == doctest::Approx(std::sqrt(1.8)).epsilon(1e-15));
  const InputBounds coarse = profile_bounds(p, 0.0, 2.0, 100);
  const InputBounds fine = profile_bounds(p, 0.0, 2.0, 10000);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(coarse.dims[i].min - fine.dims[i].min) < 1e-9);
    CHECK(std::abs(coarse.dims[i].max - fine.dims[i].max) < 1e-9);
  }
}

TEST_CASE("profile_bounds: constant trajectory, margin, errors") {
  const TrajectoryFn constant = [](double) { return std::vector<double>{4.0, -1.0}; };
  const InputBounds c = profile_bounds(constant, 0.0, 1.0, 10);
  CHECK(c.dims[0].min == c.dims[0].max);
  CHECK(c.dims[1].min == -1.0);
  const TrajectoryFn ramp = [](double t) { return std::vector<double>{t}; };
  const InputBounds m = profile_bounds(ramp, 0.0, 1.0, 11, 0.1);
  CHECK(m.dims[0].min == doctest::Approx(-0.05));
  CHECK(m.dims[0].max == doctest::Approx(1.05));
  CHECK(m.margin_fraction == 0.1);
  CHECK_THROWS_AS(profile_bounds(ramp, 0.0, 1.0, 1), ConfigError);
  const TrajectoryFn bad = [](double t) { return std::vector<double>{1.0 / (t - 0.5)}; };
  CHECK_THROWS_AS(profile_bounds(bad, 0.0, 1.0, 2), EvaluationError);
}

TEST_CASE("Sobol points match the unscrambled reference sequence") {
  SobolSequence seq(32);
  const std::vector<std::size_t> dims{0, 1, 2, 5, 10, 20, 31};
  const std::vector<std::pair<std::size_t, std::vector<double>>> expected{
      {0, {0, 0, 0, 0, 0, 0, 0}},
      {1, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}},
      {2, {0.75, 0.25, 0.25, 0.75, 0.75, 0.25, 0.25}},
      {3, {0.25, 0.75, 0.75, 0.25, 0.25, 0.75, 0.75}},
      {7, {0.125, 0.625, 0.375, 0.375, 0.625, 0.875, 0.875}},
      {100, {0.4140625, 0.2578125, 0.7734375, 0.7421875, 0.4609375, 0.7578125, 0.4140625}},
      {1029,
       {0.87646484375, 0.50146484375, 0.32275390625, 0.46923828125, 0.69677734375,
        0.14990234375, 0.34130859375}}};
  std::size_t index = 0;
  for (const auto& [target, values] : expected) {
    std::vector<double> point;
    while (index <= target) {
      point = seq.next();
      ++index;
    }
    for (std::size_t k = 0; k < dims.size(); ++k)
      CHECK_MESSAGE(point[dims[k]] == values[k], "index " << target << " dim " << dims[k]);
  }
}

TEST_CASE("sobol_sample skips the origin by default and is deterministic") {
  const Matrix a = sobol_sample(unit_box(3), 16);
  CHECK(a(0, 0) == 0.5);
  CHECK(a == sobol_sample(unit_box(3), 16));
  const Matrix z = sobol_sample(unit_box(3), 2, 0);
  CHECK(z(0, 0) == 0.0);
  CHECK(z(0, 1) == 0.5);
  InputBounds degenerate;
  degenerate.dims = {{2, 2}, {5, 5}};
  const Matrix d = sobol_sample(degenerate, 50);
  for (std::size_t j = 0; j < 50; ++j) {
    CHECK(d(0, j) == 2.0);
    CHECK(d(1, j) == 5.0);
  }
  CHECK_THROWS_AS(sobol_sample(unit_box(33), 4), ConfigError);
}

TEST_CASE("Sobol beats seeded uniform random on grid discrepancy") {
  for (std::size_t n : {256u, 1024u}) {
    const Matrix s = sobol_sample(unit_box(2), n);
    const Matrix r = test::random_matrix(2, n, 12345, 0.0, 1.0);
    CHECK(grid_star_discrepancy(s) < grid_star_discrepancy(r));
  }
}

TEST_CASE("samples stay inside their bounds") {
  InputBounds b;
  b.dims = {{-3, 1}, {0.25, 0.5}, {10, 1000}, {-1e-3, 1e-3}};
  for (std::size_t n : {1u, 7u, 100u, 1000u}) {
    const Matrix s = sobol_sample(b, n);
    const Matrix l = lhs_sample(b, n, n);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(b.contains(s.col(j)));
      CHECK(b.contains(l.col(j)));
    }
  }
}

TEST_CASE("LHS stratification") {
  const Matrix four = lhs_sample(unit_box(1), 4, 3);
  std::vector<int> hits(4, 0);
  for (std::size_t j = 0; j < 4; ++j) ++hits[std::min<std::size_t>(3, four(0, j) * 4)];
  CHECK(hits == std::vector<int>{1, 1, 1, 1});

  const Matrix big = lhs_sample(unit_box(3), 1000, 9);
  for (std::size_t d = 0; d < 3; ++d) {
    std::vector<int> deciles(10, 0);
    for (std::size_t j = 0; j < 1000; ++j) ++deciles[std::min<std::size_t>(9, big(d, j) * 10)];
    CHECK(deciles == std::vector<int>(10, 100));
  }
  CHECK(lhs_sample(unit_box(3), 1000, 9) == big);
  CHECK_FALSE(lhs_sample(unit_box(3), 1000, 10) == big);
}

TEST_CASE("sample method names") {
  for (auto m : {SampleMethod::Sobol, SampleMethod::Lhs, SampleMethod::Trajectory})
    CHECK(sample_method_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(sample_method_from_string("grid"), ConfigError);
}

TEST_CASE("generate_labeled produces labels that solve the loop") {
  const Problem p = simpleloop();
  const InputBounds b = profile_bounds(p, 0.0, 2.0, 200);
  const Dataset in = sobol_dataset(b, 100);
  LabelOptions opt;
  opt.seed = 5;
  opt.seed_range = estimate_output_range(p);
  const Dataset out = generate_labeled(p.system, in, opt);
  REQUIRE(out.labeled());
  CHECK(out.failed + out.size() == 100);
  CHECK(out.problem == "simpleloop");
  CHECK(out.generation_ms > 0.0);
  for (std::size_t j = 0; j < out.size(); ++j) {
    CHECK(std::abs(p.system.eval_residual(out.inputs.col(j), out.labels->col(j))[0]) < 1e-8);
    CHECK(b.contains(out.inputs.col(j)));
  }
  const Dataset again = generate_labeled(p.system, in, opt);
  CHECK(*again.labels == *out.labels);
}

TEST_CASE("generate_labeled drops failures and reports them") {
  const Problem p = simpleloop();
  Dataset in;
  in.inputs = Matrix::from_rows({{0, 0, 0, 0}, {1, 1.5, 2, 2.5}, {0.5, 0.3, 0, 0.8}});
  LabelOptions opt;
  opt.restarts = 0;
  opt.seed_range = {{0.0, 0.0}};
  const Dataset out = generate_labeled(p.system, in, opt);
  CHECK(out.failed == 1);
  CHECK(out.size() == 3);
  // Every seed singular: more than half fail.
  in.inputs = Matrix::from_rows({{0, 0}, {1, 2}, {0, 0}});
  CHECK_THROWS_AS(generate_labeled(p.system, in, opt), GenerationError);
}

TEST_CASE("estimate_output_range covers the closed-form trajectory") {
  const Problem p = simpleloop();
  const auto range = estimate_output_range(p);
  REQUIRE(range.size() == 1);
  CHECK(range[0].min < range[0].max);
  CHECK(range[0].max - range[0].min >= 0.2);
}

TEST_CASE("dataset CSV round trip keeps every bit") {
  const Problem p = complexsqrt();
  InputBounds b;
  b.dims = {{-1, 1}, {-1, 1}};
  const Dataset in = lhs_dataset(b, 40, 77);
  LabelOptions opt;
  opt.seed_range = {{-2, 2}, {-2, 2}};
  Dataset d = generate_labeled(p.system, in, opt);
  const auto dir = std::filesystem::temp_directory_path() / "loopsurro_sampling_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "data.csv").string();
  save_dataset(d, path, "abc123");
  const Dataset back = load_dataset(path);
  CHECK(back.inputs == d.inputs);
  REQUIRE(back.labeled());
  CHECK(*back.labels == *d.labels);
  CHECK(back.method == SampleMethod::Lhs);
  CHECK(back.seed == d.seed);
  CHECK(back.bounds == b);
  CHECK(back.problem == "complexsqrt");
  CHECK(back.failed == d.failed);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cluster targets pick one label per solution branch") {
  const Problem p = simpleloop();
  InputBounds b;
  b.dims = {{0, 0}, {1, 1.2}, {0, 0.5}};
  LabelOptions opt;
  opt.seed = 3;
  opt.seed_range = {{-3, 3}};
  const Dataset d = generate_labeled(p.system, sobol_dataset(b, 200), opt);
  const GuidanceTargets g = labels_to_clusters_targets(d, 2, 1);
  REQUIRE(g.targets.cols() == 2);
  int lower = 0, upper = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto x = d.inputs.col(g.representatives[c]);
    const auto [lo, hi] = simpleloop_roots(x[1], x[2]);
    const double y = g.targets(0, c);
    CHECK(y == (*d.labels)(0, g.representatives[c]));
    if (std::abs(y - lo) < 1e-8) ++lower;
    if (std::abs(y - hi) < 1e-8) ++upper;
  }
  CHECK(lower == 1);
  CHECK(upper == 1);

  const GuidanceTargets one = labels_to_clusters_targets(d, 1, 1);
  const double centroid = one.clusters.centroids(0, 0);
  double best = INFINITY;
  for (std::size_t j = 0; j < d.size(); ++j)
    best = std::min(best, std::abs((*d.labels)(0, j) - centroid));
  CHECK(std::abs(one.targets(0, 0) - centroid) == best);
  CHECK_THROWS_AS(labels_to_clusters_targets(d, d.size() + 1, 1), ConfigError);

  Dataset same = d;
  same.labels->fill(0.25);
  CHECK(labels_to_clusters_targets(same, 1, 0).targets(0, 0) == 0.25);
}

}  // TEST_SUITE
