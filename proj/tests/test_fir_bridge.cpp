#include <catch_amalgamated.hpp>

#include <random>

#include "grainfield/fir_bridge.hpp"
#include "grainfield/noise.hpp"
#include "grainfield/render.hpp"
#include "support/oracles.hpp"

using namespace grainfield;
using Catch::Approx;

namespace {

GrainSchedule periodic(double dt, double dur, const char* subset, double jitter = 0.0) {
  SynthesisParams p;
  p.delta_t_s = dt;
  p.duration_s = dur;
  p.jitter_frac = jitter;
  return schedule_grains(p, make_subset(subset, builtin_layout_cube25()));
}

BasicAudioBuffer<double> white(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 0.1);
  std::vector<double> x(n);
  for (double& v : x) v = nd(gen);
  return BasicAudioBuffer<double>::mono(std::move(x), 48000);
}

}  // namespace

TEST_CASE("schedule reduction examples") {
  auto s = periodic(0.01, 0.03, "SP");
  REQUIRE(s.events.size() == 3);
  const auto taps = reduce_schedule_to_fir(s);
  REQUIRE(taps.taps.size() == 3);
  CHECK(taps.normalization() == Approx(std::sqrt(3.0)));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(taps.taps[i].lag_s == s.events[i].onset_s);
    CHECK(taps.taps[i].channel == s.events[i].target);
    CHECK(taps.taps[i].coefficient == 1.0);
  }

  s.events.clear();
  CHECK(reduce_schedule_to_fir(s).taps.empty());
  CHECK(reduce_schedule_to_fir(s).normalization() == 0.0);

  const auto grid = reduce_schedule_to_fir(periodic(0.01, 0.1, "ZEN"));
  REQUIRE(grid.taps.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(grid.taps[i].lag_s == static_cast<double>(i) * 0.01);
}

TEST_CASE("sparse FIR closed-form cases") {
  const auto x = generate_pink_noise<double>(0.1, 48000, 1);
  const auto one = apply_sparse_fir(x, FirTapSet{{{0.0, 1, 1.0}}}, 3);
  REQUIRE(one.channels() == 3);
  REQUIRE(one.frames() == x.frames());
  for (std::size_t t = 0; t < x.frames(); ++t) {
    CHECK(one.channel(1)[t] == x.channel(0)[t]);
    CHECK(one.channel(0)[t] == 0.0);
  }
  const auto two = apply_sparse_fir(x, FirTapSet{{{0.0, 0, 1.0}, {0.0, 0, 1.0}}}, 1);
  for (std::size_t t = 0; t < x.frames(); ++t) {
    CHECK(two.channel(0)[t] == Approx(std::sqrt(2.0) * x.channel(0)[t]).margin(1e-15));
  }
  const auto none = apply_sparse_fir(x, FirTapSet{}, 2);
  CHECK(none.frames() == x.frames());
  CHECK(std::all_of(none.channel(0).begin(), none.channel(0).end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("sparse FIR matches a dense convolution oracle") {
  const auto x = generate_pink_noise<double>(0.5, 48000, 2);
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> lag(0, 4799), ch(0, 2);
  std::normal_distribution<double> coef(0.0, 1.0);
  FirTapSet taps;
  for (int i = 0; i < 50; ++i) taps.taps.push_back({lag(gen) / 48000.0, static_cast<std::size_t>(ch(gen)), coef(gen)});
  const auto y = apply_sparse_fir(x, taps, 3);
  const std::vector<double> xs(x.channel(0).begin(), x.channel(0).end());
  const double g = taps.normalization();
  double worst = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> h(4800, 0.0);
    for (const auto& t : taps.taps) {
      if (t.channel == c) h[static_cast<std::size_t>(std::lround(t.lag_s * 48000.0))] += t.coefficient / g;
    }
    const auto want = oracle::dense_convolve(xs, h);
    for (std::size_t t = 0; t < y.frames(); ++t) worst = std::max(worst, std::abs(y.channel(c)[t] - want[t]));
    for (std::size_t t = y.frames(); t < want.size(); ++t) worst = std::max(worst, std::abs(want[t]));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("rect grains without read offset are the reduced FIR system") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    SynthesisParams p;
    p.window = WindowKind::Rect;
    p.seed_range_s = 0.0;
    p.grain_len_s = std::uniform_int_distribution<int>(96, 2400)(gen) / 48000.0;
    p.delta_t_s = std::uniform_real_distribution<double>(0.001, 0.02)(gen);
    p.jitter_frac = std::uniform_real_distribution<double>(0.0, 0.5)(gen);
    p.duration_s = 0.3;
    p.rng_seed = gen();
    const char* subset = trial % 2 ? "QP" : "L2";
    const auto s = schedule_grains(p, make_subset(subset, builtin_layout_cube25()));
    // A source exactly one grain long, so both systems read the same samples.
    const auto x = generate_pink_noise<double>(p.grain_len_s, 48000, p.rng_seed);
    const auto taps = reduce_schedule_to_fir(s);
    const auto grains = render_discrete(x, s, RenderOptions{taps.normalization()});
    const auto fir = apply_sparse_fir(x, taps, s.assignment.size());
    REQUIRE(grains.channels() == fir.channels());
    double worst = 0.0;
    for (std::size_t c = 0; c < fir.channels(); ++c) {
      for (std::size_t t = 0; t < std::max(grains.frames(), fir.frames()); ++t) {
        const double a = t < grains.frames() ? grains.channel(c)[t] : 0.0;
        const double b = t < fir.frames() ? fir.channel(c)[t] : 0.0;
        worst = std::max(worst, std::abs(a - b));
      }
    }
    INFO("trial " << trial);
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("sparse FIR energy accounting") {
  const auto x = white(60 * 48000, 3);
  double in = 0.0;
  for (double v : x.channel(0)) in += v * v;
  in /= static_cast<double>(x.frames());
  // Lags well beyond the (single-sample) correlation length of white noise.
  FirTapSet taps{{{0.0, 0, 1.0}, {0.01, 0, -2.0}, {0.025, 0, 0.5}, {0.0, 1, 3.0}, {0.04, 1, 1.0}}};
  const auto y = apply_sparse_fir(x, taps, 2);
  const double g2 = taps.normalization() * taps.normalization();
  const double expected[2] = {(1.0 + 4.0 + 0.25) / g2, (9.0 + 1.0) / g2};
  for (std::size_t c = 0; c < 2; ++c) {
    double out = 0.0;
    for (double v : y.channel(c)) out += v * v;
    out /= static_cast<double>(x.frames());
    INFO("channel " << c);
    CHECK(std::abs(10.0 * std::log10(out / (in * expected[c]))) < 0.5);
  }
}

TEST_CASE("sparse FIR errors") {
  const auto x = generate_pink_noise<double>(0.1, 48000, 1);
  CHECK_THROWS_AS(apply_sparse_fir(x, FirTapSet{{{0.0, 2, 1.0}}}, 2), ParameterError);
  CHECK_THROWS_AS(apply_sparse_fir(x, FirTapSet{{{-0.001, 0, 1.0}}}, 1), ParameterError);
  CHECK_THROWS_AS(apply_sparse_fir(x, FirTapSet{{{std::nan(""), 0, 1.0}}}, 1), ParameterError);
  CHECK_THROWS_AS(apply_sparse_fir(x, FirTapSet{}, 0), ParameterError);
  const BasicAudioBuffer<double> stereo(2, 10, 48000);
  CHECK_THROWS_AS(apply_sparse_fir(stereo, FirTapSet{}, 1), ParameterError);
}

TEST_CASE("lags are quantized to the nearest sample") {
  const auto x = BasicAudioBuffer<double>::mono({1.0, 0.0, 0.0}, 48000);
  const auto y = apply_sparse_fir(x, FirTapSet{{{1.5 / 48000.0, 0, 1.0}}}, 1);  // half up
  REQUIRE(y.frames() == 5);
  CHECK(y.channel(0)[2] == 1.0);
  const auto z = apply_sparse_fir(x, FirTapSet{{{1.4 / 48000.0, 0, 1.0}}}, 1);
  CHECK(z.channel(0)[1] == 1.0);
}

TEST_CASE("tap set JSON round trip") {
  const FirTapSet taps{{{0.0, 0, 1.0}, {0.125, 3, -0.5}, {1e-3 / 3.0, 1, 2.0}}};
  const auto j = nlohmann::json::parse(to_json(taps).dump());
  CHECK(j.at("normalization").get<double>() == taps.normalization());
  CHECK(fir_tap_set_from_json(j) == taps);
}
