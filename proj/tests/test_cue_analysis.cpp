#include <catch_amalgamated.hpp>

#include <random>

#include "grainfield/cues.hpp"
#include "grainfield/diffuse.hpp"
#include "grainfield/hrir_model.hpp"
#include "grainfield/layout.hpp"
#include "grainfield/noise.hpp"

using namespace grainfield;
using Catch::Approx;

namespace {

const GammatoneBank& bank() {
  static const GammatoneBank b = make_cue_bank(48000);
  return b;
}

std::vector<double> pink(std::size_t n, std::uint64_t seed) {
  const auto x = generate_pink_noise_samples<double>(n, 48000, seed);
  return {x.channel(0).begin(), x.channel(0).end()};
}

constexpr std::size_t kBlock = 4080;

CueFrame analyze(const std::vector<double>& l, const std::vector<double>& r) {
  return analyze_block(std::span<const double>(l), std::span<const double>(r), bank());
}

CueFrame frame_with(std::size_t bands, double ic, double itd, double ild, double xi) {
  CueFrame f;
  f.ic.assign(bands, ic);
  f.itd_s.assign(bands, itd);
  f.ild_db.assign(bands, ild);
  f.xi_left_db.assign(bands, xi);
  f.xi_right_db.assign(bands, xi - ild);
  return f;
}

}  // namespace

TEST_CASE("ERB scale") {
  CHECK(erb_hz(1000.0) == Approx(24.7 * (4.37 + 1.0)).margin(1e-12));
  CHECK(erb_hz(1000.0) == Approx(132.64).margin(0.01));
  for (const double f : {50.0, 440.0, 3000.0, 17000.0}) {
    CHECK(erb_rate_to_hz(erb_rate(f)) == Approx(f).epsilon(1e-12));
  }
}

TEST_CASE("default bank has 320 bands on a 1/8 ERB grid") {
  const auto& b = bank();
  REQUIRE(b.size() == 320);
  CHECK(b.fft_size() == 8192);
  CHECK(b.center(0) == Approx(50.0).epsilon(1e-12));
  for (std::size_t i = 1; i < b.size(); ++i) {
    CHECK(b.center(i) > b.center(i - 1));
    CHECK(erb_rate(b.center(i)) - erb_rate(b.center(i - 1)) == Approx(0.125).margin(1e-9));
  }
  CHECK(b.centers().back() < 24000.0);
}

TEST_CASE("gammatone windows are non-negative, peak one, and one ERB wide") {
  const auto& b = bank();
  const double df = 48000.0 / static_cast<double>(b.fft_size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto& w = b.window(i);
    const double fc = b.center(i);
    CHECK(std::all_of(w.begin(), w.end(), [](double v) { return v >= 0.0; }));
    CHECK(*std::max_element(w.begin(), w.end()) <= 1.0);
    CHECK(b.magnitude(fc, fc) == 1.0);

    // -3 dB points of the sampled window by linear interpolation between bins.
    const double target = 1.0 / std::sqrt(2.0);
    const auto peak = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    std::size_t lo = peak, hi = peak;
    while (lo > 0 && w[lo] >= target) --lo;
    while (hi + 1 < w.size() && w[hi] >= target) ++hi;
    const double f_lo = (lo + (target - w[lo]) / (w[lo + 1] - w[lo])) * df;
    const double f_hi = (hi - 1 + (w[hi - 1] - target) / (w[hi - 1] - w[hi])) * df;
    INFO("band " << i << " at " << fc << " Hz");
    const double ratio = (f_hi - f_lo) / erb_hz(fc);
    CHECK(ratio >= 0.85);
    CHECK(ratio <= 1.15);
  }
}

TEST_CASE("bank parameter errors") {
  CHECK_THROWS_AS(GammatoneBank(48000, 8192, GammatoneConfig{500.0, 100.0, 0.125, 1.0}), ParameterError);
  CHECK_THROWS_AS(GammatoneBank(48000, 8192, GammatoneConfig{50.0, 24000.0, 0.125, 1.0}), ParameterError);
  CHECK_THROWS_AS(GammatoneBank(48000, 8192, GammatoneConfig{50.0, 1000.0, 0.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(GammatoneBank(48000, 8192, GammatoneConfig{0.0, 1000.0, 0.125, 1.0}), ParameterError);
}

TEST_CASE("identical ears give unit coherence and zero differences") {
  const auto x = pink(kBlock, 1);
  const auto f = analyze(x, x);
  REQUIRE_FALSE(f.silent);
  REQUIRE(f.ic.size() == 320);
  for (std::size_t b = 0; b < 320; ++b) {
    CHECK(f.ic[b] == Approx(1.0).margin(1e-6));
    CHECK(f.itd_s[b] == Approx(0.0).margin(1e-9));
    CHECK(f.ild_db[b] == Approx(0.0).margin(1e-6));
  }
}

TEST_CASE("a delayed right ear appears as a positive ITD") {
  const auto src = pink(kBlock + 10, 2);
  const std::vector<double> l(src.begin() + 10, src.end());
  const std::vector<double> r(src.begin(), src.end() - 10);  // r[t] = l[t - 10]
  const auto f = analyze(l, r);
  for (std::size_t b = 0; b < 320; ++b) {
    if (bank().center(b) <= 300.0) continue;
    INFO("band " << bank().center(b));
    CHECK(f.itd_s[b] == Approx(10.0 / 48000.0).margin(1.0 / 48000.0));
  }
}

TEST_CASE("a half-level right ear gives 6.02 dB ILD") {
  const auto l = pink(kBlock, 3);
  std::vector<double> r(l);
  for (double& v : r) v *= 0.5;
  const auto f = analyze(l, r);
  for (std::size_t b = 0; b < 320; ++b) {
    CHECK(f.ild_db[b] == Approx(20.0 * std::log10(2.0)).margin(0.05));
    CHECK(f.ic[b] == Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("coherence stays in [0, 1] and hits 1 for delay-and-gain copies") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> mix(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    const auto a = pink(kBlock + 40, 10 + trial), c = pink(kBlock + 40, 20 + trial);
    const double m = mix(gen);
    std::vector<double> l(a.begin(), a.begin() + kBlock), r(kBlock);
    for (std::size_t t = 0; t < kBlock; ++t) r[t] = m * a[t] + (1.0 - m) * c[t];
    const auto f = analyze(l, r);
    for (double v : f.ic) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (double v : f.itd_s) CHECK(std::abs(v) <= 0.001 + 1e-12);
  }
  const auto src = pink(kBlock + 20, 30);
  const std::vector<double> l(src.begin() + 20, src.end());
  std::vector<double> r(src.begin(), src.end() - 20);
  for (double& v : r) v *= 3.0;
  const auto f = analyze(l, r);
  double mean = 0.0;
  for (std::size_t b = 0; b < 320; ++b) mean += f.ic[b] / 320.0;
  // Block edges decorrelate a 20-sample shift slightly; the mean stays near one.
  CHECK(mean > 0.99);
}

TEST_CASE("swapping ears negates ITD and ILD and keeps IC") {
  const auto l = pink(kBlock, 5);
  auto r = pink(kBlock + 7, 6);
  for (std::size_t t = 0; t < kBlock; ++t) r[t] = 0.6 * r[t] + 0.4 * l[t >= 7 ? t - 7 : 0];
  r.resize(kBlock);
  const auto a = analyze(l, r), b = analyze(r, l);
  for (std::size_t k = 0; k < 320; ++k) {
    CHECK(b.ic[k] == Approx(a.ic[k]).margin(1e-12));
    CHECK(b.itd_s[k] == Approx(-a.itd_s[k]).margin(1e-12));
    CHECK(b.ild_db[k] == Approx(-a.ild_db[k]).margin(1e-9));
  }
}

TEST_CASE("common gain leaves interaural cues unchanged and shifts spectra") {
  const auto l = pink(kBlock, 7), r0 = pink(kBlock, 8);
  std::vector<double> r(kBlock);
  for (std::size_t t = 0; t < kBlock; ++t) r[t] = 0.5 * l[t] + r0[t];
  const double c = 3.7;
  std::vector<double> lc(l), rc(r);
  for (double& v : lc) v *= c;
  for (double& v : rc) v *= c;
  const auto a = analyze(l, r), b = analyze(lc, rc);
  for (std::size_t k = 0; k < 320; ++k) {
    CHECK(b.ic[k] == Approx(a.ic[k]).margin(1e-9));
    CHECK(b.itd_s[k] == Approx(a.itd_s[k]).margin(1e-12));
    CHECK(b.ild_db[k] == Approx(a.ild_db[k]).margin(1e-9));
    CHECK(b.xi_left_db[k] - a.xi_left_db[k] == Approx(20.0 * std::log10(c)).margin(1e-9));
  }
}

TEST_CASE("signal analysis splits into whole blocks") {
  const auto l = pink(5 * 48000, 9), r = pink(5 * 48000, 10);
  const BasicAudioBuffer<double> stereo({l, r}, 48000);
  const auto frames = analyze_signal(stereo, bank());
  REQUIRE(frames.size() == 58);
  for (std::size_t i = 0; i < frames.size(); ++i) CHECK(frames[i].block_index == i);
  CHECK(analyze_signal(stereo, bank()) == frames);

  // Frame i equals the standalone analysis of its block.
  const std::vector<double> bl(l.begin() + 3 * kBlock, l.begin() + 4 * kBlock);
  const std::vector<double> br(r.begin() + 3 * kBlock, r.begin() + 4 * kBlock);
  auto lone = analyze(bl, br);
  lone.block_index = 3;
  CHECK(frames[3] == lone);
}

TEST_CASE("silence yields no voiced frames") {
  const BasicAudioBuffer<double> silent(2, 48000, 48000);
  const auto frames = analyze_signal(silent, bank());
  REQUIRE(frames.size() == 11);
  CHECK(std::all_of(frames.begin(), frames.end(), [](const CueFrame& f) { return f.silent; }));
  try {
    summarize(frames, bank());
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()) == "no voiced frames");
  }
  // One silent ear is enough to flag a block.
  BasicAudioBuffer<double> half({pink(48000, 1), std::vector<double>(48000, 0.0)}, 48000);
  CHECK(analyze_signal(half, bank()).front().silent);
}

TEST_CASE("signal analysis errors") {
  CHECK_THROWS_AS(analyze_signal(BasicAudioBuffer<double>(1, 48000, 48000), bank()), ParameterError);
  CHECK_THROWS_AS(analyze_signal(BasicAudioBuffer<double>(2, 4000, 48000), bank()), ParameterError);
  CHECK_THROWS_AS(analyze_signal(BasicAudioBuffer<double>(2, 48000, 44100), bank()), ParameterError);
  CHECK_THROWS_AS(analyze_signal(BasicAudioBuffer<double>(2, 48000, 48000), bank(), 0.1), ParameterError);
}

TEST_CASE("summary statistics") {
  const std::vector<double> centers = {100.0, 1000.0, 5000.0};
  std::vector<CueFrame> same(4, frame_with(3, 0.8, 1e-4, 2.0, -40.0));
  const auto s = summarize(same, centers);
  CHECK(s.frames == 4);
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK(s.std_itd_s[b] == 0.0);
    CHECK(s.std_ild_db[b] == 0.0);
    CHECK(s.mean_ic[b] == Approx(0.8));
    CHECK(s.mean_xi_left_db[b] == Approx(-40.0));
  }
  CHECK_FALSE(s.delta_spectrum_db.has_value());

  std::vector<CueFrame> alternating;
  for (int i = 0; i < 6; ++i) alternating.push_back(frame_with(3, 0.5, 0.0, i % 2 ? 1.0 : -1.0, -30.0));
  CueFrame quiet;
  quiet.silent = true;
  alternating.push_back(quiet);
  const auto a = summarize(alternating, centers);
  CHECK(a.frames == 6);
  for (std::size_t b = 0; b < 3; ++b) CHECK(a.std_ild_db[b] == Approx(1.0).margin(1e-12));

  const auto self = summarize(same, centers, &s);
  REQUIRE(self.delta_spectrum_db.has_value());
  for (double d : *self.delta_spectrum_db) CHECK(d == 0.0);
  const auto rel = summarize(alternating, centers, &s);
  for (double d : *rel.delta_spectrum_db) CHECK(d == Approx(10.0));

  CHECK_THROWS_AS(summarize(same, std::vector<double>{1.0, 2.0}), DataError);
  CHECK(band_average(centers, {1.0, 2.0, 6.0}, 500.0, 6000.0) == Approx(4.0));
  CHECK_THROWS_AS(band_average(centers, {1.0, 2.0, 6.0}, 6000.0, 7000.0), ParameterError);
}

TEST_CASE("summary averaging over runs") {
  const std::vector<double> centers = {100.0, 1000.0};
  const auto a = summarize({frame_with(2, 0.2, 0.0, 0.0, -10.0)}, centers);
  const auto b = summarize({frame_with(2, 0.6, 0.0, 0.0, -20.0)}, centers);
  const auto m = average_summaries({a, b});
  CHECK(m.mean_ic[0] == Approx(0.4));
  CHECK(m.mean_xi_left_db[1] == Approx(-15.0));
  CHECK(m.frames == 2);
  CHECK_THROWS_AS(average_summaries({}), DataError);
}

TEST_CASE("summary CSV round trip and layout") {
  const auto l = pink(48000, 11), r = pink(48000, 12);
  const BasicAudioBuffer<double> stereo({l, r}, 48000);
  const auto frames = analyze_signal(stereo, bank());
  const auto ref = summarize(frames, bank());
  const auto s = summarize(frames, bank(), &ref);
  const auto csv = summary_to_csv(s);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 321);
  CHECK(csv.rfind("band_center_hz,mean_ic,std_itd_us,std_ild_db,mean_xi_left_db,delta_spectrum_db\n", 0) == 0);
  const auto back = summary_from_csv(csv);
  REQUIRE(back.bands() == 320);
  CHECK(back.band_center_hz == s.band_center_hz);
  CHECK(back.mean_ic == s.mean_ic);
  CHECK(back.std_ild_db == s.std_ild_db);
  CHECK(back.mean_xi_left_db == s.mean_xi_left_db);
  CHECK(back.delta_spectrum_db == s.delta_spectrum_db);
  for (std::size_t b = 0; b < 320; ++b) CHECK(back.std_itd_s[b] == Approx(s.std_itd_s[b]).epsilon(1e-14));

  const auto plain = summary_to_csv(ref);
  CHECK(plain.find("delta_spectrum_db") == std::string::npos);
  CHECK_FALSE(summary_from_csv(plain).delta_spectrum_db.has_value());

  const auto fcsv = frames_to_csv(frames, bank().centers());
  CHECK(std::count(fcsv.begin(), fcsv.end(), '\n') == 1 + 11 * 320);

  CHECK_THROWS_AS(summary_from_csv(""), DataError);
  CHECK_THROWS_AS(summary_from_csv("band_center_hz,mean_ic\n1,2\n"), DataError);
  CHECK_THROWS_AS(summary_from_csv(plain.substr(0, plain.find('\n') + 1) + "1,2,3\n"), DataError);
  CHECK_THROWS_AS(summary_from_csv(plain.substr(0, plain.find('\n') + 1) + "1,x,3,4,5\n"), DataError);
}

TEST_CASE("diffuse reference contract") {
  const SphericalHeadModel model;
  const auto ring = make_subset("RING360", SpeakerLayout{});
  const auto hrirs = synthesize_hrir_set(model, ring.directions, 48000);
  const auto a = simulate_diffuse_reference(hrirs, 0.3, 5);
  CHECK(a.channels() == 2);
  CHECK(a.frames() == to_samples(0.3, 48000));
  CHECK(rms(a) == Approx(0.1).epsilon(1e-6));
  CHECK(simulate_diffuse_reference(hrirs, 0.3, 5) == a);
  CHECK_FALSE(simulate_diffuse_reference(hrirs, 0.3, 6) == a);

  CHECK_THROWS_AS(simulate_diffuse_reference(hrirs, 0.0, 1), ParameterError);
  const auto cube = builtin_layout_cube25();
  const auto small = synthesize_hrir_set(model, cube.directions(), 48000);
  CHECK_THROWS_AS(simulate_diffuse_reference(small, 0.3, 1), ParameterError);
  std::vector<Direction> tilted;
  for (int i = 0; i < 360; ++i) tilted.emplace_back(static_cast<double>(i), i == 0 ? 10.0 : 0.0);
  CHECK_THROWS_AS(simulate_diffuse_reference(synthesize_hrir_set(model, tilted, 48000), 0.3, 1),
                  ParameterError);
}

TEST_CASE("diffuse reference against itself has a zero delta spectrum") {
  const auto hrirs = synthesize_hrir_set(SphericalHeadModel{}, make_subset("RING360", SpeakerLayout{}).directions, 48000);
  const auto ref = simulate_diffuse_reference(hrirs, 1.0, 3);
  const auto s = summarize(analyze_signal(ref, bank()), bank());
  const auto self = summarize(analyze_signal(ref, bank()), bank(), &s);
  for (double d : *self.delta_spectrum_db) CHECK(d == 0.0);
  // Low bands are strongly coherent for a diffuse field at head scale.
  CHECK(band_average(s.band_center_hz, s.mean_ic, 50.0, 150.0) > 0.85);
}
