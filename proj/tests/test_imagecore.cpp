#include <cmath>
#include <cstring>
#include <limits>

#include "pwcc/color.hpp"
#include "pwcc/image_io.hpp"
#include "support.hpp"

using namespace pwcc;
using pwcc::test::TempDir;

namespace {

// Tent-filter formulation of bilinear sampling, summed over every source
// pixel. Shares nothing with the production loop except the coordinate map.
LinearImage bilinear_oracle(const LinearImage& src, int nw, int nh) {
  LinearImage out(nw, nh);
  for (int y = 0; y < nh; ++y) {
    double fy = (y + 0.5) * src.height() / nh - 0.5;
    fy = std::min(std::max(fy, 0.0), src.height() - 1.0);
    for (int x = 0; x < nw; ++x) {
      double fx = (x + 0.5) * src.width() / nw - 0.5;
      fx = std::min(std::max(fx, 0.0), src.width() - 1.0);
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int j = 0; j < src.height(); ++j) {
          for (int i = 0; i < src.width(); ++i) {
            const double w = std::max(0.0, 1.0 - std::abs(fx - i)) *
                             std::max(0.0, 1.0 - std::abs(fy - j));
            acc += w * src.at(i, j, c);
          }
        }
        out.at(x, y, c) = acc;
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("to_log_chroma of gray pixels is zero") {
  LinearImage img(3, 1);
  const double grays[3] = {0.0, 0.37, 1.0};
  for (int x = 0; x < 3; ++x) {
    for (int c = 0; c < 3; ++c) img.at(x, 0, c) = grays[x];
  }
  const ChromaImage uv = to_log_chroma(img, 1e-6);
  for (double v : uv.data()) CHECK(v == 0.0);
}

TEST_CASE("to_log_chroma of (2, 1, 1)") {
  LinearImage img(1, 1);
  img.at(0, 0, 0) = 2.0;
  img.at(0, 0, 1) = 1.0;
  img.at(0, 0, 2) = 1.0;
  const ChromaImage uv = to_log_chroma(img, 1e-6);
  CHECK(std::abs(uv.at(0, 0, 0) - 0.693147) < 1e-5);
  CHECK(std::abs(uv.at(0, 0, 1)) < 1e-12);
}

TEST_CASE("to_log_chroma names the offending pixel") {
  LinearImage img(4, 4, 0.5);
  img.at(2, 1, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    (void)to_log_chroma(img);
    FAIL("expected InvalidInputError");
  } catch (const InvalidInputError& e) {
    CHECK(std::string(e.what()).find("pixel index 6") != std::string::npos);
  }
}

TEST_CASE("log-chroma round trip recovers G-normalized chromaticity") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto img = test::random_buffer<LinearImage>(4, 4, seed, 1e-3, 1.0);
    const IlluminationMap back = from_log_chroma(to_log_chroma(img, 1e-6));
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
      const auto p = img.pixel(i);
      const auto q = back.pixel(i);
      // Exact up to rounding against the epsilon-shifted ratio, and within
      // the analytic bound eps / min(R, G) of the plain ratio.
      const double eps = 1e-6;
      CHECK(std::abs(q[0] / ((p[0] + eps) / (p[1] + eps)) - 1.0) < 1e-12);
      CHECK(q[1] == 1.0);
      CHECK(std::abs(q[2] / ((p[2] + eps) / (p[1] + eps)) - 1.0) < 1e-12);
      CHECK(std::abs(q[0] / (p[0] / p[1]) - 1.0) <= eps / std::min(p[0], p[1]));
      CHECK(std::abs(q[2] / (p[2] / p[1]) - 1.0) <= eps / std::min(p[2], p[1]));
    }
  }
}

TEST_CASE("from_log_chroma examples") {
  ChromaImage uv(2, 1);
  uv.at(1, 0, 0) = std::log(2.0);
  uv.at(1, 0, 1) = -std::log(2.0);
  const IlluminationMap m = from_log_chroma(uv);
  for (int c = 0; c < 3; ++c) CHECK(m.at(0, 0, c) == 1.0);
  CHECK(std::abs(m.at(1, 0, 0) - 2.0) < 1e-9);
  CHECK(m.at(1, 0, 1) == 1.0);
  CHECK(std::abs(m.at(1, 0, 2) - 0.5) < 1e-9);

  uv.at(0, 0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS((void)from_log_chroma(uv), InvalidInputError);
}

TEST_CASE("gain map through log-chroma comes back G-normalized") {
  const auto map = test::random_buffer<IlluminationMap>(5, 3, 42, 0.2, 3.0);
  const IlluminationMap back = from_log_chroma(to_log_chroma(map, 1e-9));
  const IlluminationMap expected = g_normalized(map);
  CHECK(test::max_abs_diff(back, expected) < 1e-6);
}

TEST_CASE("apply_white_balance") {
  const auto img = test::random_buffer<LinearImage>(6, 5, 3, 0.0, 1.0);

  SUBCASE("identity gains") {
    CHECK(apply_white_balance(img, constant_map(6, 5, 1, 1, 1)) == img);
  }
  SUBCASE("uniform gains on uniform image") {
    LinearImage u(3, 3);
    for (std::size_t i = 0; i < u.pixel_count(); ++i) {
      u.pixel(i)[0] = 0.25;
      u.pixel(i)[1] = 0.5;
      u.pixel(i)[2] = 0.5;
    }
    const LinearImage out = apply_white_balance(u, constant_map(3, 3, 2, 1, 1));
    for (double v : out.data()) CHECK(v == 0.5);
  }
  SUBCASE("reciprocal undoes the map") {
    const auto map = test::random_buffer<IlluminationMap>(6, 5, 4, 0.3, 2.5);
    const LinearImage back = apply_white_balance(apply_white_balance(img, map), reciprocal(map));
    CHECK(test::max_abs_diff(back, img) < 1e-6);
  }
  SUBCASE("linear in the image") {
    const auto map = test::random_buffer<IlluminationMap>(6, 5, 5, 0.3, 2.5);
    LinearImage scaled = img;
    for (double& v : scaled.data()) v *= 0.37;
    LinearImage expected = apply_white_balance(img, map);
    for (double& v : expected.data()) v *= 0.37;
    CHECK(test::max_abs_diff(apply_white_balance(scaled, map), expected) < 1e-15);
  }
  SUBCASE("size mismatch") {
    CHECK_THROWS_AS((void)apply_white_balance(img, constant_map(5, 5, 1, 1, 1)), ShapeError);
  }
}

TEST_CASE("resize_bilinear") {
  SUBCASE("same size is bit-identical") {
    const auto img = test::random_buffer<LinearImage>(7, 4, 9, 0.0, 1.0);
    CHECK(resize_bilinear(img, 7, 4) == img);
  }
  SUBCASE("constant stays constant") {
    LinearImage img(5, 3, 0.3);
    for (auto [w, h] : {std::pair{1, 1}, {9, 2}, {3, 11}, {64, 64}}) {
      const LinearImage out = resize_bilinear(img, w, h);
      for (double v : out.data()) CHECK(std::abs(v - 0.3) < 1e-15);
    }
  }
  SUBCASE("2x1 to 4x1 matches the tent oracle") {
    LinearImage img(2, 1);
    for (int c = 0; c < 3; ++c) img.at(1, 0, c) = 1.0;
    const LinearImage out = resize_bilinear(img, 4, 1);
    CHECK(test::max_abs_diff(out, bilinear_oracle(img, 4, 1)) < 1e-6);
    const double expected[4] = {0.0, 0.25, 0.75, 1.0};
    for (int x = 0; x < 4; ++x) CHECK(std::abs(out.at(x, 0, 0) - expected[x]) < 1e-12);
  }
  SUBCASE("random up and down sampling matches the tent oracle") {
    const auto img = test::random_buffer<LinearImage>(9, 6, 11, 0.0, 1.0);
    for (auto [w, h] : {std::pair{4, 3}, {13, 17}, {1, 6}, {18, 12}}) {
      CHECK(test::max_abs_diff(resize_bilinear(img, w, h), bilinear_oracle(img, w, h)) < 1e-12);
    }
  }
  SUBCASE("zero dimension") {
    LinearImage img(2, 2);
    CHECK_THROWS_AS((void)resize_bilinear(img, 0, 2), InvalidArgumentError);
    CHECK_THROWS_AS((void)resize_bilinear(img, 2, 0), InvalidArgumentError);
  }
}

TEST_CASE("16-bit PNG I/O") {
  TempDir dir;

  SUBCASE("round trip within one quantization step") {
    const auto img = test::random_buffer<LinearImage>(13, 7, 21, 0.0, 1.0);
    write_image(dir / "a.png", img);
    const LinearImage back = read_image(dir / "a.png");
    REQUIRE(back.same_shape(img));
    CHECK(test::max_abs_diff(back, img) <= 1.0 / 65535.0);
  }
  SUBCASE("zeros decode to zeros") {
    write_image(dir / "z.png", LinearImage(4, 4));
    const LinearImage z = read_image(dir / "z.png");
    for (double v : z.data()) CHECK(v == 0.0);
  }
  SUBCASE("0.5 stores 32768") {
    CHECK(quantize16(0.5) == 32768);
    write_image(dir / "h.png", LinearImage(1, 1, 0.5));
    const LinearImage h = read_image(dir / "h.png");
    for (double v : h.data()) CHECK(v == 32768.0 / 65535.0);
  }
  SUBCASE("values outside [0, 1] clamp") {
    CHECK(quantize16(-0.2) == 0);
    CHECK(quantize16(1.7) == 65535);
  }
  SUBCASE("rewriting gives identical bytes") {
    const auto img = test::random_buffer<LinearImage>(8, 8, 2, 0.0, 1.0);
    write_image(dir / "x.png", img);
    write_image(dir / "y.png", img);
    CHECK(test::read_bytes(dir / "x.png") == test::read_bytes(dir / "y.png"));
  }
  SUBCASE("error categories are distinct") {
    CHECK_THROWS_AS((void)read_image(dir / "missing.png"), FileNotFoundError);
    test::write_bytes(dir / "junk.png", {'n', 'o', 't', ' ', 'p', 'n', 'g', '!', 0, 0});
    CHECK_THROWS_AS((void)read_image(dir / "junk.png"), FormatError);
    write_preview_png(dir / "eight.png", LinearImage(3, 3, 0.5));
    CHECK_THROWS_AS((void)read_image(dir / "eight.png"), UnsupportedBitDepthError);

    write_image(dir / "t.png", LinearImage(16, 16, 0.5));
    auto bytes = test::read_bytes(dir / "t.png");
    bytes.resize(bytes.size() / 2);
    test::write_bytes(dir / "t.png", bytes);
    CHECK_THROWS_AS((void)read_image(dir / "t.png"), FormatError);
  }
}

TEST_CASE("PWCC float maps") {
  TempDir dir;

  SUBCASE("bit-exact round trip including subnormals") {
    FloatMap m{3, 2, 2, {}};
    m.data = {0.0f, -0.0f, 1.5f, std::numeric_limits<float>::denorm_min(),
              std::numeric_limits<float>::min() / 3.0f, std::numeric_limits<float>::max(),
              -7.25f, 1e-30f, 3.14159f, 2.0f, 100.0f, 0.1f};
    write_float_map(dir / "m.pwcc", m);
    const FloatMap back = read_float_map(dir / "m.pwcc");
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK(back.channels == 2);
    REQUIRE(back.data.size() == m.data.size());
    CHECK(std::memcmp(back.data.data(), m.data.data(), m.data.size() * 4) == 0);
  }
  SUBCASE("1x1x1 zero map layout") {
    const auto bytes = encode_float_map(FloatMap{1, 1, 1, {0.0f}});
    const std::vector<std::uint8_t> expected = {'P', 'W', 'C', 'C', 1, 0, 0, 0, 1, 0,
                                                0,   0,   1,   0,   0, 0, 0, 0, 0, 0};
    CHECK(bytes == expected);
  }
  SUBCASE("payload is little-endian f32") {
    const auto bytes = encode_float_map(FloatMap{1, 1, 1, {1.0f}});
    CHECK(bytes[16] == 0x00);
    CHECK(bytes[17] == 0x00);
    CHECK(bytes[18] == 0x80);
    CHECK(bytes[19] == 0x3F);
  }
  SUBCASE("format errors") {
    auto bytes = encode_float_map(FloatMap{2, 2, 1, {1, 2, 3, 4}});
    auto bad = bytes;
    std::memcpy(bad.data(), "XXXX", 4);
    CHECK_THROWS_AS((void)decode_float_map(bad), BadMagicError);
    auto cut = bytes;
    cut.pop_back();
    CHECK_THROWS_AS((void)decode_float_map(cut), TruncatedError);
    CHECK_THROWS_AS((void)decode_float_map({'P', 'W', 'C', 'C', 1, 0}), TruncatedError);
    auto chans = bytes;
    chans[12] = 4;
    CHECK_THROWS_AS((void)decode_float_map(chans), UnsupportedChannelCountError);
    chans[12] = 0;
    CHECK_THROWS_AS((void)decode_float_map(chans), UnsupportedChannelCountError);
    CHECK_THROWS_AS((void)read_float_map(dir / "none.pwcc"), FileNotFoundError);
  }
  SUBCASE("typed maps") {
    const auto map = test::random_buffer<IlluminationMap>(4, 3, 8, 0.1, 4.0);
    write_float_map(dir / "g.pwcc", to_float_map(map));
    const IlluminationMap back = read_illumination_map(dir / "g.pwcc");
    CHECK(test::max_abs_diff(back, map) < 1e-6);
    CHECK_THROWS_AS((void)read_alpha_map(dir / "g.pwcc"), FormatError);
  }
}

TEST_CASE("IlluminantChroma is stored G-normalized") {
  const auto l = IlluminantChroma::from_rgb(2.0, 4.0, 1.0);
  CHECK(l[0] == 0.5);
  CHECK(l[1] == 1.0);
  CHECK(l[2] == 0.25);
  CHECK_THROWS_AS((void)IlluminantChroma::from_rgb(1.0, 0.0, 1.0), InvalidArgumentError);
}

TEST_CASE("srgb_encode endpoints") {
  CHECK(srgb_encode(0.0) == 0.0);
  CHECK(std::abs(srgb_encode(1.0) - 1.0) < 1e-12);
  CHECK(std::abs(srgb_encode(0.0031308) - 0.0031308 * 12.92) < 1e-12);
}
