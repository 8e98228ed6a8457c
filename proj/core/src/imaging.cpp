#include "gardin/imaging.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "gardin/error.hpp"

namespace gardin {

GrayImage to_grayscale(const RgbImage& rgb) {
  require_valid(rgb, "to_grayscale");
  GrayImage out(rgb.height, rgb.width);
  for (int y = 0; y < rgb.height; ++y)
    for (int x = 0; x < rgb.width; ++x)
      out.at(y, x) = 0.299 * rgb.at(y, x, 0) + 0.587 * rgb.at(y, x, 1) + 0.114 * rgb.at(y, x, 2);
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, int out_h, int out_w) {
  require_valid(img, "resize");
  if (out_h < 1 || out_w < 1) throw ValidationError("resize: output size must be >= 1");
  GrayImage out(out_h, out_w);
  const double sy = static_cast<double>(img.height) / out_h;
  const double sx = static_cast<double>(img.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      const double top = img.at(y0, x0) * (1.0 - wx) + img.at(y0, x1) * wx;
      const double bot = img.at(y1, x0) * (1.0 - wx) + img.at(y1, x1) * wx;
      out.at(y, x) = top * (1.0 - wy) + bot * wy;
    }
  }
  return out;
}

GrayImage sobel_gradient(const GrayImage& img) {
  require_valid(img, "sobel_gradient");
  GrayImage out(img.height, img.width);
  const int h = img.height, w = img.width;
  auto px = [&](int y, int x) {
    return img.at(std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1));
  };
  const double norm = 1.0 / (4.0 * std::sqrt(2.0));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = -px(y - 1, x - 1) + px(y - 1, x + 1) - 2.0 * px(y, x - 1) +
                        2.0 * px(y, x + 1) - px(y + 1, x - 1) + px(y + 1, x + 1);
      const double gy = -px(y - 1, x - 1) - 2.0 * px(y - 1, x) - px(y - 1, x + 1) +
                        px(y + 1, x - 1) + 2.0 * px(y + 1, x) + px(y + 1, x + 1);
      out.at(y, x) = std::min(1.0, std::sqrt(gx * gx + gy * gy) * norm);
    }
  }
  return out;
}

namespace {

constexpr int kSsimRadius = 5;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
constexpr double kSsimC2 = 0.03 * 0.03;

const std::array<double, 11>& ssim_kernel() {
  static const std::array<double, 11> k = [] {
    std::array<double, 11> w{};
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
      const double d = i - kSsimRadius;
      w[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
      sum += w[i];
    }
    for (auto& v : w) v /= sum;
    return w;
  }();
  return k;
}

// Separable Gaussian filtering with clamped (replicate) indexing. Equal to
// the 2-D convolution of the replicate-padded image because the index clamp
// factorizes per dimension.
GrayImage gauss_filter(const GrayImage& img) {
  const auto& k = ssim_kernel();
  const int h = img.height, w = img.width;
  GrayImage tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int o = -kSsimRadius; o <= kSsimRadius; ++o)
        acc += k[o + kSsimRadius] * img.at(y, std::clamp(x + o, 0, w - 1));
      tmp.at(y, x) = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int o = -kSsimRadius; o <= kSsimRadius; ++o)
        acc += k[o + kSsimRadius] * tmp.at(std::clamp(y + o, 0, h - 1), x);
      out.at(y, x) = acc;
    }
  return out;
}

// Adjoint of gauss_filter (scatter with the same clamped indexing).
GrayImage gauss_adjoint(const GrayImage& img) {
  const auto& k = ssim_kernel();
  const int h = img.height, w = img.width;
  GrayImage tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = img.at(y, x);
      for (int o = -kSsimRadius; o <= kSsimRadius; ++o)
        tmp.at(std::clamp(y + o, 0, h - 1), x) += k[o + kSsimRadius] * v;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = tmp.at(y, x);
      for (int o = -kSsimRadius; o <= kSsimRadius; ++o)
        out.at(y, std::clamp(x + o, 0, w - 1)) += k[o + kSsimRadius] * v;
    }
  return out;
}

struct SsimFields {
  GrayImage mu_x, mu_y, var_x, var_y, cov;
};

SsimFields ssim_fields(const GrayImage& x, const GrayImage& y) {
  const int h = x.height, w = x.width;
  GrayImage xx(h, w), yy(h, w), xy(h, w);
  for (size_t i = 0; i < x.data.size(); ++i) {
    xx.data[i] = x.data[i] * x.data[i];
    yy.data[i] = y.data[i] * y.data[i];
    xy.data[i] = x.data[i] * y.data[i];
  }
  SsimFields f{gauss_filter(x), gauss_filter(y), gauss_filter(xx), gauss_filter(yy),
               gauss_filter(xy)};
  for (size_t i = 0; i < x.data.size(); ++i) {
    f.var_x.data[i] -= f.mu_x.data[i] * f.mu_x.data[i];
    f.var_y.data[i] -= f.mu_y.data[i] * f.mu_y.data[i];
    f.cov.data[i] -= f.mu_x.data[i] * f.mu_y.data[i];
  }
  return f;
}

}  // namespace

double ssim(const GrayImage& i1, const GrayImage& i2) {
  require_valid(i1, "ssim");
  require_valid(i2, "ssim");
  require_same_shape(i1, i2, "ssim");
  const SsimFields f = ssim_fields(i1, i2);
  double sum = 0.0;
  for (size_t i = 0; i < i1.data.size(); ++i) {
    const double a1 = 2.0 * f.mu_x.data[i] * f.mu_y.data[i] + kSsimC1;
    const double a2 = 2.0 * f.cov.data[i] + kSsimC2;
    const double b1 = f.mu_x.data[i] * f.mu_x.data[i] + f.mu_y.data[i] * f.mu_y.data[i] + kSsimC1;
    const double b2 = f.var_x.data[i] + f.var_y.data[i] + kSsimC2;
    sum += (a1 * a2) / (b1 * b2);
  }
  return sum / static_cast<double>(i1.pixels());
}

GrayImage ssim_gradient(const GrayImage& x, const GrayImage& y) {
  require_valid(x, "ssim_gradient");
  require_valid(y, "ssim_gradient");
  require_same_shape(x, y, "ssim_gradient");
  const int h = x.height, w = x.width;
  const SsimFields f = ssim_fields(x, y);

  // Per-pixel partials of the local SSIM score with respect to the three
  // filtered fields it depends on through x: mu_x, E[x^2] and E[xy].
  GrayImage g_mu(h, w), g_x2(h, w), g_xy(h, w);
  for (size_t i = 0; i < x.data.size(); ++i) {
    const double mx = f.mu_x.data[i], my = f.mu_y.data[i];
    const double a1 = 2.0 * mx * my + kSsimC1;
    const double a2 = 2.0 * f.cov.data[i] + kSsimC2;
    const double b1 = mx * mx + my * my + kSsimC1;
    const double b2 = f.var_x.data[i] + f.var_y.data[i] + kSsimC2;
    const double inv_bb = 1.0 / (b1 * b2);
    const double d_var = -a1 * a2 * inv_bb / b2;   // dS/d(var_x)
    const double d_cov = 2.0 * a1 * inv_bb;        // dS/d(cov)
    // dS/d(mu_x), including var_x = E[x^2] - mu_x^2 and cov = E[xy] - mu_x mu_y
    g_mu.data[i] = 2.0 * my * a2 * inv_bb - 2.0 * mx * a1 * a2 * inv_bb / b1 -
                   2.0 * mx * d_var - my * d_cov;
    g_x2.data[i] = d_var;
    g_xy.data[i] = d_cov;
  }

  const GrayImage t_mu = gauss_adjoint(g_mu);
  const GrayImage t_x2 = gauss_adjoint(g_x2);
  const GrayImage t_xy = gauss_adjoint(g_xy);
  GrayImage grad(h, w);
  const double inv_n = 1.0 / static_cast<double>(x.pixels());
  for (size_t i = 0; i < x.data.size(); ++i)
    grad.data[i] = inv_n * (t_mu.data[i] + 2.0 * x.data[i] * t_x2.data[i] + y.data[i] * t_xy.data[i]);
  return grad;
}

std::string DistanceParts::to_string() const {
  std::string s;
  auto add = [&s](const char* name) {
    if (!s.empty()) s += ",";
    s += name;
  };
  if (l1) add("l1");
  if (l2) add("l2");
  if (ss) add("ss");
  if (nr) add("nr");
  return s.empty() ? "none" : s;
}

DistanceParts DistanceParts::parse(const std::string& s) {
  DistanceParts p;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (token == "l1")
      p.l1 = true;
    else if (token == "l2")
      p.l2 = true;
    else if (token == "ss")
      p.ss = true;
    else if (token == "nr")
      p.nr = true;
    else
      throw ValidationError("unknown distance part '" + token + "'");
    token.clear();
  };
  for (char c : s) {
    if (c == ',' || c == '+' || c == ' ') {
      flush();
    } else {
      token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  flush();
  return p;
}

double distance(const GrayImage& i1, const GrayImage& i2, DistanceParts parts) {
  require_valid(i1, "distance");
  require_valid(i2, "distance");
  require_same_shape(i1, i2, "distance");
  if (!parts.any()) throw ValidationError("distance: no parts selected");
  const double n = static_cast<double>(i1.pixels());
  double abs_sum = 0.0, sq_sum = 0.0;
  for (size_t i = 0; i < i1.data.size(); ++i) {
    const double d = i1.data[i] - i2.data[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  double total = 0.0;
  if (parts.l1) total += abs_sum / n;
  if (parts.l2) total += std::sqrt(sq_sum) / n;
  if (parts.ss) total += 0.5 * (1.0 - ssim(i1, i2));
  if (parts.nr) total += std::sqrt(sq_sum / n);
  return total;
}

DistanceGrad distance_with_grad(const GrayImage& gen, const GrayImage& ref, DistanceParts parts) {
  require_valid(gen, "distance_with_grad");
  require_valid(ref, "distance_with_grad");
  require_same_shape(gen, ref, "distance_with_grad");
  if (!parts.any()) throw ValidationError("distance: no parts selected");
  const double n = static_cast<double>(gen.pixels());
  DistanceGrad out;
  out.grad = GrayImage(gen.height, gen.width);

  double abs_sum = 0.0, sq_sum = 0.0;
  for (size_t i = 0; i < gen.data.size(); ++i) {
    const double d = gen.data[i] - ref.data[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  if (parts.l1) {
    out.value += abs_sum / n;
    for (size_t i = 0; i < gen.data.size(); ++i) {
      const double d = gen.data[i] - ref.data[i];
      out.grad.data[i] += (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / n;
    }
  }
  if (parts.l2) {
    const double root = std::sqrt(sq_sum);
    out.value += root / n;
    if (root > 1e-30) {
      const double scale = 1.0 / (n * root);
      for (size_t i = 0; i < gen.data.size(); ++i)
        out.grad.data[i] += (gen.data[i] - ref.data[i]) * scale;
    }
  }
  if (parts.ss) {
    out.value += 0.5 * (1.0 - ssim(gen, ref));
    const GrayImage g = ssim_gradient(gen, ref);
    for (size_t i = 0; i < gen.data.size(); ++i) out.grad.data[i] -= 0.5 * g.data[i];
  }
  if (parts.nr) {
    const double rmse = std::sqrt(sq_sum / n);
    out.value += rmse;
    if (rmse > 1e-30) {
      const double scale = 1.0 / (n * rmse);
      for (size_t i = 0; i < gen.data.size(); ++i)
        out.grad.data[i] += (gen.data[i] - ref.data[i]) * scale;
    }
  }
  return out;
}

}  // namespace gardin
