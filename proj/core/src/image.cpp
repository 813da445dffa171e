#include "dd/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>

#include "dd/error.hpp"

namespace dd {

std::optional<Tensor> try_load_image_file(const std::string& path) {
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) return std::nullopt;
  Tensor img({3, bgr.rows, bgr.cols});
  const std::size_t plane = static_cast<std::size_t>(bgr.rows) * bgr.cols;
  for (int y = 0; y < bgr.rows; ++y) {
    const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      const std::size_t k = static_cast<std::size_t>(y) * bgr.cols + x;
      img[k] = row[x][2] / 255.0;              // R
      img[plane + k] = row[x][1] / 255.0;      // G
      img[2 * plane + k] = row[x][0] / 255.0;  // B
    }
  }
  clamp01_inplace(img);
  return img;
}

Tensor load_image_file(const std::string& path) {
  auto img = try_load_image_file(path);
  if (!img) throw RuntimeFailure("cannot decode image file: " + path);
  return std::move(*img);
}

void save_png(const std::string& path, const Tensor& img) {
  if (img.rank() != 3 || img.dim(0) != 3) throw ConfigError("save_png: expects (3,H,W)");
  const int h = img.dim(1), w = img.dim(2);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  cv::Mat bgr(h, w, CV_8UC3);
  for (int y = 0; y < h; ++y) {
    cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < w; ++x) {
      const std::size_t k = static_cast<std::size_t>(y) * w + x;
      auto q = [](real_t v) {
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        return static_cast<unsigned char>(std::lround(v * 255.0));
      };
      row[x][2] = q(img[k]);
      row[x][1] = q(img[plane + k]);
      row[x][0] = q(img[2 * plane + k]);
    }
  }
  if (!cv::imwrite(path, bgr)) throw RuntimeFailure("cannot write PNG: " + path);
}

Tensor resize_bilinear(const Tensor& img, int out_h, int out_w) {
  if (img.rank() != 3) throw ConfigError("resize_bilinear: expects (C,H,W)");
  const int c = img.dim(0), in_h = img.dim(1), in_w = img.dim(2);
  if (out_h <= 0 || out_w <= 0) throw ConfigError("resize_bilinear: bad output size");
  if (in_h == out_h && in_w == out_w) return img;
  Tensor out({c, out_h, out_w});
  const real_t sy = static_cast<real_t>(in_h) / out_h;
  const real_t sx = static_cast<real_t>(in_w) / out_w;
  for (int ch = 0; ch < c; ++ch) {
    const real_t* src = img.data() + static_cast<std::size_t>(ch) * in_h * in_w;
    real_t* dst = out.data() + static_cast<std::size_t>(ch) * out_h * out_w;
    for (int y = 0; y < out_h; ++y) {
      real_t fy = (y + 0.5) * sy - 0.5;
      fy = std::clamp<real_t>(fy, 0.0, in_h - 1.0);
      const int y0 = static_cast<int>(fy);
      const int y1 = std::min(y0 + 1, in_h - 1);
      const real_t wy = fy - y0;
      for (int x = 0; x < out_w; ++x) {
        real_t fx = (x + 0.5) * sx - 0.5;
        fx = std::clamp<real_t>(fx, 0.0, in_w - 1.0);
        const int x0 = static_cast<int>(fx);
        const int x1 = std::min(x0 + 1, in_w - 1);
        const real_t wx = fx - x0;
        const real_t top = src[y0 * in_w + x0] * (1 - wx) + src[y0 * in_w + x1] * wx;
        const real_t bot = src[y1 * in_w + x0] * (1 - wx) + src[y1 * in_w + x1] * wx;
        dst[y * out_w + x] = top * (1 - wy) + bot * wy;
      }
    }
  }
  return out;
}

void clamp01_inplace(Tensor& t) {
  for (std::size_t i = 0; i < t.numel(); ++i)
    t[i] = t[i] < 0.0 ? 0.0 : (t[i] > 1.0 ? 1.0 : t[i]);
}

Tensor stack_batch(const std::vector<const Tensor*>& images) {
  if (images.empty()) throw ConfigError("stack_batch: empty batch");
  const Tensor& first = *images.front();
  if (first.rank() != 3) throw ConfigError("stack_batch: expects (C,H,W) images");
  Tensor out({static_cast<int>(images.size()), first.dim(0), first.dim(1), first.dim(2)});
  const std::size_t stride = first.numel();
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!images[i]->same_shape(first)) throw ConfigError("stack_batch: mixed image shapes");
    std::copy(images[i]->data(), images[i]->data() + stride, out.data() + i * stride);
  }
  return out;
}

Tensor stack_batch(const std::vector<Tensor>& images) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(images.size());
  for (const auto& t : images) ptrs.push_back(&t);
  return stack_batch(ptrs);
}

Tensor batch_slice(const Tensor& batch, int index) {
  if (batch.rank() != 4) throw ConfigError("batch_slice: expects (N,C,H,W)");
  Tensor out({batch.dim(1), batch.dim(2), batch.dim(3)});
  const std::size_t stride = out.numel();
  std::copy(batch.data() + static_cast<std::size_t>(index) * stride,
            batch.data() + static_cast<std::size_t>(index + 1) * stride, out.data());
  return out;
}

}  // namespace dd
