#include "isomer/integrate.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "isomer/parallel.hpp"

namespace isomer {

namespace {

// Scalar field with a validity mask, bilinear-sampled with the weights of
// invalid taps renormalized away.
struct MaskedField {
  const Image<double>* values;
  const Image<uint8_t>* valid;

  bool sample(Vec2 p, double& out) const {
    double u = p.x - 0.5, v = p.y - 0.5;
    int x0 = int(std::floor(u)), y0 = int(std::floor(v));
    double fx = u - x0, fy = v - y0;
    double wsum = 0, vsum = 0;
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) {
        int x = x0 + dx, y = y0 + dy;
        if (!values->in_bounds(x, y) || !valid->at(x, y)) continue;
        double w = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy);
        wsum += w;
        vsum += w * values->at(x, y);
      }
    }
    if (wsum < 0.5) return false;  // mostly invalid support
    out = vsum / wsum;
    return true;
  }
};

struct RotatedIntegral {
  double angle = 0;
  Image<double> cumsum;    // row-wise inclusive sums in the rotated frame
  Image<uint8_t> valid;
  std::vector<double> row_offset;
};

}  // namespace

DepthMap integrate_normals(const Image<Vec3>& normal_map, const Image<double>& mask,
                           const IntegrateOptions& options) {
  const int w = normal_map.width, h = normal_map.height;
  if (options.rotations < 1) throw std::runtime_error("rotation count must be >= 1");

  Image<uint8_t> mask_valid(w, h, 0);
  int valid_count = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      mask_valid.at(x, y) = mask.at(x, y) > 0.5;
      valid_count += mask_valid.at(x, y);
    }
  if (valid_count == 0) throw std::runtime_error("empty mask");

  // Pixel-frame slope field: depth change per +1px step in x and y.
  // Pixel y runs opposite to camera y, hence the sign on n_y.
  Image<double> slope_x(w, h, 0.0), slope_y(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask_valid.at(x, y)) continue;
      const Vec3& n = normal_map.at(x, y);
      if (options.mode == IntegrationMode::paper) {
        slope_x.at(x, y) = n.x;
        slope_y.at(x, y) = -n.y;
      } else {
        double nz = std::max(n.z, options.min_nz);
        slope_x.at(x, y) = -n.x / nz * options.pixel_world_size;
        slope_y.at(x, y) = n.y / nz * options.pixel_world_size;
      }
    }
  }
  MaskedField sx_field{&slope_x, &mask_valid};
  MaskedField sy_field{&slope_y, &mask_valid};

  std::vector<double> angles(options.rotations, 0.0);
  {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * kPi);
    for (int k = 1; k < options.rotations; ++k) angles[k] = uniform(rng);
  }

  const Vec2 center{0.5 * w, 0.5 * h};
  auto to_source = [&](double angle, Vec2 q) {
    double c = std::cos(-angle), s = std::sin(-angle);
    Vec2 d = q - center;
    return center + Vec2{c * d.x - s * d.y, s * d.x + c * d.y};
  };
  auto to_rotated = [&](double angle, Vec2 p) { return to_source(-angle, p); };

  // Row-wise integration in each rotated frame.
  std::vector<RotatedIntegral> rotations(options.rotations);
  parallel_blocks(options.rotations, [&](int k) {
    RotatedIntegral& r = rotations[k];
    r.angle = angles[k];
    r.cumsum = Image<double>(w, h, 0.0);
    r.valid = Image<uint8_t>(w, h, 0);
    r.row_offset.assign(h, 0.0);
    double ux = std::cos(r.angle), uy = -std::sin(r.angle);  // slope . u per +1px step
    for (int j = 0; j < h; ++j) {
      double acc = 0.0;
      for (int i = 0; i < w; ++i) {
        Vec2 src = to_source(r.angle, {i + 0.5, j + 0.5});
        double sx, sy;
        if (sx_field.sample(src, sx) && sy_field.sample(src, sy)) {
          acc += ux * sx + uy * sy;
          r.valid.at(i, j) = 1;
        }
        r.cumsum.at(i, j) = acc;
      }
    }
  });

  // Bilinear sample of (cumsum + per-row offset) in the rotated frame,
  // skipping invalid taps.
  auto rotate_back = [&](const RotatedIntegral& r, Image<double>& out, Image<uint8_t>& out_valid) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        out_valid.at(x, y) = 0;
        if (!mask_valid.at(x, y)) continue;
        Vec2 q = to_rotated(r.angle, {x + 0.5, y + 0.5});
        double u = q.x - 0.5, v = q.y - 0.5;
        int x0 = int(std::floor(u)), y0 = int(std::floor(v));
        double fx = u - x0, fy = v - y0;
        double wsum = 0, vsum = 0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            int tx = x0 + dx, ty = y0 + dy;
            if (!r.cumsum.in_bounds(tx, ty) || !r.valid.at(tx, ty)) continue;
            double wt = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy);
            wsum += wt;
            vsum += wt * (r.cumsum.at(tx, ty) + r.row_offset[ty]);
          }
        }
        if (wsum < 0.5) continue;
        out.at(x, y) = vsum / wsum;
        out_valid.at(x, y) = 1;
      }
    }
  };

  std::vector<Image<double>> estimates(options.rotations);
  std::vector<Image<uint8_t>> estimate_valid(options.rotations);
  for (int k = 0; k < options.rotations; ++k) {
    estimates[k] = Image<double>(w, h, 0.0);
    estimate_valid[k] = Image<uint8_t>(w, h, 0);
  }
  Image<double> mean(w, h, 0.0);
  Image<uint8_t> mean_valid(w, h, 0);

  auto rebuild_mean = [&] {
    parallel_blocks(options.rotations, [&](int k) {
      rotate_back(rotations[k], estimates[k], estimate_valid[k]);
    });
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double sum = 0;
        int n = 0;
        for (int k = 0; k < options.rotations; ++k) {
          if (!estimate_valid[k].at(x, y)) continue;
          sum += estimates[k].at(x, y);
          n++;
        }
        mean_valid.at(x, y) = n > 0;
        mean.at(x, y) = n > 0 ? sum / n : 0.0;
      }
    }
  };

  rebuild_mean();

  // Each rotation only determines depth up to a constant per rotated row.
  // Reconcile: set every row offset to the mean disagreement against the
  // current ensemble average, then re-average.
  int align_rounds = options.rotations > 1 ? options.align_iters : 0;
  for (int round = 0; round < align_rounds; ++round) {
    parallel_blocks(options.rotations, [&](int k) {
      RotatedIntegral& r = rotations[k];
      MaskedField mean_field{&mean, &mean_valid};
      for (int j = 0; j < h; ++j) {
        double diff = 0;
        int n = 0;
        for (int i = 0; i < w; ++i) {
          if (!r.valid.at(i, j)) continue;
          Vec2 src = to_source(r.angle, {i + 0.5, j + 0.5});
          double m;
          if (!mean_field.sample(src, m)) continue;
          diff += m - r.cumsum.at(i, j);
          n++;
        }
        if (n > 0) r.row_offset[j] = diff / n;
      }
    });
    rebuild_mean();
  }

  // Zero-mean per connected mask component (4-connectivity).
  DepthMap out;
  out.depth = mean;
  out.valid = Image<uint8_t>(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out.valid.at(x, y) = mask_valid.at(x, y) && mean_valid.at(x, y);

  Image<int> component(w, h, -1);
  std::vector<std::pair<double, int>> component_stats;  // (sum, count)
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!out.valid.at(x, y) || component.at(x, y) >= 0) continue;
      int id = int(component_stats.size());
      component_stats.push_back({0.0, 0});
      component.at(x, y) = id;
      stack.push_back({x, y});
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        component_stats[id].first += out.depth.at(cx, cy);
        component_stats[id].second++;
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
          int nx = cx + dx[d], ny = cy + dy[d];
          if (!out.depth.in_bounds(nx, ny) || !out.valid.at(nx, ny)) continue;
          if (component.at(nx, ny) >= 0) continue;
          component.at(nx, ny) = id;
          stack.push_back({nx, ny});
        }
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!out.valid.at(x, y)) continue;
      const auto& [sum, count] = component_stats[component.at(x, y)];
      out.depth.at(x, y) -= sum / count;
    }
  }
  return out;
}

}  // namespace isomer
