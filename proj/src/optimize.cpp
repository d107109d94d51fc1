#include "isomer/optimize.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "isomer/surgery.hpp"

namespace isomer {

void ReconConfig::check() const {
  if (coarse_iters < 0 || refine_iters < 0) throw std::runtime_error("iteration counts must be >= 0");
  if (learning_rate <= 0) throw std::runtime_error("learning rate must be positive");
  if (expansion_weight < 0) throw std::runtime_error("expansion weight must be >= 0");
  if (remesh_every <= 0) throw std::runtime_error("remesh cadence must be positive");
  if (coarse_iters > 0 && coarse_iters < remesh_every)
    throw std::runtime_error("coarse iterations must cover at least one remesh interval");
  if (target_edge_start <= 0 || target_edge_end <= 0)
    throw std::runtime_error("target edge fractions must be positive");
  if (sigma <= 0) throw std::runtime_error("sigma must be positive");
}

void LossReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss report: " + path);
  out << "iteration,l_mask,l_normal,total\n";
  for (const auto& r : records)
    out << r.iteration << ',' << r.l_mask << ',' << r.l_normal << ',' << r.total << '\n';
}

LossValue loss_mask_rendered(const TriMesh& mesh, const RenderOutput& rendered,
                             const ViewObservation& obs) {
  if (rendered.soft_mask.width != obs.mask.width || rendered.soft_mask.height != obs.mask.height)
    throw std::runtime_error("mask resolution mismatch");
  const int w = obs.mask.width, h = obs.mask.height;
  Image<double> upstream(w, h, 0.0);
  double value = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double r = rendered.soft_mask.at(x, y) - obs.mask.at(x, y);
      value += r * r;
      upstream.at(x, y) = 2.0 * r;
    }
  }
  LossValue out;
  out.value = value;
  out.grad = backward_mask(mesh, rendered, upstream);
  return out;
}

LossValue loss_normal_rendered(const TriMesh& mesh, const RenderOutput& rendered,
                               const ViewObservation& obs) {
  if (rendered.normal_image.width != obs.normal_map.width ||
      rendered.normal_image.height != obs.normal_map.height)
    throw std::runtime_error("normal resolution mismatch");
  const int w = obs.mask.width, h = obs.mask.height;
  Image<Vec3> upstream(w, h, Vec3{0, 0, 0});
  double value = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double m = obs.mask.at(x, y);
      if (m == 0.0) continue;
      Vec3 diff = rendered.normal_image.at(x, y) - obs.normal_map.at(x, y);
      value += m * norm2(diff);
      if (rendered.face_id.at(x, y) >= 0) upstream.at(x, y) = diff * (2.0 * m);
    }
  }
  LossValue out;
  out.value = value;
  out.grad = backward_normal(mesh, rendered, upstream);
  return out;
}

namespace {

LossValue sum_over_views(const TriMesh& mesh, const std::vector<ViewObservation>& observations,
                         double sigma, bool normal_mode) {
  if (observations.empty()) throw std::runtime_error("at least one observation required");
  LossValue total;
  total.grad = GradientBuffer(mesh.vertices.size());
  RasterSettings settings;
  settings.sigma = sigma;
  for (const auto& obs : observations) {
    RenderOutput rendered = rasterize(mesh, obs.view, settings);
    LossValue lv = normal_mode ? loss_normal_rendered(mesh, rendered, obs)
                               : loss_mask_rendered(mesh, rendered, obs);
    total.value += lv.value;
    total.per_view.push_back(lv.value);
    total.grad.accumulate(lv.grad);
  }
  return total;
}

}  // namespace

LossValue loss_mask(const TriMesh& mesh, const std::vector<ViewObservation>& observations,
                    double sigma) {
  return sum_over_views(mesh, observations, sigma, false);
}

LossValue loss_normal(const TriMesh& mesh, const std::vector<ViewObservation>& observations,
                      double sigma) {
  return sum_over_views(mesh, observations, sigma, true);
}

TriMesh expansion_step(const TriMesh& mesh, double weight, double learning_rate,
                       double target_edge_length) {
  if (weight == 0.0) return mesh;
  TriMesh out = mesh;
  std::vector<Vec3> normals = vertex_normals(mesh);
  double step = weight * learning_rate * target_edge_length;
  for (int v = 0; v < out.vertex_count(); ++v) out.vertices[v] += normals[v] * step;
  return out;
}

namespace detail {

std::vector<Vec3> smooth_gradient(const AdjacencyIndex& adj, const std::vector<Vec3>& grad) {
  std::vector<Vec3> out(grad.size());
  for (size_t v = 0; v < grad.size(); ++v) {
    const auto& nb = adj.vertex_neighbors[v];
    if (nb.empty()) {
      out[v] = grad[v];
      continue;
    }
    Vec3 mean{0, 0, 0};
    for (int n : nb) mean += grad[n];
    out[v] = grad[v] * 0.5 + mean * (0.5 / double(nb.size()));
  }
  return out;
}

void apply_step(TriMesh& mesh, const std::vector<Vec3>& gradient, double scale,
                double target_edge) {
  const double cap = 0.5 * target_edge;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    Vec3 step = gradient[v] * scale;
    double len = norm(step);
    if (len > cap) step *= cap / len;
    mesh.vertices[v] -= step;
  }
}

double remesh_target(const ReconConfig& config, double initial_diagonal, int iteration) {
  double span = std::max(1, config.coarse_iters - 1);
  double t = config.coarse_iters > 1 ? std::min(1.0, iteration / span) : 1.0;
  double frac = config.target_edge_start + (config.target_edge_end - config.target_edge_start) * t;
  return frac * initial_diagonal;
}

}  // namespace detail

OptimizeResult optimize_coarse(const TriMesh& initial,
                               const std::vector<ViewObservation>& observations,
                               const ReconConfig& config) {
  config.check();
  if (observations.empty()) throw std::runtime_error("at least one observation required");
  validate_mesh(initial);

  TriMesh mesh = initial;
  const double diag = bounds(mesh).diagonal();
  const bool was_closed = is_closed_manifold(mesh);
  const double pixel_norm = detail::kGradientBoost /
                            (double(observations.size()) * observations[0].mask.width *
                             observations[0].mask.height);

  LossReport report;
  RasterSettings settings;
  settings.sigma = config.sigma;
  AdjacencyIndex adj = build_adjacency(mesh);

  for (int it = 0; it < config.coarse_iters; ++it) {
    LossRecord rec;
    rec.iteration = it;
    GradientBuffer grad(mesh.vertices.size());
    for (const auto& obs : observations) {
      RenderOutput rendered = rasterize(mesh, obs.view, settings);
      LossValue lm = loss_mask_rendered(mesh, rendered, obs);
      LossValue ln = loss_normal_rendered(mesh, rendered, obs);
      rec.l_mask += lm.value;
      rec.l_normal += ln.value;
      rec.per_view_mask.push_back(lm.value);
      rec.per_view_normal.push_back(ln.value);
      grad.accumulate(lm.grad);
      grad.accumulate(ln.grad);
    }
    rec.total = rec.l_mask + rec.l_normal;
    if (!std::isfinite(rec.total))
      throw std::runtime_error("non-finite loss at iteration " + std::to_string(it));
    if (!grad.finite())
      throw std::runtime_error("non-finite gradient at iteration " + std::to_string(it));
    report.records.push_back(rec);

    std::vector<Vec3> step = grad.d_vertex;
    if (config.grad_smooth) step = detail::smooth_gradient(adj, step);
    double target = detail::remesh_target(config, diag, it);
    double scale = config.learning_rate * pixel_norm;
    detail::apply_step(mesh, step, scale, target);
    mesh = expansion_step(mesh, config.expansion_weight, config.learning_rate, target);

    if ((it + 1) % config.remesh_every == 0) {
      mesh = remesh_pass(mesh, target);
      if (was_closed && !is_closed_manifold(mesh))
        throw std::runtime_error("mesh lost closedness at iteration " + std::to_string(it));
      if (!is_edge_manifold(mesh))
        throw std::runtime_error("mesh lost manifoldness at iteration " + std::to_string(it));
      adj = build_adjacency(mesh);
    }
  }
  return {std::move(mesh), std::move(report)};
}

}  // namespace isomer
