#include "isomer/refine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "isomer/parallel.hpp"
#include "isomer/surgery.hpp"

namespace isomer {

VertexTargets compute_explicit_target(const TriMesh& mesh,
                                      const std::vector<ViewObservation>& observations,
                                      TargetPayload payload, EtNormalization normalization,
                                      double depth_epsilon) {
  const int nv = mesh.vertex_count();
  std::vector<Vec3> normals = vertex_normals(mesh);

  struct ViewData {
    const ViewObservation* obs;
    std::vector<char> visible;
    Mat3 world_from_camera;
    Vec3 view_dir;
  };
  std::vector<ViewData> views;
  views.reserve(observations.size());
  for (const auto& obs : observations) {
    ViewData vd;
    vd.obs = &obs;
    vd.visible = vertex_visibility(mesh, obs.view, depth_epsilon);
    vd.world_from_camera = obs.view.world_to_camera().transposed();
    vd.view_dir = obs.view.view_direction();
    views.push_back(std::move(vd));
  }

  VertexTargets targets;
  targets.values.assign(nv, Vec3{0, 0, 0});
  targets.covered.assign(nv, 0);

  const int block = 1024;
  parallel_blocks((nv + block - 1) / block, [&](int b) {
    for (int v = b * block; v < std::min(nv, (b + 1) * block); ++v) {
      double total_weight = 0;
      int visible_count = 0;
      Vec3 total{0, 0, 0};
      for (const auto& vd : views) {
        if (!vd.visible[v]) continue;
        Projection proj = project(vd.obs->view, mesh.vertices[v]);
        double c = dot(normals[v], vd.view_dir);
        double w = c * c;
        Vec3 sample;
        if (payload == TargetPayload::rgb) {
          sample = sample_vec3(vd.obs->rgb, proj.pixel);
        } else {
          sample = vd.world_from_camera * sample_vec3(vd.obs->normal_map, proj.pixel);
        }
        total_weight += w;
        total += sample * w;
        visible_count++;
      }
      bool covered = normalization == EtNormalization::weight_sum ? total_weight > 0
                                                                  : visible_count > 0;
      if (!covered) continue;
      double denom = normalization == EtNormalization::weight_sum ? total_weight
                                                                  : double(visible_count);
      Vec3 value = total / denom;
      if (payload == TargetPayload::normals) value = normalized(value, normals[v]);
      targets.values[v] = value;
      targets.covered[v] = 1;
    }
  });
  return targets;
}

namespace {

LossValue loss_et_rendered(const TriMesh& mesh, const RenderOutput& rendered,
                           const ViewObservation& obs, const std::vector<Vec3>& cam_targets) {
  const int w = obs.mask.width, h = obs.mask.height;
  Image<Vec3> up_normal(w, h, Vec3{0, 0, 0});
  Image<Vec3> up_attr(w, h, Vec3{0, 0, 0});
  double value = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double m = obs.mask.at(x, y);
      if (m == 0.0 || rendered.face_id.at(x, y) < 0) continue;
      Vec3 diff = rendered.normal_image.at(x, y) - rendered.attribute_image.at(x, y);
      value += m * norm2(diff);
      up_normal.at(x, y) = diff * (2.0 * m);
      up_attr.at(x, y) = diff * (-2.0 * m);
    }
  }
  LossValue out;
  out.value = value;
  out.grad = backward_normal(mesh, rendered, up_normal);
  out.grad.accumulate(backward_attribute(mesh, rendered, cam_targets, true, up_attr));
  return out;
}

}  // namespace

LossValue loss_explicit_target(const TriMesh& mesh,
                               const std::vector<ViewObservation>& observations,
                               const VertexTargets& targets, double sigma) {
  if (int(targets.values.size()) != mesh.vertex_count())
    throw std::runtime_error("target count does not match vertex count");
  LossValue total;
  total.grad = GradientBuffer(mesh.vertices.size());
  for (const auto& obs : observations) {
    Mat3 rot = obs.view.world_to_camera();
    std::vector<Vec3> cam_targets(targets.values.size());
    for (size_t v = 0; v < targets.values.size(); ++v) cam_targets[v] = rot * targets.values[v];
    RasterSettings settings;
    settings.sigma = sigma;
    settings.attributes = &cam_targets;
    settings.normalize_attributes = true;
    RenderOutput rendered = rasterize(mesh, obs.view, settings);
    LossValue lv = loss_et_rendered(mesh, rendered, obs, cam_targets);
    total.value += lv.value;
    total.per_view.push_back(lv.value);
    total.grad.accumulate(lv.grad);
  }
  return total;
}

OptimizeResult refine(const TriMesh& initial, const std::vector<ViewObservation>& observations,
                      const ReconConfig& config, bool use_explicit_target) {
  config.check();
  if (observations.empty()) throw std::runtime_error("at least one observation required");
  validate_mesh(initial);

  TriMesh mesh = initial;
  const double diag = bounds(mesh).diagonal();
  const double target = config.target_edge_end * diag;
  const bool was_closed = is_closed_manifold(mesh);
  const double pixel_norm = detail::kGradientBoost /
                            (double(observations.size()) * observations[0].mask.width *
                             observations[0].mask.height);

  LossReport report;
  AdjacencyIndex adj = build_adjacency(mesh);

  for (int it = 0; it < config.refine_iters; ++it) {
    LossRecord rec;
    rec.iteration = it;
    GradientBuffer grad(mesh.vertices.size());

    LossValue lm = loss_mask(mesh, observations, config.sigma);
    grad.accumulate(lm.grad);
    rec.l_mask = lm.value;
    rec.per_view_mask = lm.per_view;

    LossValue lt;
    if (use_explicit_target) {
      VertexTargets targets =
          compute_explicit_target(mesh, observations, TargetPayload::normals);
      lt = loss_explicit_target(mesh, observations, targets, config.sigma);
    } else {
      lt = loss_normal(mesh, observations, config.sigma);
    }
    grad.accumulate(lt.grad);
    rec.l_normal = lt.value;
    rec.per_view_normal = lt.per_view;

    rec.total = rec.l_mask + rec.l_normal;
    if (!std::isfinite(rec.total))
      throw std::runtime_error("non-finite loss at refine iteration " + std::to_string(it));
    if (!grad.finite())
      throw std::runtime_error("non-finite gradient at refine iteration " + std::to_string(it));
    report.records.push_back(rec);

    std::vector<Vec3> step = grad.d_vertex;
    if (config.grad_smooth) step = detail::smooth_gradient(adj, step);
    double scale = config.learning_rate * pixel_norm;
    detail::apply_step(mesh, step, scale, target);
    if (config.expansion_in_refine)
      mesh = expansion_step(mesh, config.expansion_weight, config.learning_rate, target);

    if ((it + 1) % config.remesh_every == 0) {
      mesh = remesh_pass(mesh, target);
      if (was_closed && !is_closed_manifold(mesh))
        throw std::runtime_error("mesh lost closedness at refine iteration " + std::to_string(it));
      if (!is_edge_manifold(mesh))
        throw std::runtime_error("mesh lost manifoldness at refine iteration " +
                                 std::to_string(it));
      adj = build_adjacency(mesh);
    }
  }
  return {std::move(mesh), std::move(report)};
}

TriMesh colorize(const TriMesh& mesh, const std::vector<ViewObservation>& observations) {
  VertexTargets targets = compute_explicit_target(mesh, observations, TargetPayload::rgb);
  std::vector<Vec3> colors(mesh.vertex_count(), Vec3{0, 0, 0});
  std::vector<int> invisible;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (targets.covered[v]) colors[v] = clamp01(targets.values[v]);
    else invisible.push_back(v);
  }
  TriMesh out = mesh;
  out.colors = color_completion(mesh, invisible, std::move(colors));
  return out;
}

std::vector<Vec3> color_completion(const TriMesh& mesh, const std::vector<int>& invisible,
                                   std::vector<Vec3> colors) {
  if (invisible.empty()) return colors;
  AdjacencyIndex adj = build_adjacency(mesh);

  std::vector<char> colored(mesh.vertex_count(), 1);
  for (int v : invisible) colored[v] = 0;
  std::vector<int> pending = invisible;
  std::sort(pending.begin(), pending.end());

  // Pass budget: coloring plus the matching number of smoothing passes always
  // fits well under this; only unreachable components exhaust it.
  const long max_passes = 10L * std::max(1, mesh.vertex_count());
  long passes = 0;
  long cnt = 0;
  bool stage2 = false;
  while ((!stage2 || cnt > 0) && passes < max_passes) {
    passes++;
    bool all_colored = true;
    for (int v : pending) {
      Vec3 sum{0, 0, 0};
      int n = 0;
      for (int nb : adj.vertex_neighbors[v]) {
        if (!colored[nb]) continue;
        sum += colors[nb];
        n++;
      }
      if (n > 0) {
        colored[v] = 1;
        colors[v] = sum / double(n);
      } else {
        colored[v] = 0;
        all_colored = false;
      }
    }
    if (all_colored) {
      stage2 = true;
      cnt--;
    } else {
      cnt++;
    }
  }
  for (int v : pending)
    if (!colored[v]) colors[v] = {0.5, 0.5, 0.5};
  return colors;
}

}  // namespace isomer
