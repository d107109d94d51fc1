// Command-line pipeline: fixture generation, reconstruction, evaluation.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "isomer/fixture.hpp"
#include "isomer/initmesh.hpp"
#include "isomer/meshio.hpp"
#include "isomer/metrics.hpp"
#include "isomer/optimize.hpp"
#include "isomer/refine.hpp"
#include "isomer/shapes.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace isomer;

namespace {

constexpr const char* kVersion = "0.1.0";

class Stopwatch {
 public:
  double lap() {
    auto now = std::chrono::steady_clock::now();
    double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

int fail(int code, const std::string& message) {
  std::cerr << "error: " << message << '\n';
  return code;
}

int classify_error(const std::string& message) {
  if (message.find("silhouette topology mismatch") != std::string::npos) return 3;
  if (message.find("non-finite") != std::string::npos) return 4;
  return 2;
}

json config_json(const ReconConfig& c) {
  return {{"coarse_iters", c.coarse_iters},
          {"learning_rate", c.learning_rate},
          {"expansion_weight", c.expansion_weight},
          {"refine_iters", c.refine_iters},
          {"remesh_every", c.remesh_every},
          {"target_edge_start", c.target_edge_start},
          {"target_edge_end", c.target_edge_end},
          {"grad_smooth", c.grad_smooth},
          {"expansion_in_refine", c.expansion_in_refine},
          {"sigma", c.sigma},
          {"seed", c.seed},
          {"init_resolution", c.init_resolution}};
}

int run_fixture(const std::string& gt_path, int views, int res, const std::string& out_dir,
                int normal_bits) {
  try {
    TriMesh mesh = normalize_unit_box(load_mesh(gt_path));
    FixtureOptions options;
    options.normal_bits = normal_bits;
    generate_fixture(mesh, default_view_ring(views, 0.0, res), out_dir, options);
    std::cout << "wrote " << views * 3 << " images + views.json to " << out_dir << '\n';
    return 0;
  } catch (const std::exception& e) {
    return fail(classify_error(e.what()), e.what());
  }
}

int run_reconstruct(std::string input, const std::string& out_path, ReconConfig config,
                    const std::string& init_mode, int sphere_subdiv) {
  try {
    if (fs::is_directory(input)) input = (fs::path(input) / "views.json").string();
    Stopwatch watch;
    std::vector<ViewObservation> observations = load_observations(input);
    double t_load = watch.lap();

    TriMesh init_mesh;
    if (init_mode == "sphere") {
      init_mesh = sphere_init(sphere_subdiv);
    } else {
      const ViewObservation* front = nullptr;
      const ViewObservation* back = nullptr;
      for (const auto& obs : observations) {
        double az = std::fmod(rad_to_deg(obs.view.azimuth) + 360.0, 360.0);
        if (std::abs(az) < 1e-6 || std::abs(az - 360.0) < 1e-6) front = &obs;
        if (std::abs(az - 180.0) < 1e-6) back = &obs;
      }
      if (!front || !back)
        throw std::runtime_error("initialization needs views at azimuth 0 and 180 degrees");
      ViewObservation front_small = *front, back_small = *back;
      if (front->view.width > config.init_resolution &&
          front->view.width % config.init_resolution == 0) {
        front_small =
            downsample_observation(*front, config.init_resolution, config.init_resolution);
        back_small =
            downsample_observation(*back, config.init_resolution, config.init_resolution);
      }
      InitConfig ic;
      ic.seed = config.seed;
      init_mesh = estimate_initial_mesh(front_small, back_small, ic);
    }
    double t_init = watch.lap();

    OptimizeResult coarse = optimize_coarse(init_mesh, observations, config);
    double t_coarse = watch.lap();
    OptimizeResult refined = refine(coarse.mesh, observations, config);
    double t_refine = watch.lap();
    TriMesh colored = colorize(refined.mesh, observations);
    double t_color = watch.lap();

    fs::path out(out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_mesh(colored, out_path);

    LossReport merged = coarse.report;
    for (LossRecord r : refined.report.records) {
      r.iteration += config.coarse_iters;
      merged.records.push_back(std::move(r));
    }
    fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
    merged.write_csv((dir / "losses.csv").string());

    json manifest;
    manifest["tool_version"] = kVersion;
    manifest["input"] = input;
    manifest["output"] = out_path;
    manifest["init"] = init_mode;
    manifest["config"] = config_json(config);
    manifest["timings_s"] = {{"load", t_load},
                             {"init", t_init},
                             {"coarse", t_coarse},
                             {"refine", t_refine},
                             {"colorize", t_color}};
    std::ofstream mf(dir / "run_manifest.json");
    mf << manifest.dump(2) << '\n';

    std::printf("load      %7.2f s\n", t_load);
    std::printf("init      %7.2f s\n", t_init);
    std::printf("coarse    %7.2f s\n", t_coarse);
    std::printf("refine    %7.2f s\n", t_refine);
    std::printf("colorize  %7.2f s\n", t_color);
    std::printf("vertices  %d  faces %d\n", colored.vertex_count(), colored.face_count());
    return 0;
  } catch (const std::exception& e) {
    int code = classify_error(e.what());
    if (code == 3) return fail(3, std::string(e.what()) + " (hint: retry with --init sphere)");
    return fail(code, e.what());
  }
}

int run_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& metric_list, double tau, int samples, int resolution,
             int render_res, uint64_t seed, const std::string& out_json) {
  std::vector<std::string> metrics;
  {
    std::string token;
    std::istringstream in(metric_list);
    while (std::getline(in, token, ',')) metrics.push_back(token);
  }
  for (const auto& m : metrics) {
    if (m != "cd" && m != "iou" && m != "fscore" && m != "psnr" && m != "ssim") {
      std::cerr << "error: unknown metric '" << m
                << "' (expected a comma-separated subset of cd,iou,fscore,psnr,ssim)\n";
      return 1;
    }
  }
  try {
    TriMesh pred = normalize_unit_box(load_mesh(pred_path));
    TriMesh gt = normalize_unit_box(load_mesh(gt_path));

    MetricsReport report;
    report.fscore_tau = tau;
    std::vector<Image<Vec3>> pred_views, gt_views;
    auto ensure_renders = [&] {
      if (!pred_views.empty()) return;
      pred_views = render_eval_views(pred, {0, 15, 30}, 8, render_res);
      gt_views = render_eval_views(gt, {0, 15, 30}, 8, render_res);
    };
    for (const auto& m : metrics) {
      if (m == "cd") {
        report.chamfer = chamfer_distance(pred, gt, samples, seed);
      } else if (m == "iou") {
        report.volume_iou = volume_iou(pred, gt, resolution);
      } else if (m == "fscore") {
        report.fscore = fscore(pred, gt, tau, samples, seed);
      } else if (m == "psnr") {
        ensure_renders();
        double sum = 0;
        for (size_t i = 0; i < pred_views.size(); ++i) {
          report.psnr_per_view.push_back(psnr(pred_views[i], gt_views[i]));
          sum += report.psnr_per_view.back();
        }
        report.psnr_mean = sum / double(pred_views.size());
      } else if (m == "ssim") {
        ensure_renders();
        double sum = 0;
        for (size_t i = 0; i < pred_views.size(); ++i) {
          report.ssim_per_view.push_back(ssim(pred_views[i], gt_views[i]));
          sum += report.ssim_per_view.back();
        }
        report.ssim_mean = sum / double(pred_views.size());
      }
    }
    std::cout << report.to_table();
    if (!out_json.empty()) {
      std::ofstream out(out_json);
      if (!out) throw std::runtime_error("cannot write report: " + out_json);
      out << report.to_json() << '\n';
    } else {
      std::cout << report.to_json() << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(classify_error(e.what()), e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view orthographic mesh reconstruction"};
  app.require_subcommand(1);

  auto* fixture = app.add_subcommand("fixture", "Render ground-truth views of a mesh");
  std::string fx_gt, fx_out;
  int fx_views = 4, fx_res = 256, fx_bits = 8;
  fixture->add_option("--gt", fx_gt, "ground-truth mesh (.obj/.ply)")->required();
  fixture->add_option("--views", fx_views, "number of views (azimuth ring)");
  fixture->add_option("--res", fx_res, "image resolution");
  fixture->add_option("--out", fx_out, "output directory")->required();
  fixture->add_option("--normal-bits", fx_bits, "normal PNG bit depth (8 or 16)");

  auto* rec = app.add_subcommand("reconstruct", "Reconstruct a colored mesh from views");
  std::string rc_input, rc_out = "out.ply", rc_init = "auto";
  int rc_sphere_subdiv = 4;
  ReconConfig config;
  rec->add_option("--input", rc_input, "view directory or views.json")->required();
  rec->add_option("--out", rc_out, "output mesh (.ply/.obj)");
  rec->add_option("--iters", config.coarse_iters, "coarse iterations");
  rec->add_option("--lr", config.learning_rate, "learning rate");
  rec->add_option("--expansion", config.expansion_weight, "expansion regularization weight");
  rec->add_option("--refine-iters", config.refine_iters, "refinement iterations");
  rec->add_option("--remesh-every", config.remesh_every, "remesh cadence (iterations)");
  rec->add_option("--sigma", config.sigma, "silhouette softness in pixels");
  rec->add_option("--seed", config.seed, "random seed");
  rec->add_option("--init", rc_init, "initialization: auto | sphere")
      ->check(CLI::IsMember({"auto", "sphere"}));
  rec->add_option("--sphere-subdiv", rc_sphere_subdiv,
                  "icosphere subdivisions for --init sphere");
  rec->add_flag("!--no-grad-smooth", config.grad_smooth, "disable 1-ring gradient smoothing");
  rec->add_flag("!--no-refine-expansion", config.expansion_in_refine,
                "disable expansion during refinement");

  auto* eval = app.add_subcommand("eval", "Compare a reconstruction against ground truth");
  std::string ev_pred, ev_gt, ev_metrics = "cd,iou,fscore,psnr,ssim", ev_json;
  double ev_tau = 0.05;
  int ev_samples = 10000, ev_resolution = 64, ev_render_res = 256;
  uint64_t ev_seed = 0;
  eval->add_option("--pred", ev_pred, "predicted mesh")->required();
  eval->add_option("--gt", ev_gt, "ground-truth mesh")->required();
  eval->add_option("--metrics", ev_metrics, "comma list: cd,iou,fscore,psnr,ssim");
  eval->add_option("--tau", ev_tau, "f-score threshold");
  eval->add_option("--samples", ev_samples, "surface samples for cd/fscore");
  eval->add_option("--resolution", ev_resolution, "voxel grid resolution for iou");
  eval->add_option("--render-res", ev_render_res, "render resolution for psnr/ssim");
  eval->add_option("--seed", ev_seed, "sampling seed");
  eval->add_option("--out", ev_json, "write metrics JSON here (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  if (fixture->parsed()) return run_fixture(fx_gt, fx_views, fx_res, fx_out, fx_bits);
  if (rec->parsed()) return run_reconstruct(rc_input, rc_out, config, rc_init, rc_sphere_subdiv);
  if (eval->parsed())
    return run_eval(ev_pred, ev_gt, ev_metrics, ev_tau, ev_samples, ev_resolution, ev_render_res,
                    ev_seed, ev_json);
  return 1;
}
