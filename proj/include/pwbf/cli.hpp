#pragma once

#include "pwbf/aberration.hpp"
#include "pwbf/beamform.hpp"
#include "pwbf/compound.hpp"
#include "pwbf/config.hpp"
#include "pwbf/dataio.hpp"
#include "pwbf/dataset.hpp"
#include "pwbf/metrics.hpp"
#include "pwbf/parallel.hpp"
#include "pwbf/postproc.hpp"
#include "pwbf/rfsim.hpp"
#include "pwbf/scene.hpp"
#include "pwbf/svdbf.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace pwbf::cli {

namespace fs = std::filesystem;

struct BenchReport {
  std::string method; // cpc | svd | cnn-infer
  std::size_t planewaves{};
  double wall_ms{};
  std::size_t rows{};
  std::size_t cols{};
};

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Deterministic pseudo-RF tensor for timing runs.
inline DasTensor bench_tensor(std::size_t rows, std::size_t cols,
                              std::size_t planewaves, std::uint64_t seed = 7) {
  DasTensor t{Tensor3<double>(rows, cols, planewaves), ImagingConfig{},
              AngleSet{}};
  const CounterRng rng(seed, 0xBE);
  auto &data = t.z.storage();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = rng.uniform(i, -1.0, 1.0);
  }
  return t;
}

// Median wall time in ms of `reps` runs of `fn` (I/O excluded by the caller).
template <typename Fn> double time_ms(std::size_t reps, Fn &&fn) {
  std::vector<double> samples;
  samples.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    samples.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return median(samples);
}

inline std::vector<BenchReport> run_bench(std::size_t rows, std::size_t cols,
                                          std::size_t planewaves,
                                          std::size_t reps,
                                          std::size_t patch = 32) {
  const DasTensor t = bench_tensor(rows, cols, planewaves);
  const auto subset = all_planewaves(planewaves);
  double sink = 0.0;
  const double cpc_ms = time_ms(reps, [&] { sink += cpc(t, subset).v(0, 0); });
  const double svd_ms = time_ms(reps, [&] {
    sink += svd_beamform(t, std::min(patch, rows), std::min(patch, cols))
                .envelope(0, 0);
  });
  (void)sink;
  return {{"cpc", planewaves, cpc_ms, rows, cols},
          {"svd", planewaves, svd_ms, rows, cols}};
}

namespace detail {

struct Dims2 {
  std::size_t rows{}, cols{};
};

inline Dims2 parse_dims(const std::string &s) {
  const auto x = s.find('x');
  if (x == std::string::npos) {
    throw CLI::ValidationError("expected RxC, got " + s);
  }
  try {
    return {std::stoul(s.substr(0, x)), std::stoul(s.substr(x + 1))};
  } catch (const std::exception &) {
    throw CLI::ValidationError("expected RxC, got " + s);
  }
}

inline void require_file(const std::string &path) {
  if (!fs::exists(path)) {
    throw std::runtime_error("input file not found: " + path);
  }
}

inline RfCube read_cube(const std::string &path, const RunConfig &cfg) {
  require_file(path);
  RfCube cube{blob_to_tensor3(read_blob(path)), cfg.probe.sampling_frequency,
              0.0};
  if (cube.num_elements() != cfg.probe.num_elements ||
      cube.num_planewaves() != cfg.probe.num_planewaves) {
    throw std::runtime_error("cube " + path +
                             " does not match the probe configuration");
  }
  return cube;
}

inline DasTensor read_das(const std::string &path, const RunConfig &cfg) {
  require_file(path);
  DasTensor t{blob_to_tensor3(read_blob(path)), cfg.imaging, AngleSet{}};
  if (t.planewaves() == cfg.probe.num_planewaves) {
    t.angles = cfg.angles();
  }
  return t;
}

inline std::vector<std::size_t> subset_for(const DasTensor &t,
                                           std::size_t pw) {
  if (pw == 0 || pw == t.planewaves()) {
    return all_planewaves(t.planewaves());
  }
  return select_subset(t.planewaves(), pw);
}

inline std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

} // namespace detail

// Stage operations shared by the individual subcommands and `pipeline`, so
// both produce identical bytes.
namespace stage {

inline RfCube simulate(const RunConfig &cfg, PhantomKind kind,
                       std::uint64_t seed) {
  return simulate_scene(cfg, scene_phantom(cfg, kind, seed));
}

inline DasTensor beamform(const RunConfig &cfg, const RfCube &cube,
                          double sigma, std::uint64_t seed) {
  const auto profile =
      sample_profile(cfg.imaging.assumed_sos, sigma, cfg.imaging.num_scanlines,
                     cube.num_planewaves(), seed);
  return das_all(cube, profile, cfg.apodization, cfg.imaging, cfg.probe,
                 cfg.angles());
}

inline CompoundImage compound(const DasTensor &das, std::size_t pw) {
  return cpc(das, detail::subset_for(das, pw));
}

inline SvdBeamformResult svdbf(const DasTensor &das, std::size_t pw,
                               detail::Dims2 patch) {
  const auto subset = detail::subset_for(das, pw);
  const DasTensor sub = subset.size() == das.planewaves()
                            ? das
                            : take_planewaves(das, subset);
  return svd_beamform(sub, patch.rows, patch.cols);
}

} // namespace stage

inline int run(const std::vector<std::string> &args, std::ostream &out,
               std::ostream &err) {
  CLI::App app{"Plane-wave ultrasound beamforming toolkit", "pwbf"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_path;
  unsigned threads = 1;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  // simulate
  auto *sim = app.add_subcommand("simulate", "simulate RF channel data");
  std::string phantom = "hypoechoic";
  std::uint64_t seed = 1;
  std::string in_path, out_path;
  sim->add_option("--phantom", phantom, "hypoechoic|hyperechoic|point_targets");
  sim->add_option("--seed", seed);
  sim->add_option("--out", out_path)->required();

  // beamform
  auto *bf = app.add_subcommand("beamform", "delay-and-sum every plane wave");
  double sigma = 0.0;
  bf->add_option("--in", in_path)->required();
  bf->add_option("--sigma", sigma, "speed-of-sound perturbation bound [m/s]");
  bf->add_option("--seed", seed);
  bf->add_option("--out", out_path)->required();

  // compound
  auto *cp = app.add_subcommand("compound", "coherent plane-wave compounding");
  std::size_t pw = 0;
  cp->add_option("--in", in_path)->required();
  cp->add_option("--pw", pw, "plane-wave count (default: all)");
  cp->add_option("--out", out_path)->required();

  // svdbf
  auto *sv = app.add_subcommand("svdbf", "patch-wise SVD beamformer");
  std::string patch = "32x32";
  std::string envelope_path;
  sv->add_option("--in", in_path)->required();
  sv->add_option("--patch", patch, "axial x lateral patch size");
  sv->add_option("--pw", pw, "plane-wave count (default: all)");
  sv->add_option("--out", out_path)->required();
  sv->add_option("--envelope", envelope_path, "also write |output| here");

  // bmode
  auto *bm = app.add_subcommand("bmode", "envelope, log compression, PGM");
  double dr = 60.0;
  bool envelope_input = false;
  bm->add_option("--in", in_path)->required();
  auto *bm_dr = bm->add_option("--dr", dr, "dynamic range [dB] (default: config)");
  bm->add_flag("--envelope-input", envelope_input,
               "input is already an envelope (skip the Hilbert step)");
  bm->add_option("--out", out_path)->required();

  // metrics
  auto *mt = app.add_subcommand("metrics", "CR / CNR / GCNR of two regions");
  std::string roi_a, roi_b;
  std::size_t bins = 256;
  bool linear = false;
  mt->add_option("--in", in_path)->required();
  mt->add_option("--roi-a", roi_a)->required();
  mt->add_option("--roi-b", roi_b)->required();
  auto *mt_dr =
      mt->add_option("--dr", dr, "dynamic range the PGM was written with");
  mt->add_option("--bins", bins, "GCNR histogram bins");
  mt->add_flag("--linear", linear, "score linear envelope instead of dB");

  // dataset
  auto *ds = app.add_subcommand("dataset", "emit self-supervised training data");
  std::size_t scenes = 1;
  std::uint64_t base_seed = 1;
  ds->add_option("--scenes", scenes);
  ds->add_option("--seed", base_seed, "seed of the first scene");
  ds->add_option("--out", out_path)->required();

  // bench
  auto *bn = app.add_subcommand("bench", "time CPC against the SVD beamformer");
  std::string grid = "1024x192";
  std::size_t reps = 3;
  std::size_t bench_pw = 31;
  bn->add_option("--pw", bench_pw);
  bn->add_option("--grid", grid, "rows x cols");
  bn->add_option("--reps", reps)->check(CLI::PositiveNumber);

  // pipeline
  auto *pl = app.add_subcommand("pipeline", "simulate through metrics");
  double pipe_sigma = 0.0;
  std::string out_dir = ".";
  pl->add_option("--phantom", phantom);
  pl->add_option("--sigma", pipe_sigma);
  pl->add_option("--pw", pw);
  pl->add_option("--seed", seed);
  pl->add_option("--patch", patch);
  auto *pl_dr = pl->add_option("--dr", dr);
  pl->add_option("--out", out_dir);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    set_threads(threads);
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    cfg.validate();
    if (bm_dr->count() + mt_dr->count() + pl_dr->count() == 0) {
      dr = cfg.imaging.dynamic_range;
    }

    if (*sim) {
      const RfCube cube = stage::simulate(cfg, parse_phantom_kind(phantom), seed);
      write_blob(out_path, to_blob(cube.samples));
    } else if (*bf) {
      const RfCube cube = detail::read_cube(in_path, cfg);
      write_blob(out_path, to_blob(stage::beamform(cfg, cube, sigma, seed).z));
    } else if (*cp) {
      const DasTensor das = detail::read_das(in_path, cfg);
      write_blob(out_path, to_blob(stage::compound(das, pw).v));
    } else if (*sv) {
      const DasTensor das = detail::read_das(in_path, cfg);
      const auto r = stage::svdbf(das, pw, detail::parse_dims(patch));
      write_blob(out_path, to_blob(r.image.v));
      if (!envelope_path.empty()) {
        write_blob(envelope_path, to_blob(r.envelope));
      }
      if (r.fallbacks > 0) {
        err << "svdbf: " << r.fallbacks << " of " << r.patches
            << " patches fell back to the plain mean\n";
      }
    } else if (*bm) {
      detail::require_file(in_path);
      const Matrix<double> img = blob_to_matrix(read_blob(in_path));
      const Matrix<double> env = envelope_input ? img : envelope(img);
      write_pgm(out_path, log_compress(env, dr).db, dr);
    } else if (*mt) {
      detail::require_file(in_path);
      Matrix<double> img = read_pgm_db(in_path, dr);
      if (linear) {
        for (double &v : img.storage()) {
          v = std::pow(10.0, v / 20.0);
        }
      }
      const MetricsReport r =
          evaluate(img, parse_roi(roi_a), parse_roi(roi_b), bins);
      out << "cr_db,cnr,gcnr,domain\n"
          << detail::csv_number(r.cr_db) << ',' << detail::csv_number(r.cnr)
          << ',' << detail::csv_number(r.gcnr) << ','
          << (linear ? "linear" : "db") << '\n';
    } else if (*ds) {
      std::vector<std::uint64_t> seeds(scenes);
      for (std::size_t i = 0; i < scenes; ++i) {
        seeds[i] = base_seed + i;
      }
      const auto m = emit_dataset(scenes, out_path, seeds, cfg);
      out << "wrote " << m.records.size() << " records to "
          << (fs::path(out_path) / "manifest.jsonl").string() << '\n';
    } else if (*bn) {
      const auto dims = detail::parse_dims(grid);
      out << "method,K,wall_ms,rows,cols\n";
      for (const auto &r : run_bench(dims.rows, dims.cols, bench_pw, reps)) {
        out << r.method << ',' << r.planewaves << ','
            << detail::csv_number(r.wall_ms) << ',' << r.rows << ',' << r.cols
            << '\n';
      }
    } else if (*pl) {
      const fs::path dir(out_dir);
      fs::create_directories(dir);
      const PhantomKind kind = parse_phantom_kind(phantom);
      const RfCube cube = stage::simulate(cfg, kind, seed);
      write_blob(dir / "cube.utb", to_blob(cube.samples));
      // Re-read so every later stage sees exactly what the stage commands see.
      const RfCube cube_in = detail::read_cube((dir / "cube.utb").string(), cfg);
      const DasTensor das = stage::beamform(cfg, cube_in, pipe_sigma, seed);
      write_blob(dir / "das.utb", to_blob(das.z));
      const CompoundImage compound = stage::compound(das, pw);
      write_blob(dir / "cpc.utb", to_blob(compound.v));
      const auto svd = stage::svdbf(das, pw, detail::parse_dims(patch));
      write_blob(dir / "svd.utb", to_blob(svd.image.v));
      write_blob(dir / "svd_env.utb", to_blob(svd.envelope));

      const BmodeImage cpc_db = log_compress(envelope(compound.v), dr);
      const BmodeImage svd_db = log_compress(svd.envelope, dr);
      write_pgm(dir / "cpc.pgm", cpc_db.db, dr);
      write_pgm(dir / "svd.pgm", svd_db.db, dr);

      const auto [ra, rb] = cyst_rois(cfg, scene_spec(cfg));
      std::ofstream csv(dir / "metrics.csv");
      csv << "method,cr_db,cnr,gcnr,domain\n";
      for (const auto &[name, file] :
           {std::pair{"cpc", "cpc.pgm"}, std::pair{"svd", "svd.pgm"}}) {
        // Scored from the written 8-bit images, as the metrics command does.
        const Matrix<double> img = read_pgm_db(dir / file, dr);
        const MetricsReport r = evaluate(img, ra, rb, bins);
        csv << name << ',' << detail::csv_number(r.cr_db) << ','
            << detail::csv_number(r.cnr) << ',' << detail::csv_number(r.gcnr)
            << ",db\n";
      }
      out << "wrote pipeline outputs to " << dir.string() << '\n';
    }
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

inline int run(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

} // namespace pwbf::cli
