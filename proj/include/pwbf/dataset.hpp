#pragma once

#include "pwbf/aberration.hpp"
#include "pwbf/beamform.hpp"
#include "pwbf/compound.hpp"
#include "pwbf/config.hpp"
#include "pwbf/dataio.hpp"
#include "pwbf/scene.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pwbf {

// One (noisy input, clean target) training pair. Paths are relative to the
// directory holding the manifest.
struct ManifestRecord {
  std::string input_path;
  std::string target_path;
  double sigma{};
  std::uint64_t seed{};
  std::size_t planewaves{};
  std::string phantom;
  double scale{}; // max |value| over input and target
  std::size_t scene{};

  bool operator==(const ManifestRecord &) const = default;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;
};

inline nlohmann::ordered_json to_json(const ManifestRecord &r) {
  nlohmann::ordered_json j;
  j["input_path"] = r.input_path;
  j["target_path"] = r.target_path;
  j["sigma"] = r.sigma;
  j["seed"] = r.seed;
  j["K"] = r.planewaves;
  j["phantom"] = r.phantom;
  j["scale"] = r.scale;
  j["scene"] = r.scene;
  return j;
}

inline ManifestRecord record_from_json(const nlohmann::json &j) {
  ManifestRecord r;
  r.input_path = j.at("input_path").get<std::string>();
  r.target_path = j.at("target_path").get<std::string>();
  r.sigma = j.at("sigma").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.planewaves = j.at("K").get<std::size_t>();
  r.phantom = j.at("phantom").get<std::string>();
  r.scale = j.at("scale").get<double>();
  r.scene = j.at("scene").get<std::size_t>();
  return r;
}

// JSON Lines, one record per line.
inline void write_manifest(const std::filesystem::path &path,
                           const DatasetManifest &m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write manifest " + path.string());
  }
  for (const auto &r : m.records) {
    out << to_json(r).dump() << '\n';
  }
}

inline DatasetManifest read_manifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open manifest " + path.string());
  }
  DatasetManifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    m.records.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return m;
}

// Throws if a referenced file is missing, a sigma is not one of the
// standard levels, or a scene references more than one target.
inline void validate_manifest(const DatasetManifest &m,
                              const std::filesystem::path &root) {
  const auto levels = sigma_levels();
  std::map<std::size_t, std::string> target_of;
  for (const auto &r : m.records) {
    for (const auto &p : {r.input_path, r.target_path}) {
      if (!std::filesystem::exists(root / p)) {
        throw std::runtime_error("manifest: missing file " + (root / p).string());
      }
    }
    if (std::find(levels.begin(), levels.end(), r.sigma) == levels.end()) {
      throw std::runtime_error("manifest: sigma not a standard level");
    }
    const auto [it, inserted] = target_of.emplace(r.scene, r.target_path);
    if (!inserted && it->second != r.target_path) {
      throw std::runtime_error("manifest: scene has more than one target");
    }
    if (!(r.scale > 0.0)) {
      throw std::runtime_error("manifest: scale must be > 0");
    }
  }
}

inline std::vector<std::size_t> dataset_planewave_counts() {
  return {31, 25, 15};
}

inline std::string sigma_tag(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", sigma);
  return buf;
}

// Per scene: simulate, beamform at every sigma level, write the noisy
// A x L x K inputs for each plane-wave count and one shared target (CPC of
// the aberration-free full set). Scenes alternate hypo/hyperechoic.
// The aberration profile of a scene uses the scene seed at every level, so
// the levels differ only in perturbation scale.
inline DatasetManifest emit_dataset(std::size_t num_scenes,
                                    const std::filesystem::path &out_dir,
                                    const std::vector<std::uint64_t> &seeds,
                                    const RunConfig &cfg) {
  if (seeds.size() < num_scenes) {
    throw std::invalid_argument("emit_dataset: need one seed per scene");
  }
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const std::size_t k_full = cfg.probe.num_planewaves;
  const AngleSet angles = cfg.angles();
  const double c = cfg.imaging.assumed_sos;

  DatasetManifest manifest;
  for (std::size_t scene = 0; scene < num_scenes; ++scene) {
    const std::uint64_t seed = seeds[scene];
    const PhantomKind kind =
        scene % 2 == 0 ? PhantomKind::Hypoechoic : PhantomKind::Hyperechoic;
    const Phantom phantom = scene_phantom(cfg, kind, seed);
    const RfCube cube = simulate_scene(cfg, phantom);

    char stem[32];
    std::snprintf(stem, sizeof stem, "scene%04zu", scene);
    const std::string target_name = std::string(stem) + "_target.utb";

    Matrix<double> target;
    double target_peak = 0.0;
    for (double sigma : sigma_levels()) {
      const auto profile = sample_profile(c, sigma, cfg.imaging.num_scanlines,
                                          k_full, seed);
      const DasTensor das = das_all(cube, profile, cfg.apodization,
                                    cfg.imaging, cfg.probe, angles);
      if (sigma == 0.0) {
        target = cpc(das).v;
        for (double v : target.flat()) {
          target_peak = std::max(target_peak, std::abs(v));
        }
        write_blob(out_dir / target_name, to_blob(target));
      }
      for (std::size_t k : dataset_planewave_counts()) {
        if (k > k_full) {
          continue;
        }
        const DasTensor input = take_planewaves(das, select_subset(k_full, k));
        double peak = target_peak;
        for (double v : input.z.flat()) {
          peak = std::max(peak, std::abs(v));
        }
        const std::string input_name = std::string(stem) + "_sigma" +
                                       sigma_tag(sigma) + "_K" +
                                       std::to_string(k) + ".utb";
        write_blob(out_dir / input_name, to_blob(input.z));
        manifest.records.push_back({input_name, target_name, sigma, seed, k,
                                    to_string(kind), peak, scene});
      }
    }
  }
  write_manifest(out_dir / "manifest.jsonl", manifest);
  return manifest;
}

} // namespace pwbf
