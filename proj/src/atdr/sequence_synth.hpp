#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "atdr/annotations.hpp"
#include "atdr/image.hpp"
#include "atdr/scene_synth.hpp"
#include "atdr/sensor_model.hpp"

namespace atdr {

enum class TrajectoryKind { s_curve, direct };

TrajectoryKind parse_trajectory_kind(const std::string& name);

struct GroundPoint {
  double x = 0.0;  // meters
  double y = 0.0;
};

// Planar target path. The S path follows the start->end centerline with a
// sinusoidal lateral offset; the direct path is the centerline itself.
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::direct;
  GroundPoint start;
  GroundPoint end;
  double s_amplitude = 0.0;  // meters
  int s_periods = 0;
  double speed = 10.0;       // m/s
  double frame_rate = 25.0;  // Hz

  void validate() const;
};

struct SensorGeometry {
  double x = 0.0;  // ground-plane position, meters
  double y = 0.0;
  double height = 2.0;
  double focal_scale = 2000.0;         // pixels per radian
  std::optional<GroundPoint> look_at;  // defaults to the path midpoint

  void validate() const;
};

struct TrajectorySample {
  std::size_t frame = 0;
  GroundPoint position;
  double heading = 0.0;  // degrees, direction of motion
  double range = 0.0;    // meters, sensor to target
  double aspect = 0.0;   // degrees in [0, 360); 0 = facing the sensor
  double lateral_offset = 0.0;
};

// One sample every 1/frame_rate seconds at constant speed along the path.
std::vector<TrajectorySample> sample_trajectory(const Trajectory& t, const SensorGeometry& geom);

// Pinhole camera looking from the sensor toward its aim point; image
// center at the principal point.
class GroundProjector {
 public:
  GroundProjector(const SensorGeometry& geom, GroundPoint aim, int image_width, int image_height);
  // Image position (pixels) of a ground point.
  std::pair<double, double> project(GroundPoint p) const;

 private:
  double cam_[3];
  double forward_[3];
  double right_[3];
  double down_[3];
  double focal_;
  double cx_;
  double cy_;
};

// Pre-rendered target views keyed by aspect angle and thermal signature.
class SpriteLibrary {
 public:
  struct Entry {
    double aspect = 0.0;
    std::string signature;
    Sprite sprite;
  };

  explicit SpriteLibrary(std::vector<Entry> entries, double bucket_width = 10.0);
  static SpriteLibrary load(const std::filesystem::path& manifest);

  double bucket_width() const { return bucket_width_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<std::string> signatures() const;

  // Nearest aspect bucket on the circle; ties resolve to the bucket
  // below the query (350 for 355 between 350 and 0).
  const Entry& nearest(double aspect, const std::string& signature) const;

  void validate() const;

 private:
  std::vector<Entry> entries_;
  double bucket_width_;
};

double circular_distance(double a_degrees, double b_degrees);

struct SequenceFrameInfo {
  TrajectorySample sample;
  double bucket_aspect = 0.0;
  double apparent_height = 0.0;  // pixels, after sensor sampling
  QualityMetrics measured;
  double q_d = 0.0;  // measured rss times full target surface
  double achieved_rx = 0.0;
};

struct RenderedSequence {
  std::vector<Image> frames;  // post-sensor images
  std::vector<FrameRecord> annotations;
  std::vector<SequenceFrameInfo> info;
};

struct SequenceRequest {
  Trajectory trajectory;
  SensorGeometry geometry;
  SceneRecipe recipe;  // rss, scr, k, r_x, nu_k held for the whole sequence
  SensorConfig sensor;
  std::string signature = "default";
  std::string frame_pattern = "frame_%06zu.pgm";
};

// Renders every frame of the sequence. Target size follows range geometry
// rather than Q_D; per-frame randomness derives from (seed, frame index).
RenderedSequence render_sequence(const SequenceRequest& request, const SpriteLibrary& library,
                                 const Image& background, const Sprite* occultant,
                                 unsigned jobs = 1);

}  // namespace atdr
