#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robocooklab/pointcloud.hpp"
#include "robocooklab/rng.hpp"
#include "robocooklab/sdf.hpp"

namespace rcl::sim {

enum class ParamKind { Translation, Rotation, Aperture };

struct ActionParam {
  std::string name;
  ParamKind kind;
  double min_value = 0.0;
  double max_value = 1.0;
};

/// One rigid piece of a tool: its solid geometry and a fixed local-frame
/// surface sample (with outward normals) used as the tool's particles.
struct ToolBody {
  SdfShape shape;
  PointCloud sample;
};

struct Action {
  std::string tool;
  std::vector<double> params;
};

/// Per-body rigid poses at one control step.
using BodyPoses = std::vector<Pose>;

/// What a tool script needs to know about the dough when the action starts.
struct ScriptContext {
  Vec3 centroid;
  double height = 0.0;      // max particle z
  double clearance = 0.02;  // extra travel above the dough
};

struct ToolSpec {
  std::string id;
  std::vector<ToolBody> bodies;
  std::vector<ActionParam> action_space;

  // Tool-specific script constants.
  double open_width = 0.07;    // grippers: start/end aperture
  double roll_distance = 0.09; // rollers: fixed travel
  double push_offset = 0.03;   // knife: how far the smaller side is moved
  bool is_gripper = false;
  bool is_roller = false;
  bool is_knife = false;

  int dim() const { return int(action_space.size()); }
  void validate(const Action& a) const;  // throws ACTION_OUT_OF_RANGE
};

/// The built-in tool set, in registry order (ties in classifiers and
/// planners break toward the lower index).
const std::vector<ToolSpec>& tool_registry();
const ToolSpec& find_tool(const std::string& id);

/// Uniform parameter sample, deterministic by seed.
Action random_action(const ToolSpec& tool, std::uint64_t seed);

/// Rigid pose of every body at control steps 0..n_steps (inclusive), for
/// the scripted trajectory of this action. Knife scripts cover only the
/// descend/retract phases; the cut itself is applied by the episode layer.
std::vector<BodyPoses> script_poses(const ToolSpec& tool, const Action& action,
                                    const ScriptContext& ctx, int n_steps);

/// World-frame tool particle cloud at one scripted step (group = 1 + body).
PointCloud tool_points_at(const ToolSpec& tool, const BodyPoses& poses);

/// World-frame solid shapes at one scripted step, for collision projection.
std::vector<SdfShape> tool_shapes_at(const ToolSpec& tool, const BodyPoses& poses);

/// Normalized gripper closing schedule: aperture vs phase in [0,1], before
/// clamping at the commanded minimum distance. Shared between the simulator
/// script and the differentiable planner path.
double gripper_width_schedule(double phase, double open_width);
/// Vertical descent schedule shared by presses, punches, rollers, knives.
double descend_fraction(double phase);
/// Roller horizontal travel fraction.
double roll_fraction(double phase);

}  // namespace rcl::sim
