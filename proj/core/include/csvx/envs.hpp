#pragma once

#include <optional>
#include <string>

#include "csvx/env.hpp"
#include "csvx/grid.hpp"

namespace csvx {

// Grid move actions share one id scheme across the grid environments.
enum GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

/// 3x3 walkable grid plus a terminal goal column on the right; features
/// (row, col), step reward -1, +10 on entering the goal, gamma 1.
EnvSpec build_gridworld1();

/// Two symmetric goals on the right edge; features (row, col).
EnvSpec build_gridworld2(const Grid* layout = nullptr);

/// Deterministic lake crossing; features (x, y) with y growing southwards.
/// Entering a hole: -10 terminal; goal: +10 terminal; any other move: -1.
EnvSpec build_frozenlake(const Grid* layout = nullptr);

/// 5x5 taxi with four depots; features (row, col, passenger, destination),
/// passenger value 4 meaning "in taxi". Actions: 4 moves, pickup, dropoff.
EnvSpec build_taxi();
enum TaxiAction : int { kPickup = 4, kDropoff = 5 };
inline constexpr int kPassengerInTaxi = 4;

/// 4x4 minesweeper over a fixed mine layout ('M' cells). One feature per
/// cell with domain {0,1,2,hidden}; actions reveal cells.
EnvSpec build_minesweeper(const Grid& layout);
Grid default_minesweeper_grid();
inline constexpr int kCellHidden = 3;

struct PendulumDiscretization {
  int angle_bins = 16;
  int velocity_bins = 16;
};

/// Swing-up pendulum on bin-center dynamics; 11 torque actions from -2.0
/// to 2.0 in steps of 0.4.
EnvSpec build_pendulum(const PendulumDiscretization& disc = {});

/// Angle bin of a (cos, sin) pair, bins of 360/angle_bins degrees starting
/// at 0 (upright).
int pendulum_angle_bin(double cos_theta, double sin_theta, int angle_bins);
const std::vector<double>& pendulum_torques();

/// Appends a dynamics-irrelevant constant feature (domain size 1).
EnvSpec augment_with_constant_feature(const EnvSpec& env, const std::string& name);

/// Builds one of {gridworld1, gridworld2, frozenlake, taxi, minesweeper,
/// pendulum} by name, with an optional grid fixture override.
EnvSpec build_env_by_name(const std::string& name,
                          const std::optional<std::string>& fixture_path = {});

}  // namespace csvx
