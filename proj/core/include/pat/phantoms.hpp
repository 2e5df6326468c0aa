#pragma once

#include "pat/geometry.hpp"

#include <string>

namespace pat {

enum class SpeedKind { Constant, Nontrapping, Trapping };

/// Sound-speed field on the plane. The analytic formula applies inside
/// |x| <= radius - eps_smooth; a quintic C^2 blend brings the field to
/// exactly 1 for |x| >= radius - eps_smooth/2 and everywhere outside.
struct SpeedField {
    SpeedKind kind = SpeedKind::Constant;
    double constant_value = 1.0;   // used by Constant
    double radius = 1.0;
    double eps_smooth = 0.1;       // mollification width near the boundary

    double value(Vec2 x) const;
    double c_min() const;
    double c_max() const;

    static SpeedField constant(double c, double radius);
    static SpeedField nontrapping(double radius);
    static SpeedField trapping(double radius);
    static SpeedField parse(const std::string& name, double radius);
};

enum class PhantomKind { SheppLogan, Ghosts, Gaussian, None };

/// Initial-pressure phantom. All phantoms vanish for |x| >= 0.95*radius and
/// have quintic-ramped edges of half-width `smoothing` so they live in H^1.
struct Phantom {
    PhantomKind kind = PhantomKind::Ghosts;
    double radius = 1.0;
    double smoothing = 0.02;

    double value(Vec2 x) const;

    static Phantom parse(const std::string& name, double radius, double smoothing);
};

/// Smoothed Shepp-Logan head phantom (standard low-contrast intensity table),
/// geometrically rescaled so the outer ellipse fits the disk of radius
/// 0.9*radius. The indicator of each ellipse is replaced by a quintic ramp
/// over a band of total geometric width 2*smoothing inside the edge.
double shepp_logan(Vec2 x, double smoothing, double radius = 1.0);

/// Fixed test composition of two smoothed disks and one annular arc inside
/// radius 0.9*radius, values in [0, 1]:
///   disk A: center (-0.38, 0.22)*radius, plateau 0.14, outer 0.24, peak 1.0
///   disk B: center (0.25, -0.18)*radius, plateau 0.07, outer 0.14, peak 0.8
///   arc:    center (0,0), mid radius 0.62, half width 0.08 (quintic across),
///           half angle 60 deg about the +x axis, 15 deg angular ramp, peak 0.6
double ghost_phantom(Vec2 x, double radius = 1.0);

/// Radial bump exp(-|x-c|^2/(2 sigma^2)) windowed to vanish for
/// |x| >= 0.9*radius.
double gaussian_bump(Vec2 x, Vec2 center, double sigma, double radius = 1.0);

/// Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, C^2 across both ends.
double smoothstep5(double t);

/// Longest travel time from any interior point to the boundary circle in the
/// metric c^{-2} dx, computed by fast marching for |grad u| = 1/c on a
/// Cartesian grid masked to the disk.
double estimate_T0(const SpeedField& field, double grid_spacing);

}  // namespace pat
