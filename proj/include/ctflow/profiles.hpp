#pragma once

#include <functional>
#include <string>

#include "ctflow/kernel.hpp"
#include "ctflow/threshold.hpp"

namespace ctflow {

// Smooth compactly-concentrated initial datum with analytic derivative.
struct Profile {
    enum class Kind { Sech2, SteepenedSech2, Plateau };

    Kind kind = Kind::Sech2;
    std::string spec;  // the string this profile was parsed from
    std::function<double(double)> rho0;
    std::function<double(double)> drho0;
    double amplitude = 0.0;      // max of rho0
    double support_radius = 0.0; // rho0 < 1e-14 beyond +-radius

    double mass() const;  // integral of rho0 by quadrature
};

// rho0(x) = A sech^2(x/w). Mass is 2 A w.
Profile make_sech2(double A, double w);

// sech^2 bump sheared so the rising flank (x < 0) steepens with skew > 0.
Profile make_steepened_sech2(double A, double w, double skew);

// Gentle rise to a plateau peaking exactly at the given height, then a steep
// descending front of slope scale 1/front_steepness. Rise scale is width/2;
// strictly positive everywhere.
Profile make_plateau(double height, double width, double front_steepness);

// "sech2:A=0.2,w=4" | "ssech2:A=..,w=..,skew=.." | "plateau:h=..,w=..,s=.."
Profile parse_profile_spec(const std::string& spec);

// Evaluates rho0 and its derivative at the grid cell centers.
ProfileSamples sample(const Profile& profile, const GridSpec& grid);

}  // namespace ctflow
