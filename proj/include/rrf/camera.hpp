// SPDX-License-Identifier: Apache-2.0
//
// rrf - radio radiance field toolkit
// Copyright (C) 2026 The rrf authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RRF_CAMERA_HPP
#define RRF_CAMERA_HPP

#include "rrf/spectrum.hpp"

#include <array>

namespace rrf
{
    // Square pinhole camera. pose.orientation maps camera coordinates (x right, y down, z forward) to world.
    struct PinholeCamera
    {
        RxPose pose;
        double fov = kPi / 2.0; // Full opening angle of the square frustum [rad]
        int resolution = 64;
        double near_plane = 0.01;
        double far_plane = 1000.0;
        int face_id = -1; // Cube face index when part of a panorama

        double focal() const { return 0.5 * resolution / std::tan(0.5 * fov); }

        // Throws std::invalid_argument on invalid fields
        void validate() const;
    };

    // Rotation mapping camera axes into the pose-local frame (+x forward, +y left, +z up)
    // for the six cube faces: 0 +x, 1 -x, 2 +y, 3 -y, 4 +z, 5 -z.
    Mat3<double> cube_face_rotation(int face);

    // Pinhole camera at the pose position looking along local +x with local +z up
    PinholeCamera forward_camera(const RxPose &pose, double fov, int resolution);

    // One of the six pi/2 cube-face cameras of a panorama
    PinholeCamera cube_face_camera(const RxPose &pose, int face, int resolution);

    // Cube face resolution for an H x 2H panorama: ceil(H / 2) rounded up to a multiple of 16
    int cube_face_resolution(int panorama_height);

} // namespace rrf

#endif
