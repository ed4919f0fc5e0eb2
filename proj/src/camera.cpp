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

#include "rrf/camera.hpp"

#include <stdexcept>

namespace rrf
{
    void PinholeCamera::validate() const
    {
        if (!(fov > 0.0 && fov < kPi))
            throw std::invalid_argument("camera fov must lie in (0, pi)");
        if (resolution <= 0)
            throw std::invalid_argument("camera resolution must be positive");
        if (!(near_plane > 0.0 && far_plane > near_plane))
            throw std::invalid_argument("camera requires 0 < near < far");
        if (std::abs(pose.orientation.norm() - 1.0) > 1e-6)
            throw std::invalid_argument("camera orientation must be a unit quaternion");
    }

    Mat3<double> cube_face_rotation(int face)
    {
        // Columns: images of the camera right, down and forward axes in the local frame
        static const Vec3<double> forward[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
        static const Vec3<double> right[6] = {{0, -1, 0}, {0, 1, 0}, {1, 0, 0}, {-1, 0, 0}, {0, -1, 0}, {0, -1, 0}};
        if (face < 0 || face > 5)
            throw std::invalid_argument("cube face index must be 0..5");
        Vec3<double> f = forward[face], r = right[face];
        Vec3<double> d = cross(f, r);
        return Mat3<double>::from_columns(r, d, f);
    }

    static PinholeCamera camera_with_local_rotation(const RxPose &pose, const Mat3<double> &local_from_camera,
                                                    double fov, int resolution)
    {
        PinholeCamera cam;
        cam.pose.position = pose.position;
        cam.pose.orientation = pose.orientation * Quat<double>::from_matrix(local_from_camera);
        cam.fov = fov;
        cam.resolution = resolution;
        return cam;
    }

    PinholeCamera forward_camera(const RxPose &pose, double fov, int resolution)
    {
        return camera_with_local_rotation(pose, cube_face_rotation(0), fov, resolution);
    }

    PinholeCamera cube_face_camera(const RxPose &pose, int face, int resolution)
    {
        PinholeCamera cam = camera_with_local_rotation(pose, cube_face_rotation(face), kPi / 2.0, resolution);
        cam.face_id = face;
        return cam;
    }

    int cube_face_resolution(int panorama_height)
    {
        int r = (panorama_height + 1) / 2;
        return ((r + 15) / 16) * 16;
    }

} // namespace rrf
