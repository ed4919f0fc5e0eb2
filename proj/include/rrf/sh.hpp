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

#ifndef RRF_SH_HPP
#define RRF_SH_HPP

#include "rrf/math.hpp"

#include <span>

// Real spherical harmonics up to degree 3, without the Condon-Shortley phase.
// Coefficients are ordered by degree l, then order m = -l..l:
//   l=0: 1
//   l=1: y, z, x
//   l=2: xy, yz, 3z^2-1, xz, x^2-y^2
//   l=3: y(3x^2-y^2), xyz, y(5z^2-1), z(5z^2-3), x(5z^2-1), z(x^2-y^2), x(x^2-3y^2)
// each scaled by its normalization constant below, so that the basis is orthonormal on the unit sphere.

namespace rrf
{
    inline constexpr int kMaxShDegree = 3;
    inline constexpr int kMaxShCoeffs = 16;

    constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

    namespace sh_const
    {
        inline constexpr double c0 = 0.28209479177387814;  // 1 / (2 sqrt(pi))
        inline constexpr double c1 = 0.48860251190291992;  // sqrt(3 / (4 pi))
        inline constexpr double c2a = 1.0925484305920792;  // sqrt(15 / (4 pi))
        inline constexpr double c2b = 0.31539156525252005; // sqrt(5 / (16 pi))
        inline constexpr double c2c = 0.54627421529603959; // sqrt(15 / (16 pi))
        inline constexpr double c3a = 0.59004358992664352; // sqrt(35 / (32 pi))
        inline constexpr double c3b = 2.8906114426405538;  // sqrt(105 / (4 pi))
        inline constexpr double c3c = 0.45704579946446572; // sqrt(21 / (32 pi))
        inline constexpr double c3d = 0.37317633259011546; // sqrt(7 / (16 pi))
        inline constexpr double c3e = 1.4453057213202769;  // sqrt(105 / (16 pi))
    } // namespace sh_const

    // Basis values at a unit direction, (degree+1)^2 entries written to "out"
    template <typename T>
    inline void sh_basis(int degree, const Vec3<T> &d, T *out)
    {
        using namespace sh_const;
        const T x = d.x, y = d.y, z = d.z;
        out[0] = T(c0);
        if (degree < 1)
            return;
        out[1] = T(c1) * y;
        out[2] = T(c1) * z;
        out[3] = T(c1) * x;
        if (degree < 2)
            return;
        const T xx = x * x, yy = y * y, zz = z * z;
        out[4] = T(c2a) * x * y;
        out[5] = T(c2a) * y * z;
        out[6] = T(c2b) * (T(3) * zz - T(1));
        out[7] = T(c2a) * x * z;
        out[8] = T(c2c) * (xx - yy);
        if (degree < 3)
            return;
        out[9] = T(c3a) * y * (T(3) * xx - yy);
        out[10] = T(c3b) * x * y * z;
        out[11] = T(c3c) * y * (T(5) * zz - T(1));
        out[12] = T(c3d) * z * (T(5) * zz - T(3));
        out[13] = T(c3c) * x * (T(5) * zz - T(1));
        out[14] = T(c3e) * z * (xx - yy);
        out[15] = T(c3a) * x * (xx - T(3) * yy);
    }

    // Partial derivatives of the basis polynomials with respect to the direction components
    template <typename T>
    inline void sh_basis_grad(int degree, const Vec3<T> &d, Vec3<T> *out)
    {
        using namespace sh_const;
        const T x = d.x, y = d.y, z = d.z;
        out[0] = {T(0), T(0), T(0)};
        if (degree < 1)
            return;
        out[1] = {T(0), T(c1), T(0)};
        out[2] = {T(0), T(0), T(c1)};
        out[3] = {T(c1), T(0), T(0)};
        if (degree < 2)
            return;
        out[4] = {T(c2a) * y, T(c2a) * x, T(0)};
        out[5] = {T(0), T(c2a) * z, T(c2a) * y};
        out[6] = {T(0), T(0), T(c2b) * T(6) * z};
        out[7] = {T(c2a) * z, T(0), T(c2a) * x};
        out[8] = {T(c2c) * T(2) * x, -T(c2c) * T(2) * y, T(0)};
        if (degree < 3)
            return;
        const T xx = x * x, yy = y * y, zz = z * z;
        out[9] = {T(c3a) * T(6) * x * y, T(c3a) * (T(3) * xx - T(3) * yy), T(0)};
        out[10] = {T(c3b) * y * z, T(c3b) * x * z, T(c3b) * x * y};
        out[11] = {T(0), T(c3c) * (T(5) * zz - T(1)), T(c3c) * T(10) * y * z};
        out[12] = {T(0), T(0), T(c3d) * (T(15) * zz - T(3))};
        out[13] = {T(c3c) * (T(5) * zz - T(1)), T(0), T(c3c) * T(10) * x * z};
        out[14] = {T(c3e) * T(2) * x * z, -T(c3e) * T(2) * y * z, T(c3e) * (xx - yy)};
        out[15] = {T(c3a) * (T(3) * xx - T(3) * yy), -T(c3a) * T(6) * x * y, T(0)};
    }

    // sum_k coeffs[k] Y_k(dir), with degree inferred from coeffs.size() = (L+1)^2
    double sh_eval(std::span<const double> coeffs, const Vec3<double> &dir);

} // namespace rrf

#endif
