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

#ifndef RRF_MATH_HPP
#define RRF_MATH_HPP

#include <cmath>
#include <numbers>

// Small fixed-size linear algebra used throughout the toolkit.
// Everything is templated on the scalar so the render pipeline can run in float (training)
// and double (gradient checking).

namespace rrf
{
    inline constexpr double kPi = std::numbers::pi;
    inline constexpr double kSpeedOfLight = 299792458.0; // [m/s]

    template <typename T>
    struct Vec3
    {
        T x = T(0), y = T(0), z = T(0);

        constexpr Vec3() = default;
        constexpr Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

        template <typename U>
        constexpr explicit Vec3(const Vec3<U> &o) : x(T(o.x)), y(T(o.y)), z(T(o.z)) {}

        constexpr T &operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
        constexpr const T &operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

        constexpr Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
        constexpr Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
        constexpr Vec3 operator-() const { return {-x, -y, -z}; }
        constexpr Vec3 operator*(T s) const { return {x * s, y * s, z * s}; }
        constexpr Vec3 operator/(T s) const { return {x / s, y / s, z / s}; }
        constexpr Vec3 &operator+=(const Vec3 &o) { x += o.x, y += o.y, z += o.z; return *this; }
        constexpr Vec3 &operator-=(const Vec3 &o) { x -= o.x, y -= o.y, z -= o.z; return *this; }
        constexpr Vec3 &operator*=(T s) { x *= s, y *= s, z *= s; return *this; }
        constexpr bool operator==(const Vec3 &o) const = default;
    };

    template <typename T>
    constexpr Vec3<T> operator*(T s, const Vec3<T> &v) { return v * s; }

    template <typename T>
    constexpr T dot(const Vec3<T> &a, const Vec3<T> &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

    template <typename T>
    constexpr Vec3<T> cross(const Vec3<T> &a, const Vec3<T> &b)
    {
        return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
    }

    template <typename T>
    inline T norm(const Vec3<T> &a) { return std::sqrt(dot(a, a)); }

    template <typename T>
    inline Vec3<T> normalized(const Vec3<T> &a) { return a / norm(a); }

    // Row-major 3x3 matrix
    template <typename T>
    struct Mat3
    {
        T m[3][3] = {{T(0), T(0), T(0)}, {T(0), T(0), T(0)}, {T(0), T(0), T(0)}};

        static constexpr Mat3 identity()
        {
            Mat3 r;
            r.m[0][0] = r.m[1][1] = r.m[2][2] = T(1);
            return r;
        }

        static constexpr Mat3 from_columns(const Vec3<T> &c0, const Vec3<T> &c1, const Vec3<T> &c2)
        {
            Mat3 r;
            for (int i = 0; i < 3; ++i)
                r.m[i][0] = c0[i], r.m[i][1] = c1[i], r.m[i][2] = c2[i];
            return r;
        }

        template <typename U>
        constexpr Mat3<U> cast() const
        {
            Mat3<U> r;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    r.m[i][j] = U(m[i][j]);
            return r;
        }

        constexpr T &operator()(int i, int j) { return m[i][j]; }
        constexpr const T &operator()(int i, int j) const { return m[i][j]; }

        constexpr Vec3<T> operator*(const Vec3<T> &v) const
        {
            return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                    m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                    m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
        }

        constexpr Mat3 operator*(const Mat3 &o) const
        {
            Mat3 r;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
            return r;
        }

        constexpr Mat3 transposed() const
        {
            Mat3 r;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    r.m[i][j] = m[j][i];
            return r;
        }

        // M^T * v
        constexpr Vec3<T> transpose_mul(const Vec3<T> &v) const
        {
            return {m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
                    m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
                    m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z};
        }
    };

    // Unit quaternion (w, x, y, z), Hamilton convention
    template <typename T>
    struct Quat
    {
        T w = T(1), x = T(0), y = T(0), z = T(0);

        constexpr Quat() = default;
        constexpr Quat(T w_, T x_, T y_, T z_) : w(w_), x(x_), y(y_), z(z_) {}

        template <typename U>
        constexpr explicit Quat(const Quat<U> &o) : w(T(o.w)), x(T(o.x)), y(T(o.y)), z(T(o.z)) {}

        constexpr T &operator[](int i) { return i == 0 ? w : (i == 1 ? x : (i == 2 ? y : z)); }
        constexpr const T &operator[](int i) const { return i == 0 ? w : (i == 1 ? x : (i == 2 ? y : z)); }
        constexpr bool operator==(const Quat &o) const = default;

        T norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

        Quat normalized() const
        {
            T n = norm();
            return {w / n, x / n, y / n, z / n};
        }

        constexpr Quat conjugate() const { return {w, -x, -y, -z}; }

        constexpr Quat operator*(const Quat &o) const
        {
            return {w * o.w - x * o.x - y * o.y - z * o.z,
                    w * o.x + x * o.w + y * o.z - z * o.y,
                    w * o.y - x * o.z + y * o.w + z * o.x,
                    w * o.z + x * o.y - y * o.x + z * o.w};
        }

        // Rotation matrix of a unit quaternion
        constexpr Mat3<T> to_matrix() const
        {
            Mat3<T> r;
            r.m[0][0] = T(1) - T(2) * (y * y + z * z);
            r.m[0][1] = T(2) * (x * y - w * z);
            r.m[0][2] = T(2) * (x * z + w * y);
            r.m[1][0] = T(2) * (x * y + w * z);
            r.m[1][1] = T(1) - T(2) * (x * x + z * z);
            r.m[1][2] = T(2) * (y * z - w * x);
            r.m[2][0] = T(2) * (x * z - w * y);
            r.m[2][1] = T(2) * (y * z + w * x);
            r.m[2][2] = T(1) - T(2) * (x * x + y * y);
            return r;
        }

        Vec3<T> rotate(const Vec3<T> &v) const { return to_matrix() * v; }

        static Quat from_axis_angle(const Vec3<T> &axis, T angle)
        {
            Vec3<T> a = normalized(axis);
            T s = std::sin(angle / T(2));
            return {std::cos(angle / T(2)), a.x * s, a.y * s, a.z * s};
        }

        static Quat from_yaw(T yaw) { return {std::cos(yaw / T(2)), T(0), T(0), std::sin(yaw / T(2))}; }

        // Quaternion of a proper rotation matrix (Shepperd's method)
        static Quat from_matrix(const Mat3<T> &r)
        {
            T tr = r.m[0][0] + r.m[1][1] + r.m[2][2];
            Quat q;
            if (tr > T(0))
            {
                T s = std::sqrt(tr + T(1)) * T(2);
                q = {T(0.25) * s, (r.m[2][1] - r.m[1][2]) / s, (r.m[0][2] - r.m[2][0]) / s, (r.m[1][0] - r.m[0][1]) / s};
            }
            else if (r.m[0][0] > r.m[1][1] && r.m[0][0] > r.m[2][2])
            {
                T s = std::sqrt(T(1) + r.m[0][0] - r.m[1][1] - r.m[2][2]) * T(2);
                q = {(r.m[2][1] - r.m[1][2]) / s, T(0.25) * s, (r.m[0][1] + r.m[1][0]) / s, (r.m[0][2] + r.m[2][0]) / s};
            }
            else if (r.m[1][1] > r.m[2][2])
            {
                T s = std::sqrt(T(1) + r.m[1][1] - r.m[0][0] - r.m[2][2]) * T(2);
                q = {(r.m[0][2] - r.m[2][0]) / s, (r.m[0][1] + r.m[1][0]) / s, T(0.25) * s, (r.m[1][2] + r.m[2][1]) / s};
            }
            else
            {
                T s = std::sqrt(T(1) + r.m[2][2] - r.m[0][0] - r.m[1][1]) * T(2);
                q = {(r.m[1][0] - r.m[0][1]) / s, (r.m[0][2] + r.m[2][0]) / s, (r.m[1][2] + r.m[2][1]) / s, T(0.25) * s};
            }
            return q.normalized();
        }
    };

    // Symmetric 2x2 matrix [[a, b], [b, c]]
    template <typename T>
    struct Sym2
    {
        T a = T(0), b = T(0), c = T(0);
        T det() const { return a * c - b * b; }
    };

    template <typename T>
    struct Vec2
    {
        T x = T(0), y = T(0);
    };

    template <typename T>
    inline T sigmoid(T x) { return T(1) / (T(1) + std::exp(-x)); }

    template <typename T>
    inline T logit(T p) { return std::log(p / (T(1) - p)); }

} // namespace rrf

#endif
