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

#include "rrf/scene.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rrf
{
    using json = nlohmann::json;

    Facet Facet::from_corners(const std::array<Point3, 4> &corners, double reflection_coeff)
    {
        Facet f;
        f.vertices = corners;
        f.normal = normalized(cross(corners[1] - corners[0], corners[3] - corners[0]));
        f.reflection_coeff = reflection_coeff;
        return f;
    }

    double Facet::area() const
    {
        return 0.5 * norm(cross(vertices[1] - vertices[0], vertices[2] - vertices[0])) +
               0.5 * norm(cross(vertices[2] - vertices[0], vertices[3] - vertices[0]));
    }

    bool Facet::contains(const Point3 &p) const
    {
        double scale = std::max(norm(vertices[2] - vertices[0]), norm(vertices[3] - vertices[1]));
        double eps = 1e-9 * scale * scale;
        bool pos = false, neg = false;
        for (int i = 0; i < 4; ++i)
        {
            const Point3 &a = vertices[i];
            const Point3 &b = vertices[(i + 1) % 4];
            double s = dot(cross(b - a, p - a), normal);
            if (s > eps)
                pos = true;
            else if (s < -eps)
                neg = true;
            if (pos && neg)
                return false;
        }
        return true;
    }

    bool Aabb::contains(const Point3 &p) const
    {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z && p.z <= max.z;
    }

    void Scene::validate() const
    {
        for (std::size_t i = 0; i < facets.size(); ++i)
        {
            const Facet &f = facets[i];
            std::string id = "facet " + std::to_string(i) + ": ";
            if (std::abs(norm(f.normal) - 1.0) > 1e-12)
                throw std::invalid_argument(id + "normal is not unit length");
            double scale = std::max(norm(f.vertices[2] - f.vertices[0]), norm(f.vertices[3] - f.vertices[1]));
            if (!(scale > 0.0))
                throw std::invalid_argument(id + "degenerate quad");
            for (const auto &v : f.vertices)
                if (std::abs(f.signed_distance(v)) > 1e-9 * scale)
                    throw std::invalid_argument(id + "vertices are not coplanar with the normal");
            if (!(f.reflection_coeff >= 0.0 && f.reflection_coeff <= 1.0))
                throw std::invalid_argument(id + "reflection coefficient outside [0, 1]");

            // Convexity: all edge turns share the normal's orientation
            for (int k = 0; k < 4; ++k)
            {
                const Point3 &a = f.vertices[k], &b = f.vertices[(k + 1) % 4], &c = f.vertices[(k + 2) % 4];
                if (dot(cross(b - a, c - b), f.normal) <= 0.0)
                    throw std::invalid_argument(id + "quad is not convex or winding disagrees with the normal");
            }
        }
        const Point3 &lo = aabb.min, &hi = aabb.max;
        if (!(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z))
            throw std::invalid_argument("aabb is empty");
        if (!(tx_position.x > lo.x && tx_position.x < hi.x && tx_position.y > lo.y && tx_position.y < hi.y &&
              tx_position.z > lo.z && tx_position.z < hi.z))
            throw std::invalid_argument("tx_position must lie strictly inside the aabb");
        if (!(carrier_freq > 0.0))
            throw std::invalid_argument("carrier_freq must be positive");
        if (!(g_ref > 0.0))
            throw std::invalid_argument("g_ref must be positive");
        if (!(tau_max > aabb.diagonal() / kSpeedOfLight))
            throw std::invalid_argument("tau_max must exceed the aabb diagonal divided by c");
    }

    double facet_albedo(std::size_t id)
    {
        double golden = 0.6180339887498949 * double(id + 1);
        return 0.25 + 0.5 * (golden - std::floor(golden));
    }

    // --------------------------------------------------------------------------------------------
    // JSON

    static json point_json(const Point3 &p) { return json::array({p.x, p.y, p.z}); }

    static Point3 point_from(const json &j, const char *what)
    {
        if (!j.is_array() || j.size() != 3)
            throw std::invalid_argument(std::string(what) + ": expected an array of 3 numbers");
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    }

    std::string scene_to_json_text(const Scene &scene)
    {
        json j;
        j["format"] = "rrf-scene";
        j["version"] = 1;
        j["tx_position"] = point_json(scene.tx_position);
        j["carrier_freq"] = scene.carrier_freq;
        j["tau_max"] = scene.tau_max;
        j["g_ref"] = scene.g_ref;
        j["aabb"] = {{"min", point_json(scene.aabb.min)}, {"max", point_json(scene.aabb.max)}};
        json facets = json::array();
        for (const auto &f : scene.facets)
        {
            json jf;
            jf["vertices"] = json::array();
            for (const auto &v : f.vertices)
                jf["vertices"].push_back(point_json(v));
            jf["normal"] = point_json(f.normal);
            jf["reflection_coeff"] = f.reflection_coeff;
            facets.push_back(jf);
        }
        j["facets"] = facets;
        return j.dump(2);
    }

    Scene scene_from_json_text(const std::string &text)
    {
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            throw std::invalid_argument(std::string("scene: ") + e.what());
        }

        Scene s;
        try
        {
            s.tx_position = point_from(j.at("tx_position"), "tx_position");
            s.carrier_freq = j.at("carrier_freq").get<double>();
            s.tau_max = j.at("tau_max").get<double>();
            s.g_ref = j.at("g_ref").get<double>();
            s.aabb.min = point_from(j.at("aabb").at("min"), "aabb.min");
            s.aabb.max = point_from(j.at("aabb").at("max"), "aabb.max");
            for (const auto &jf : j.at("facets"))
            {
                Facet f;
                const auto &verts = jf.at("vertices");
                if (!verts.is_array() || verts.size() != 4)
                    throw std::invalid_argument("facet vertices: expected 4 points");
                for (int k = 0; k < 4; ++k)
                    f.vertices[k] = point_from(verts[k], "facet vertex");
                if (jf.contains("normal"))
                    f.normal = point_from(jf["normal"], "facet normal");
                else
                    f.normal = normalized(cross(f.vertices[1] - f.vertices[0], f.vertices[3] - f.vertices[0]));
                f.reflection_coeff = jf.at("reflection_coeff").get<double>();
                s.facets.push_back(f);
            }
        }
        catch (const json::exception &e)
        {
            throw std::invalid_argument(std::string("scene: ") + e.what());
        }
        s.validate();
        return s;
    }

    Scene load_scene(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open scene file '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return scene_from_json_text(ss.str());
    }

    void save_scene(const Scene &scene, const std::string &path)
    {
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("cannot write scene file '" + path + "'");
        out << scene_to_json_text(scene) << "\n";
        if (!out)
            throw std::runtime_error("write failed for '" + path + "'");
    }

    // --------------------------------------------------------------------------------------------
    // Builders

    static void add_box_walls(Scene &s, const Point3 &lo, const Point3 &hi, const std::array<double, 6> &refl)
    {
        const double x0 = lo.x, y0 = lo.y, z0 = lo.z, x1 = hi.x, y1 = hi.y, z1 = hi.z;
        // Corner windings chosen so that the normals point into the room
        s.facets.push_back(Facet::from_corners({{{x0, y0, z0}, {x0, y1, z0}, {x0, y1, z1}, {x0, y0, z1}}}, refl[0])); // x = x0, +x
        s.facets.push_back(Facet::from_corners({{{x1, y0, z0}, {x1, y0, z1}, {x1, y1, z1}, {x1, y1, z0}}}, refl[1])); // x = x1, -x
        s.facets.push_back(Facet::from_corners({{{x0, y0, z0}, {x0, y0, z1}, {x1, y0, z1}, {x1, y0, z0}}}, refl[2])); // y = y0, +y
        s.facets.push_back(Facet::from_corners({{{x0, y1, z0}, {x1, y1, z0}, {x1, y1, z1}, {x0, y1, z1}}}, refl[3])); // y = y1, -y
        s.facets.push_back(Facet::from_corners({{{x0, y0, z0}, {x1, y0, z0}, {x1, y1, z0}, {x0, y1, z0}}}, refl[4])); // floor, +z
        s.facets.push_back(Facet::from_corners({{{x0, y0, z1}, {x0, y1, z1}, {x1, y1, z1}, {x1, y0, z1}}}, refl[5])); // ceiling, -z
    }

    Scene make_box_scene(const Point3 &size, const Point3 &tx, double carrier_freq, const std::array<double, 6> &reflection)
    {
        Scene s;
        add_box_walls(s, {0.0, 0.0, 0.0}, size, reflection);
        s.tx_position = tx;
        s.carrier_freq = carrier_freq;
        s.aabb = {{0.0, 0.0, 0.0}, size};
        s.tau_max = 100e-9;
        s.g_ref = s.wavelength() / (4.0 * kPi);
        s.validate();
        return s;
    }

    Scene make_corridor_scene(double length, double width, double height, const Point3 &tx, double carrier_freq)
    {
        Scene s;
        add_box_walls(s, {0.0, 0.0, 0.0}, {length, width, height}, {0.5, 0.5, 0.45, 0.45, 0.6, 0.4});
        // Panel spanning part of the corridor width at mid-length, facing +x
        double xm = 0.5 * length, w = 0.4 * width, zt = 0.8 * height;
        s.facets.push_back(Facet::from_corners({{{xm, 0.0, 0.0}, {xm, w, 0.0}, {xm, w, zt}, {xm, 0.0, zt}}}, 0.7));
        s.tx_position = tx;
        s.carrier_freq = carrier_freq;
        s.aabb = {{0.0, 0.0, 0.0}, {length, width, height}};
        s.tau_max = std::max(100e-9, 3.0 * s.aabb.diagonal() / kSpeedOfLight);
        s.g_ref = s.wavelength() / (4.0 * kPi);
        s.validate();
        return s;
    }

} // namespace rrf
