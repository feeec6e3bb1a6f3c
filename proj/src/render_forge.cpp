#include "unadv/render_forge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "unadv/image_io.hpp"
#include "unadv/optim.hpp"
#include "unadv/rng.hpp"

namespace unadv::rf {

namespace {

constexpr real kPi = 3.14159265358979323846;
constexpr real kAmbient = 0.35;
constexpr real kDiffuse = 0.65;
constexpr real kNear = 0.05; // near clip plane, camera units

using Vec3 = std::array<real, 3>;

Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

real dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

real norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 normalized(const Vec3& a) {
    const real n = norm(a);
    if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero vector");
    return {a[0] / n, a[1] / n, a[2] / n};
}

struct ImageDims {
    int h, w;
    bool rank4;
};

ImageDims background_dims(const Tensor& background, const char* who) {
    const auto& s = background.shape();
    if (s.size() == 3 && s[2] == 3) return {s[0], s[1], false};
    if (s.size() == 4 && s[0] == 1 && s[3] == 3) return {s[1], s[2], true};
    throw std::invalid_argument(std::string(who) + ": expected an (H,W,3) or (1,H,W,3) background, got " +
                                background.shape_str());
}

int texel_of(real t, int n) {
    return std::clamp(static_cast<int>(std::floor(t * n)), 0, n - 1);
}

// Per-pixel output of the shared geometry pass; rasterize and rasterize_uv
// differ only in how they consume it.
struct Fragments {
    int h = 0, w = 0;
    std::vector<real> u, v, shade;
    std::vector<uint8_t> covered;
};

struct ClipVertex {
    Vec3 cam; // camera space, z grows away from the eye
    real u, v;
};

Fragments render_fragments(const Mesh& mesh, const SceneConfig& scene, int h, int w) {
    if (h < 1 || w < 1)
        throw std::invalid_argument("rasterize: image sides must be positive");
    validate_mesh(mesh);
    validate_scene(mesh, scene);

    const Vec3 eye = camera_position(scene);
    const Vec3 fwd = normalized(scene.target - eye);
    Vec3 up = {0.0, 1.0, 0.0};
    if (std::abs(dot(fwd, up)) > 0.999) up = {0.0, 0.0, 1.0};
    const Vec3 side = normalized(cross(fwd, up));
    const Vec3 upv = cross(side, fwd);
    const Vec3 light = normalized(scene.light_dir);

    const real focal = 1.0 / std::tan(scene.fov_deg * kPi / 360.0);
    const real aspect = static_cast<real>(w) / h;

    Fragments fr;
    fr.h = h;
    fr.w = w;
    fr.u.assign(static_cast<size_t>(h) * w, 0.0);
    fr.v.assign(static_cast<size_t>(h) * w, 0.0);
    fr.shade.assign(static_cast<size_t>(h) * w, 0.0);
    fr.covered.assign(static_cast<size_t>(h) * w, 0);
    std::vector<real> depth(static_cast<size_t>(h) * w, std::numeric_limits<real>::infinity());

    for (size_t t = 0; t < mesh.tri_vertices.size(); ++t) {
        const auto& tv = mesh.tri_vertices[t];
        const auto& tu = mesh.tri_uvs[t];
        const Vec3 p0 = mesh.vertices[static_cast<size_t>(tv[0])];
        const Vec3 p1 = mesh.vertices[static_cast<size_t>(tv[1])];
        const Vec3 p2 = mesh.vertices[static_cast<size_t>(tv[2])];
        const Vec3 n = cross(p1 - p0, p2 - p0);
        const real shade = kAmbient + kDiffuse * std::abs(dot(normalized(n), light));

        ClipVertex poly[4];
        int count = 0;
        const Vec3 ps[3] = {p0, p1, p2};
        ClipVertex in[3];
        for (int k = 0; k < 3; ++k) {
            const Vec3 d = ps[k] - eye;
            in[k].cam = {dot(d, side), dot(d, upv), dot(d, fwd)};
            in[k].u = mesh.uvs[static_cast<size_t>(tu[k])][0];
            in[k].v = mesh.uvs[static_cast<size_t>(tu[k])][1];
        }
        // Clip against the near plane; a triangle yields at most a quad.
        for (int k = 0; k < 3; ++k) {
            const ClipVertex& a = in[k];
            const ClipVertex& b = in[(k + 1) % 3];
            const bool ina = a.cam[2] >= kNear, inb = b.cam[2] >= kNear;
            if (ina) poly[count++] = a;
            if (ina != inb) {
                const real s = (kNear - a.cam[2]) / (b.cam[2] - a.cam[2]);
                ClipVertex m;
                for (int j = 0; j < 3; ++j) m.cam[j] = a.cam[j] + s * (b.cam[j] - a.cam[j]);
                m.u = a.u + s * (b.u - a.u);
                m.v = a.v + s * (b.v - a.v);
                poly[count++] = m;
            }
        }
        if (count < 3) continue;

        real sx[4], sy[4], iw[4], uw[4], vw[4];
        for (int k = 0; k < count; ++k) {
            const real z = poly[k].cam[2];
            sx[k] = (poly[k].cam[0] / z * focal / aspect + 1.0) * 0.5 * w;
            sy[k] = (1.0 - poly[k].cam[1] / z * focal) * 0.5 * h;
            iw[k] = 1.0 / z;
            uw[k] = poly[k].u * iw[k];
            vw[k] = poly[k].v * iw[k];
        }

        for (int f = 1; f + 1 < count; ++f) {
            const int a = 0, b = f, c = f + 1;
            const real area = (sx[b] - sx[a]) * (sy[c] - sy[a]) - (sy[b] - sy[a]) * (sx[c] - sx[a]);
            if (std::abs(area) < 1e-12) continue;
            const real x_lo = std::min({sx[a], sx[b], sx[c]});
            const real x_hi = std::max({sx[a], sx[b], sx[c]});
            const real y_lo = std::min({sy[a], sy[b], sy[c]});
            const real y_hi = std::max({sy[a], sy[b], sy[c]});
            const int px0 = std::max(0, static_cast<int>(std::floor(x_lo - 0.5)));
            const int px1 = std::min(w - 1, static_cast<int>(std::ceil(x_hi - 0.5)));
            const int py0 = std::max(0, static_cast<int>(std::floor(y_lo - 0.5)));
            const int py1 = std::min(h - 1, static_cast<int>(std::ceil(y_hi - 0.5)));
            const real sgn = area > 0 ? 1.0 : -1.0;
            for (int y = py0; y <= py1; ++y) {
                const real py = y + 0.5;
                for (int x = px0; x <= px1; ++x) {
                    const real px = x + 0.5;
                    const real w0 = (sx[c] - sx[b]) * (py - sy[b]) - (sy[c] - sy[b]) * (px - sx[b]);
                    const real w1 = (sx[a] - sx[c]) * (py - sy[c]) - (sy[a] - sy[c]) * (px - sx[c]);
                    const real w2 = (sx[b] - sx[a]) * (py - sy[a]) - (sy[b] - sy[a]) * (px - sx[a]);
                    if (sgn * w0 < 0 || sgn * w1 < 0 || sgn * w2 < 0) continue;
                    const real l0 = w0 / area, l1 = w1 / area, l2 = w2 / area;
                    const real wp = l0 * iw[a] + l1 * iw[b] + l2 * iw[c];
                    const real z = 1.0 / wp;
                    const size_t i = static_cast<size_t>(y) * w + x;
                    if (z >= depth[i]) continue;
                    depth[i] = z;
                    fr.covered[i] = 1;
                    fr.u[i] = (l0 * uw[a] + l1 * uw[b] + l2 * uw[c]) * z;
                    fr.v[i] = (l0 * vw[a] + l1 * vw[b] + l2 * vw[c]) * z;
                    fr.shade[i] = shade;
                }
            }
        }
    }
    return fr;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

uint64_t parse_hex64(const std::string& s, const char* field) {
    if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos)
        throw std::runtime_error(std::string("load_texture: field '") + field +
                                 "' must be 16 lowercase hex digits");
    return std::stoull(s, nullptr, 16);
}

Tensor image_row(const Tensor& batch, int i) {
    const Tensor r = batch.slice_batch(i);
    Tensor im({r.shape()[1], r.shape()[2], 3});
    std::copy_n(r.data(), r.size(), im.data());
    return im;
}

void require_classifier(const model::ModelParams& m, int label, const char* who) {
    if (m.config.head != model::Head::classification)
        throw std::invalid_argument(std::string(who) + ": needs a classification model");
    if (label < 0 || label >= m.config.outputs)
        throw std::invalid_argument(std::string(who) + ": mesh label " + std::to_string(label) +
                                    " is outside the model's class range");
}

void require_backgrounds(const Tensor& backgrounds, const model::ModelConfig& mc, const char* who) {
    const auto& s = backgrounds.shape();
    if (s.size() != 4 || s[0] < 1 || s[3] != 3)
        throw std::invalid_argument(std::string(who) + ": expected a non-empty (B,H,W,3) background set, got " +
                                    backgrounds.shape_str());
    if (s[1] != mc.input_h || s[2] != mc.input_w || mc.input_c != 3)
        throw std::invalid_argument(std::string(who) + ": background size " + backgrounds.shape_str() +
                                    " does not match the model input");
}

// Camera orbits keep |eye - target| == distance; demand that the whole orbit
// shell clears the bounding sphere so later per-scene checks cannot fire.
void require_orbit_clear(const Mesh& mesh, real dist_lo, const char* who) {
    const Vec3 c = mesh.center();
    const real reach = norm(c) + mesh.bounding_radius() + kNear;
    if (dist_lo <= reach)
        throw std::invalid_argument(std::string(who) + ": minimum camera distance " +
                                    std::to_string(dist_lo) +
                                    " is inside the mesh bounding sphere (needs > " +
                                    std::to_string(reach) + ")");
}

Vec3 direction(real azimuth, real elevation) {
    return {std::cos(elevation) * std::sin(azimuth), std::sin(elevation),
            std::cos(elevation) * std::cos(azimuth)};
}

} // namespace

std::array<real, 3> Mesh::center() const {
    if (vertices.empty()) return {0.0, 0.0, 0.0};
    Vec3 lo = vertices[0], hi = vertices[0];
    for (const auto& v : vertices)
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(lo[i], v[i]);
            hi[i] = std::max(hi[i], v[i]);
        }
    return {(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2};
}

real Mesh::bounding_radius() const {
    const Vec3 c = center();
    real r = 0.0;
    for (const auto& v : vertices) r = std::max(r, norm(v - c));
    return r;
}

void validate_mesh(const Mesh& mesh) {
    if (mesh.vertices.empty() || mesh.tri_vertices.empty())
        throw std::invalid_argument("validate_mesh: mesh has no geometry");
    if (mesh.tri_vertices.size() != mesh.tri_uvs.size())
        throw std::invalid_argument("validate_mesh: triangle and UV index lists differ in length");
    const int nv = static_cast<int>(mesh.vertices.size());
    const int nt = static_cast<int>(mesh.uvs.size());
    for (const auto& v : mesh.vertices)
        for (real x : v)
            if (!std::isfinite(x)) throw std::invalid_argument("validate_mesh: non-finite vertex");
    for (const auto& q : mesh.uvs)
        if (q[0] < 0.0 || q[0] > 1.0 || q[1] < 0.0 || q[1] > 1.0)
            throw std::invalid_argument("validate_mesh: UV outside [0,1]");
    for (size_t t = 0; t < mesh.tri_vertices.size(); ++t) {
        for (int k = 0; k < 3; ++k) {
            if (mesh.tri_vertices[t][k] < 0 || mesh.tri_vertices[t][k] >= nv)
                throw std::invalid_argument("validate_mesh: vertex index out of range");
            if (mesh.tri_uvs[t][k] < 0 || mesh.tri_uvs[t][k] >= nt)
                throw std::invalid_argument("validate_mesh: UV index out of range");
        }
        const Vec3 a = mesh.vertices[static_cast<size_t>(mesh.tri_vertices[t][0])];
        const Vec3 b = mesh.vertices[static_cast<size_t>(mesh.tri_vertices[t][1])];
        const Vec3 c = mesh.vertices[static_cast<size_t>(mesh.tri_vertices[t][2])];
        if (norm(cross(b - a, c - a)) < 1e-12)
            throw std::invalid_argument("validate_mesh: degenerate triangle " + std::to_string(t));
    }
}

Mesh load_obj(const std::string& path, int label) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_obj: cannot open " + path);
    Mesh mesh;
    mesh.label = label;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head) || head[0] == '#') continue;
        const std::string where = path + ":" + std::to_string(lineno);
        if (head == "v") {
            Vec3 v;
            if (!(ls >> v[0] >> v[1] >> v[2]))
                throw std::runtime_error("load_obj: bad vertex at " + where);
            mesh.vertices.push_back(v);
        } else if (head == "vt") {
            std::array<real, 2> q;
            if (!(ls >> q[0] >> q[1]))
                throw std::runtime_error("load_obj: bad UV at " + where);
            mesh.uvs.push_back(q);
        } else if (head == "f") {
            std::array<int, 3> tv, tu;
            for (int k = 0; k < 3; ++k) {
                std::string tok;
                if (!(ls >> tok))
                    throw std::runtime_error("load_obj: face needs three v/vt corners at " + where);
                const size_t slash = tok.find('/');
                if (slash == std::string::npos || slash == 0 || slash + 1 >= tok.size())
                    throw std::runtime_error("load_obj: face corner must be v/vt at " + where);
                try {
                    tv[k] = std::stoi(tok.substr(0, slash)) - 1;
                    tu[k] = std::stoi(tok.substr(slash + 1)) - 1;
                } catch (const std::exception&) {
                    throw std::runtime_error("load_obj: bad face index at " + where);
                }
            }
            std::string extra;
            if (ls >> extra)
                throw std::runtime_error("load_obj: only triangular faces are supported at " + where);
            mesh.tri_vertices.push_back(tv);
            mesh.tri_uvs.push_back(tu);
        } // anything else: skipped OBJ keyword
    }
    validate_mesh(mesh);
    return mesh;
}

void save_obj(const std::string& path, const Mesh& mesh) {
    validate_mesh(mesh);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_obj: cannot open " + path);
    char buf[96];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
        f << buf;
    }
    for (const auto& q : mesh.uvs) {
        std::snprintf(buf, sizeof buf, "vt %.17g %.17g\n", q[0], q[1]);
        f << buf;
    }
    for (size_t t = 0; t < mesh.tri_vertices.size(); ++t) {
        f << 'f';
        for (int k = 0; k < 3; ++k)
            f << ' ' << mesh.tri_vertices[t][k] + 1 << '/' << mesh.tri_uvs[t][k] + 1;
        f << '\n';
    }
    if (!f) throw std::runtime_error("save_obj: write failed for " + path);
}

namespace {

// Hands out inset cells of a grid atlas so every face owns disjoint texels.
struct UvAtlas {
    int grid;
    int next = 0;

    std::array<std::array<real, 2>, 4> cell() {
        const int gx = next % grid, gy = next / grid;
        ++next;
        const real s = 1.0 / grid, inset = 0.02 * s;
        const real u0 = gx * s + inset, u1 = (gx + 1) * s - inset;
        const real v0 = gy * s + inset, v1 = (gy + 1) * s - inset;
        return {{{u0, v0}, {u1, v0}, {u1, v1}, {u0, v1}}};
    }
};

void add_quad(Mesh& m, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, UvAtlas& atlas) {
    const int v0 = static_cast<int>(m.vertices.size());
    m.vertices.push_back(a);
    m.vertices.push_back(b);
    m.vertices.push_back(c);
    m.vertices.push_back(d);
    const int u0 = static_cast<int>(m.uvs.size());
    for (const auto& q : atlas.cell()) m.uvs.push_back(q);
    m.tri_vertices.push_back({v0, v0 + 1, v0 + 2});
    m.tri_uvs.push_back({u0, u0 + 1, u0 + 2});
    m.tri_vertices.push_back({v0, v0 + 2, v0 + 3});
    m.tri_uvs.push_back({u0, u0 + 2, u0 + 3});
}

void add_box(Mesh& m, const Vec3& c, const Vec3& h, UvAtlas& atlas) {
    const real x0 = c[0] - h[0], x1 = c[0] + h[0];
    const real y0 = c[1] - h[1], y1 = c[1] + h[1];
    const real z0 = c[2] - h[2], z1 = c[2] + h[2];
    add_quad(m, {x0, y0, z1}, {x1, y0, z1}, {x1, y1, z1}, {x0, y1, z1}, atlas); // +z
    add_quad(m, {x1, y0, z0}, {x0, y0, z0}, {x0, y1, z0}, {x1, y1, z0}, atlas); // -z
    add_quad(m, {x1, y0, z1}, {x1, y0, z0}, {x1, y1, z0}, {x1, y1, z1}, atlas); // +x
    add_quad(m, {x0, y0, z0}, {x0, y0, z1}, {x0, y1, z1}, {x0, y1, z0}, atlas); // -x
    add_quad(m, {x0, y1, z1}, {x1, y1, z1}, {x1, y1, z0}, {x0, y1, z0}, atlas); // +y
    add_quad(m, {x0, y0, z0}, {x1, y0, z0}, {x1, y0, z1}, {x0, y0, z1}, atlas); // -y
}

} // namespace

Mesh make_cube(real side) {
    if (!(side > 0)) throw std::invalid_argument("make_cube: side must be positive");
    Mesh m;
    UvAtlas atlas{3};
    add_box(m, {0, 0, 0}, {side / 2, side / 2, side / 2}, atlas);
    validate_mesh(m);
    return m;
}

Mesh make_cylinder(real radius, real height, int segments) {
    if (!(radius > 0) || !(height > 0))
        throw std::invalid_argument("make_cylinder: radius and height must be positive");
    if (segments < 3) throw std::invalid_argument("make_cylinder: needs at least 3 segments");
    Mesh m;
    const real y0 = -height / 2, y1 = height / 2;
    auto ring = [&](int i) -> std::array<real, 2> {
        const real a = 2.0 * kPi * i / segments;
        return {radius * std::sin(a), radius * std::cos(a)};
    };
    // Side strip: u follows the angle, v spans the lower half of the atlas.
    for (int i = 0; i < segments; ++i) {
        const auto [ax, az] = ring(i);
        const auto [bx, bz] = ring(i + 1);
        const int v0 = static_cast<int>(m.vertices.size());
        m.vertices.push_back({ax, y0, az});
        m.vertices.push_back({bx, y0, bz});
        m.vertices.push_back({bx, y1, bz});
        m.vertices.push_back({ax, y1, az});
        const real ua = 0.01 + 0.98 * i / segments;
        const real ub = 0.01 + 0.98 * (i + 1.0) / segments;
        const int u0 = static_cast<int>(m.uvs.size());
        m.uvs.push_back({ua, 0.02});
        m.uvs.push_back({ub, 0.02});
        m.uvs.push_back({ub, 0.46});
        m.uvs.push_back({ua, 0.46});
        m.tri_vertices.push_back({v0, v0 + 1, v0 + 2});
        m.tri_uvs.push_back({u0, u0 + 1, u0 + 2});
        m.tri_vertices.push_back({v0, v0 + 2, v0 + 3});
        m.tri_uvs.push_back({u0, u0 + 2, u0 + 3});
    }
    // Caps: fans around the axis, each mapped onto its own disk of the atlas.
    for (int cap = 0; cap < 2; ++cap) {
        const real y = cap == 0 ? y1 : y0;
        const real cu = cap == 0 ? 0.25 : 0.75;
        const int vc = static_cast<int>(m.vertices.size());
        m.vertices.push_back({0, y, 0});
        const int uc = static_cast<int>(m.uvs.size());
        m.uvs.push_back({cu, 0.75});
        for (int i = 0; i < segments; ++i) {
            const real a = 2.0 * kPi * i / segments;
            const auto [x, z] = ring(i);
            m.vertices.push_back({x, y, z});
            m.uvs.push_back({cu + 0.22 * std::cos(a), 0.75 + 0.22 * std::sin(a)});
        }
        for (int i = 0; i < segments; ++i) {
            const int a = vc + 1 + i, b = vc + 1 + (i + 1) % segments;
            const int ua = uc + 1 + i, ub = uc + 1 + (i + 1) % segments;
            if (cap == 0) {
                m.tri_vertices.push_back({vc, a, b});
                m.tri_uvs.push_back({uc, ua, ub});
            } else {
                m.tri_vertices.push_back({vc, b, a});
                m.tri_uvs.push_back({uc, ub, ua});
            }
        }
    }
    validate_mesh(m);
    return m;
}

Mesh make_plane_silhouette(real span) {
    if (!(span > 0)) throw std::invalid_argument("make_plane_silhouette: span must be positive");
    Mesh m;
    UvAtlas atlas{5};
    const real s = span;
    add_box(m, {0, 0, 0}, {0.08 * s, 0.08 * s, 0.42 * s}, atlas);            // fuselage
    add_box(m, {0, 0, 0.05 * s}, {0.50 * s, 0.02 * s, 0.10 * s}, atlas);     // main wings
    add_box(m, {0, 0.02 * s, -0.36 * s}, {0.18 * s, 0.015 * s, 0.05 * s}, atlas); // tail wings
    add_box(m, {0, 0.10 * s, -0.38 * s}, {0.015 * s, 0.10 * s, 0.05 * s}, atlas); // fin
    validate_mesh(m);
    return m;
}

TextureParams TextureParams::make(int n, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("TextureParams::make: side must be positive");
    TextureParams t;
    t.values = Tensor({n, n, 3});
    Rng rng(seed);
    for (int i = 0; i < t.values.size(); ++i) t.values[i] = rng.uniform(0.4, 0.6);
    return t;
}

void validate_texture(const TextureParams& t) {
    const auto& s = t.values.shape();
    if (s.size() != 3 || s[0] < 1 || s[0] != s[1] || s[2] != 3)
        throw std::invalid_argument("validate_texture: expected (n,n,3) values, got " +
                                    t.values.shape_str());
    for (int i = 0; i < t.values.size(); ++i)
        if (!(t.values[i] >= 0.0 && t.values[i] <= 1.0))
            throw std::invalid_argument("validate_texture: values must lie in [0,1]");
}

std::array<real, 3> camera_position(const SceneConfig& scene) {
    const Vec3 d = direction(scene.azimuth, scene.elevation);
    return {scene.target[0] + scene.distance * d[0], scene.target[1] + scene.distance * d[1],
            scene.target[2] + scene.distance * d[2]};
}

void validate_scene(const Mesh& mesh, const SceneConfig& scene) {
    if (!(scene.distance > 0) || !std::isfinite(scene.distance) ||
        !std::isfinite(scene.azimuth) || !std::isfinite(scene.elevation))
        throw std::invalid_argument("validate_scene: bad camera parameters");
    if (!(scene.fov_deg > 0) || !(scene.fov_deg < 180))
        throw std::invalid_argument("validate_scene: fov must be in (0,180) degrees");
    if (norm(scene.light_dir) < 1e-12)
        throw std::invalid_argument("validate_scene: light direction is zero");
    const Vec3 eye = camera_position(scene);
    if (norm(eye - mesh.center()) <= mesh.bounding_radius() + kNear)
        throw std::invalid_argument("validate_scene: camera is inside the mesh bounding sphere");
}

Tensor rasterize(const Mesh& mesh, const TextureParams& texture, const SceneConfig& scene,
                 const Tensor& background) {
    validate_texture(texture);
    const ImageDims dims = background_dims(background, "rasterize");
    const Fragments fr = render_fragments(mesh, scene, dims.h, dims.w);
    const int n = texture.side();
    Tensor out = background;
    for (size_t i = 0; i < fr.covered.size(); ++i) {
        if (!fr.covered[i]) continue;
        const int row = texel_of(fr.v[i], n);
        const int col = texel_of(fr.u[i], n);
        for (int c = 0; c < 3; ++c)
            out[static_cast<int64_t>(i) * 3 + c] =
                texture.values[(static_cast<int64_t>(row) * n + col) * 3 + c] * fr.shade[i];
    }
    return out;
}

UVImage rasterize_uv(const Mesh& mesh, const SceneConfig& scene, int h, int w) {
    const Fragments fr = render_fragments(mesh, scene, h, w);
    UVImage out;
    out.uv = Tensor({h, w, 2});
    out.covered = Tensor({h, w});
    for (size_t i = 0; i < fr.covered.size(); ++i) {
        if (!fr.covered[i]) continue;
        out.uv[static_cast<int64_t>(i) * 2 + 0] = fr.u[i];
        out.uv[static_cast<int64_t>(i) * 2 + 1] = fr.v[i];
        out.covered[static_cast<int64_t>(i)] = 1.0;
    }
    return out;
}

namespace {

void check_uv_image(const UVImage& x_uv, int h, int w, const char* who) {
    if (x_uv.uv.shape() != std::vector<int>{h, w, 2})
        throw std::invalid_argument(std::string(who) + ": UV image shape " + x_uv.uv.shape_str() +
                                    " does not match the background");
    if (x_uv.covered.shape() != std::vector<int>{h, w})
        throw std::invalid_argument(std::string(who) + ": covered mask shape " +
                                    x_uv.covered.shape_str() + " does not match the background");
    for (int64_t i = 0; i < x_uv.covered.size(); ++i)
        if (x_uv.covered[i] != 0.0 && x_uv.covered[i] != 1.0)
            throw std::invalid_argument(std::string(who) + ": covered mask entries must be exactly 0 or 1");
}

int texture_side_of(const Tensor& values, const char* who) {
    const auto& s = values.shape();
    if (s.size() != 3 || s[0] < 1 || s[0] != s[1] || s[2] != 3)
        throw std::invalid_argument(std::string(who) + ": expected an (n,n,3) texture, got " +
                                    values.shape_str());
    return s[0];
}

Tensor surrogate_forward(const UVImage& x_uv, const Tensor& texture, const Tensor& background,
                         int n) {
    Tensor out = background;
    for (int64_t i = 0; i < x_uv.covered.size(); ++i) {
        if (x_uv.covered[i] != 1.0) continue;
        const int row = texel_of(x_uv.uv[i * 2 + 1], n);
        const int col = texel_of(x_uv.uv[i * 2 + 0], n);
        for (int c = 0; c < 3; ++c)
            out[i * 3 + c] = texture[(static_cast<int64_t>(row) * n + col) * 3 + c];
    }
    return out;
}

} // namespace

Tensor surrogate_composite(const UVImage& x_uv, const Tensor& texture, const Tensor& background) {
    const ImageDims dims = background_dims(background, "surrogate_composite");
    const int n = texture_side_of(texture, "surrogate_composite");
    check_uv_image(x_uv, dims.h, dims.w, "surrogate_composite");
    return surrogate_forward(x_uv, texture, background, n);
}

ad::Tape::Ref surrogate_composite_op(ad::Tape& tape, ad::Tape::Ref texture, const UVImage& x_uv,
                                     const Tensor& background) {
    const ImageDims dims = background_dims(background, "surrogate_composite");
    const Tensor& tex = tape.value(texture);
    const int n = texture_side_of(tex, "surrogate_composite");
    check_uv_image(x_uv, dims.h, dims.w, "surrogate_composite");
    Tensor value = surrogate_forward(x_uv, tex, background, n);
    const UVImage uv_copy = x_uv;
    return tape.custom(std::move(value), {texture},
                       [texture, uv_copy, n](ad::Tape& t, const Tensor& g) {
                           Tensor dtex({n, n, 3});
                           for (int64_t i = 0; i < uv_copy.covered.size(); ++i) {
                               if (uv_copy.covered[i] != 1.0) continue;
                               const int row = texel_of(uv_copy.uv[i * 2 + 1], n);
                               const int col = texel_of(uv_copy.uv[i * 2 + 0], n);
                               for (int c = 0; c < 3; ++c)
                                   dtex[(static_cast<int64_t>(row) * n + col) * 3 + c] +=
                                       g[i * 3 + c];
                           }
                           t.accumulate(texture, dtex);
                       });
}

ad::Tape::Ref straight_through_blend(ad::Tape& tape, const Tensor& x_rend, ad::Tape::Ref x_drend) {
    if (!x_rend.same_shape(tape.value(x_drend)))
        throw std::invalid_argument("straight_through_blend: x_rend shape " + x_rend.shape_str() +
                                    " does not match x_drend shape " +
                                    tape.value(x_drend).shape_str());
    return tape.custom(x_rend, {x_drend}, [x_drend](ad::Tape& t, const Tensor& g) {
        t.accumulate(x_drend, g);
    });
}

TextureParams train_texture(const model::ModelParams& m, const Mesh& mesh,
                            const Tensor& backgrounds, const TextureTrainConfig& config,
                            std::vector<real>* iter_loss) {
    validate_mesh(mesh);
    require_classifier(m, mesh.label, "train_texture");
    require_backgrounds(backgrounds, m.config, "train_texture");
    if (config.iterations < 0)
        throw std::invalid_argument("train_texture: iterations must be non-negative");
    if (!(config.step > 0)) throw std::invalid_argument("train_texture: step must be positive");
    if (config.texture_side < 1)
        throw std::invalid_argument("train_texture: texture side must be positive");
    if (!(config.dist_lo <= config.dist_hi) || !(config.elev_lo <= config.elev_hi))
        throw std::invalid_argument("train_texture: bad sampling ranges");
    require_orbit_clear(mesh, config.dist_lo, "train_texture");

    if (iter_loss) iter_loss->clear();
    TextureParams tex = TextureParams::make(config.texture_side, fan_seed(config.seed, "texture-init"));
    if (config.iterations == 0) return tex;

    const int b = backgrounds.shape()[0];
    const int h = m.config.input_h, w = m.config.input_w;
    Rng rng(fan_seed(config.seed, "texture-scene"));
    for (int it = 0; it < config.iterations; ++it) {
        const int bi = static_cast<int>(rng.below(b));
        SceneConfig sc;
        sc.azimuth = rng.uniform(-kPi, kPi);
        sc.elevation = rng.uniform(config.elev_lo, config.elev_hi);
        sc.distance = rng.uniform(config.dist_lo, config.dist_hi);
        sc.fov_deg = config.fov_deg;
        const real laz = rng.uniform(-kPi, kPi);
        const real lel = rng.uniform(0.3, 1.2);
        sc.light_dir = direction(laz, lel);

        const Tensor bg = backgrounds.slice_batch(bi); // (1,H,W,3)
        const Tensor x_rend = rasterize(mesh, tex, sc, bg);
        const UVImage x_uv = rasterize_uv(mesh, sc, h, w);

        ad::Tape tape;
        const auto tref = tape.input(tex.values, true);
        const auto drend = surrogate_composite_op(tape, tref, x_uv, bg);
        const auto unadv = straight_through_blend(tape, x_rend, drend);
        const auto params = model::push_params(tape, m, false);
        const auto logits = model::forward_from(tape, m.config, unadv, params);
        const auto loss = tape.cross_entropy(logits, {mesh.label});
        const auto grads = tape.backward(loss, {tref});
        if (iter_loss) iter_loss->push_back(tape.value(loss)[0]);
        optim::sign_update(tex.values, grads[0], config.step);
    }
    return tex;
}

GridEval eval_texture_grid(const model::ModelParams& m, const Mesh& mesh,
                           const TextureParams& texture, const GridSpec& grid,
                           const Tensor& backgrounds,
                           const std::optional<corr::CorruptionSpec>& weather) {
    validate_mesh(mesh);
    validate_texture(texture);
    require_classifier(m, mesh.label, "eval_texture_grid");
    require_backgrounds(backgrounds, m.config, "eval_texture_grid");
    if (grid.azimuths < 0 || grid.elevations < 0 || grid.distances < 0)
        throw std::invalid_argument("eval_texture_grid: grid counts must be non-negative");
    if (!(grid.dist_lo <= grid.dist_hi) || !(grid.elev_lo <= grid.elev_hi))
        throw std::invalid_argument("eval_texture_grid: bad grid ranges");

    GridEval out;
    const int total = grid.azimuths * grid.elevations * grid.distances;
    if (total == 0) return out;
    require_orbit_clear(mesh, grid.dist_lo, "eval_texture_grid");

    const int b = backgrounds.shape()[0];
    const int h = m.config.input_h, w = m.config.input_w;
    auto lerp_at = [](real lo, real hi, int i, int count) {
        return count == 1 ? (lo + hi) / 2 : lo + (hi - lo) * i / (count - 1);
    };
    out.poses.reserve(static_cast<size_t>(total));
    uint64_t idx = 0;
    for (int ia = 0; ia < grid.azimuths; ++ia)
        for (int ie = 0; ie < grid.elevations; ++ie)
            for (int id = 0; id < grid.distances; ++id, ++idx) {
                SceneConfig sc;
                sc.azimuth = -kPi + (ia + 0.5) * 2.0 * kPi / grid.azimuths;
                sc.elevation = lerp_at(grid.elev_lo, grid.elev_hi, ie, grid.elevations);
                sc.distance = lerp_at(grid.dist_lo, grid.dist_hi, id, grid.distances);
                sc.fov_deg = grid.fov_deg;
                Rng pose_rng(fan_seed(grid.seed, "grid-bg", idx));
                Tensor frame = rasterize(mesh, texture, sc,
                                         image_row(backgrounds, static_cast<int>(pose_rng.below(b))));
                if (weather)
                    frame = corr::corrupt_image(frame, weather->kind, weather->severity,
                                                fan_seed(weather->seed, "grid-weather", idx));
                Tensor batch({1, h, w, 3});
                batch.set_batch(0, frame);
                const int pred = model::predict(m, batch)[0];
                out.poses.push_back({sc, pred, pred == mesh.label});
                out.total += 1;
                if (pred == mesh.label) out.correct += 1;
            }
    out.accuracy = static_cast<real>(out.correct) / out.total;
    return out;
}

void save_texture(const TextureParams& t, const std::string& image_path,
                  const std::string& json_path, const std::string& mesh_id, int label,
                  uint64_t seed) {
    validate_texture(t);
    img::write_ppm(image_path, t.values);
    nlohmann::json j;
    j["mesh_id"] = mesh_id;
    j["label"] = label;
    j["n"] = t.side();
    j["seed"] = hex64(seed);
    std::ofstream f(json_path);
    if (!f) throw std::runtime_error("save_texture: cannot open " + json_path);
    f << j.dump(2) << '\n';
}

TextureArchive load_texture(const std::string& image_path, const std::string& json_path) {
    std::ifstream f(json_path);
    if (!f) throw std::runtime_error("load_texture: cannot open " + json_path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_texture: bad JSON in " + json_path + ": " + e.what());
    }
    TextureArchive a;
    try {
        a.mesh_id = j.at("mesh_id").get<std::string>();
        a.label = j.at("label").get<int>();
        a.seed = parse_hex64(j.at("seed").get<std::string>(), "seed");
        const int n = j.at("n").get<int>();
        a.texture.values = img::read_ppm(image_path);
        if (a.texture.values.shape() != std::vector<int>{n, n, 3})
            throw std::runtime_error("load_texture: image " + image_path + " is " +
                                     a.texture.values.shape_str() + " but the sidecar says n=" +
                                     std::to_string(n));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_texture: bad sidecar " + json_path + ": " + e.what());
    }
    validate_texture(a.texture);
    return a;
}

} // namespace unadv::rf
