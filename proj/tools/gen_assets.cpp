// Regenerates the checked-in data/ assets: the three procedural meshes and
// the standard landing pad image. Run from the repository root.
#include <cstdio>
#include <filesystem>

#include "unadv/image_io.hpp"
#include "unadv/render_forge.hpp"
#include "unadv/servo_sim.hpp"

using namespace unadv;

int main() {
    namespace fs = std::filesystem;
    fs::create_directories("data/meshes");
    rf::save_obj("data/meshes/cube.obj", rf::make_cube(1.0));
    rf::save_obj("data/meshes/cylinder.obj", rf::make_cylinder(0.35, 1.2, 24));
    rf::save_obj("data/meshes/plane.obj", rf::make_plane_silhouette(1.6));
    img::write_ppm("data/standard_pad.ppm", servo::standard_pad_texture(48).values);
    std::printf("wrote data/meshes/{cube,cylinder,plane}.obj and data/standard_pad.ppm\n");
    return 0;
}
