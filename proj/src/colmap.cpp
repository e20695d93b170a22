#include "omnisplat/colmap.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "omnisplat/dataio.hpp"

namespace fs = std::filesystem;

namespace omnisplat {

namespace {

std::ifstream open_or_throw(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "missing or unreadable file: " + path.string());
    return in;
}

[[noreturn]] void fail(const fs::path& file, int line, const std::string& what) {
    throw Error(ErrorCode::ParseError,
                file.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

ColmapConvertResult convert_colmap(const std::string& colmap_text_dir,
                                   const std::string& images_dir,
                                   const std::string& out_manifest_path) {
    fs::path dir(colmap_text_dir);
    fs::path cameras_file = dir / "cameras.txt";
    fs::path images_file = dir / "images.txt";
    fs::path points_file = dir / "points3D.txt";

    // cameras.txt: CAMERA_ID MODEL WIDTH HEIGHT PARAMS...
    int width = 0, height = 0;
    {
        std::ifstream in = open_or_throw(cameras_file);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            long cam_id;
            std::string model;
            if (!(ls >> cam_id >> model >> width >> height))
                fail(cameras_file, lineno, "expected CAMERA_ID MODEL WIDTH HEIGHT");
            break;  // a single shared camera is assumed
        }
        if (width <= 0 || height <= 0)
            fail(cameras_file, 0, "no camera definition found");
    }

    // images.txt: IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME, then a
    // 2D-point line that we skip.
    SceneManifest manifest;
    manifest.width = width;
    manifest.height = height;
    {
        std::ifstream in = open_or_throw(images_file);
        std::string line;
        int lineno = 0;
        bool expecting_points_line = false;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            if (expecting_points_line) {
                expecting_points_line = false;
                continue;
            }
            std::istringstream ls(line);
            long image_id, cam_id;
            double qw, qx, qy, qz, tx, ty, tz;
            std::string name;
            if (!(ls >> image_id >> qw >> qx >> qy >> qz >> tx >> ty >> tz >> cam_id >> name))
                fail(images_file, lineno, "expected IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME");
            ManifestFrame frame;
            frame.pose.rotation = quat_to_rotation(normalized(Vec4{qw, qx, qy, qz}));
            frame.pose.translation = {tx, ty, tz};
            frame.image_path = (fs::path(images_dir) / name).string();
            manifest.frames.push_back(std::move(frame));
            expecting_points_line = true;
        }
    }
    std::sort(manifest.frames.begin(), manifest.frames.end(),
              [](const ManifestFrame& a, const ManifestFrame& b) {
                  return a.image_path < b.image_path;
              });

    // points3D.txt: POINT3D_ID X Y Z R G B ERROR TRACK...
    std::vector<ColoredPoint> points;
    {
        std::ifstream in = open_or_throw(points_file);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            long point_id;
            double x, y, z;
            int r, g, b;
            if (!(ls >> point_id >> x >> y >> z >> r >> g >> b))
                fail(points_file, lineno, "expected POINT3D_ID X Y Z R G B ...");
            points.push_back({{x, y, z}, {r / 255.0, g / 255.0, b / 255.0}});
        }
    }

    fs::path manifest_path(out_manifest_path);
    fs::path out_dir = manifest_path.parent_path();
    if (!out_dir.empty()) fs::create_directories(out_dir);
    fs::path ply_path = manifest_path;
    ply_path.replace_extension(".ply");
    save_ply(points, ply_path.string());
    manifest.points_path = ply_path.string();
    save_manifest(manifest, manifest_path.string());

    ColmapConvertResult result;
    result.frames = static_cast<int>(manifest.frames.size());
    result.points = points.size();
    result.manifest_path = manifest_path.string();
    result.points_path = ply_path.string();
    return result;
}

}  // namespace omnisplat
