#pragma once

// Converter from COLMAP text exports (cameras.txt / images.txt / points3D.txt)
// to a scene manifest plus a binary PLY point cloud.

#include <string>

namespace omnisplat {

struct ColmapConvertResult {
    int frames = 0;
    std::size_t points = 0;
    std::string manifest_path;
    std::string points_path;
};

// images_dir is where the referenced image files live; the manifest stores
// paths relative to its own directory. Throws ParseError naming the file and
// line on malformed input.
ColmapConvertResult convert_colmap(const std::string& colmap_text_dir,
                                   const std::string& images_dir,
                                   const std::string& out_manifest_path);

}  // namespace omnisplat
