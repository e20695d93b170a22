#include "omnisplat/dataio.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "omnisplat/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace omnisplat {

namespace {

json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
}

}  // namespace

SceneManifest load_manifest(const std::string& path) {
    json j = parse_json_file(path);
    fs::path base = fs::path(path).parent_path();

    SceneManifest m;
    try {
        m.width = j.at("width").get<int>();
        m.height = j.at("height").get<int>();
        if (j.contains("points"))
            m.points_path = (base / j.at("points").get<std::string>()).string();
        for (const auto& f : j.at("frames")) {
            ManifestFrame frame;
            frame.image_path = (base / f.at("image").get<std::string>()).string();
            auto t = f.at("transform_cw").get<std::vector<double>>();
            if (t.size() != 16)
                throw Error(ErrorCode::ParseError,
                            path + ": transform_cw must hold 16 numbers (frame " +
                                std::to_string(m.frames.size()) + ")");
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) frame.pose.rotation(r, c) = t[r * 4 + c];
                frame.pose.translation[r] = t[r * 4 + 3];
            }
            if (t[12] != 0.0 || t[13] != 0.0 || t[14] != 0.0 || t[15] != 1.0)
                throw Error(ErrorCode::ValidationError,
                            "frame " + std::to_string(m.frames.size()) +
                                ": transform_cw bottom row must be 0 0 0 1");
            m.frames.push_back(std::move(frame));
        }
        if (j.contains("train_split")) m.train_split = j.at("train_split").get<std::vector<int>>();
        if (j.contains("test_split")) m.test_split = j.at("test_split").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }

    if (m.width < 2 || m.height < 2)
        throw Error(ErrorCode::ValidationError, path + ": width and height must be >= 2");
    for (std::size_t i = 0; i < m.frames.size(); ++i) {
        if (!m.frames[i].pose.is_valid())
            throw Error(ErrorCode::ValidationError,
                        "frame " + std::to_string(i) + ": rotation is not orthonormal");
        if (!fs::exists(m.frames[i].image_path))
            throw Error(ErrorCode::ValidationError,
                        "frame " + std::to_string(i) + ": missing image file " +
                            m.frames[i].image_path);
    }
    if (!m.points_path.empty() && !fs::exists(m.points_path))
        throw Error(ErrorCode::ValidationError, "missing points file " + m.points_path);
    auto check_split = [&](const std::vector<int>& split, const char* name) {
        for (int idx : split)
            if (idx < 0 || idx >= static_cast<int>(m.frames.size()))
                throw Error(ErrorCode::ValidationError,
                            std::string(name) + " index " + std::to_string(idx) + " out of range");
    };
    check_split(m.train_split, "train_split");
    check_split(m.test_split, "test_split");
    return m;
}

void save_manifest(const SceneManifest& manifest, const std::string& path) {
    fs::path base = fs::path(path).parent_path();
    json j;
    j["width"] = manifest.width;
    j["height"] = manifest.height;
    if (!manifest.points_path.empty())
        j["points"] = fs::relative(manifest.points_path, base).string();
    j["frames"] = json::array();
    for (const auto& f : manifest.frames) {
        std::vector<double> t(16, 0.0);
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) t[r * 4 + c] = f.pose.rotation(r, c);
            t[r * 4 + 3] = f.pose.translation[r];
        }
        t[15] = 1.0;
        j["frames"].push_back(
            {{"image", fs::relative(f.image_path, base).string()}, {"transform_cw", t}});
    }
    if (!manifest.train_split.empty()) j["train_split"] = manifest.train_split;
    if (!manifest.test_split.empty()) j["test_split"] = manifest.test_split;
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// PLY

namespace {

enum class PlyType { Float32, Float64, Uint8, Int32, Uint32, Other };

PlyType ply_type_from(const std::string& s) {
    if (s == "float" || s == "float32") return PlyType::Float32;
    if (s == "double" || s == "float64") return PlyType::Float64;
    if (s == "uchar" || s == "uint8") return PlyType::Uint8;
    if (s == "int" || s == "int32") return PlyType::Int32;
    if (s == "uint" || s == "uint32") return PlyType::Uint32;
    return PlyType::Other;
}

std::size_t ply_type_size(PlyType t) {
    switch (t) {
        case PlyType::Uint8: return 1;
        case PlyType::Float32:
        case PlyType::Int32:
        case PlyType::Uint32: return 4;
        case PlyType::Float64: return 8;
        default: return 0;
    }
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::Other;
};

struct PlyData {
    bool binary = false;
    std::size_t vertex_count = 0;
    std::vector<PlyProperty> properties;
    std::vector<std::string> comments;
    // Column-major property values as doubles, one column per property.
    std::vector<std::vector<double>> columns;

    int find(const std::string& name) const {
        for (std::size_t i = 0; i < properties.size(); ++i)
            if (properties[i].name == name) return static_cast<int>(i);
        return -1;
    }
};

PlyData read_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "ply") throw Error(ErrorCode::UnsupportedFormat, path + ": not a PLY file");

    PlyData ply;
    bool in_vertex = false;
    bool format_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii")
                ply.binary = false;
            else if (fmt == "binary_little_endian")
                ply.binary = true;
            else
                throw Error(ErrorCode::UnsupportedFormat, path + ": unsupported format " + fmt);
            format_seen = true;
        } else if (tok == "comment") {
            std::string rest;
            std::getline(ls, rest);
            if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
            ply.comments.push_back(rest);
        } else if (tok == "element") {
            std::string name;
            std::size_t count;
            ls >> name >> count;
            if (name == "vertex") {
                ply.vertex_count = count;
                in_vertex = true;
            } else {
                if (count != 0)
                    throw Error(ErrorCode::UnsupportedFormat,
                                path + ": unsupported element " + name);
                in_vertex = false;
            }
        } else if (tok == "property") {
            if (!in_vertex) continue;
            std::string type, name;
            ls >> type;
            if (type == "list")
                throw Error(ErrorCode::UnsupportedFormat, path + ": list properties unsupported");
            ls >> name;
            ply.properties.push_back({name, ply_type_from(type)});
            if (ply.properties.back().type == PlyType::Other)
                throw Error(ErrorCode::UnsupportedFormat, path + ": property type " + type);
        } else if (tok == "end_header") {
            break;
        }
    }
    if (!format_seen) throw Error(ErrorCode::ParseError, path + ": missing format line");

    ply.columns.assign(ply.properties.size(), {});
    for (auto& c : ply.columns) c.resize(ply.vertex_count);

    if (ply.binary) {
        std::size_t row_size = 0;
        for (const auto& p : ply.properties) row_size += ply_type_size(p.type);
        std::vector<char> row(row_size);
        for (std::size_t v = 0; v < ply.vertex_count; ++v) {
            if (!in.read(row.data(), static_cast<std::streamsize>(row_size)))
                throw Error(ErrorCode::ParseError, path + ": truncated vertex data");
            std::size_t off = 0;
            for (std::size_t pi = 0; pi < ply.properties.size(); ++pi) {
                const char* src = row.data() + off;
                double value = 0.0;
                switch (ply.properties[pi].type) {
                    case PlyType::Float32: {
                        float f;
                        std::memcpy(&f, src, 4);
                        value = f;
                        break;
                    }
                    case PlyType::Float64: {
                        std::memcpy(&value, src, 8);
                        break;
                    }
                    case PlyType::Uint8: value = static_cast<unsigned char>(*src); break;
                    case PlyType::Int32: {
                        std::int32_t i;
                        std::memcpy(&i, src, 4);
                        value = i;
                        break;
                    }
                    case PlyType::Uint32: {
                        std::uint32_t u;
                        std::memcpy(&u, src, 4);
                        value = u;
                        break;
                    }
                    default: break;
                }
                ply.columns[pi][v] = value;
                off += ply_type_size(ply.properties[pi].type);
            }
        }
    } else {
        for (std::size_t v = 0; v < ply.vertex_count; ++v) {
            for (std::size_t pi = 0; pi < ply.properties.size(); ++pi) {
                if (!(in >> ply.columns[pi][v]))
                    throw Error(ErrorCode::ParseError, path + ": truncated vertex data");
            }
        }
    }
    return ply;
}

void require_property(const PlyData& ply, const std::string& path, const std::string& name,
                      PlyType type) {
    int idx = ply.find(name);
    if (idx < 0) throw Error(ErrorCode::MissingProperty, path + ": missing property " + name);
    if (ply.properties[idx].type != type)
        throw Error(ErrorCode::UnsupportedFormat,
                    path + ": property " + name + " has an unexpected type");
}

void write_f32(std::ofstream& out, double v) {
    float f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), 4);
}

}  // namespace

std::vector<ColoredPoint> load_ply(const std::string& path) {
    PlyData ply = read_ply(path);
    require_property(ply, path, "x", PlyType::Float32);
    require_property(ply, path, "y", PlyType::Float32);
    require_property(ply, path, "z", PlyType::Float32);
    require_property(ply, path, "red", PlyType::Uint8);
    require_property(ply, path, "green", PlyType::Uint8);
    require_property(ply, path, "blue", PlyType::Uint8);

    const auto& x = ply.columns[ply.find("x")];
    const auto& y = ply.columns[ply.find("y")];
    const auto& z = ply.columns[ply.find("z")];
    const auto& r = ply.columns[ply.find("red")];
    const auto& g = ply.columns[ply.find("green")];
    const auto& b = ply.columns[ply.find("blue")];

    std::vector<ColoredPoint> points(ply.vertex_count);
    for (std::size_t i = 0; i < ply.vertex_count; ++i) {
        points[i].position = {x[i], y[i], z[i]};
        points[i].rgb = {r[i] / 255.0, g[i] / 255.0, b[i] / 255.0};
    }
    return points;
}

void save_ply(const std::vector<ColoredPoint>& points, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << points.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";
    for (const ColoredPoint& p : points) {
        write_f32(out, p.position.x);
        write_f32(out, p.position.y);
        write_f32(out, p.position.z);
        auto q = [](double v) {
            double s = std::floor(v * 255.0 + 0.5);
            return static_cast<unsigned char>(std::clamp(s, 0.0, 255.0));
        };
        unsigned char rgb[3] = {q(p.rgb.x), q(p.rgb.y), q(p.rgb.z)};
        out.write(reinterpret_cast<const char*>(rgb), 3);
    }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {
constexpr int kCheckpointVersion = 1;
}

void save_checkpoint(const GaussianCloud& cloud, const std::string& path) {
    const int bc = cloud.basis_count();
    const int rest = bc - 1;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);

    out << "ply\nformat binary_little_endian 1.0\n";
    out << "comment format_version " << kCheckpointVersion << "\n";
    out << "comment sh_degree " << cloud.sh_degree << "\n";
    out << "element vertex " << cloud.size() << "\n";
    const char* base_props[] = {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"};
    for (const char* p : base_props) out << "property float " << p << "\n";
    for (int i = 0; i < rest * 3; ++i) out << "property float f_rest_" << i << "\n";
    out << "property float opacity\n";
    for (int i = 0; i < 3; ++i) out << "property float scale_" << i << "\n";
    for (int i = 0; i < 4; ++i) out << "property float rot_" << i << "\n";
    out << "end_header\n";

    for (std::size_t i = 0; i < cloud.size(); ++i) {
        write_f32(out, cloud.positions[i].x);
        write_f32(out, cloud.positions[i].y);
        write_f32(out, cloud.positions[i].z);
        write_f32(out, 0.0);
        write_f32(out, 0.0);
        write_f32(out, 0.0);
        const Vec3* sh = &cloud.sh_coeffs[i * bc];
        for (int c = 0; c < 3; ++c) write_f32(out, sh[0][c]);
        // Higher-order coefficients are stored channel-major.
        for (int c = 0; c < 3; ++c)
            for (int j = 1; j < bc; ++j) write_f32(out, sh[j][c]);
        write_f32(out, cloud.opacity_logits[i]);
        for (int k = 0; k < 3; ++k) write_f32(out, cloud.log_scales[i][k]);
        for (int k = 0; k < 4; ++k) write_f32(out, cloud.rotations[i][k]);
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

GaussianCloud load_checkpoint(const std::string& path) {
    PlyData ply = read_ply(path);

    int sh_degree = -1;
    for (const std::string& c : ply.comments) {
        std::istringstream cs(c);
        std::string key;
        cs >> key;
        if (key == "format_version") {
            int v = -1;
            cs >> v;
            if (v != kCheckpointVersion)
                throw Error(ErrorCode::VersionMismatch,
                            path + ": checkpoint format version " + std::to_string(v));
        } else if (key == "sh_degree") {
            cs >> sh_degree;
        }
    }

    int rest_count = 0;
    while (ply.find("f_rest_" + std::to_string(rest_count)) >= 0) ++rest_count;
    if (rest_count % 3 != 0)
        throw Error(ErrorCode::ParseError, path + ": f_rest count not divisible by 3");
    int bc_from_rest = rest_count / 3 + 1;
    if (sh_degree < 0) {
        // Infer from the coefficient count.
        int d = 0;
        while ((d + 1) * (d + 1) < bc_from_rest) ++d;
        sh_degree = d;
    }
    int bc = (sh_degree + 1) * (sh_degree + 1);
    if (bc != bc_from_rest)
        throw Error(ErrorCode::ParseError, path + ": sh_degree does not match f_rest count");

    const char* required[] = {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2",
                              "opacity", "scale_0", "scale_1", "scale_2",
                              "rot_0", "rot_1", "rot_2", "rot_3"};
    for (const char* name : required) require_property(ply, path, name, PlyType::Float32);

    GaussianCloud cloud;
    cloud.sh_degree = sh_degree;
    cloud.active_sh_degree = sh_degree;
    cloud.resize(ply.vertex_count);

    auto col = [&](const std::string& name) -> const std::vector<double>& {
        return ply.columns[ply.find(name)];
    };
    const auto& x = col("x");
    const auto& y = col("y");
    const auto& z = col("z");
    std::vector<const std::vector<double>*> dc{&col("f_dc_0"), &col("f_dc_1"), &col("f_dc_2")};
    std::vector<const std::vector<double>*> rest_cols;
    for (int i = 0; i < rest_count; ++i) rest_cols.push_back(&col("f_rest_" + std::to_string(i)));
    const auto& op = col("opacity");
    std::vector<const std::vector<double>*> sc{&col("scale_0"), &col("scale_1"), &col("scale_2")};
    std::vector<const std::vector<double>*> rot{&col("rot_0"), &col("rot_1"), &col("rot_2"),
                                                &col("rot_3")};

    for (std::size_t i = 0; i < ply.vertex_count; ++i) {
        cloud.positions[i] = {x[i], y[i], z[i]};
        Vec3* sh = &cloud.sh_coeffs[i * bc];
        sh[0] = {(*dc[0])[i], (*dc[1])[i], (*dc[2])[i]};
        for (int c = 0; c < 3; ++c)
            for (int j = 1; j < bc; ++j) sh[j][c] = (*rest_cols[c * (bc - 1) + (j - 1)])[i];
        cloud.opacity_logits[i] = op[i];
        cloud.log_scales[i] = {(*sc[0])[i], (*sc[1])[i], (*sc[2])[i]};
        cloud.rotations[i] = {(*rot[0])[i], (*rot[1])[i], (*rot[2])[i], (*rot[3])[i]};
    }
    return cloud;
}

// ---------------------------------------------------------------------------
// Optimizer state

namespace {
constexpr char kStateMagic[8] = {'O', 'S', 'P', 'L', 'A', 'D', 'A', 'M'};
constexpr std::uint32_t kStateVersion = 1;

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
    std::uint64_t n = v.size();
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * 8));
}

std::vector<double> read_doubles(std::ifstream& in, const std::string& path) {
    std::uint64_t n = 0;
    if (!in.read(reinterpret_cast<char*>(&n), 8))
        throw Error(ErrorCode::ParseError, path + ": truncated state file");
    std::vector<double> v(n);
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * 8)))
        throw Error(ErrorCode::ParseError, path + ": truncated state file");
    return v;
}
}  // namespace

void save_optimizer_state(const AdamState& state, long iteration, int basis_count,
                          const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out.write(kStateMagic, 8);
    out.write(reinterpret_cast<const char*>(&kStateVersion), 4);
    std::int64_t iter = iteration, step = state.step;
    std::int32_t bc = basis_count;
    out.write(reinterpret_cast<const char*>(&iter), 8);
    out.write(reinterpret_cast<const char*>(&step), 8);
    out.write(reinterpret_cast<const char*>(&bc), 4);
    for (const auto* v : {&state.m_position, &state.v_position, &state.m_sh, &state.v_sh,
                          &state.m_rotation, &state.v_rotation, &state.m_scale, &state.v_scale,
                          &state.m_opacity, &state.v_opacity})
        write_doubles(out, *v);
}

AdamState load_optimizer_state(const std::string& path, long& iteration, int& basis_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kStateMagic, 8) != 0)
        throw Error(ErrorCode::ParseError, path + ": not an optimizer state file");
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    if (version != kStateVersion)
        throw Error(ErrorCode::VersionMismatch, path + ": state version " + std::to_string(version));
    std::int64_t iter = 0, step = 0;
    std::int32_t bc = 0;
    in.read(reinterpret_cast<char*>(&iter), 8);
    in.read(reinterpret_cast<char*>(&step), 8);
    in.read(reinterpret_cast<char*>(&bc), 4);
    iteration = static_cast<long>(iter);
    basis_count = bc;

    AdamState s;
    s.step = static_cast<long>(step);
    s.m_position = read_doubles(in, path);
    s.v_position = read_doubles(in, path);
    s.m_sh = read_doubles(in, path);
    s.v_sh = read_doubles(in, path);
    s.m_rotation = read_doubles(in, path);
    s.v_rotation = read_doubles(in, path);
    s.m_scale = read_doubles(in, path);
    s.v_scale = read_doubles(in, path);
    s.m_opacity = read_doubles(in, path);
    s.v_opacity = read_doubles(in, path);
    return s;
}

TrainDataset load_dataset(const SceneManifest& manifest) {
    TrainDataset d;
    d.cam = {manifest.width, manifest.height};
    d.poses.reserve(manifest.frames.size());
    for (const auto& f : manifest.frames) d.poses.push_back(f.pose);

    d.images.resize(manifest.frames.size());
    parallel_for(manifest.frames.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            d.images[i] = load_image(manifest.frames[i].image_path);
    });
    for (std::size_t i = 0; i < d.images.size(); ++i) {
        if (d.images[i].width != manifest.width || d.images[i].height != manifest.height)
            throw Error(ErrorCode::ValidationError,
                        "frame " + std::to_string(i) + ": image size does not match the manifest");
    }

    if (manifest.train_split.empty()) {
        for (int i = 0; i < static_cast<int>(manifest.frames.size()); ++i) {
            bool in_test = std::find(manifest.test_split.begin(), manifest.test_split.end(), i) !=
                           manifest.test_split.end();
            if (!in_test) d.train_indices.push_back(i);
        }
    } else {
        d.train_indices = manifest.train_split;
    }
    d.test_indices = manifest.test_split;
    return d;
}

void append_metrics_line(const std::string& path, long iteration, double loss_value,
                         double heldout_psnr, std::size_t gaussian_count) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    json j{{"iteration", iteration},
           {"loss", loss_value},
           {"psnr", heldout_psnr},
           {"gaussians", gaussian_count}};
    out << j.dump() << "\n";
}

void set_train_config_field(TrainConfig& cfg, const std::string& key, const std::string& value) {
    auto as_double = [&] { return std::stod(value); };
    auto as_long = [&] { return std::stol(value); };
    try {
        if (key == "lambda_ssim") cfg.lambda_ssim = as_double();
        else if (key == "iterations") cfg.iterations = as_long();
        else if (key == "densify_until") cfg.densify_until = as_long();
        else if (key == "densify_interval") cfg.densify_interval = as_long();
        else if (key == "opacity_reset_interval") cfg.opacity_reset_interval = as_long();
        else if (key == "densify_grad_threshold") cfg.densify_grad_threshold = as_double();
        else if (key == "scale_split_threshold") cfg.scale_split_threshold = as_double();
        else if (key == "split_factor") cfg.split_factor = as_double();
        else if (key == "prune_opacity") cfg.prune_opacity = as_double();
        else if (key == "prune_scale_world") cfg.prune_scale_world = as_double();
        else if (key == "prune_radius_px") cfg.prune_radius_px = as_double();
        else if (key == "opacity_reset_ceiling") cfg.opacity_reset_ceiling = as_double();
        else if (key == "lr_position_init") cfg.lr_position_init = as_double();
        else if (key == "lr_position_final") cfg.lr_position_final = as_double();
        else if (key == "lr_sh_dc") cfg.lr_sh_dc = as_double();
        else if (key == "lr_sh_rest") cfg.lr_sh_rest = as_double();
        else if (key == "lr_opacity") cfg.lr_opacity = as_double();
        else if (key == "lr_scale") cfg.lr_scale = as_double();
        else if (key == "lr_rotation") cfg.lr_rotation = as_double();
        else if (key == "mask_bottom_fraction") cfg.mask_bottom_fraction = as_double();
        else if (key == "sh_degree") cfg.sh_degree = static_cast<int>(as_long());
        else if (key == "sh_warmup_interval") cfg.sh_warmup_interval = as_long();
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "checkpoint_interval") cfg.checkpoint_interval = as_long();
        else if (key == "log_interval") cfg.log_interval = as_long();
        else throw Error(ErrorCode::ParseError, "unknown config key: " + key);
    } catch (const std::invalid_argument&) {
        throw Error(ErrorCode::ParseError, "config value for " + key + " is not a number: " + value);
    } catch (const std::out_of_range&) {
        throw Error(ErrorCode::ParseError, "config value for " + key + " is out of range: " + value);
    }
}

TrainConfig load_train_config(const std::string& path) {
    json j = parse_json_file(path);
    TrainConfig cfg;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "background") {
            auto bg = it.value().get<std::vector<double>>();
            if (bg.size() != 3)
                throw Error(ErrorCode::ParseError, path + ": background must hold 3 numbers");
            cfg.background = {bg[0], bg[1], bg[2]};
            continue;
        }
        std::string value = it.value().is_string() ? it.value().get<std::string>()
                                                   : it.value().dump();
        set_train_config_field(cfg, it.key(), value);
    }
    cfg.validate();
    return cfg;
}

void save_train_config(const TrainConfig& cfg, const std::string& path) {
    json j{{"lambda_ssim", cfg.lambda_ssim},
           {"iterations", cfg.iterations},
           {"densify_until", cfg.densify_until},
           {"densify_interval", cfg.densify_interval},
           {"opacity_reset_interval", cfg.opacity_reset_interval},
           {"densify_grad_threshold", cfg.densify_grad_threshold},
           {"scale_split_threshold", cfg.scale_split_threshold},
           {"split_factor", cfg.split_factor},
           {"prune_opacity", cfg.prune_opacity},
           {"prune_scale_world", cfg.prune_scale_world},
           {"prune_radius_px", cfg.prune_radius_px},
           {"opacity_reset_ceiling", cfg.opacity_reset_ceiling},
           {"lr_position_init", cfg.lr_position_init},
           {"lr_position_final", cfg.lr_position_final},
           {"lr_sh_dc", cfg.lr_sh_dc},
           {"lr_sh_rest", cfg.lr_sh_rest},
           {"lr_opacity", cfg.lr_opacity},
           {"lr_scale", cfg.lr_scale},
           {"lr_rotation", cfg.lr_rotation},
           {"mask_bottom_fraction", cfg.mask_bottom_fraction},
           {"sh_degree", cfg.sh_degree},
           {"sh_warmup_interval", cfg.sh_warmup_interval},
           {"seed", cfg.seed},
           {"checkpoint_interval", cfg.checkpoint_interval},
           {"log_interval", cfg.log_interval},
           {"background", {cfg.background.x, cfg.background.y, cfg.background.z}}};
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace omnisplat
