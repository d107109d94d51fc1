#include "isomer/meshio.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace isomer {

namespace {

std::string lower_ext(const std::string& path) {
  auto pos = path.find_last_of('.');
  if (pos == std::string::npos) return "";
  std::string ext = path.substr(pos + 1);
  for (auto& c : ext) c = char(std::tolower(c));
  return ext;
}

uint8_t to_byte(double v) {
  double s = std::lround(v * 255.0);
  return uint8_t(s < 0 ? 0 : (s > 255 ? 255 : s));
}

TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  TriMesh mesh;
  bool any_color = false;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      ls >> x >> y >> z;
      mesh.vertices.push_back({x, y, z});
      double r, g, b;
      if (ls >> r >> g >> b) {
        any_color = true;
        mesh.colors.push_back({r, g, b});
      } else {
        mesh.colors.push_back({0, 0, 0});
      }
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // "i", "i/t", "i/t/n", "i//n" forms; only the vertex index is used.
        idx.push_back(std::stoi(tok.substr(0, tok.find('/'))) - 1);
      }
      for (size_t k = 2; k < idx.size(); ++k)
        mesh.faces.push_back({idx[0], int(idx[k - 1]), int(idx[k])});
    }
  }
  if (!any_color) mesh.colors.clear();
  return mesh;
}

void save_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  out.precision(10);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Vec3& p = mesh.vertices[v];
    out << "v " << p.x << ' ' << p.y << ' ' << p.z;
    if (mesh.has_colors()) {
      const Vec3& c = mesh.colors[v];
      out << ' ' << c.x << ' ' << c.y << ' ' << c.z;
    }
    out << '\n';
  }
  for (const auto& t : mesh.faces)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct PlyProperty {
  std::string type;
  std::string name;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  size_t count = 0;
  std::vector<PlyProperty> properties;
};

size_t scalar_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
      t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw std::runtime_error("unsupported PLY scalar type: " + t);
}

double read_binary_scalar(std::istream& in, const std::string& t) {
  unsigned char buf[8];
  size_t n = scalar_size(t);
  in.read(reinterpret_cast<char*>(buf), std::streamsize(n));
  auto as = [&](auto v) {
    std::memcpy(&v, buf, sizeof v);
    return double(v);
  };
  if (t == "char" || t == "int8") return as(int8_t{});
  if (t == "uchar" || t == "uint8") return as(uint8_t{});
  if (t == "short" || t == "int16") return as(int16_t{});
  if (t == "ushort" || t == "uint16") return as(uint16_t{});
  if (t == "int" || t == "int32") return as(int32_t{});
  if (t == "uint" || t == "uint32") return as(uint32_t{});
  if (t == "float" || t == "float32") return as(float{});
  return as(double{});
}

TriMesh load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw std::runtime_error("not a PLY file: " + path);

  enum class Format { ascii, binary_le } format = Format::ascii;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "comment") continue;
    if (tag == "format") {
      std::string f;
      ls >> f;
      if (f == "ascii") format = Format::ascii;
      else if (f == "binary_little_endian") format = Format::binary_le;
      else throw std::runtime_error("unsupported PLY format in " + path);
    } else if (tag == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (tag == "property") {
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.type >> p.name;
      } else {
        p.type = t;
        ls >> p.name;
      }
      if (elements.empty()) throw std::runtime_error("malformed PLY header: " + path);
      elements.back().properties.push_back(p);
    } else if (tag == "end_header") {
      break;
    }
  }

  TriMesh mesh;
  bool has_color = false;
  for (const auto& elem : elements) {
    if (elem.name == "vertex") {
      for (const auto& p : elem.properties)
        if (p.name == "red") has_color = true;
      mesh.vertices.reserve(elem.count);
      for (size_t i = 0; i < elem.count; ++i) {
        Vec3 pos, col;
        std::istringstream als;
        if (format == Format::ascii) {
          std::getline(in, line);
          als.str(line);
        }
        for (const auto& p : elem.properties) {
          double v = 0;
          if (format == Format::ascii) als >> v;
          else v = read_binary_scalar(in, p.type);
          bool is_byte = scalar_size(p.type) == 1;
          if (p.name == "x") pos.x = v;
          else if (p.name == "y") pos.y = v;
          else if (p.name == "z") pos.z = v;
          else if (p.name == "red") col.x = is_byte ? v / 255.0 : v;
          else if (p.name == "green") col.y = is_byte ? v / 255.0 : v;
          else if (p.name == "blue") col.z = is_byte ? v / 255.0 : v;
        }
        mesh.vertices.push_back(pos);
        if (has_color) mesh.colors.push_back(col);
      }
    } else if (elem.name == "face") {
      mesh.faces.reserve(elem.count);
      for (size_t i = 0; i < elem.count; ++i) {
        std::vector<int> idx;
        if (format == Format::ascii) {
          std::getline(in, line);
          std::istringstream ls(line);
          int n;
          ls >> n;
          idx.resize(n);
          for (int k = 0; k < n; ++k) ls >> idx[k];
        } else {
          const auto& lp = elem.properties.at(0);
          int n = int(read_binary_scalar(in, lp.count_type));
          idx.resize(n);
          for (int k = 0; k < n; ++k) idx[k] = int(read_binary_scalar(in, lp.type));
        }
        for (size_t k = 2; k < idx.size(); ++k)
          mesh.faces.push_back({idx[0], idx[k - 1], idx[k]});
      }
    } else {
      // Skip unknown elements (binary skipping requires fixed-size rows).
      for (size_t i = 0; i < elem.count; ++i) {
        if (format == Format::ascii) {
          std::getline(in, line);
        } else {
          size_t row = 0;
          for (const auto& p : elem.properties) {
            if (p.is_list) throw std::runtime_error("unsupported PLY layout: " + path);
            row += scalar_size(p.type);
          }
          in.seekg(std::streamoff(row), std::ios::cur);
        }
      }
    }
  }
  if (!in) throw std::runtime_error("truncated PLY file: " + path);
  return mesh;
}

void save_ply(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << mesh.vertex_count() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (mesh.has_colors())
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "element face " << mesh.face_count() << "\n";
  out << "property list uchar int vertex_indices\n";
  out << "end_header\n";
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    float p[3] = {float(mesh.vertices[v].x), float(mesh.vertices[v].y),
                  float(mesh.vertices[v].z)};
    out.write(reinterpret_cast<const char*>(p), sizeof p);
    if (mesh.has_colors()) {
      uint8_t c[3] = {to_byte(mesh.colors[v].x), to_byte(mesh.colors[v].y),
                      to_byte(mesh.colors[v].z)};
      out.write(reinterpret_cast<const char*>(c), sizeof c);
    }
  }
  for (const auto& t : mesh.faces) {
    uint8_t n = 3;
    out.write(reinterpret_cast<const char*>(&n), 1);
    int32_t idx[3] = {t[0], t[1], t[2]};
    out.write(reinterpret_cast<const char*>(idx), sizeof idx);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

TriMesh load_mesh(const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == "obj") return load_obj(path);
  if (ext == "ply") return load_ply(path);
  throw std::runtime_error("unsupported mesh format: " + path);
}

void save_mesh(const TriMesh& mesh, const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == "obj") save_obj(mesh, path);
  else if (ext == "ply") save_ply(mesh, path);
  else throw std::runtime_error("unsupported mesh format: " + path);
}

}  // namespace isomer
