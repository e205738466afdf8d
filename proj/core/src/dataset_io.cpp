#include "colocal/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace colocal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kFeatureMagic[4] = {'C', 'L', 'F', '1'};

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::string read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void validate_box(const BBox& box, int width, int height,
                  const std::string& context) {
  if (!box.valid())
    throw ValidationError(context + ": degenerate box (" +
                          std::to_string(box.x_min) + "," +
                          std::to_string(box.y_min) + "," +
                          std::to_string(box.x_max) + "," +
                          std::to_string(box.y_max) + ")");
  if (width > 0 && (box.x_max > width || box.y_max > height))
    throw ValidationError(context + ": box exceeds image bounds " +
                          std::to_string(width) + "x" + std::to_string(height));
}

}  // namespace

FeatureMatrix load_features(const fs::path& path) {
  std::string buf = read_binary(path);
  if (buf.size() < 12 || std::memcmp(buf.data(), kFeatureMagic, 4) != 0)
    throw IoError("bad feature file magic (want CLF1): " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  FeatureMatrix m;
  m.rows = read_u32_le(p + 4);
  m.dim = read_u32_le(p + 8);
  std::size_t need = 12 + m.rows * m.dim * 4;
  if (buf.size() < need)
    throw IoError("truncated feature payload in " + path.string() + ": have " +
                  std::to_string(buf.size()) + " bytes, need " +
                  std::to_string(need));
  m.data.resize(m.rows * m.dim);
  std::memcpy(m.data.data(), buf.data() + 12, m.rows * m.dim * 4);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    if (!std::isfinite(m.data[i]))
      throw ValidationError("non-finite feature value in " + path.string() +
                            " at row " + std::to_string(i / m.dim) +
                            ", column " + std::to_string(i % m.dim));
  }
  return m;
}

void save_features(const fs::path& path, const FeatureMatrix& m) {
  std::string out;
  out.reserve(12 + m.data.size() * 4);
  out.append(kFeatureMagic, 4);
  append_u32_le(out, static_cast<std::uint32_t>(m.rows));
  append_u32_le(out, static_cast<std::uint32_t>(m.dim));
  for (float v : m.data) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    append_u32_le(out, bits);
  }
  atomic_write_file(path, out);
}

ProposalSet load_proposals(const fs::path& path, int max_proposals) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  ProposalSet props;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Proposal p;
    if (!(ls >> p.box.x_min >> p.box.y_min >> p.box.x_max >> p.box.y_max >>
          p.objectness))
      throw IoError("malformed proposal at " + path.string() + ":" +
                    std::to_string(lineno));
    validate_box(p.box, 0, 0, path.string() + ":" + std::to_string(lineno));
    if (!std::isfinite(p.objectness) || p.objectness < 0.0 || p.objectness > 1.0)
      throw ValidationError("objectness outside [0,1] at " + path.string() +
                            ":" + std::to_string(lineno));
    props.push_back(p);
  }
  if (props.empty()) throw ValidationError("empty proposal file: " + path.string());
  if (max_proposals > 0 && static_cast<int>(props.size()) > max_proposals)
    props.resize(static_cast<std::size_t>(max_proposals));
  return props;
}

void save_proposals(const fs::path& path, const ProposalSet& props) {
  std::string out;
  for (const Proposal& p : props) {
    out += std::to_string(p.box.x_min) + " " + std::to_string(p.box.y_min) +
           " " + std::to_string(p.box.x_max) + " " +
           std::to_string(p.box.y_max) + " " + format_double(p.objectness) +
           "\n";
  }
  atomic_write_file(path, out);
}

DatasetManifest load_manifest(const fs::path& path, int max_proposals) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("invalid manifest JSON in " + path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array())
    throw IoError("manifest missing \"images\" array: " + path.string());

  const fs::path base = path.parent_path();
  DatasetManifest ds;
  std::set<std::string> seen_ids;

  for (const json& rec : doc["images"]) {
    ImageRecord img;
    try {
      img.id = rec.at("id").get<std::string>();
      img.width = rec.at("width").get<int>();
      img.height = rec.at("height").get<int>();
    } catch (const json::exception& e) {
      throw IoError("malformed image record in " + path.string() + ": " +
                    e.what());
    }
    if (img.width <= 0 || img.height <= 0)
      throw ValidationError("image " + img.id + ": non-positive dimensions");
    if (!seen_ids.insert(img.id).second)
      throw ValidationError("duplicate image id: " + img.id);

    const fs::path prop_path = base / rec.at("proposals").get<std::string>();
    const fs::path feat_path = base / rec.at("features").get<std::string>();
    img.proposals = load_proposals(prop_path, 0);
    img.features = load_features(feat_path);

    if (img.features.rows != img.proposals.size())
      throw ValidationError(
          "image " + img.id + ": proposal/feature count mismatch (" +
          std::to_string(img.proposals.size()) + " proposals vs " +
          std::to_string(img.features.rows) + " feature rows)");

    for (std::size_t j = 0; j < img.proposals.size(); ++j)
      validate_box(img.proposals[j].box, img.width, img.height,
                   "image " + img.id + " proposal " + std::to_string(j));

    if (max_proposals > 0 &&
        static_cast<int>(img.proposals.size()) > max_proposals) {
      img.proposals.resize(static_cast<std::size_t>(max_proposals));
      img.features.rows = static_cast<std::size_t>(max_proposals);
      img.features.data.resize(img.features.rows * img.features.dim);
    }

    if (rec.contains("raster")) {
      const fs::path raster_path = base / rec["raster"].get<std::string>();
      RgbImage raster = read_raster(raster_path);
      if (raster.width != img.width || raster.height != img.height)
        throw ValidationError(
            "image " + img.id + ": raster is " + std::to_string(raster.width) +
            "x" + std::to_string(raster.height) + ", manifest declares " +
            std::to_string(img.width) + "x" + std::to_string(img.height));
      img.raster = std::move(raster);
    }

    if (rec.contains("ground_truth")) {
      for (const json& g : rec["ground_truth"]) {
        if (!g.is_array() || g.size() != 4)
          throw IoError("image " + img.id + ": ground_truth entries must be "
                        "[x_min, y_min, x_max, y_max]");
        BBox box{g[0].get<int>(), g[1].get<int>(), g[2].get<int>(),
                 g[3].get<int>()};
        validate_box(box, img.width, img.height,
                     "image " + img.id + " ground truth");
        img.ground_truth.push_back(box);
      }
    }

    ds.images.push_back(std::move(img));
  }

  if (ds.images.empty())
    throw ValidationError("manifest lists no images: " + path.string());
  return ds;
}

void save_manifest(const fs::path& path, const DatasetManifest& ds) {
  json images = json::array();
  for (const ImageRecord& img : ds.images) {
    json rec;
    rec["id"] = img.id;
    rec["width"] = img.width;
    rec["height"] = img.height;
    rec["proposals"] = img.id + ".props";
    rec["features"] = img.id + ".clf";
    if (img.raster) rec["raster"] = img.id + ".ppm";
    if (!img.ground_truth.empty()) {
      json gts = json::array();
      for (const BBox& b : img.ground_truth)
        gts.push_back({b.x_min, b.y_min, b.x_max, b.y_max});
      rec["ground_truth"] = gts;
    }
    images.push_back(rec);
  }
  json doc;
  doc["version"] = 1;
  doc["images"] = images;
  atomic_write_file(path, doc.dump(2) + "\n");
}

}  // namespace colocal
