#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "odmap/core_map.hpp"
#include "odmap/dirichlet_lab.hpp"
#include "odmap/flows.hpp"
#include "odmap/generators.hpp"
#include "odmap/packing.hpp"

namespace odmap {

using Json = nlohmann::json;

inline constexpr const char* kFormat = "odmap/1";

// Throws StructuralError on a "format" other than odmap/1 or a "kind" other than the expected one.
// Documents without a format field are accepted.
void check_header(const Json& j, const std::string& kind);

Json to_json(const OrthodiagonalMap& map);
OrthodiagonalMap map_from_json(const Json& j);

Json to_json(const ValidationReport& r);

// Flow values keyed by the id of the face carrying each primal edge.
Json to_json(const OrthodiagonalMap& map, const FlowReport& r);

Json to_json(const Triangulation& t);
Triangulation triangulation_from_json(const Json& j);

Json to_json(const PlanarMap3C& h, int outer_face = -1);
// Outer face index from "outer_face", -1 when absent.
PlanarMap3C planar_map_from_json(const Json& j, int* outer_face = nullptr);

Json to_json(const Triangulation& t, const CirclePacking& p);
Json to_json(const PlanarMap3C& h, const DoubleCirclePacking& p);
Json to_json(const DiskCertificate& c);

// {"ids": [...], "values": [...]}, ids of the map vertices behind each network vertex.
Json vertex_function_json(const OrthodiagonalMap& map, const MapNetwork& mn, const VertexFunction& f);

Json to_json(const SweepRecord& r);
Json to_json(const std::vector<SweepRecord>& records);

// "square" | "disk" | "rectangle:x0,y0,x1,y1" | "polygon:x,y;x,y;..." | "disk:cx,cy,r"
Domain domain_from_string(const std::string& s);
Json to_json(const Domain& d);
Domain domain_from_json(const Json& j);

Json to_json(const GeneratorSpec& s);
GeneratorSpec generator_spec_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
void write_json_file(const std::string& path, const Json& j);

}  // namespace odmap
