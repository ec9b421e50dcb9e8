#include "surfsd/cli/output.hpp"

#include "surfsd/error.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <map>
#include <memory>
#include <utility>

namespace surfsd::cli {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_for_writing(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    File f(std::fopen(path.string().c_str(), "w"));
    if (!f) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return f;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<CsvRow>& rows) {
    File f = open_for_writing(path);
    fmt::print(f.get(), "{}\n", fmt::join(header, ","));
    for (const CsvRow& row : rows) {
        fmt::print(f.get(), "{}\n", fmt::join(row, ","));
    }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    File f = open_for_writing(path);
    std::fwrite(text.data(), 1, text.size(), f.get());
}

void write_surface_vtk(const std::filesystem::path& path, const Discretization& disc, const Vector& u_h,
                       std::string_view title) {
    if (u_h.size() < disc.num_dofs()) {
        throw Error(ErrorCode::InvalidArgument, "solution vector shorter than the DOF count");
    }
    std::map<std::pair<int, int>, int> vertex_of_edge;
    std::vector<Vec3> points;
    std::vector<double> values;
    std::vector<std::vector<int>> polys;
    for (int e = 0; e < disc.active.num_elements(); ++e) {
        const CutPolygon& poly = disc.cuts.polygons[e];
        const auto& tet = disc.mesh.tets[disc.active.tet_ids[e]];
        const auto& dofs = disc.active.elem_dofs[e];
        std::vector<int> ids;
        for (int k = 0; k < poly.num_vertices; ++k) {
            const int a = poly.vertex_edges[k][0];
            const int b = poly.vertex_edges[k][1];
            const std::pair<int, int> key = std::minmax(tet[a], tet[b]);
            auto [it, inserted] = vertex_of_edge.try_emplace(key, static_cast<int>(points.size()));
            if (inserted) {
                const double fa = disc.level_set[tet[a]];
                const double fb = disc.level_set[tet[b]];
                const double t = fa / (fa - fb);
                points.push_back(poly.vertices[k]);
                values.push_back((1.0 - t) * u_h[dofs[a]] + t * u_h[dofs[b]]);
            }
            ids.push_back(it->second);
        }
        polys.push_back(std::move(ids));
    }

    std::size_t list_size = 0;
    for (const auto& p : polys) {
        list_size += p.size() + 1;
    }
    File f = open_for_writing(path);
    fmt::print(f.get(), "# vtk DataFile Version 3.0\n{}\nASCII\nDATASET POLYDATA\n", title);
    fmt::print(f.get(), "POINTS {} double\n", points.size());
    for (const Vec3& p : points) {
        fmt::print(f.get(), "{:.17g} {:.17g} {:.17g}\n", p.x(), p.y(), p.z());
    }
    fmt::print(f.get(), "POLYGONS {} {}\n", polys.size(), list_size);
    for (const auto& p : polys) {
        fmt::print(f.get(), "{} {}\n", p.size(), fmt::join(p, " "));
    }
    fmt::print(f.get(), "POINT_DATA {}\nSCALARS u double 1\nLOOKUP_TABLE default\n", points.size());
    for (double v : values) {
        fmt::print(f.get(), "{:.17g}\n", v);
    }
}

}  // namespace surfsd::cli
