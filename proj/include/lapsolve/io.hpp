#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "graph.hpp"

namespace lapsolve {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "n m" header then m lines "u v w", 0-based. '#' starts a comment line.
inline WeightedMultiGraph read_edge_list(std::istream& in) {
    std::string line;
    long long n = -1, m = -1;
    std::vector<Edge> es;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto p = line.find_first_not_of(" \t\r");
        if (p == std::string::npos || line[p] == '#') continue;
        std::istringstream ss(line);
        if (n < 0) {
            if (!(ss >> n >> m) || n < 0 || m < 0) throw ParseError("bad header at line " + std::to_string(lineno));
            es.reserve(static_cast<std::size_t>(m));
            continue;
        }
        long long u, v;
        double w = 1.0;
        if (!(ss >> u >> v)) throw ParseError("bad edge at line " + std::to_string(lineno));
        if (!(ss >> w)) w = 1.0;
        if (u < 0 || v < 0 || u >= n || v >= n) throw ParseError("endpoint out of range at line " + std::to_string(lineno));
        if (!(w > 0.0) || !std::isfinite(w)) throw ParseError("non-positive weight at line " + std::to_string(lineno));
        es.push_back({static_cast<int>(u), static_cast<int>(v), w});
    }
    if (n < 0) throw ParseError("missing header");
    if (static_cast<long long>(es.size()) != m) throw ParseError("edge count does not match header");
    return WeightedMultiGraph(static_cast<int>(n), std::move(es));
}

// Symmetric coordinate Matrix Market; each off-diagonal entry -w becomes an
// edge of weight w. Diagonal entries are ignored, positive off-diagonals rejected.
inline WeightedMultiGraph read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0) throw ParseError("missing MatrixMarket banner");
    bool symmetric = line.find("symmetric") != std::string::npos;
    bool pattern = line.find("pattern") != std::string::npos;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '%') break;
    std::istringstream hs(line);
    long long rows, cols, nnz;
    if (!(hs >> rows >> cols >> nnz) || rows != cols) throw ParseError("bad size line");
    std::vector<Edge> es;
    for (long long i = 0; i < nnz; ++i) {
        if (!std::getline(in, line)) throw ParseError("truncated entry list");
        if (line.empty() || line[0] == '%') {
            --i;
            continue;
        }
        std::istringstream ss(line);
        long long r, c;
        double val = -1.0;
        if (!(ss >> r >> c)) throw ParseError("bad entry");
        if (!pattern && !(ss >> val)) throw ParseError("bad entry value");
        if (r < 1 || c < 1 || r > rows || c > cols) throw ParseError("entry index out of range");
        if (r == c) continue;
        if (!symmetric && r < c) continue;  // general storage lists both triangles
        if (!(val < 0.0)) throw ParseError("off-diagonal entry is not negative");
        es.push_back({static_cast<int>(r - 1), static_cast<int>(c - 1), -val});
    }
    return WeightedMultiGraph(static_cast<int>(rows), std::move(es));
}

inline WeightedMultiGraph read_graph_file(const std::string& path, const std::string& format = "edgelist") {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    if (format == "mtx") return read_matrix_market(in);
    if (format == "edgelist") return read_edge_list(in);
    throw ParseError("unknown format " + format);
}

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_edge_list(std::ostream& out, const WeightedMultiGraph& g) {
    out << g.num_vertices() << ' ' << g.num_edges() << '\n';
    for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << ' ' << format_double(e.w) << '\n';
}

// Laplacian off-diagonals only, lower triangle; parallel edges stay separate entries.
inline void write_matrix_market(std::ostream& out, const WeightedMultiGraph& g) {
    long long nnz = 0;
    for (const Edge& e : g.edges()) nnz += e.u != e.v;
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << g.num_vertices() << ' ' << g.num_vertices() << ' ' << nnz << '\n';
    for (const Edge& e : g.edges())
        if (e.u != e.v) out << std::max(e.u, e.v) + 1 << ' ' << std::min(e.u, e.v) + 1 << ' ' << format_double(-e.w) << '\n';
}

inline void write_graph_file(const std::string& path, const WeightedMultiGraph& g, const std::string& format = "edgelist") {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    if (format == "mtx") {
        write_matrix_market(out, g);
    } else if (format == "edgelist") {
        write_edge_list(out, g);
    } else {
        throw ParseError("unknown format " + format);
    }
}

inline std::vector<double> read_vector(std::istream& in) {
    std::vector<double> x;
    std::string line;
    while (std::getline(in, line)) {
        auto p = line.find_first_not_of(" \t\r");
        if (p == std::string::npos || line[p] == '#') continue;
        std::istringstream ss(line);
        double v;
        if (!(ss >> v)) throw ParseError("bad vector entry: " + line);
        x.push_back(v);
    }
    return x;
}

inline void write_vector(std::ostream& out, const std::vector<double>& x) {
    for (double v : x) out << format_double(v) << '\n';
}

}  // namespace lapsolve
