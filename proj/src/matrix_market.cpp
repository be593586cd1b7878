#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "pselinv/errors.hpp"
#include "pselinv/sparse_matrix.hpp"

namespace pselinv {

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

}  // namespace

SparseMatrix read_matrix_market(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));

    std::string line;
    if (!std::getline(in, line)) throw InputError("empty Matrix Market file");

    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket" || lower(object) != "matrix")
        throw InputError(fmt::format("malformed Matrix Market banner: '{}'", line));
    if (lower(format) != "coordinate")
        throw InputError("only coordinate Matrix Market files are supported");
    field = lower(field);
    symmetry = lower(symmetry);
    const bool pattern = field == "pattern";
    if (!pattern && field != "real" && field != "integer")
        throw InputError(fmt::format("unsupported Matrix Market field '{}'", field));
    if (symmetry != "general" && symmetry != "symmetric")
        throw InputError(fmt::format("unsupported Matrix Market symmetry '{}'", symmetry));
    const bool symmetric = symmetry == "symmetric";

    do {
        if (!std::getline(in, line)) throw InputError("missing Matrix Market size line");
    } while (line.empty() || line[0] == '%');

    long long rows = 0, cols = 0, entries = 0;
    {
        std::istringstream size(line);
        if (!(size >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0)
            throw InputError(fmt::format("malformed size line: '{}'", line));
    }
    if (rows != cols) throw InputError(fmt::format("matrix is not square ({}x{})", rows, cols));

    std::vector<Index> r, c;
    std::vector<double> v;
    r.reserve(entries * (symmetric ? 2 : 1));
    long long seen = 0;
    while (seen < entries && std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream entry(line);
        long long i = 0, j = 0;
        double x = 1.0;
        if (!(entry >> i >> j) || (!pattern && !(entry >> x)))
            throw InputError(fmt::format("malformed entry line: '{}'", line));
        if (i < 1 || i > rows || j < 1 || j > cols)
            throw InputError(fmt::format("entry ({}, {}) out of range", i, j));
        r.push_back(i - 1), c.push_back(j - 1), v.push_back(x);
        if (symmetric && i != j) r.push_back(j - 1), c.push_back(i - 1), v.push_back(x);
        ++seen;
    }
    if (seen != entries)
        throw InputError(fmt::format("expected {} entries, found {}", entries, seen));

    return SparseMatrix::from_triplets(rows, r, c, v);
}

void write_matrix_market(const SparseMatrix& A, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.n() << ' ' << A.n() << ' ' << A.nnz() << '\n';
    out.precision(std::numeric_limits<double>::max_digits10);
    for (Index j = 0; j < A.n(); ++j) {
        auto rows = A.column_rows(j);
        auto vals = A.column_values(j);
        for (std::size_t p = 0; p < rows.size(); ++p)
            out << rows[p] + 1 << ' ' << j + 1 << ' ' << vals[p] << '\n';
    }
    if (!out) throw InputError(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace pselinv
