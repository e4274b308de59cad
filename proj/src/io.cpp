#include "zql/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "zql/errors.hpp"

namespace zql {

std::string result_to_csv(const VisCollection& coll, const ValidatedQuery& vq) {
    std::ostringstream os;
    // header: one column per axis component with a name, then x and y
    os << "x_attr,y_attr";
    for (const auto& axis : coll.axes) {
        if (axis.group < 0) {
            os << ",position";
            continue;
        }
        const VarGroup& g = vq.groups[axis.group];
        for (std::size_t c = 0; c < g.components.size(); ++c) {
            if (c < g.vars.size() && !g.vars[c].empty()) {
                os << "," << g.vars[c];
                continue;
            }
            switch (g.components[c].role) {
                case CompRole::XAttr: os << ",x_axis"; break;
                case CompRole::YAttr: os << ",y_axis"; break;
                case CompRole::ZAttr: os << ",attribute"; break;
                case CompRole::ZValue:
                    os << "," << (g.components[c].attr.empty() ? "value" : g.components[c].attr);
                    break;
            }
        }
    }
    os << ",x,y\n";

    std::vector<std::size_t> pos(coll.axes.size(), 0);
    for (std::size_t flat = 0; flat < coll.cells.size(); ++flat) {
        std::size_t rem = flat;
        for (std::size_t ai = coll.axes.size(); ai-- > 0;) {
            const std::size_t n = std::max<std::size_t>(1, coll.axes[ai].tuples.size());
            pos[ai] = rem % n;
            rem /= n;
        }
        const UnitViz& cell = coll.cells[flat];
        std::string prefix;
        {
            std::ostringstream ps;
            ps << cell.x_attr << "," << cell.y_attr;
            for (std::size_t ai = 0; ai < coll.axes.size(); ++ai) {
                if (coll.axes[ai].tuples.empty()) continue;
                for (const Value& v : coll.axes[ai].tuples[pos[ai]])
                    ps << "," << value_to_string(v);
            }
            prefix = ps.str();
        }
        if (cell.is_bin2d) {
            for (const auto& [xb, yb, count] : cell.bins2d)
                os << prefix << "," << value_to_string(Value{xb}) << ","
                   << value_to_string(Value{yb}) << "," << value_to_string(Value{count}) << "\n";
        } else {
            for (const auto& [x, y] : cell.series)
                os << prefix << "," << value_to_string(x) << "," << value_to_string(Value{y})
                   << "\n";
        }
    }
    return os.str();
}

std::vector<std::string> write_results(const ResultSet& results, const ValidatedQuery& vq,
                                       const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    for (const auto& [name, coll] : results.outputs) {
        const std::string path = dir + "/" + name + ".csv";
        write_text_file(path, result_to_csv(coll, vq));
        written.push_back(path);
    }
    return written;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ZqlError(ErrorStage::Io, ErrorKind::ParseError, "cannot write file: " + path);
    out << content;
}

}  // namespace zql
