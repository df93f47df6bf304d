#include "dsa/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "dsa/error.hpp"

namespace dsa::nn {

namespace {

void write_row(std::ostream& out, const double* data, Eigen::Index n, Eigen::Index stride) {
    char buf[32];
    for (Eigen::Index i = 0; i < n; ++i) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), data[i * stride],
                                       std::chars_format::general, 17);
        if (ec != std::errc{}) throw IoError("failed to format checkpoint value");
        if (i) out << ' ';
        out.write(buf, end - buf);
    }
    out << '\n';
}

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
    std::vector<double> values;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
        while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
        if (p == end) break;
        double v = 0.0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc{})
            throw ParseError("checkpoint line " + std::to_string(line_no) + ": bad number");
        values.push_back(v);
        p = next;
    }
    return values;
}

} // namespace

void write_checkpoint(std::ostream& out, const MlpParams& params) {
    out << kCheckpointHeader << '\n';
    const auto dims = params.dims();
    for (std::size_t i = 0; i < dims.size(); ++i) out << (i ? " " : "") << dims[i];
    out << '\n';
    for (const auto& layer : params.layers) {
        const auto& w = layer.weights;
        for (Eigen::Index r = 0; r < w.rows(); ++r) write_row(out, &w(r, 0), w.cols(), w.rows());
        write_row(out, layer.bias.data(), layer.bias.size(), 1);
    }
}

MlpParams read_checkpoint(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> const std::string& {
        if (!std::getline(in, line))
            throw ParseError("checkpoint truncated after line " + std::to_string(line_no));
        ++line_no;
        return line;
    };
    if (next_line() != kCheckpointHeader) throw ParseError("checkpoint line 1: unexpected header");

    std::vector<std::size_t> dims;
    for (double d : parse_row(next_line(), line_no)) {
        if (d < 1 || d != static_cast<double>(static_cast<std::size_t>(d)))
            throw ParseError("checkpoint line 2: invalid layer dimension");
        dims.push_back(static_cast<std::size_t>(d));
    }
    if (dims.size() < 2) throw ParseError("checkpoint line 2: need at least two dims");

    MlpParams params;
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        const auto rows = static_cast<Eigen::Index>(dims[k + 1]);
        const auto cols = static_cast<Eigen::Index>(dims[k]);
        Layer layer{Matrix(rows, cols), Vector(rows)};
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto row = parse_row(next_line(), line_no);
            if (static_cast<Eigen::Index>(row.size()) != cols)
                throw ParseError("checkpoint line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(cols) + " values");
            for (Eigen::Index c = 0; c < cols; ++c) layer.weights(r, c) = row[static_cast<std::size_t>(c)];
        }
        const auto bias = parse_row(next_line(), line_no);
        if (static_cast<Eigen::Index>(bias.size()) != rows)
            throw ParseError("checkpoint line " + std::to_string(line_no) + ": bad bias length");
        for (Eigen::Index r = 0; r < rows; ++r) layer.bias(r) = bias[static_cast<std::size_t>(r)];
        params.layers.push_back(std::move(layer));
    }
    return params;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void save_checkpoint(const std::filesystem::path& path, const MlpParams& params) {
    std::ostringstream out;
    write_checkpoint(out, params);
    write_file_atomic(path, out.str());
}

MlpParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

} // namespace dsa::nn
