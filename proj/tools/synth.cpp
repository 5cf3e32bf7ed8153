// usr-synth: writes a synthetic table for trying out the pipeline.
//
//   usr-synth --rows 1000 --inputs 10 --seed 7 > synthetic.csv
//   usr-synth --rows 1000 --out synthetic.csv
//
// Inputs x1..xN are uniform noise on [0, 1); y = 3*x1 + 2*x2.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "usr/infix.hpp"
#include "usr/random.hpp"

int main(int argc, char** argv)
{
    CLI::App app { "Synthetic regression table: y = 3*x1 + 2*x2 plus uniform decoy inputs" };
    std::size_t rows = 1000;
    std::size_t inputs = 10;
    std::uint64_t seed = 1;
    app.add_option("--rows", rows, "Number of rows")->check(CLI::PositiveNumber);
    app.add_option("--inputs", inputs, "Number of input columns (at least 2)")->check(CLI::Range(2, 1000));
    app.add_option("--seed", seed, "Random seed");
    std::string out_path;
    app.add_option("--out", out_path, "Output file (default: stdout)");
    CLI11_PARSE(app, argc, argv);

    std::ofstream file;
    if (!out_path.empty()) {
        const std::filesystem::path p(out_path);
        if (p.has_parent_path()) {
            std::filesystem::create_directories(p.parent_path());
        }
        file.open(p);
        if (!file) {
            std::cerr << "error: cannot write '" << out_path << "'\n";
            return 1;
        }
    }
    std::ostream& out = out_path.empty() ? std::cout : file;

    usr::Rng rng(seed);
    for (std::size_t i = 1; i <= inputs; ++i) {
        out << "x" << i << ",";
    }
    out << "y\n";
    std::vector<double> x(inputs);
    for (std::size_t r = 0; r < rows; ++r) {
        for (auto& v : x) {
            v = rng.unit();
            out << usr::format_real(v) << ",";
        }
        out << usr::format_real(3.0 * x[0] + 2.0 * x[1]) << "\n";
    }
    return 0;
}
