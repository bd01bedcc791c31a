// Runs the acceptance criteria and prints one verdict line per criterion.
// Exit status is the number of failures, capped so it stays a valid code.

#include <algorithm>
#include <iostream>
#include <string>

#include "gpsq/validation.hpp"

int main(int argc, char** argv) {
    std::string selector = argc > 1 ? argv[1] : "all";
    try {
        auto results = gpsq::validate_suite(selector);
        int fails = gpsq::print_criteria(std::cout, results);
        std::cout << (results.size() - (std::size_t)fails) << " of "
                  << results.size() << " criteria passed\n";
        return std::min(fails, 125);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 126;
    }
}
