#include <codegraph/service/cli.hpp>

#include <iostream>

int main(int argc, char** argv) {
    return codegraph::service::run_cli(argc, argv, std::cin, std::cout, std::cerr);
}
